//! Placement of network layers onto the tiles and DPUs of the mesh.

mod arch;

pub use arch::{ArchDescription, Node, NodeKind};

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dnn::{LayerKind, NetworkGraph};
use crate::error::{Error, Result};

/// A rectangle of tile cells holding a contiguous run of a layer's
/// (lowered, possibly interleaved) columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileBlock {
    pub tile: usize,
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
    /// Footprint columns stored in this block.
    pub layer_cols: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    Analog { blocks: Vec<TileBlock> },
    Digital { dpu: usize },
}

/// Where one weighted layer runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerMapping {
    /// Index into the graph's layers.
    pub layer: usize,
    pub placement: Placement,
    /// Node running this layer's post-processing: a DPU, or one of the layer's own tiles.
    pub aux: usize,
    /// Output positions produced per token (convolutions ahead of a stride).
    pub positions: usize,
}

impl LayerMapping {
    pub fn is_analog(&self) -> bool {
        matches!(self.placement, Placement::Analog { .. })
    }

    pub fn blocks(&self) -> &[TileBlock] {
        match &self.placement {
            Placement::Analog { blocks } => blocks,
            Placement::Digital { .. } => &[],
        }
    }

    /// Nodes that receive this layer's input.
    pub fn compute_nodes(&self, arch: &ArchDescription) -> Vec<usize> {
        match &self.placement {
            Placement::Analog { blocks } => blocks
                .iter()
                .filter_map(|b| arch.tile_node(b.tile))
                .collect(),
            Placement::Digital { dpu } => vec![*dpu],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    /// Signal buffer to the first layer.
    Input,
    /// Tile partial results to the layer's DPU.
    Partial,
    /// Layer output to the next layer's inputs, including its own tiles for
    /// recurrent layers.
    Forward,
    /// Last layer to the decoder.
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Route {
    pub kind: RouteKind,
    /// Position in `Mapping::layers` of the producing layer (the consuming
    /// layer for `Input`).
    pub layer: usize,
    pub from: usize,
    pub to: Vec<usize>,
    /// Elements per token.
    pub elements: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mapping {
    pub layers: Vec<LayerMapping>,
    pub routes: Vec<Route>,
    pub first_layer_digital: bool,
}

impl Mapping {
    pub fn tiles_used(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .layers
            .iter()
            .flat_map(|l| l.blocks().iter().map(|b| b.tile))
            .collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn for_layer(&self, layer: usize) -> Option<&LayerMapping> {
        self.layers.iter().find(|l| l.layer == layer)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Which weighted layers stay digital. The default keeps the first layer
/// digital.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingStrategy {
    pub first_layer_digital: bool,
    /// Further graph layer indices to run on DPUs.
    #[serde(default)]
    pub digital_layers: Vec<usize>,
}

impl MappingStrategy {
    pub fn first_layer_digital() -> Self {
        MappingStrategy {
            first_layer_digital: true,
            digital_layers: Vec::new(),
        }
    }

    pub fn all_analog() -> Self {
        MappingStrategy {
            first_layer_digital: false,
            digital_layers: Vec::new(),
        }
    }
}

impl Default for MappingStrategy {
    fn default() -> Self {
        MappingStrategy::first_layer_digital()
    }
}

/// Output positions each conv layer must produce per token.
pub fn positions_per_token(graph: &NetworkGraph) -> Vec<usize> {
    let mut out = vec![1; graph.layers.len()];
    let mut later = 1;
    for (i, l) in graph.layers.iter().enumerate().rev() {
        if let LayerKind::Conv1d { stride, .. } = l.kind {
            out[i] = later;
            later *= stride;
        }
    }
    out
}

/// Crossbar footprint `(rows, cols)` of a layer computing `positions`
/// outputs per VMM. Convolutions are unrolled into a banded matrix.
pub fn footprint(kind: &LayerKind, positions: usize) -> Option<(usize, usize)> {
    match *kind {
        LayerKind::Conv1d {
            in_channels,
            out_channels,
            kernel,
            stride,
            ..
        } => Some((
            in_channels * (kernel + (positions - 1) * stride),
            positions * out_channels,
        )),
        _ => kind.matrix_shape(),
    }
}

/// Column `gate * hidden + unit` of an LSTM matrix moves to
/// `unit * 4 + gate`.
pub fn interleaved_column(col: usize, hidden: usize) -> usize {
    (col % hidden) * 4 + col / hidden
}

/// Reorder LSTM gate columns unit-major so a column split keeps units whole.
pub fn interleave_lstm_columns(matrix: &[f32], rows: usize, hidden: usize) -> Vec<f32> {
    let cols = 4 * hidden;
    assert_eq!(matrix.len(), rows * cols);
    let mut out = vec![0.0; matrix.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + interleaved_column(c, hidden)] = matrix[r * cols + c];
        }
    }
    out
}

pub fn deinterleave_lstm_columns(matrix: &[f32], rows: usize, hidden: usize) -> Vec<f32> {
    let cols = 4 * hidden;
    assert_eq!(matrix.len(), rows * cols);
    let mut out = vec![0.0; matrix.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = matrix[r * cols + interleaved_column(c, hidden)];
        }
    }
    out
}

fn input_elements(kind: &LayerKind, positions: usize) -> usize {
    match *kind {
        LayerKind::Conv1d {
            in_channels,
            stride,
            ..
        } => in_channels * positions * stride,
        LayerKind::Lstm { input_size, .. } => input_size,
        LayerKind::Linear { in_features, .. } => in_features,
        _ => 0,
    }
}

fn output_elements(kind: &LayerKind, positions: usize) -> usize {
    match *kind {
        LayerKind::Conv1d { out_channels, .. } => out_channels * positions,
        LayerKind::Lstm { hidden_size, .. } => hidden_size,
        LayerKind::Linear { out_features, .. } => out_features,
        _ => 0,
    }
}

/// Greedy placement: each layer takes the free tiles nearest its producer,
/// and its post-processing goes to the least-loaded DPU, nearest first.
pub fn map_network(
    graph: &NetworkGraph,
    arch: &ArchDescription,
    strategy: &MappingStrategy,
) -> Result<Mapping> {
    arch.validate()?;
    let source = arch
        .first_of(NodeKind::SignalBuffer)
        .expect("validated arch has a signal buffer");
    let decoder = arch
        .first_of(NodeKind::Decoder)
        .expect("validated arch has a decoder");
    let dpus = arch.nodes_of(NodeKind::Dpu);
    let tiles = arch.tiles();
    let positions = positions_per_token(graph);
    let weighted = graph.weighted_layers();

    let mut free = vec![true; tiles.len()];
    let mut load = vec![0usize; dpus.len()];
    let mut anchor = source;
    let mut layers = Vec::with_capacity(weighted.len());

    for (ordinal, &li) in weighted.iter().enumerate() {
        let kind = &graph.layers[li].kind;
        let digital =
            (ordinal == 0 && strategy.first_layer_digital) || strategy.digital_layers.contains(&li);
        let pos = positions[li];
        let pick_dpu = |near: &[usize], load: &[usize]| -> usize {
            (0..dpus.len())
                .min_by_key(|&d| {
                    let dist: usize = near.iter().map(|&n| arch.distance(n, dpus[d])).sum();
                    (load[d], dist, d)
                })
                .expect("validated arch has a DPU")
        };
        let mapping = if digital {
            let d = pick_dpu(&[anchor], &load);
            load[d] += 1;
            LayerMapping {
                layer: li,
                placement: Placement::Digital { dpu: dpus[d] },
                aux: dpus[d],
                positions: pos,
            }
        } else {
            let (rows, cols) = footprint(kind, pos).expect("weighted layer");
            let capacity = || Error::CapacityExceeded {
                layer: li,
                name: kind.short_name().to_string(),
                rows,
                cols,
            };
            if rows > arch.tile_rows {
                return Err(capacity());
            }
            let need = cols.div_ceil(arch.tile_cols);
            let mut candidates: Vec<usize> = (0..tiles.len()).filter(|&t| free[t]).collect();
            candidates.sort_by_key(|&t| (arch.distance(anchor, tiles[t]), t));
            if candidates.len() < need {
                return Err(capacity());
            }
            let chosen = &candidates[..need];
            let blocks: Vec<TileBlock> = chosen
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    free[t] = false;
                    let c0 = k * arch.tile_cols;
                    let c1 = (c0 + arch.tile_cols).min(cols);
                    TileBlock {
                        tile: t,
                        row0: 0,
                        col0: 0,
                        rows,
                        cols: c1 - c0,
                        layer_cols: c0..c1,
                    }
                })
                .collect();
            let nodes: Vec<usize> = chosen.iter().map(|&t| tiles[t]).collect();
            let d = pick_dpu(&nodes, &load);
            load[d] += 1;
            LayerMapping {
                layer: li,
                placement: Placement::Analog { blocks },
                aux: dpus[d],
                positions: pos,
            }
        };
        anchor = mapping.aux;
        layers.push(mapping);
    }

    let routes = build_routes(graph, arch, &layers, source, decoder);
    let mapping = Mapping {
        layers,
        routes,
        first_layer_digital: strategy.first_layer_digital,
    };
    let problems = validate_mapping(&mapping, graph, arch);
    if let Some(p) = problems.first() {
        return Err(Error::Mapping(p.to_string()));
    }
    Ok(mapping)
}

fn build_routes(
    graph: &NetworkGraph,
    arch: &ArchDescription,
    layers: &[LayerMapping],
    source: usize,
    decoder: usize,
) -> Vec<Route> {
    let mut routes = Vec::new();
    let Some(first) = layers.first() else {
        return routes;
    };
    routes.push(Route {
        kind: RouteKind::Input,
        layer: 0,
        from: source,
        to: first.compute_nodes(arch),
        elements: input_elements(&graph.layers[first.layer].kind, first.positions),
    });
    for (i, l) in layers.iter().enumerate() {
        let kind = &graph.layers[l.layer].kind;
        for b in l.blocks() {
            routes.push(Route {
                kind: RouteKind::Partial,
                layer: i,
                from: arch.tile_node(b.tile).expect("placed tile exists"),
                to: vec![l.aux],
                elements: b.cols,
            });
        }
        let mut to = match layers.get(i + 1) {
            Some(next) => next.compute_nodes(arch),
            None => vec![decoder],
        };
        if matches!(kind, LayerKind::Lstm { .. }) {
            for n in l.compute_nodes(arch) {
                if !to.contains(&n) {
                    to.push(n);
                }
            }
        }
        routes.push(Route {
            kind: if i + 1 < layers.len() {
                RouteKind::Forward
            } else {
                RouteKind::Output
            },
            layer: i,
            from: l.aux,
            to,
            elements: output_elements(kind, l.positions),
        });
    }
    routes
}

/// A problem found by [`validate_mapping`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownTile { layer: usize, tile: usize },
    OutOfBounds { layer: usize, tile: usize },
    Overlap { tile: usize, row: usize, col: usize },
    NotADpu { layer: usize, node: usize },
    Coverage { layer: usize },
    MissingLayer { layer: usize },
    DuplicateLayer { layer: usize },
    NotWeighted { layer: usize },
    MissingRoute { layer: usize, kind: RouteKind },
    FirstLayerAnalog,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownTile { layer, tile } => {
                write!(f, "layer {layer} uses unknown tile {tile}")
            }
            Violation::OutOfBounds { layer, tile } => {
                write!(f, "layer {layer} exceeds the bounds of tile {tile}")
            }
            Violation::Overlap { tile, row, col } => {
                write!(f, "tile {tile} cell ({row}, {col}) is claimed twice")
            }
            Violation::NotADpu { layer, node } => {
                write!(f, "layer {layer} uses node {node}, which is not a DPU")
            }
            Violation::Coverage { layer } => {
                write!(f, "layer {layer} blocks do not cover its weights")
            }
            Violation::MissingLayer { layer } => write!(f, "layer {layer} is not mapped"),
            Violation::DuplicateLayer { layer } => {
                write!(f, "layer {layer} is mapped more than once")
            }
            Violation::NotWeighted { layer } => write!(f, "layer {layer} has no weights to place"),
            Violation::MissingRoute { layer, kind } => {
                write!(f, "layer {layer} has no {kind:?} route")
            }
            Violation::FirstLayerAnalog => write!(f, "first layer must be digital"),
        }
    }
}

/// Check a mapping; an empty list means it is valid.
pub fn validate_mapping(
    mapping: &Mapping,
    graph: &NetworkGraph,
    arch: &ArchDescription,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let n_tiles = arch.n_tiles();
    let weighted = graph.weighted_layers();
    let positions = positions_per_token(graph);
    let mut owner: Vec<Option<Vec<bool>>> = vec![None; n_tiles];
    let is_dpu = |n: usize| arch.nodes.get(n).is_some_and(|n| n.kind == NodeKind::Dpu);

    for &li in &weighted {
        match mapping.layers.iter().filter(|l| l.layer == li).count() {
            0 => out.push(Violation::MissingLayer { layer: li }),
            1 => {}
            _ => out.push(Violation::DuplicateLayer { layer: li }),
        }
    }
    for (i, l) in mapping.layers.iter().enumerate() {
        let Some(spec) = graph.layers.get(l.layer).filter(|s| s.kind.is_weighted()) else {
            out.push(Violation::NotWeighted { layer: l.layer });
            continue;
        };
        if !is_dpu(l.aux) && !l.compute_nodes(arch).contains(&l.aux) {
            out.push(Violation::NotADpu {
                layer: l.layer,
                node: l.aux,
            });
        }
        match &l.placement {
            Placement::Digital { dpu } => {
                if !is_dpu(*dpu) {
                    out.push(Violation::NotADpu {
                        layer: l.layer,
                        node: *dpu,
                    });
                }
            }
            Placement::Analog { blocks } => {
                let (rows, cols) = footprint(&spec.kind, positions[l.layer]).expect("weighted");
                let mut covered = 0;
                for b in blocks {
                    if b.tile >= n_tiles {
                        out.push(Violation::UnknownTile {
                            layer: l.layer,
                            tile: b.tile,
                        });
                        continue;
                    }
                    if b.row0 + b.rows > arch.tile_rows || b.col0 + b.cols > arch.tile_cols {
                        out.push(Violation::OutOfBounds {
                            layer: l.layer,
                            tile: b.tile,
                        });
                        continue;
                    }
                    if b.rows != rows || b.layer_cols.len() != b.cols || b.layer_cols.end > cols {
                        out.push(Violation::Coverage { layer: l.layer });
                    }
                    covered += b.cols;
                    let map = owner[b.tile]
                        .get_or_insert_with(|| vec![false; arch.tile_rows * arch.tile_cols]);
                    let mut clash = None;
                    for r in b.row0..b.row0 + b.rows {
                        for c in b.col0..b.col0 + b.cols {
                            let cell = &mut map[r * arch.tile_cols + c];
                            if *cell && clash.is_none() {
                                clash = Some((r, c));
                            }
                            *cell = true;
                        }
                    }
                    if let Some((row, col)) = clash {
                        out.push(Violation::Overlap {
                            tile: b.tile,
                            row,
                            col,
                        });
                    }
                }
                if covered != cols {
                    out.push(Violation::Coverage { layer: l.layer });
                }
            }
        }
        let has = |kind: RouteKind| {
            mapping
                .routes
                .iter()
                .any(|r| r.kind == kind && r.layer == i)
        };
        if i == 0 && !has(RouteKind::Input) {
            out.push(Violation::MissingRoute {
                layer: l.layer,
                kind: RouteKind::Input,
            });
        }
        let partials = mapping
            .routes
            .iter()
            .filter(|r| r.kind == RouteKind::Partial && r.layer == i)
            .count();
        let local = l
            .blocks()
            .iter()
            .filter(|b| arch.tile_node(b.tile) == Some(l.aux))
            .count();
        if partials + local < l.blocks().len() {
            out.push(Violation::MissingRoute {
                layer: l.layer,
                kind: RouteKind::Partial,
            });
        }
        let onward = if i + 1 == mapping.layers.len() {
            RouteKind::Output
        } else {
            RouteKind::Forward
        };
        if !has(onward) {
            out.push(Violation::MissingRoute {
                layer: l.layer,
                kind: onward,
            });
        }
    }
    if mapping.first_layer_digital {
        let first = weighted.first().and_then(|&li| mapping.for_layer(li));
        if first.is_some_and(|l| l.is_analog()) {
            out.push(Violation::FirstLayerAnalog);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::{build_al_dorado, LayerSpec};

    #[test]
    fn lstm_footprints() {
        let small = LayerKind::Lstm {
            input_size: 128,
            hidden_size: 128,
            reverse: false,
        };
        assert_eq!(footprint(&small, 1), Some((256, 512)));
        let big = LayerKind::Lstm {
            input_size: 256,
            hidden_size: 256,
            reverse: false,
        };
        assert_eq!(footprint(&big, 1), Some((512, 1024)));
    }

    #[test]
    fn default_al_dorado_mapping() {
        let g = build_al_dorado(0);
        let arch = ArchDescription::default();
        let m = map_network(&g, &arch, &MappingStrategy::first_layer_digital()).unwrap();
        assert!(validate_mapping(&m, &g, &arch).is_empty());
        assert_eq!(m.tiles_used().len(), 10);
        assert!(!m.layers[0].is_analog());
        let split: Vec<usize> = m.layers.iter().map(|l| l.blocks().len()).collect();
        assert_eq!(split, vec![0, 1, 1, 1, 1, 1, 2, 2, 1]);
    }

    #[test]
    fn oversized_layer_is_rejected() {
        let fc = LayerSpec::zeros(LayerKind::Linear {
            in_features: 1,
            out_features: 600,
        });
        let fc2 = LayerSpec::zeros(LayerKind::Linear {
            in_features: 600,
            out_features: 600,
        });
        let head = LayerSpec::zeros(LayerKind::Linear {
            in_features: 600,
            out_features: 20,
        });
        let g = NetworkGraph::new("wide", vec![fc, fc2, head], 1).unwrap();
        let mut arch = ArchDescription::default();
        let keep = arch.tiles()[0];
        for (i, n) in arch.nodes.iter_mut().enumerate() {
            if n.kind == NodeKind::CimTile && i != keep {
                n.kind = NodeKind::Io;
            }
        }
        let err = map_network(&g, &arch, &MappingStrategy::first_layer_digital()).unwrap_err();
        assert!(
            matches!(err, Error::CapacityExceeded { layer: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn interleave_round_trip() {
        let rows = 3;
        let hidden = 2;
        let m: Vec<f32> = (0..rows * 4 * hidden).map(|v| v as f32).collect();
        let il = interleave_lstm_columns(&m, rows, hidden);
        assert_ne!(il, m);
        // row 0: gates i0 i1 f0 f1 g0 g1 o0 o1 -> i0 f0 g0 o0 i1 f1 g1 o1
        assert_eq!(&il[..8], &[0.0, 2.0, 4.0, 6.0, 1.0, 3.0, 5.0, 7.0]);
        assert_eq!(deinterleave_lstm_columns(&il, rows, hidden), m);
    }

    #[test]
    fn violations_are_reported() {
        let g = build_al_dorado(0);
        let arch = ArchDescription::default();
        let m = map_network(&g, &arch, &MappingStrategy::first_layer_digital()).unwrap();

        let mut bad = m.clone();
        if let Placement::Analog { blocks } = &mut bad.layers[1].placement {
            blocks[0].tile = 12;
        }
        assert!(validate_mapping(&bad, &g, &arch)
            .iter()
            .any(|v| matches!(v, Violation::UnknownTile { tile: 12, .. })));

        let mut shared = m.clone();
        let t = shared.layers[2].blocks()[0].tile;
        if let Placement::Analog { blocks } = &mut shared.layers[1].placement {
            blocks[0].tile = t;
        }
        assert!(validate_mapping(&shared, &g, &arch)
            .iter()
            .any(|v| matches!(v, Violation::Overlap { .. })));

        let analog = map_network(&g, &arch, &MappingStrategy::all_analog()).unwrap();
        let mut flagged = analog.clone();
        flagged.first_layer_digital = true;
        assert!(validate_mapping(&flagged, &g, &arch).contains(&Violation::FirstLayerAnalog));
    }

    #[test]
    fn mapping_json_round_trip() {
        let g = build_al_dorado(0);
        let m = map_network(
            &g,
            &ArchDescription::default(),
            &MappingStrategy::first_layer_digital(),
        )
        .unwrap();
        assert_eq!(Mapping::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn conv_positions() {
        let g = build_al_dorado(0);
        let pos = positions_per_token(&g);
        let convs: Vec<usize> = g
            .layers
            .iter()
            .zip(&pos)
            .filter(|(l, _)| matches!(l.kind, LayerKind::Conv1d { .. }))
            .map(|(_, &p)| p)
            .collect();
        assert_eq!(convs, vec![5, 5, 1]);
        let conv2 = &g.layers[g.weighted_layers()[1]].kind;
        assert_eq!(footprint(conv2, 5), Some((144, 80)));
    }
}
