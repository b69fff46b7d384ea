use serde::Serialize;

use super::mesh::{route, Channel, MeshPath};
use crate::dnn::{LayerKind, NetworkGraph};
use crate::error::{Error, Result};
use crate::mapper::{validate_mapping, ArchDescription, Mapping, NodeKind, Placement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Vmm,
    BatchNormAux,
    SwishLut,
    LstmAux,
    Decode,
    SramAccess,
    MeshTransfer,
}

/// Something an op occupies for its whole latency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Resource {
    Node(usize),
    Mesh(Channel),
}

/// Runtime categories of the per-token profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Vmm,
    LstmOps,
    DataMovement,
    Contention,
    Other,
}

/// Element width class; the cost table gives the bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Width {
    None,
    /// Inter-node activation.
    Activation,
    /// DPU floating-point value.
    DpuValue,
    /// Raw signal sample.
    Sample,
}

/// Smallest scheduled unit. Latency and energy come from the cost table at
/// scheduling time; the op records only the work it performs.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroOp {
    pub id: usize,
    pub token: usize,
    pub kind: OpKind,
    /// Position in `Mapping::layers`, if the op belongs to a layer.
    pub layer: Option<usize>,
    /// Belongs to a recurrent layer.
    pub recurrent: bool,
    pub resources: Vec<Resource>,
    pub preds: Vec<usize>,
    /// Elements processed, moved or accessed; MACs for a digital convolution.
    pub elements: u64,
    /// Width of each element for memory and mesh ops.
    pub width: Width,
    /// Latency multiplier for repeated DPU passes.
    pub repeats: u64,
    /// Multiply-accumulates performed.
    pub macs: u64,
    pub path: Option<MeshPath>,
}

impl MicroOp {
    pub fn category(&self) -> Category {
        match self.kind {
            OpKind::Vmm if self.recurrent => Category::Vmm,
            OpKind::LstmAux => Category::LstmOps,
            OpKind::MeshTransfer | OpKind::SramAccess => Category::DataMovement,
            _ => Category::Other,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct JobGraph {
    pub ops: Vec<MicroOp>,
    pub n_tokens: usize,
    /// Final op of each token.
    pub token_final: Vec<usize>,
    pub samples_per_frame: usize,
}

/// Which parts of the data path to emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JobOptions {
    /// Signal-buffer reads, the input transfer, and decoding.
    pub include_io: bool,
}

impl Default for JobOptions {
    fn default() -> Self {
        JobOptions { include_io: true }
    }
}

struct Builder<'a> {
    arch: &'a ArchDescription,
    ops: Vec<MicroOp>,
}

impl Builder<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        token: usize,
        kind: OpKind,
        layer: Option<usize>,
        recurrent: bool,
        node: usize,
        preds: Vec<usize>,
        elements: u64,
        width: Width,
    ) -> usize {
        let id = self.ops.len();
        self.ops.push(MicroOp {
            id,
            token,
            kind,
            layer,
            recurrent,
            resources: vec![Resource::Node(node)],
            preds,
            elements,
            width,
            repeats: 1,
            macs: 0,
            path: None,
        });
        id
    }

    /// Emit a transfer unless every destination is the source. Returns the
    /// ops a consumer must wait for.
    #[allow(clippy::too_many_arguments)]
    fn transfer(
        &mut self,
        token: usize,
        layer: Option<usize>,
        recurrent: bool,
        from: usize,
        to: &[usize],
        elements: u64,
        preds: Vec<usize>,
    ) -> Vec<usize> {
        let dests: Vec<usize> = to.iter().copied().filter(|&d| d != from).collect();
        if dests.is_empty() {
            return preds;
        }
        let path = route(self.arch, from, &dests);
        let id = self.ops.len();
        self.ops.push(MicroOp {
            id,
            token,
            kind: OpKind::MeshTransfer,
            layer,
            recurrent,
            resources: path.channels.iter().map(|&c| Resource::Mesh(c)).collect(),
            preds,
            elements,
            width: Width::Activation,
            repeats: 1,
            macs: 0,
            path: Some(path),
        });
        vec![id]
    }
}

/// Activation work following weighted layer `li`: (batch norm, lookup table).
fn trailing_ops(graph: &NetworkGraph, li: usize) -> (bool, bool) {
    let mut bn = false;
    let mut lut = false;
    for l in graph.layers[li + 1..]
        .iter()
        .take_while(|l| !l.kind.is_weighted())
    {
        match l.kind {
            LayerKind::BatchNorm { .. } => bn = true,
            LayerKind::Swish | LayerKind::Clamp { .. } => lut = true,
            _ => {}
        }
    }
    (bn, lut)
}

/// Expand a mapped network into micro-ops for `n_tokens` frames.
pub fn build_job_graph(
    graph: &NetworkGraph,
    mapping: &Mapping,
    arch: &ArchDescription,
    n_tokens: usize,
) -> Result<JobGraph> {
    build_job_graph_with(graph, mapping, arch, n_tokens, JobOptions::default())
}

pub fn build_job_graph_with(
    graph: &NetworkGraph,
    mapping: &Mapping,
    arch: &ArchDescription,
    n_tokens: usize,
    opts: JobOptions,
) -> Result<JobGraph> {
    if let Some(v) = validate_mapping(mapping, graph, arch).first() {
        return Err(Error::Mapping(v.to_string()));
    }
    let source = arch
        .first_of(NodeKind::SignalBuffer)
        .ok_or(Error::Mapping("no signal buffer".into()))?;
    let decoder = arch
        .first_of(NodeKind::Decoder)
        .ok_or(Error::Mapping("no decoder".into()))?;
    let n_layers = mapping.layers.len();
    let mut b = Builder {
        arch,
        ops: Vec::new(),
    };
    // compute ops per layer of the previous token, for buffer back-pressure
    let mut prev_compute: Vec<Vec<usize>> = vec![Vec::new(); n_layers];
    // ops draining each layer's output buffer, previous token; for LSTMs
    // this also carries the hidden state back to the layer's own tiles
    let mut prev_out: Vec<Vec<usize>> = vec![Vec::new(); n_layers];
    let mut prev_decode: Option<usize> = None;
    let mut token_final = Vec::with_capacity(n_tokens);

    for t in 0..n_tokens {
        let mut delivered: Vec<usize> = Vec::new();
        let first = &mapping.layers[0];
        if opts.include_io {
            let spec = &graph.layers[first.layer].kind;
            let elements = match *spec {
                LayerKind::Conv1d {
                    in_channels,
                    stride,
                    ..
                } => (in_channels * stride * first.positions) as u64,
                _ => spec.matrix_shape().map_or(0, |(r, _)| r) as u64,
            };
            let read = b.push(
                t,
                OpKind::SramAccess,
                None,
                false,
                source,
                prev_compute[0].clone(),
                elements,
                Width::Sample,
            );
            delivered = b.transfer(
                t,
                Some(0),
                false,
                source,
                &first.compute_nodes(arch),
                elements,
                vec![read],
            );
        }
        let mut last = delivered.clone();
        for (i, lm) in mapping.layers.iter().enumerate() {
            let spec = &graph.layers[lm.layer];
            let recurrent = matches!(spec.kind, LayerKind::Lstm { .. });
            let (bn, lut) = trailing_ops(graph, lm.layer);
            let mut compute = Vec::new();
            let mut at_aux = Vec::new();
            match &lm.placement {
                Placement::Digital { dpu } => {
                    let (rows, cols) = spec.kind.matrix_shape().expect("weighted");
                    let sram = b.push(
                        t,
                        OpKind::SramAccess,
                        Some(i),
                        recurrent,
                        *dpu,
                        delivered.clone(),
                        (rows * cols) as u64,
                        Width::DpuValue,
                    );
                    let mut preds = delivered.clone();
                    preds.push(sram);
                    preds.extend(&prev_out[i]);
                    let macs = (rows * cols * lm.positions) as u64;
                    let fma = b.push(
                        t,
                        OpKind::BatchNormAux,
                        Some(i),
                        recurrent,
                        *dpu,
                        preds,
                        macs,
                        Width::None,
                    );
                    b.ops[fma].repeats = lm.positions as u64;
                    b.ops[fma].macs = macs;
                    compute.push(fma);
                    at_aux = b.transfer(
                        t,
                        Some(i),
                        recurrent,
                        *dpu,
                        &[lm.aux],
                        (cols * lm.positions) as u64,
                        vec![fma],
                    );
                }
                Placement::Analog { blocks } => {
                    for blk in blocks {
                        let node = arch.tile_node(blk.tile).expect("validated tile");
                        let mut preds = delivered.clone();
                        preds.extend(&prev_out[i]);
                        let vmm = b.push(
                            t,
                            OpKind::Vmm,
                            Some(i),
                            recurrent,
                            node,
                            preds,
                            0,
                            Width::None,
                        );
                        b.ops[vmm].macs = (blk.rows * blk.cols) as u64;
                        compute.push(vmm);
                        at_aux.extend(b.transfer(
                            t,
                            Some(i),
                            recurrent,
                            node,
                            &[lm.aux],
                            blk.cols as u64,
                            vec![vmm],
                        ));
                    }
                }
            }
            let out_elems = match spec.kind {
                LayerKind::Conv1d { out_channels, .. } => out_channels * lm.positions,
                LayerKind::Lstm { hidden_size, .. } => hidden_size,
                LayerKind::Linear { out_features, .. } => out_features,
                _ => 0,
            } as u64;
            let mut tail = at_aux;
            if recurrent {
                let read = b.push(
                    t,
                    OpKind::SramAccess,
                    Some(i),
                    true,
                    lm.aux,
                    tail,
                    out_elems,
                    Width::DpuValue,
                );
                let aux = b.push(
                    t,
                    OpKind::LstmAux,
                    Some(i),
                    true,
                    lm.aux,
                    vec![read],
                    out_elems,
                    Width::None,
                );
                b.push(
                    t,
                    OpKind::SramAccess,
                    Some(i),
                    true,
                    lm.aux,
                    vec![aux],
                    out_elems,
                    Width::DpuValue,
                );
                tail = vec![aux];
            } else {
                if lm.is_analog() || bn {
                    tail = vec![b.push(
                        t,
                        OpKind::BatchNormAux,
                        Some(i),
                        false,
                        lm.aux,
                        tail,
                        out_elems,
                        Width::None,
                    )];
                }
                if lut {
                    tail = vec![b.push(
                        t,
                        OpKind::SwishLut,
                        Some(i),
                        false,
                        lm.aux,
                        tail,
                        out_elems,
                        Width::None,
                    )];
                }
            }
            let mut dests = match mapping.layers.get(i + 1) {
                Some(next) => next.compute_nodes(arch),
                None if opts.include_io => vec![decoder],
                None => Vec::new(),
            };
            let own = if recurrent {
                lm.compute_nodes(arch)
            } else {
                Vec::new()
            };
            for &n in &own {
                if !dests.contains(&n) {
                    dests.push(n);
                }
            }
            let mut preds = tail.clone();
            if i + 1 < n_layers {
                preds.extend(&prev_compute[i + 1]);
            } else if let Some(d) = prev_decode {
                preds.push(d);
            }
            delivered = if dests.is_empty() {
                tail
            } else {
                b.transfer(t, Some(i), recurrent, lm.aux, &dests, out_elems, preds)
            };
            prev_out[i] = delivered.clone();
            prev_compute[i] = compute;
            last = delivered.clone();
        }
        if opts.include_io {
            let d = b.push(
                t,
                OpKind::Decode,
                None,
                false,
                decoder,
                delivered,
                1,
                Width::None,
            );
            prev_decode = Some(d);
            last = vec![d];
        }
        token_final.push(*last.last().unwrap_or(&(b.ops.len() - 1)));
    }
    Ok(JobGraph {
        ops: b.ops,
        n_tokens,
        token_final,
        samples_per_frame: graph.samples_per_frame(),
    })
}
