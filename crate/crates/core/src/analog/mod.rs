//! Programs a network onto simulated PCM tiles and runs it with programming
//! noise, read noise, drift and the hardware number formats: 8-bit crossbar
//! inputs, 10-bit ADC codes and inter-node activations, and half precision
//! for all DPU arithmetic.
//!
//! Convolutions are lowered one output position at a time: each VMM sees the
//! `c_in * k` input window and produces `c_out` columns.

mod quant;
mod sweep;

pub use quant::{f16_round, fake_int10, int10_step, int10_to_int8, to_int10, INT10_MAX};
pub use sweep::{
    drift_sweep, evaluate_reference, evaluate_system, layer_sensitivity_sweep, write_sweep_csv,
    EvalSetup, SweepRow, DRIFT_TIMES,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::{analog_vmm_region, DeviceParams, ProgrammedTile};
use crate::dnn::reference::{
    conv_out_len, finish_frames, forward_layer, lstm_gates_to_state, pad_to_receptive_field,
};
use crate::dnn::{Activations, LayerKind, NetworkGraph};
use crate::error::{Error, Result};
use crate::frames::TransitionFrames;
use crate::mapper::{interleaved_column, validate_mapping, ArchDescription, Mapping, Placement};

/// Where one weighted layer runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "exec", rename_all = "snake_case")]
pub enum Exec {
    Analog { tiles: Vec<usize> },
    Digital,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub layer: usize,
    pub exec: Exec,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionPlan {
    pub entries: Vec<PlanEntry>,
}

impl ExecutionPlan {
    pub fn from_mapping(mapping: &Mapping) -> Self {
        let entries = mapping
            .layers
            .iter()
            .map(|l| PlanEntry {
                layer: l.layer,
                exec: match &l.placement {
                    Placement::Analog { blocks } => Exec::Analog {
                        tiles: blocks.iter().map(|b| b.tile).collect(),
                    },
                    Placement::Digital { .. } => Exec::Digital,
                },
            })
            .collect();
        ExecutionPlan { entries }
    }

    pub fn analog_layers(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| matches!(e.exec, Exec::Analog { .. }))
            .map(|e| e.layer)
            .collect()
    }

    /// Short name such as `all_analog`, `all_digital` or `digital_0_5`.
    pub fn label(&self) -> String {
        let digital: Vec<String> = self
            .entries
            .iter()
            .filter(|e| e.exec == Exec::Digital)
            .map(|e| e.layer.to_string())
            .collect();
        if digital.is_empty() {
            "all_analog".into()
        } else if digital.len() == self.entries.len() {
            "all_digital".into()
        } else {
            format!("digital_{}", digital.join("_"))
        }
    }
}

/// Largest magnitudes seen at a weighted layer's input and at its
/// matrix output (before bias) on the calibration set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerRange {
    pub input_max: f32,
    pub output_max: f32,
}

/// Matrix-vector products and DPU rounding used by [`forward`].
trait Executor {
    /// `W x` for graph layer `layer`, without bias, in natural column order.
    fn mvm(&mut self, layer: usize, x: &[f32]) -> Result<Vec<f32>>;
    fn round(&self, x: f32) -> f32;
}

fn matvec(rows: usize, cols: usize, m: &[f32], x: &[f32]) -> Vec<f32> {
    let mut y = vec![0.0f32; cols];
    for r in 0..rows.min(x.len()) {
        let xr = x[r];
        if xr == 0.0 {
            continue;
        }
        for (acc, &w) in y.iter_mut().zip(&m[r * cols..(r + 1) * cols]) {
            *acc += xr * w;
        }
    }
    y
}

struct Calibrator {
    matrices: Vec<Option<(usize, usize, Vec<f32>)>>,
    ranges: Vec<LayerRange>,
}

impl Executor for Calibrator {
    fn mvm(&mut self, layer: usize, x: &[f32]) -> Result<Vec<f32>> {
        let (rows, cols, m) = self.matrices[layer].as_ref().expect("weighted layer");
        let y = matvec(*rows, *cols, m, x);
        let r = &mut self.ranges[layer];
        r.input_max = x.iter().fold(r.input_max, |a, v| a.max(v.abs()));
        r.output_max = y.iter().fold(r.output_max, |a, v| a.max(v.abs()));
        Ok(y)
    }

    fn round(&self, x: f32) -> f32 {
        x
    }
}

/// Run the float network over `chunks` and record per-layer ranges.
pub fn calibrate(graph: &NetworkGraph, chunks: &[Vec<f32>]) -> Result<Vec<LayerRange>> {
    if chunks.iter().all(|c| c.is_empty()) {
        return Err(Error::Empty("calibration set"));
    }
    let mut cal = Calibrator {
        matrices: graph.layers.iter().map(|l| l.crossbar_matrix()).collect(),
        ranges: vec![LayerRange::default(); graph.layers.len()],
    };
    for c in chunks.iter().filter(|c| !c.is_empty()) {
        let (signal, _) = pad_to_receptive_field(graph, c);
        forward(graph, &signal, &mut cal)?;
    }
    Ok(cal.ranges)
}

fn forward(graph: &NetworkGraph, signal: &[f32], ex: &mut dyn Executor) -> Result<Activations> {
    let mut act = Activations::from_signal(signal);
    for (li, layer) in graph.layers.iter().enumerate() {
        act = match layer.kind {
            LayerKind::Conv1d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
                ..
            } => {
                let len = act.len();
                let out_len = conv_out_len(len, kernel, stride, padding);
                let mut out = Vec::with_capacity(out_len * out_channels);
                let mut window = vec![0.0f32; in_channels * kernel];
                for t in 0..out_len {
                    let origin = (t * stride) as isize - padding as isize;
                    for c in 0..in_channels {
                        for j in 0..kernel {
                            let pos = origin + j as isize;
                            window[c * kernel + j] = if pos >= 0 && (pos as usize) < len {
                                act.data[pos as usize * in_channels + c]
                            } else {
                                0.0
                            };
                        }
                    }
                    let y = ex.mvm(li, &window)?;
                    for (o, v) in y.into_iter().enumerate() {
                        out.push(ex.round(v + layer.bias.get(o).copied().unwrap_or(0.0)));
                    }
                }
                Activations::new(out_channels, out)
            }
            LayerKind::Lstm {
                input_size,
                hidden_size,
                reverse,
            } => {
                let len = act.len();
                let mut out = vec![0.0; len * hidden_size];
                let mut h = vec![0.0; hidden_size];
                let mut c = vec![0.0; hidden_size];
                let mut v = vec![0.0; input_size + hidden_size];
                for step in 0..len {
                    let t = if reverse { len - 1 - step } else { step };
                    v[..input_size].copy_from_slice(act.row(t));
                    v[input_size..].copy_from_slice(&h);
                    let gates: Vec<f32> = ex
                        .mvm(li, &v)?
                        .into_iter()
                        .zip(&layer.bias)
                        .map(|(g, b)| ex.round(g + b))
                        .collect();
                    let (h2, c2) = lstm_gates_to_state(&gates, &c);
                    h = h2.into_iter().map(|x| ex.round(x)).collect();
                    c = c2.into_iter().map(|x| ex.round(x)).collect();
                    out[t * hidden_size..(t + 1) * hidden_size].copy_from_slice(&h);
                }
                Activations::new(hidden_size, out)
            }
            LayerKind::Linear { out_features, .. } => {
                let mut out = Vec::with_capacity(act.len() * out_features);
                for t in 0..act.len() {
                    let y = ex.mvm(li, act.row(t))?;
                    out.extend(y.into_iter().zip(&layer.bias).map(|(v, b)| ex.round(v + b)));
                }
                Activations::new(out_features, out)
            }
            _ => {
                let mut a = forward_layer(layer, act)?;
                for v in &mut a.data {
                    *v = ex.round(*v);
                }
                a
            }
        };
    }
    Ok(act)
}

#[derive(Clone, Debug)]
struct AnalogBlock {
    tile: usize,
    row0: usize,
    col0: usize,
    /// Natural output column of each physical column.
    columns: Vec<usize>,
}

#[derive(Clone, Debug)]
struct AnalogLayer {
    w_max: f64,
    gain: f64,
    cols: usize,
    blocks: Vec<AnalogBlock>,
}

/// A network programmed onto tiles. Immutable once built; inference may run
/// concurrently.
#[derive(Clone, Debug)]
pub struct ProgrammedSystem {
    pub graph: NetworkGraph,
    pub plan: ExecutionPlan,
    pub device: DeviceParams,
    pub program_time: f64,
    pub ranges: Vec<LayerRange>,
    tiles: Vec<Option<ProgrammedTile>>,
    analog: Vec<Option<AnalogLayer>>,
    digital: Vec<Option<(usize, usize, Vec<f32>)>>,
    first_weighted: Option<usize>,
}

impl ProgrammedSystem {
    /// Tiles holding at least one weight.
    pub fn tiles_programmed(&self) -> usize {
        self.tiles.iter().filter(|t| t.is_some()).count()
    }

    pub fn tile(&self, id: usize) -> Option<&ProgrammedTile> {
        self.tiles.get(id).and_then(|t| t.as_ref())
    }

    /// Scaling weight of an analog layer.
    pub fn w_max(&self, layer: usize) -> Option<f64> {
        self.analog.get(layer)?.as_ref().map(|a| a.w_max)
    }

    /// Conductance-domain readback of an analog layer's matrix in natural
    /// column order, without drift or read noise.
    pub fn readback(&self, layer: usize) -> Option<Vec<f32>> {
        let a = self.analog.get(layer)?.as_ref()?;
        let (rows, _) = self.graph.layers[layer].kind.matrix_shape()?;
        let mut m = vec![0.0f32; rows * a.cols];
        for b in &a.blocks {
            let tile = self.tile(b.tile)?;
            for r in 0..rows {
                for (k, &c) in b.columns.iter().enumerate() {
                    m[r * a.cols + c] =
                        tile.cell(b.row0 + r, b.col0 + k)
                            .decode(a.w_max, &self.device) as f32;
                }
            }
        }
        Some(m)
    }

    fn input_step(&self, layer: usize) -> f32 {
        int10_step(self.ranges[layer].input_max)
    }
}

/// Program at time zero. See [`program_network_at`].
pub fn program_network(
    graph: &NetworkGraph,
    mapping: &Mapping,
    arch: &ArchDescription,
    device: &DeviceParams,
    calibration: &[Vec<f32>],
    seed: u64,
) -> Result<ProgrammedSystem> {
    program_network_at(graph, mapping, arch, device, calibration, seed, 0.0)
}

/// Scale each analog layer by its largest absolute weight, write it as
/// conductance pairs with programming noise, and set the per-column ADC gain
/// from the calibrated output range. Digital layers keep half-precision
/// copies of their weights.
pub fn program_network_at(
    graph: &NetworkGraph,
    mapping: &Mapping,
    arch: &ArchDescription,
    device: &DeviceParams,
    calibration: &[Vec<f32>],
    seed: u64,
    program_time: f64,
) -> Result<ProgrammedSystem> {
    device.validate()?;
    graph.validate()?;
    if let Some(v) = validate_mapping(mapping, graph, arch).first() {
        return Err(Error::Mapping(v.to_string()));
    }
    let ranges = calibrate(graph, calibration)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.layers.len();
    let mut tiles: Vec<Option<ProgrammedTile>> = vec![None; arch.n_tiles()];
    let mut analog = vec![None; n];
    let mut digital = vec![None; n];

    for lm in &mapping.layers {
        let spec = &graph.layers[lm.layer];
        let (rows, cols, matrix) = spec.crossbar_matrix().expect("mapped layers are weighted");
        let blocks = match &lm.placement {
            Placement::Digital { .. } => {
                digital[lm.layer] =
                    Some((rows, cols, matrix.iter().map(|&w| f16_round(w)).collect()));
                continue;
            }
            Placement::Analog { blocks } => blocks,
        };
        // physical column p holds natural column phys[p]
        let (matrix, phys): (Vec<f32>, Vec<usize>) = match spec.kind {
            LayerKind::Lstm { hidden_size, .. } => {
                let mut phys = vec![0; cols];
                for c in 0..cols {
                    phys[interleaved_column(c, hidden_size)] = c;
                }
                (
                    crate::mapper::interleave_lstm_columns(&matrix, rows, hidden_size),
                    phys,
                )
            }
            _ => (matrix, (0..cols).collect()),
        };
        let w_max = matrix
            .iter()
            .fold(0.0f64, |a, &w| a.max(f64::from(w).abs()));
        let step = int10_step(ranges[lm.layer].input_max);
        let s8 = 4.0 * f64::from(step);
        let full_scale = f64::from(ranges[lm.layer].output_max) / (s8 * w_max);
        let gain = if full_scale > 0.0 && w_max > 0.0 {
            f64::from(device.adc_range().1) / full_scale
        } else {
            1.0
        };
        let capacity = || Error::CapacityExceeded {
            layer: lm.layer,
            name: spec.kind.short_name().to_string(),
            rows,
            cols,
        };
        let conv = matches!(spec.kind, LayerKind::Conv1d { .. });
        let mut placed = Vec::with_capacity(blocks.len());
        for (b, blk) in blocks.iter().enumerate() {
            // conv blocks are sized for the unrolled window; the per-position
            // matrix is split evenly over them instead
            let range = if conv {
                b * cols / blocks.len()..(b + 1) * cols / blocks.len()
            } else {
                blk.layer_cols.clone()
            };
            if range.end > cols || range.len() > blk.cols || rows > blk.rows {
                return Err(capacity());
            }
            let width = range.len();
            let mut sub = Vec::with_capacity(rows * width);
            for r in 0..rows {
                sub.extend(
                    matrix[r * cols + range.start..r * cols + range.end]
                        .iter()
                        .map(|&w| f64::from(w)),
                );
            }
            let tile = tiles
                .get_mut(blk.tile)
                .ok_or_else(capacity)?
                .get_or_insert_with(|| ProgrammedTile::new(program_time));
            tile.program_block(blk.row0, blk.col0, width, &sub, w_max, device, &mut rng)
                .map_err(|_| capacity())?;
            for j in blk.col0..blk.col0 + width {
                tile.col_scale[j] = gain;
            }
            placed.push(AnalogBlock {
                tile: blk.tile,
                row0: blk.row0,
                col0: blk.col0,
                columns: range.map(|p| phys[p]).collect(),
            });
        }
        analog[lm.layer] = Some(AnalogLayer {
            w_max,
            gain,
            cols,
            blocks: placed,
        });
    }
    Ok(ProgrammedSystem {
        graph: graph.clone(),
        plan: ExecutionPlan::from_mapping(mapping),
        device: device.clone(),
        program_time,
        ranges,
        tiles,
        analog,
        digital,
        first_weighted: graph.weighted_layers().first().copied(),
    })
}

struct Hardware<'a> {
    sys: &'a ProgrammedSystem,
    t_read: f64,
    rng: ChaCha8Rng,
}

impl Executor for Hardware<'_> {
    fn mvm(&mut self, layer: usize, x: &[f32]) -> Result<Vec<f32>> {
        let sys = self.sys;
        let step = sys.input_step(layer);
        if let Some((rows, cols, m)) = &sys.digital[layer] {
            // the first layer reads 16-bit samples straight from the buffer
            let xq: Vec<f32> = if Some(layer) == sys.first_weighted {
                x.iter().map(|&v| f16_round(v)).collect()
            } else {
                x.iter().map(|&v| fake_int10(v, step)).collect()
            };
            return Ok(matvec(*rows, *cols, m, &xq)
                .into_iter()
                .map(f16_round)
                .collect());
        }
        let a = sys.analog[layer].as_ref().expect("layer is placed");
        let x8: Vec<i8> = x
            .iter()
            .map(|&v| int10_to_int8(to_int10(v, step)))
            .collect();
        let scale = (4.0 * f64::from(step) * a.w_max / a.gain) as f32;
        let mut y = vec![0.0f32; a.cols];
        for b in &a.blocks {
            let tile = sys.tile(b.tile).expect("programmed tile");
            let cols = b.col0..b.col0 + b.columns.len();
            let codes = analog_vmm_region(
                tile,
                b.row0,
                cols,
                &x8,
                &sys.device,
                &mut self.rng,
                self.t_read,
            )?;
            for (&c, code) in b.columns.iter().zip(codes) {
                y[c] = f16_round(f32::from(code) * scale);
            }
        }
        Ok(y)
    }

    fn round(&self, x: f32) -> f32 {
        f16_round(x)
    }
}

/// Run one chunk at absolute time `t_read`. Deterministic in `seed`.
pub fn infer_analog(
    system: &ProgrammedSystem,
    chunk: &[f32],
    t_read: f64,
    seed: u64,
) -> Result<TransitionFrames> {
    if chunk.is_empty() {
        return Err(Error::Empty("chunk"));
    }
    if t_read < system.program_time {
        return Err(Error::TimeOrder {
            t_now: t_read,
            t_programmed: system.program_time,
        });
    }
    let graph = &system.graph;
    let (signal, _) = pad_to_receptive_field(graph, chunk);
    let frames = signal.len() / graph.samples_per_frame();
    let mut hw = Hardware {
        sys: system,
        t_read,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let act = forward(graph, &signal, &mut hw)?;
    finish_frames(graph, act, frames)
}
