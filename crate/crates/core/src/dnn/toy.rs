//! A three-layer basecaller for the single-base toy pore model.
//!
//! The convolution turns each sample into a thermometer code of the current
//! level, the LSTM (no recurrence) passes the code through its gates, and the
//! head scores every transition by how well the destination base's code
//! matches plus a log prior from the dwell distribution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LayerKind, LayerSpec, NetworkGraph};
use crate::error::{Error, Result};
use crate::frames::{CrfLayout, DECISIONS, N_BASES};
use crate::pipeline::{random_sequence, synth_squiggle, PoreModel};

/// Slope of the level comparators in the first layer.
pub const COMPARATOR_GAIN: f32 = 4.0;
/// Scale applied to code agreement in the head, picked by grid search on
/// held-out reads at [`BENCHMARK_NOISE`] among scales that still decode
/// noise-free reads exactly.
pub const EMISSION_SCALE: f32 = 2.25;
/// Signal noise of the accuracy benchmark.
pub const BENCHMARK_NOISE: f32 = 0.33;
/// Log prior of a move into the base already held.
const REPEAT_MOVE_PRIOR: f32 = -8.0;
const GATE_BIAS: f32 = 6.0;

const MANIFEST: &str = include_str!("../../fixtures/toy/weights.json");
const WEIGHTS: &[u8] = include_bytes!("../../fixtures/toy/weights.bin");

/// The checked-in toy network.
pub fn toy_network() -> NetworkGraph {
    super::weights::parse_network(MANIFEST, WEIGHTS, std::path::Path::new("fixtures/toy"))
        .expect("embedded toy fixture is valid")
}

/// Pore model used with [`toy_network`], with the given signal noise.
pub fn toy_pore_model(noise_std: f32) -> PoreModel {
    PoreModel {
        noise_std,
        ..PoreModel::toy()
    }
}

/// Derive the toy network from a single-base pore model.
pub fn fit_toy_network(model: &PoreModel) -> Result<NetworkGraph> {
    fit_toy_network_scaled(model, EMISSION_SCALE)
}

/// As [`fit_toy_network`] with an explicit head scale.
pub fn fit_toy_network_scaled(model: &PoreModel, emission_scale: f32) -> Result<NetworkGraph> {
    model.validate()?;
    if model.k != 1 {
        return Err(Error::param("pore.k", "toy network needs k = 1"));
    }
    let n_feat = N_BASES - 1;
    let mut order: Vec<usize> = (0..N_BASES).collect();
    order.sort_by(|&a, &b| model.levels[a].total_cmp(&model.levels[b]));
    let mut rank = [0usize; N_BASES];
    for (r, &b) in order.iter().enumerate() {
        rank[b] = r;
    }
    let thresholds: Vec<f32> = order
        .windows(2)
        .map(|w| 0.5 * (model.levels[w[0]] + model.levels[w[1]]))
        .collect();

    let kernel = 5;
    let mut conv_w = vec![0.0; n_feat * kernel];
    for j in 0..n_feat {
        conv_w[j * kernel + kernel / 2] = COMPARATOR_GAIN;
    }
    let conv_b = thresholds.iter().map(|t| -COMPARATOR_GAIN * t).collect();
    let conv = LayerSpec::new(
        LayerKind::Conv1d {
            in_channels: 1,
            out_channels: n_feat,
            kernel,
            stride: 1,
            padding: kernel / 2,
            bias: true,
        },
        conv_w,
        conv_b,
    )?;

    let h = n_feat;
    let width = 2 * h;
    let mut lstm_w = vec![0.0; 4 * h * width];
    let mut lstm_b = vec![0.0; 4 * h];
    for k in 0..h {
        lstm_w[(2 * h + k) * width + k] = 1.0;
        lstm_b[k] = GATE_BIAS;
        lstm_b[h + k] = -GATE_BIAS;
        lstm_b[3 * h + k] = GATE_BIAS;
    }
    let lstm = LayerSpec::new(
        LayerKind::Lstm {
            input_size: n_feat,
            hidden_size: h,
            reverse: false,
        },
        lstm_w,
        lstm_b,
    )?;

    let layout = CrfLayout::with_state_len(1);
    let n_out = layout.n_transitions();
    let p_move = (1.0 / model.dwell.mean).min(0.5) as f32;
    let mut fc_w = vec![0.0; n_out * h];
    let mut fc_b = vec![0.0; n_out];
    for s in 0..layout.n_states {
        for d in 0..DECISIONS {
            let o = s * DECISIONS + d;
            let dest = layout.dest(s, d);
            for j in 0..h {
                let code = if j < rank[dest] { 1.0 } else { -1.0 };
                fc_w[o * h + j] = emission_scale * code;
            }
            fc_b[o] = match d {
                0 => (1.0 - p_move).ln(),
                _ if dest == s => REPEAT_MOVE_PRIOR,
                _ => (p_move / (N_BASES - 1) as f32).ln(),
            };
        }
    }
    let fc = LayerSpec::new(
        LayerKind::Linear {
            in_features: h,
            out_features: n_out,
        },
        fc_w,
        fc_b,
    )?;
    let clamp = LayerSpec::zeros(LayerKind::Clamp { lo: -3.5, hi: 3.5 });
    NetworkGraph::new("toy", vec![conv, clamp, lstm, fc], 1)
}

/// A synthetic read with ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRead {
    pub id: String,
    pub sequence: String,
    pub samples: Vec<f32>,
}

/// Homopolymer-free reads rendered through the toy pore model.
pub fn toy_benchmark(
    n_reads: usize,
    bases: usize,
    noise_std: f32,
    seed: u64,
) -> Vec<BenchmarkRead> {
    synthetic_reads(&toy_pore_model(noise_std), n_reads, bases, seed)
        .expect("toy pore model is valid")
}

/// Homopolymer-free reads rendered through `model`.
pub fn synthetic_reads(
    model: &PoreModel,
    n_reads: usize,
    bases: usize,
    seed: u64,
) -> Result<Vec<BenchmarkRead>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_reads)
        .map(|i| {
            let sequence = random_sequence(bases, false, &mut rng);
            let read = synth_squiggle(
                &sequence,
                model,
                seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            )?;
            Ok(BenchmarkRead {
                id: format!("read{i}"),
                sequence,
                samples: read.samples,
            })
        })
        .collect()
}
