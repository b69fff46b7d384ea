//! Basecaller network description, builders for the Dorado-Fast and
//! AL-Dorado topologies, and the full-precision reference forward pass.

pub(crate) mod reference;
pub mod toy;
mod weights;

pub use reference::{conv1d, infer_reference, lstm_step, pad_to_receptive_field, Activations};
pub use weights::{load_network, save_network, WeightManifest};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{CrfLayout, DECISIONS};

/// Layer geometry. Weight layouts:
/// * `Conv1d`: `[out][in][kernel]`, optional bias `[out]`
/// * `Lstm`: `[4 * hidden][input + hidden]` with gate row blocks `i, f, g, o`
///   and columns `x` then `h`; bias `[4 * hidden]`
/// * `Linear`: `[out][in]`, bias `[out]`
/// * `BatchNorm`: folded per-channel scale in `weights`, shift in `bias`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerKind {
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        bias: bool,
    },
    Lstm {
        input_size: usize,
        hidden_size: usize,
        reverse: bool,
    },
    Linear {
        in_features: usize,
        out_features: usize,
    },
    Swish,
    Clamp {
        lo: f32,
        hi: f32,
    },
    BatchNorm {
        channels: usize,
    },
}

impl LayerKind {
    /// Expected `(weights, bias)` lengths.
    pub fn param_shape(&self) -> (usize, usize) {
        match *self {
            LayerKind::Conv1d {
                in_channels,
                out_channels,
                kernel,
                bias,
                ..
            } => (
                in_channels * kernel * out_channels,
                if bias { out_channels } else { 0 },
            ),
            LayerKind::Lstm {
                input_size,
                hidden_size,
                ..
            } => (
                4 * hidden_size * (input_size + hidden_size),
                4 * hidden_size,
            ),
            LayerKind::Linear {
                in_features,
                out_features,
            } => (in_features * out_features, out_features),
            LayerKind::BatchNorm { channels } => (channels, channels),
            LayerKind::Swish | LayerKind::Clamp { .. } => (0, 0),
        }
    }

    /// Layers holding a weight matrix that can live on a crossbar.
    pub fn is_weighted(&self) -> bool {
        matches!(
            self,
            LayerKind::Conv1d { .. } | LayerKind::Lstm { .. } | LayerKind::Linear { .. }
        )
    }

    /// Crossbar footprint `(rows, cols)` of the lowered weight matrix.
    pub fn matrix_shape(&self) -> Option<(usize, usize)> {
        match *self {
            LayerKind::Conv1d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => Some((in_channels * kernel, out_channels)),
            LayerKind::Lstm {
                input_size,
                hidden_size,
                ..
            } => Some((input_size + hidden_size, 4 * hidden_size)),
            LayerKind::Linear {
                in_features,
                out_features,
            } => Some((in_features, out_features)),
            _ => None,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            LayerKind::Conv1d { .. } => "conv",
            LayerKind::Lstm { .. } => "lstm",
            LayerKind::Linear { .. } => "fc",
            LayerKind::Swish => "swish",
            LayerKind::Clamp { .. } => "clamp",
            LayerKind::BatchNorm { .. } => "batchnorm",
        }
    }

    fn output_channels(&self, input: usize) -> Result<usize> {
        let expect = |want: usize| {
            if want == input {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    what: "layer input channels",
                    expected: want,
                    got: input,
                })
            }
        };
        match *self {
            LayerKind::Conv1d {
                in_channels,
                out_channels,
                kernel,
                stride,
                ..
            } => {
                if kernel == 0 || stride == 0 || out_channels == 0 {
                    return Err(Error::param("conv1d", "geometry must be positive"));
                }
                expect(in_channels)?;
                Ok(out_channels)
            }
            LayerKind::Lstm {
                input_size,
                hidden_size,
                ..
            } => {
                if hidden_size == 0 {
                    return Err(Error::param("lstm", "hidden size must be positive"));
                }
                expect(input_size)?;
                Ok(hidden_size)
            }
            LayerKind::Linear {
                in_features,
                out_features,
            } => {
                if out_features == 0 {
                    return Err(Error::param("linear", "output size must be positive"));
                }
                expect(in_features)?;
                Ok(out_features)
            }
            LayerKind::BatchNorm { channels } => {
                expect(channels)?;
                Ok(channels)
            }
            LayerKind::Clamp { lo, hi } => {
                if lo >= hi {
                    return Err(Error::param("clamp", "lo must be below hi"));
                }
                Ok(input)
            }
            LayerKind::Swish => Ok(input),
        }
    }
}

/// A layer with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl LayerSpec {
    pub fn new(kind: LayerKind, weights: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        let (nw, nb) = kind.param_shape();
        if weights.len() != nw {
            return Err(Error::DimensionMismatch {
                what: "layer weights",
                expected: nw,
                got: weights.len(),
            });
        }
        if bias.len() != nb {
            return Err(Error::DimensionMismatch {
                what: "layer bias",
                expected: nb,
                got: bias.len(),
            });
        }
        Ok(LayerSpec {
            kind,
            weights,
            bias,
        })
    }

    /// Zero-initialised parameters.
    pub fn zeros(kind: LayerKind) -> Self {
        let (nw, nb) = kind.param_shape();
        LayerSpec {
            kind,
            weights: vec![0.0; nw],
            bias: vec![0.0; nb],
        }
    }

    fn random(kind: LayerKind, rng: &mut impl Rng) -> Self {
        let fan_in = match kind {
            LayerKind::Conv1d {
                in_channels,
                kernel,
                ..
            } => in_channels * kernel,
            LayerKind::Lstm { hidden_size, .. } => hidden_size,
            LayerKind::Linear { in_features, .. } => in_features,
            _ => 1,
        };
        let bound = 1.0 / (fan_in as f32).sqrt();
        let mut layer = LayerSpec::zeros(kind);
        if matches!(layer.kind, LayerKind::BatchNorm { .. }) {
            layer.weights.iter_mut().for_each(|w| *w = 1.0);
            return layer;
        }
        for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *w = rng.gen_range(-bound..bound);
        }
        layer
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Weight matrix lowered to crossbar orientation: `rows x cols`,
    /// row-major, where rows index the input vector and columns the outputs.
    /// Conv rows are ordered channel-major (`c * kernel + tap`).
    pub fn crossbar_matrix(&self) -> Option<(usize, usize, Vec<f32>)> {
        let (rows, cols) = self.kind.matrix_shape()?;
        let mut m = vec![0.0; rows * cols];
        // every supported layout stores [out][in...]; transpose it
        for c in 0..cols {
            for r in 0..rows {
                m[r * cols + c] = self.weights[c * rows + r];
            }
        }
        Some((rows, cols, m))
    }
}

/// Ordered layers of a basecaller.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGraph {
    pub name: String,
    pub layers: Vec<LayerSpec>,
    pub state_len: u32,
}

impl NetworkGraph {
    pub fn new(name: impl Into<String>, layers: Vec<LayerSpec>, state_len: u32) -> Result<Self> {
        let g = NetworkGraph {
            name: name.into(),
            layers,
            state_len,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Empty("network layers"));
        }
        let mut ch = 1;
        for layer in &self.layers {
            let (nw, nb) = layer.kind.param_shape();
            if layer.weights.len() != nw || layer.bias.len() != nb {
                return Err(Error::DimensionMismatch {
                    what: "layer parameters",
                    expected: nw + nb,
                    got: layer.param_count(),
                });
            }
            ch = layer.kind.output_channels(ch)?;
        }
        let want = CrfLayout::with_state_len(self.state_len).n_transitions();
        if ch != want {
            return Err(Error::DimensionMismatch {
                what: "network output width",
                expected: want,
                got: ch,
            });
        }
        Ok(())
    }

    pub fn layout(&self) -> CrfLayout {
        CrfLayout::with_state_len(self.state_len)
    }

    pub fn output_width(&self) -> usize {
        self.layout().n_states * DECISIONS
    }

    /// Total temporal downsampling.
    pub fn samples_per_frame(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l.kind {
                LayerKind::Conv1d { stride, .. } => stride,
                _ => 1,
            })
            .product()
    }

    pub fn receptive_field(&self) -> usize {
        let mut rf = 1;
        let mut jump = 1;
        for l in &self.layers {
            if let LayerKind::Conv1d { kernel, stride, .. } = l.kind {
                rf += (kernel - 1) * jump;
                jump *= stride;
            }
        }
        rf
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(LayerSpec::param_count).sum()
    }

    /// Indices (into `layers`) of crossbar-mappable layers, in order.
    pub fn weighted_layers(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.kind.is_weighted())
            .map(|(i, _)| i)
            .collect()
    }

    /// Replace the bounds of every clamp layer.
    pub fn with_clamp_bounds(mut self, lo: f32, hi: f32) -> Result<Self> {
        for l in &mut self.layers {
            if let LayerKind::Clamp { lo: a, hi: b } = &mut l.kind {
                *a = lo;
                *b = hi;
            }
        }
        self.validate()?;
        Ok(self)
    }
}

/// Default clamp bounds for variants that use clamps.
pub const CLAMP_BOUNDS: (f32, f32) = (-3.5, 3.5);

fn conv(in_channels: usize, out_channels: usize, kernel: usize, stride: usize) -> LayerKind {
    LayerKind::Conv1d {
        in_channels,
        out_channels,
        kernel,
        stride,
        padding: kernel / 2,
        bias: false,
    }
}

fn crf_network(
    name: &str,
    conv_out: usize,
    lstm_sizes: &[usize],
    state_len: u32,
    clamps: bool,
    seed: u64,
) -> NetworkGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clamp = LayerKind::Clamp {
        lo: CLAMP_BOUNDS.0,
        hi: CLAMP_BOUNDS.1,
    };
    let mut kinds = Vec::new();
    for c in [
        conv(1, 16, 5, 1),
        conv(16, 16, 5, 1),
        conv(16, conv_out, 19, 5),
    ] {
        kinds.push(c);
        kinds.push(LayerKind::Swish);
        if clamps {
            kinds.push(clamp.clone());
        }
    }
    let mut width = conv_out;
    for (i, &h) in lstm_sizes.iter().enumerate() {
        kinds.push(LayerKind::Lstm {
            input_size: width,
            hidden_size: h,
            reverse: i % 2 == 0,
        });
        width = h;
    }
    kinds.push(LayerKind::Linear {
        in_features: width,
        out_features: CrfLayout::with_state_len(state_len).n_transitions(),
    });
    if clamps {
        kinds.push(clamp);
    }
    let layers = kinds
        .into_iter()
        .map(|k| LayerSpec::random(k, &mut rng))
        .collect();
    NetworkGraph::new(name, layers, state_len).expect("builder topology is consistent")
}

/// Dorado-Fast-like topology: three convolutions (the first 1->16, k=5,
/// bias-free), five LSTMs of width 96, and a CRF head for state length 3.
pub fn build_dorado_fast(seed: u64) -> NetworkGraph {
    crf_network("dorado-fast", 96, &[96; 5], 3, false, seed)
}

/// AL-Dorado: clamps between convolutions and after the head, LSTM widths
/// 128/128/128/256/256, and a 20-wide state-length-1 CRF head.
pub fn build_al_dorado(seed: u64) -> NetworkGraph {
    crf_network("al-dorado", 128, &[128, 128, 128, 256, 256], 1, true, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lstm_widths(g: &NetworkGraph) -> Vec<usize> {
        g.layers
            .iter()
            .filter_map(|l| match l.kind {
                LayerKind::Lstm { hidden_size, .. } => Some(hidden_size),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn dorado_fast_geometry() {
        let g = build_dorado_fast(0);
        assert_eq!(g.layers[0].param_count(), 80);
        assert_eq!(lstm_widths(&g), vec![96; 5]);
        let total = g.parameter_count() as f64;
        assert!((total - 0.47e6).abs() <= 0.15 * 0.47e6, "{total}");
        assert_eq!(g.output_width(), 320);
        assert_eq!(g.samples_per_frame(), 5);
    }

    #[test]
    fn al_dorado_geometry() {
        let g = build_al_dorado(0);
        assert_eq!(lstm_widths(&g), vec![128, 128, 128, 256, 256]);
        assert_eq!(g.output_width(), 20);
        let total = g.parameter_count();
        assert!((1_200_000..=2_200_000).contains(&total), "{total}");
        let clamps = g
            .layers
            .iter()
            .filter(|l| matches!(l.kind, LayerKind::Clamp { .. }))
            .count();
        assert_eq!(clamps, 4);
        assert!(matches!(
            g.layers.last().unwrap().kind,
            LayerKind::Clamp { .. }
        ));
    }

    #[test]
    fn parameter_count_matches_brute_force() {
        for g in [build_dorado_fast(1), build_al_dorado(1)] {
            let brute: usize = g
                .layers
                .iter()
                .map(|l| l.weights.len() + l.bias.len())
                .sum();
            assert_eq!(g.parameter_count(), brute);
        }
    }

    #[test]
    fn builders_are_deterministic() {
        assert_eq!(build_al_dorado(5), build_al_dorado(5));
        assert_ne!(build_al_dorado(5), build_al_dorado(6));
    }

    #[test]
    fn mismatched_layers_are_rejected() {
        let layers = vec![
            LayerSpec::zeros(conv(1, 4, 3, 1)),
            LayerSpec::zeros(LayerKind::Linear {
                in_features: 5,
                out_features: 20,
            }),
        ];
        assert!(NetworkGraph::new("bad", layers, 1).is_err());
        assert!(LayerSpec::new(conv(1, 2, 3, 1), vec![0.0; 5], vec![]).is_err());
    }

    #[test]
    fn crossbar_matrix_is_transposed_layout() {
        let kind = LayerKind::Linear {
            in_features: 3,
            out_features: 2,
        };
        let l = LayerSpec::new(kind, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![0.0; 2]).unwrap();
        let (r, c, m) = l.crossbar_matrix().unwrap();
        assert_eq!((r, c), (3, 2));
        assert_eq!(m, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
    }

    #[test]
    fn receptive_field_of_builders() {
        assert_eq!(build_al_dorado(0).receptive_field(), 27);
    }
}
