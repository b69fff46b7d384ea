use super::{LayerKind, LayerSpec, NetworkGraph};
use crate::error::{Error, Result};
use crate::frames::TransitionFrames;

/// Time-major activations: `data[t * channels + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Activations {
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Activations {
    pub fn new(channels: usize, data: Vec<f32>) -> Self {
        debug_assert!(channels > 0 && data.len().is_multiple_of(channels));
        Activations { channels, data }
    }

    pub fn from_signal(samples: &[f32]) -> Self {
        Activations::new(1, samples.to_vec())
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.data[t * self.channels..(t + 1) * self.channels]
    }
}

pub(crate) fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

pub(crate) fn swish(x: f32) -> f32 {
    x * sigmoid(x)
}

/// Output length of a strided, zero-padded 1D convolution.
pub(crate) fn conv_out_len(len: usize, kernel: usize, stride: usize, padding: usize) -> usize {
    let padded = len + 2 * padding;
    if padded < kernel {
        0
    } else {
        (padded - kernel) / stride + 1
    }
}

/// Cross-correlation as in common deep-learning frameworks.
pub fn conv1d(layer: &LayerSpec, input: &Activations) -> Result<Activations> {
    let LayerKind::Conv1d {
        in_channels,
        out_channels,
        kernel,
        stride,
        padding,
        ..
    } = layer.kind
    else {
        return Err(Error::param("layer", "expected a conv1d layer"));
    };
    if input.channels != in_channels {
        return Err(Error::DimensionMismatch {
            what: "conv1d input channels",
            expected: in_channels,
            got: input.channels,
        });
    }
    let len = input.len();
    let out_len = conv_out_len(len, kernel, stride, padding);
    let mut out = vec![0.0f32; out_len * out_channels];
    for t in 0..out_len {
        let origin = (t * stride) as isize - padding as isize;
        for o in 0..out_channels {
            let w = &layer.weights[o * in_channels * kernel..(o + 1) * in_channels * kernel];
            let mut acc = layer.bias.get(o).copied().unwrap_or(0.0);
            for (c, wc) in w.chunks_exact(kernel).enumerate() {
                for (j, &wv) in wc.iter().enumerate() {
                    let pos = origin + j as isize;
                    if pos >= 0 && (pos as usize) < len {
                        acc += wv * input.data[pos as usize * in_channels + c];
                    }
                }
            }
            out[t * out_channels + o] = acc;
        }
    }
    Ok(Activations::new(out_channels, out))
}

/// One LSTM cell update with gate order `i, f, g, o`.
pub fn lstm_step(
    layer: &LayerSpec,
    x: &[f32],
    h_prev: &[f32],
    c_prev: &[f32],
) -> Result<(Vec<f32>, Vec<f32>)> {
    let LayerKind::Lstm {
        input_size,
        hidden_size,
        ..
    } = layer.kind
    else {
        return Err(Error::param("layer", "expected an lstm layer"));
    };
    for (what, want, got) in [
        ("lstm input", input_size, x.len()),
        ("lstm hidden state", hidden_size, h_prev.len()),
        ("lstm cell state", hidden_size, c_prev.len()),
    ] {
        if want != got {
            return Err(Error::DimensionMismatch {
                what,
                expected: want,
                got,
            });
        }
    }
    let width = input_size + hidden_size;
    let gates: Vec<f32> = (0..4 * hidden_size)
        .map(|r| {
            let w = &layer.weights[r * width..(r + 1) * width];
            let (wx, wh) = w.split_at(input_size);
            layer.bias[r] + dot(wx, x) + dot(wh, h_prev)
        })
        .collect();
    Ok(lstm_gates_to_state(&gates, c_prev))
}

/// Apply the cell nonlinearity to pre-activation gates laid out `[i | f | g | o]`.
pub(crate) fn lstm_gates_to_state(gates: &[f32], c_prev: &[f32]) -> (Vec<f32>, Vec<f32>) {
    let h = c_prev.len();
    let mut c = vec![0.0; h];
    let mut out = vec![0.0; h];
    for k in 0..h {
        let i = sigmoid(gates[k]);
        let f = sigmoid(gates[h + k]);
        let g = gates[2 * h + k].tanh();
        let o = sigmoid(gates[3 * h + k]);
        c[k] = f * c_prev[k] + i * g;
        out[k] = o * c[k].tanh();
    }
    (out, c)
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lstm_layer(layer: &LayerSpec, input: &Activations) -> Result<Activations> {
    let LayerKind::Lstm {
        hidden_size,
        reverse,
        ..
    } = layer.kind
    else {
        unreachable!()
    };
    let len = input.len();
    let mut out = vec![0.0; len * hidden_size];
    let mut h = vec![0.0; hidden_size];
    let mut c = vec![0.0; hidden_size];
    let order: Box<dyn Iterator<Item = usize>> = if reverse {
        Box::new((0..len).rev())
    } else {
        Box::new(0..len)
    };
    for t in order {
        (h, c) = lstm_step(layer, input.row(t), &h, &c)?;
        out[t * hidden_size..(t + 1) * hidden_size].copy_from_slice(&h);
    }
    Ok(Activations::new(hidden_size, out))
}

fn linear(layer: &LayerSpec, input: &Activations) -> Activations {
    let LayerKind::Linear {
        in_features,
        out_features,
    } = layer.kind
    else {
        unreachable!()
    };
    let mut out = Vec::with_capacity(input.len() * out_features);
    for t in 0..input.len() {
        let x = input.row(t);
        for o in 0..out_features {
            out.push(
                layer.bias[o] + dot(&layer.weights[o * in_features..(o + 1) * in_features], x),
            );
        }
    }
    Activations::new(out_features, out)
}

/// Evaluate one layer in full precision.
pub(crate) fn forward_layer(layer: &LayerSpec, input: Activations) -> Result<Activations> {
    Ok(match layer.kind {
        LayerKind::Conv1d { .. } => conv1d(layer, &input)?,
        LayerKind::Lstm { .. } => lstm_layer(layer, &input)?,
        LayerKind::Linear { .. } => linear(layer, &input),
        LayerKind::Swish => map(input, swish),
        LayerKind::Clamp { lo, hi } => map(input, |v| v.clamp(lo, hi)),
        LayerKind::BatchNorm { channels } => {
            let mut a = input;
            for (i, v) in a.data.iter_mut().enumerate() {
                let c = i % channels;
                *v = *v * layer.weights[c] + layer.bias[c];
            }
            a
        }
    })
}

fn map(mut a: Activations, f: impl Fn(f32) -> f32) -> Activations {
    a.data.iter_mut().for_each(|v| *v = f(*v));
    a
}

/// Zero-pad `chunk` at the tail up to the receptive field. The flag reports
/// whether padding was added.
pub fn pad_to_receptive_field(graph: &NetworkGraph, chunk: &[f32]) -> (Vec<f32>, bool) {
    let rf = graph.receptive_field();
    let mut v = chunk.to_vec();
    if v.len() < rf {
        v.resize(rf, 0.0);
        (v, true)
    } else {
        (v, false)
    }
}

/// Full-precision forward pass producing `len / samples_per_frame` frames.
pub fn infer_reference(graph: &NetworkGraph, chunk: &[f32]) -> Result<TransitionFrames> {
    if chunk.is_empty() {
        return Err(Error::Empty("chunk"));
    }
    let (signal, _) = pad_to_receptive_field(graph, chunk);
    let frames = signal.len() / graph.samples_per_frame();
    let mut act = Activations::from_signal(&signal);
    for layer in &graph.layers {
        act = forward_layer(layer, act)?;
    }
    finish_frames(graph, act, frames)
}

pub(crate) fn finish_frames(
    graph: &NetworkGraph,
    mut act: Activations,
    frames: usize,
) -> Result<TransitionFrames> {
    let keep = frames.min(act.len());
    act.data.truncate(keep * act.channels);
    let out = TransitionFrames::new(graph.layout().n_states, act.data)?;
    out.check_finite()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{build_al_dorado, LayerSpec};
    use super::*;
    use approx::assert_relative_eq;

    fn conv_kind(k: usize) -> LayerKind {
        LayerKind::Conv1d {
            in_channels: 1,
            out_channels: 1,
            kernel: k,
            stride: 1,
            padding: 0,
            bias: false,
        }
    }

    #[test]
    fn valid_mode_conv_example() {
        let layer = LayerSpec::new(conv_kind(3), vec![1.0, 0.0, -1.0], vec![]).unwrap();
        let out = conv1d(&layer, &Activations::from_signal(&[1.0, 2.0, 4.0, 8.0])).unwrap();
        assert_eq!(out.data, vec![-3.0, -6.0]);
    }

    #[test]
    fn lstm_zero_everything() {
        let kind = LayerKind::Lstm {
            input_size: 3,
            hidden_size: 2,
            reverse: false,
        };
        let (h, c) = lstm_step(&LayerSpec::zeros(kind), &[0.0; 3], &[0.0; 2], &[0.0; 2]).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn lstm_hand_computed() {
        // input 1, hidden 1: gates rows i, f, g, o over [x, h]
        let kind = LayerKind::Lstm {
            input_size: 1,
            hidden_size: 1,
            reverse: false,
        };
        let w = vec![0.5, -0.25, 1.0, 0.5, 2.0, 0.0, -1.0, 1.0];
        let b = vec![0.1, 0.0, -0.2, 0.3];
        let layer = LayerSpec::new(kind, w, b).unwrap();
        let (x, h0, c0) = (0.8f32, 0.4f32, -0.6f32);
        let s = |v: f32| 1.0 / (1.0 + (-v).exp());
        let i = s(0.5 * x - 0.25 * h0 + 0.1);
        let f = s(1.0 * x + 0.5 * h0);
        let g = (2.0 * x - 0.2).tanh();
        let o = s(-x + 1.0 * h0 + 0.3);
        let c = f * c0 + i * g;
        let h = o * c.tanh();
        let (hh, cc) = lstm_step(&layer, &[x], &[h0], &[c0]).unwrap();
        assert_relative_eq!(hh[0], h, epsilon = 1e-6);
        assert_relative_eq!(cc[0], c, epsilon = 1e-6);
    }

    #[test]
    fn lstm_dimension_mismatch() {
        let kind = LayerKind::Lstm {
            input_size: 2,
            hidden_size: 2,
            reverse: false,
        };
        assert!(lstm_step(&LayerSpec::zeros(kind), &[0.0; 3], &[0.0; 2], &[0.0; 2]).is_err());
    }

    #[test]
    fn al_dorado_frame_count() {
        let g = build_al_dorado(3);
        let chunk: Vec<f32> = (0..4000).map(|i| ((i as f32) * 0.01).sin()).collect();
        let out = infer_reference(&g, &chunk).unwrap();
        assert_eq!(out.len(), 800);
        assert_eq!(out.width(), 20);
    }

    #[test]
    fn zero_network_is_constant() {
        let mut g = build_al_dorado(0);
        for l in &mut g.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.bias.iter_mut().for_each(|w| *w = 0.0);
        }
        let chunk: Vec<f32> = (0..500).map(|i| i as f32).collect();
        let out = infer_reference(&g, &chunk).unwrap();
        let first = out.frame(0).to_vec();
        assert!(out.frames().all(|f| f == first.as_slice()));
    }

    #[test]
    fn short_chunk_is_padded() {
        let g = build_al_dorado(0);
        let (v, padded) = pad_to_receptive_field(&g, &[1.0; 7]);
        assert!(padded);
        assert_eq!(v.len(), g.receptive_field());
        assert!(infer_reference(&g, &[]).is_err());
    }
}
