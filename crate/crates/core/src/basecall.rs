//! Read-level basecalling: chunk, infer, decode, stitch, score.

use rayon::prelude::*;

use crate::decoder::DecoderChoice;
use crate::dnn::toy::BenchmarkRead;
use crate::error::Result;
use crate::frames::{bases_to_string, TransitionFrames};
use crate::pipeline::{aligned_accuracy, chunk, stitch, ChunkCall, ChunkPlan};

/// Chunking used with the toy benchmark reads.
pub const TOY_CHUNK_PLAN: ChunkPlan = ChunkPlan {
    chunk_size: 1000,
    overlap: 200,
};

/// Call one read. `infer` maps a chunk of samples to transition frames.
pub fn basecall_read<F>(
    samples: &[f32],
    plan: &ChunkPlan,
    samples_per_frame: usize,
    decoder: DecoderChoice,
    infer: F,
) -> Result<String>
where
    F: Fn(usize, &[f32]) -> Result<TransitionFrames>,
{
    plan.validate()?;
    let mut calls = Vec::new();
    for (i, c) in chunk(samples, plan).into_iter().enumerate() {
        let frames = infer(i, &c.samples)?;
        let moves = decoder.decode(&frames)?;
        calls.push(ChunkCall {
            start: c.start,
            valid_len: c.valid_len,
            bases: moves.called_bases(),
        });
    }
    Ok(bases_to_string(&stitch(&calls, plan, samples_per_frame)?))
}

/// Per-read aligned accuracy, in read order. `infer` receives
/// `(read index, chunk index, samples)`.
pub fn evaluate<F>(
    reads: &[BenchmarkRead],
    plan: &ChunkPlan,
    samples_per_frame: usize,
    decoder: DecoderChoice,
    infer: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize, usize, &[f32]) -> Result<TransitionFrames> + Sync,
{
    reads
        .par_iter()
        .enumerate()
        .map(|(r, read)| {
            let call = basecall_read(&read.samples, plan, samples_per_frame, decoder, |c, s| {
                infer(r, c, s)
            })?;
            if call.is_empty() {
                return Ok(0.0);
            }
            aligned_accuracy(&call, &read.sequence)
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// One-sided paired non-inferiority check: is `a` not worse than `b` at 95%
/// confidence, allowing `margin`? Returns the mean difference `a - b` and
/// the verdict.
pub fn not_worse(a: &[f64], b: &[f64], margin: f64) -> (f64, bool) {
    assert_eq!(a.len(), b.len());
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let m = mean(&diffs);
    if diffs.len() < 2 {
        return (m, m + margin >= 0.0);
    }
    let var = diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    (m, m + 1.645 * se + margin >= 0.0)
}
