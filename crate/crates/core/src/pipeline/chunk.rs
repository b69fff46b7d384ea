use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::Base;

/// Overlapping fixed-size windows over a read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkPlan {
    pub chunk_size: usize,
    pub overlap: usize,
}

impl Default for ChunkPlan {
    fn default() -> Self {
        ChunkPlan {
            chunk_size: 4000,
            overlap: 500,
        }
    }
}

impl ChunkPlan {
    pub fn new(chunk_size: usize, overlap: usize) -> Result<Self> {
        let plan = ChunkPlan {
            chunk_size,
            overlap,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 || self.overlap >= self.chunk_size {
            return Err(Error::param("chunk", "need 0 <= overlap < chunk_size"));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.chunk_size - self.overlap
    }

    /// Chunk start offsets for a read of `len` samples.
    pub fn starts(&self, len: usize) -> Vec<usize> {
        let mut out = vec![0];
        let mut s = 0;
        while s + self.chunk_size < len {
            s += self.stride();
            out.push(s);
        }
        out
    }

    /// Fraction of each chunk's samples that are also in a neighbour, for an
    /// interior chunk.
    pub fn duplicated_fraction(&self) -> f64 {
        2.0 * self.overlap as f64 / self.chunk_size as f64
    }
}

/// One window of a read, zero-padded to the plan's size.
#[derive(Clone, Debug, PartialEq)]
pub struct Chunk {
    pub start: usize,
    pub samples: Vec<f32>,
    /// Samples that came from the read; the rest is padding.
    pub valid_len: usize,
}

impl Chunk {
    pub fn is_padded(&self) -> bool {
        self.valid_len < self.samples.len()
    }

    pub fn end(&self) -> usize {
        self.start + self.valid_len
    }
}

pub fn chunk(read: &[f32], plan: &ChunkPlan) -> Vec<Chunk> {
    plan.starts(read.len())
        .into_iter()
        .map(|start| {
            let end = (start + plan.chunk_size).min(read.len());
            let mut samples = read[start..end].to_vec();
            let valid_len = samples.len();
            samples.resize(plan.chunk_size, 0.0);
            Chunk {
                start,
                samples,
                valid_len,
            }
        })
        .collect()
}

/// Decoded bases of one chunk, each tagged with the frame that emitted it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChunkCall {
    pub start: usize,
    pub valid_len: usize,
    pub bases: Vec<(Base, usize)>,
}

/// Merge per-chunk calls. Interior boundaries are cut half-way through the
/// overlap; every chunk keeps the bases emitted on its side of each cut.
pub fn stitch(
    calls: &[ChunkCall],
    plan: &ChunkPlan,
    samples_per_frame: usize,
) -> Result<Vec<Base>> {
    if calls.is_empty() {
        return Err(Error::Empty("chunk calls"));
    }
    let cuts: Vec<usize> = calls[1..]
        .iter()
        .map(|c| c.start + plan.overlap / 2)
        .collect();
    let mut out = Vec::new();
    for (i, call) in calls.iter().enumerate() {
        let lo = if i == 0 { 0 } else { cuts[i - 1] };
        let hi = cuts.get(i).copied().unwrap_or(usize::MAX);
        out.extend(call.bases.iter().filter_map(|&(b, frame)| {
            let offset = frame * samples_per_frame;
            let pos = call.start + offset;
            (offset < call.valid_len && pos >= lo && pos < hi).then_some(b)
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::parse_bases;

    #[test]
    fn starts_for_eleven_thousand() {
        let plan = ChunkPlan::default();
        assert_eq!(plan.starts(11_000), vec![0, 3500, 7000]);
        let chunks = chunk(&vec![1.0; 11_000], &plan);
        assert_eq!(chunks.len(), 3);
        assert!(!chunks[2].is_padded());
    }

    #[test]
    fn default_duplication_is_quarter() {
        assert_eq!(ChunkPlan::default().duplicated_fraction(), 0.25);
    }

    #[test]
    fn short_read_is_one_padded_chunk() {
        let chunks = chunk(&[0.5; 10], &ChunkPlan::default());
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].samples.len(), 4000);
        assert_eq!(chunks[0].valid_len, 10);
        assert!(chunks[0].is_padded());
    }

    #[test]
    fn invalid_plans() {
        assert!(ChunkPlan::new(10, 10).is_err());
        assert!(ChunkPlan::new(0, 0).is_err());
    }

    fn call(start: usize, valid_len: usize, s: &str, frames: &[usize]) -> ChunkCall {
        ChunkCall {
            start,
            valid_len,
            bases: parse_bases(s)
                .unwrap()
                .into_iter()
                .zip(frames.iter().copied())
                .collect(),
        }
    }

    #[test]
    fn single_chunk_identity() {
        let c = call(0, 100, "ACGT", &[0, 10, 20, 30]);
        let plan = ChunkPlan::new(100, 20).unwrap();
        assert_eq!(
            stitch(&[c], &plan, 1).unwrap(),
            parse_bases("ACGT").unwrap()
        );
    }

    #[test]
    fn zero_overlap_concatenates() {
        let plan = ChunkPlan::new(10, 0).unwrap();
        let a = call(0, 10, "AC", &[0, 5]);
        let b = call(10, 10, "GT", &[0, 9]);
        assert_eq!(
            stitch(&[a, b], &plan, 1).unwrap(),
            parse_bases("ACGT").unwrap()
        );
    }

    #[test]
    fn overlap_is_trimmed_at_midpoint() {
        let plan = ChunkPlan::new(10, 4).unwrap();
        // cut at 6 + 2 = 8
        let a = call(0, 10, "ACG", &[1, 7, 9]);
        let b = call(6, 4, "GTA", &[3, 3, 5]);
        let got = stitch(&[a, b], &plan, 1).unwrap();
        assert_eq!(got, parse_bases("ACGT").unwrap());
    }

    #[test]
    fn empty_calls_error() {
        assert!(stitch(&[], &ChunkPlan::default(), 1).is_err());
    }
}
