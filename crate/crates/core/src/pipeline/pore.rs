use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{parse_bases, Base, N_BASES};

/// Samples-per-base distribution: `min` plus a geometric tail, so the mean
/// is `mean` and every base spans at least `min` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dwell {
    pub mean: f64,
    pub min: u32,
}

impl Dwell {
    pub fn fixed(n: u32) -> Self {
        Dwell {
            mean: n as f64,
            min: n,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mean > 0.0) || self.min == 0 || self.mean < self.min as f64 {
            return Err(Error::param("dwell", "need mean >= min >= 1"));
        }
        Ok(())
    }

    fn sampler(&self) -> Option<Geometric> {
        let extra = self.mean - self.min as f64;
        (extra > 0.0).then(|| Geometric::new(1.0 / (1.0 + extra)).expect("p in (0, 1]"))
    }
}

impl Default for Dwell {
    fn default() -> Self {
        Dwell { mean: 10.0, min: 1 }
    }
}

/// Synthetic pore: a mean current level per k-mer plus Gaussian noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoreModel {
    pub k: u32,
    /// Indexed by the k-mer's base-4 value, oldest base most significant.
    pub levels: Vec<f32>,
    pub noise_std: f32,
    pub dwell: Dwell,
}

impl PoreModel {
    /// Random normalised levels for every k-mer.
    pub fn random(k: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = N_BASES.pow(k);
        let levels = (0..n).map(|_| rng.gen_range(-2.0f32..2.0)).collect();
        PoreModel {
            k,
            levels,
            noise_std: 0.1,
            dwell: Dwell::default(),
        }
    }

    /// Single-base model with evenly spaced levels, used by the toy benchmark.
    pub fn toy() -> Self {
        PoreModel {
            k: 1,
            levels: vec![-1.5, -0.5, 0.5, 1.5],
            noise_std: 0.0,
            dwell: Dwell { mean: 8.0, min: 2 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("pore.k", "must be at least 1"));
        }
        let n = N_BASES.pow(self.k);
        if self.levels.len() != n {
            return Err(Error::DimensionMismatch {
                what: "pore levels",
                expected: n,
                got: self.levels.len(),
            });
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::param("pore.noise_std", "must be non-negative"));
        }
        self.dwell.validate()
    }

    /// Level of the k-mer ending at `pos`; positions before the read start
    /// are treated as `A`.
    pub fn level_at(&self, seq: &[Base], pos: usize) -> f32 {
        let mut idx = 0;
        for j in 0..self.k as usize {
            let b = (pos + j + 1)
                .checked_sub(self.k as usize)
                .map_or(0, |p| seq[p].index());
            idx = idx * N_BASES + b;
        }
        self.levels[idx]
    }
}

impl Default for PoreModel {
    fn default() -> Self {
        PoreModel::random(6, 0)
    }
}

/// A synthetic read with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct SquiggleRead {
    pub samples: Vec<f32>,
    pub sequence: Vec<Base>,
    /// First sample of each base.
    pub base_starts: Vec<usize>,
}

/// Render `sequence` through `model`.
pub fn synth_squiggle(sequence: &str, model: &PoreModel, seed: u64) -> Result<SquiggleRead> {
    let seq = parse_bases(sequence)?;
    if seq.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0f32, model.noise_std)
        .map_err(|e| Error::param("pore.noise_std", e.to_string()))?;
    let tail = model.dwell.sampler();
    let mut samples = Vec::with_capacity(seq.len() * model.dwell.mean.ceil() as usize);
    let mut base_starts = Vec::with_capacity(seq.len());
    for pos in 0..seq.len() {
        let dwell = model.dwell.min as u64 + tail.map_or(0, |g| g.sample(&mut rng));
        let level = model.level_at(&seq, pos);
        base_starts.push(samples.len());
        for _ in 0..dwell {
            samples.push(level + noise.sample(&mut rng));
        }
    }
    Ok(SquiggleRead {
        samples,
        sequence: seq,
        base_starts,
    })
}

/// Uniform random bases; with `homopolymers == false` no base repeats its
/// predecessor.
pub fn random_sequence(len: usize, homopolymers: bool, rng: &mut impl Rng) -> String {
    let mut out = String::with_capacity(len);
    let mut prev: Option<usize> = None;
    for _ in 0..len {
        let b = match prev {
            Some(p) if !homopolymers => (p + rng.gen_range(1..N_BASES)) % N_BASES,
            _ => rng.gen_range(0..N_BASES),
        };
        out.push(Base::from_index(b).to_char());
        prev = Some(b);
    }
    out
}
