use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global alignment scores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignScoring {
    pub match_score: i32,
    pub mismatch: i32,
    pub gap: i32,
}

impl Default for AlignScoring {
    fn default() -> Self {
        AlignScoring {
            match_score: 1,
            mismatch: -1,
            gap: -1,
        }
    }
}

/// Summary of an optimal global alignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Alignment {
    pub score: i64,
    pub matches: usize,
    /// Columns including insertions and deletions.
    pub length: usize,
}

impl Alignment {
    pub fn accuracy(&self) -> f64 {
        if self.length == 0 {
            0.0
        } else {
            self.matches as f64 / self.length as f64
        }
    }
}

// Ordering key: best score, then most matches, then shortest alignment.
type Key = (i64, i64, i64);

fn better(a: Key, b: Key) -> Key {
    if a >= b {
        a
    } else {
        b
    }
}

fn add(k: Key, score: i32, matched: bool) -> Key {
    (k.0 + score as i64, k.1 + matched as i64, k.2 - 1)
}

/// Needleman-Wunsch over bytes, keeping two rows.
pub fn align(call: &[u8], reference: &[u8], s: AlignScoring) -> Alignment {
    let m = reference.len();
    let mut prev: Vec<Key> = (0..=m)
        .map(|j| (j as i64 * s.gap as i64, 0, -(j as i64)))
        .collect();
    let mut cur = vec![(0, 0, 0); m + 1];
    for &a in call {
        cur[0] = add(prev[0], s.gap, false);
        for j in 1..=m {
            let hit = a == reference[j - 1];
            let diag = add(
                prev[j - 1],
                if hit { s.match_score } else { s.mismatch },
                hit,
            );
            let up = add(prev[j], s.gap, false);
            let left = add(cur[j - 1], s.gap, false);
            cur[j] = better(diag, better(up, left));
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (score, matches, neg_len) = prev[m];
    Alignment {
        score,
        matches: matches as usize,
        length: (-neg_len) as usize,
    }
}

/// Matches divided by alignment length, default scoring.
pub fn aligned_accuracy(call: &str, reference: &str) -> Result<f64> {
    aligned_accuracy_with(call, reference, AlignScoring::default())
}

pub fn aligned_accuracy_with(call: &str, reference: &str, scoring: AlignScoring) -> Result<f64> {
    if call.is_empty() || reference.is_empty() {
        return Err(Error::Empty("alignment input"));
    }
    Ok(align(call.as_bytes(), reference.as_bytes(), scoring).accuracy())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(aligned_accuracy("ACGTAC", "ACGTAC").unwrap(), 1.0);
        assert_eq!(aligned_accuracy("ACGT", "ACGG").unwrap(), 0.75);
        assert_eq!(aligned_accuracy("AAAA", "TTTT").unwrap(), 0.0);
        assert!(aligned_accuracy("", "A").is_err());
    }

    #[test]
    fn indel_counts_in_length() {
        // one deletion: 4 matches over 5 columns
        assert_eq!(aligned_accuracy("ACGT", "ACGGT").unwrap(), 0.8);
    }
}
