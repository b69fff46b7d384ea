//! Forward/backward passes over a CRF trellis, generic over the semiring.
//!
//! The sum semiring (log-sum-exp) yields path likelihoods; the max semiring
//! yields best-path scores. Both the exact and the windowed decoders run
//! through these same step functions, so windows that reach the end of the
//! sequence reproduce the exact decoder bit for bit.

pub(crate) trait Semiring {
    fn plus(a: f64, b: f64) -> f64;
}

pub(crate) struct LogSum;
pub(crate) struct MaxPlus;

impl Semiring for LogSum {
    #[inline]
    fn plus(a: f64, b: f64) -> f64 {
        if a == f64::NEG_INFINITY {
            return b;
        }
        if b == f64::NEG_INFINITY {
            return a;
        }
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    }
}

impl Semiring for MaxPlus {
    #[inline]
    fn plus(a: f64, b: f64) -> f64 {
        if b > a {
            b
        } else {
            a
        }
    }
}

/// `next[dest] = ⊕ prev[src] + w[src, d]` over all transitions into `dest`.
pub(crate) fn forward_step<S: Semiring>(
    prev: &[f64],
    weights: &[f64],
    dest: &[usize],
    n_decisions: usize,
) -> Vec<f64> {
    let mut next = vec![f64::NEG_INFINITY; prev.len()];
    for (i, &w) in weights.iter().enumerate() {
        let d = dest[i];
        next[d] = S::plus(next[d], prev[i / n_decisions] + w);
    }
    next
}

/// `prev[src] = ⊕_d w[src, d] + next[dest(src, d)]`.
pub(crate) fn backward_step<S: Semiring>(
    next: &[f64],
    weights: &[f64],
    dest: &[usize],
    n_decisions: usize,
) -> Vec<f64> {
    let mut prev = vec![f64::NEG_INFINITY; next.len()];
    for (i, &w) in weights.iter().enumerate() {
        let s = i / n_decisions;
        prev[s] = S::plus(prev[s], w + next[dest[i]]);
    }
    prev
}

/// Backward scores for the state entered by the transition at the frame just
/// before `window`, folding `window` from its last frame with a uniform
/// (all-zero) terminal.
pub(crate) fn backward_window<S: Semiring>(
    window: &[Vec<f64>],
    n_states: usize,
    dest: &[usize],
    n_decisions: usize,
) -> Vec<f64> {
    let mut beta = vec![0.0; n_states];
    for w in window.iter().rev() {
        beta = backward_step::<S>(&beta, w, dest, n_decisions);
    }
    beta
}

/// Combine forward, local and backward terms into per-transition scores.
pub(crate) fn marginal(
    alpha: &[f64],
    weights: &[f64],
    beta: &[f64],
    dest: &[usize],
    n_decisions: usize,
) -> Vec<f64> {
    weights
        .iter()
        .enumerate()
        .map(|(i, &w)| alpha[i / n_decisions] + w + beta[dest[i]])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsum_matches_direct_formula() {
        let v = LogSum::plus(1.0_f64.ln(), 3.0_f64.ln());
        assert!((v - 4.0_f64.ln()).abs() < 1e-12);
        assert_eq!(LogSum::plus(f64::NEG_INFINITY, 2.0), 2.0);
    }

    #[test]
    fn maxplus_is_max() {
        assert_eq!(MaxPlus::plus(1.0, 2.0), 2.0);
        assert_eq!(MaxPlus::plus(f64::NEG_INFINITY, -3.0), -3.0);
    }
}
