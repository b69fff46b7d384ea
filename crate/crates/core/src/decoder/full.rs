use super::semiring::{backward_step, forward_step, marginal, LogSum, MaxPlus, Semiring};
use super::{argmax_lowest, layout_dest_table, MoveSequence};
use crate::error::{Error, Result};
use crate::frames::{CrfLayout, TransitionFrames, DECISIONS};

fn frames_f64(frames: &TransitionFrames) -> Vec<Vec<f64>> {
    frames
        .frames()
        .map(|f| f.iter().map(|&v| f64::from(v)).collect())
        .collect()
}

/// Forward pass then backward pass in semiring `S`; returns per-frame
/// marginal transition scores.
fn two_pass<S: Semiring>(weights: &[Vec<f64>], layout: CrfLayout) -> Vec<Vec<f64>> {
    let dest = layout_dest_table(layout);
    let n = layout.n_states;
    let mut alphas = Vec::with_capacity(weights.len());
    let mut alpha = vec![0.0; n];
    for w in weights {
        let next = forward_step::<S>(&alpha, w, &dest, DECISIONS);
        alphas.push(std::mem::replace(&mut alpha, next));
    }
    let mut out = vec![Vec::new(); weights.len()];
    let mut beta = vec![0.0; n];
    for t in (0..weights.len()).rev() {
        out[t] = marginal(&alphas[t], &weights[t], &beta, &dest, DECISIONS);
        beta = backward_step::<S>(&beta, &weights[t], &dest, DECISIONS);
    }
    out
}

/// Stage one: log posterior score of every transition at every frame, with
/// uniform initial and terminal state scores.
pub fn transition_posteriors(frames: &TransitionFrames) -> Result<Vec<Vec<f64>>> {
    if frames.is_empty() {
        return Err(Error::Empty("transition frames"));
    }
    frames.check_finite()?;
    Ok(two_pass::<LogSum>(&frames_f64(frames), frames.layout()))
}

/// Exact two-stage CRF decode over the whole sequence.
///
/// Stage one computes transition posteriors with log-sum-exp forward and
/// backward recursions; stage two runs max-plus forward/backward over those
/// posteriors and picks, per frame, the transition on the best globally
/// consistent path.
pub fn full_crf_decode(frames: &TransitionFrames) -> Result<MoveSequence> {
    let posteriors = transition_posteriors(frames)?;
    let scores = two_pass::<MaxPlus>(&posteriors, frames.layout());
    let picks: Vec<usize> = scores.iter().map(|v| argmax_lowest(v)).collect();
    Ok(MoveSequence::from_transitions(&picks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{collapse_moves, Step};
    use crate::frames::Base;

    fn frames(t: usize, f: impl Fn(usize, usize) -> f32) -> TransitionFrames {
        let data = (0..t)
            .flat_map(|ti| (0..20).map(move |i| (ti, i)))
            .map(|(ti, i)| f(ti, i))
            .collect();
        TransitionFrames::new(4, data).unwrap()
    }

    #[test]
    fn single_dominant_transition_is_selected() {
        // state C (1), move to T (decision 4)
        let target = 5 + 4;
        let fr = frames(1, |_, i| if i == target { 0.0 } else { -1e9 });
        let m = full_crf_decode(&fr).unwrap();
        assert_eq!(m.initial_state, 1);
        assert_eq!(m.steps, vec![Step::Move(Base::T)]);
        assert_eq!(collapse_moves(&m), "CT");
    }

    #[test]
    fn constant_shift_does_not_change_decode() {
        let fr = frames(9, |t, i| ((t * 31 + i * 17) % 23) as f32 * 0.37 - 3.0);
        let shifted = frames(9, |t, i| ((t * 31 + i * 17) % 23) as f32 * 0.37 - 3.0 + 7.3);
        assert_eq!(
            full_crf_decode(&fr).unwrap(),
            full_crf_decode(&shifted).unwrap()
        );
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        let fr = frames(2, |t, i| if t == 1 && i == 3 { f32::NAN } else { 0.0 });
        assert!(matches!(
            full_crf_decode(&fr),
            Err(Error::NonFinite { frame: 1 })
        ));
        let empty = TransitionFrames::new(4, vec![]).unwrap();
        assert!(full_crf_decode(&empty).is_err());
    }

    #[test]
    fn posteriors_normalise_per_frame() {
        let fr = frames(5, |t, i| ((t * 7 + i * 3) % 11) as f32 * 0.2);
        let u = transition_posteriors(&fr).unwrap();
        let z: Vec<f64> = u
            .iter()
            .map(|row| {
                row.iter()
                    .fold(f64::NEG_INFINITY, |a, &b| LogSum::plus(a, b))
            })
            .collect();
        for w in z.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn supports_longer_state_lengths() {
        let n_states = 64;
        let width = n_states * 5;
        let data = (0..6 * width)
            .map(|i| ((i * 37) % 101) as f32 * 0.01)
            .collect();
        let fr = TransitionFrames::new(n_states, data).unwrap();
        let m = full_crf_decode(&fr).unwrap();
        assert_eq!(m.len(), 6);
    }
}
