use super::{argmax_lowest, MoveSequence};
use crate::error::{Error, Result};
use crate::frames::{TransitionFrames, DECISIONS};

/// Per-frame argmax; after the first frame the source state is forced to the
/// previous frame's destination. Ties go to the lowest transition index.
pub fn greedy_decode(frames: &TransitionFrames) -> Result<MoveSequence> {
    if frames.is_empty() {
        return Err(Error::Empty("transition frames"));
    }
    let layout = frames.layout();
    let mut picks = Vec::with_capacity(frames.len());
    let mut state: Option<usize> = None;
    for f in frames.frames() {
        let pick = match state {
            None => argmax_lowest(&f.iter().map(|&v| f64::from(v)).collect::<Vec<_>>()),
            Some(s) => {
                let row: Vec<f64> = f[s * DECISIONS..(s + 1) * DECISIONS]
                    .iter()
                    .map(|&v| f64::from(v))
                    .collect();
                s * DECISIONS + argmax_lowest(&row)
            }
        };
        state = Some(layout.dest(pick / DECISIONS, pick % DECISIONS));
        picks.push(pick);
    }
    Ok(MoveSequence::from_transitions(&picks))
}
