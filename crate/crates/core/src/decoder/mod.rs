//! CRF-CTC decoding: an exact two-stage decoder, a greedy baseline, and the
//! streaming LookAround decoder with its hardware cost model.

mod cost;
mod full;
mod greedy;
mod lookaround;
pub(crate) mod semiring;

pub use cost::{decoder_cost, DecoderCost, LaParams};
pub use full::{full_crf_decode, transition_posteriors};
pub use greedy::greedy_decode;
pub use lookaround::{lookaround_decode, Decision, LookAroundDecoder, StreamStats};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frames::{Base, CrfLayout, TransitionFrames, DECISIONS};

/// Which decoder turns transition scores into moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderChoice {
    /// Exact two-stage decode over the whole chunk.
    #[default]
    Full,
    Greedy,
    LookAround(LaParams),
}

impl DecoderChoice {
    pub fn decode(&self, frames: &TransitionFrames) -> Result<MoveSequence> {
        match self {
            DecoderChoice::Full => full_crf_decode(frames),
            DecoderChoice::Greedy => greedy_decode(frames),
            DecoderChoice::LookAround(params) => Ok(lookaround_decode(frames, *params)?.0),
        }
    }
}

/// A single per-frame decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Stay,
    Move(Base),
}

impl Step {
    fn from_decision(d: usize) -> Step {
        if d == 0 {
            Step::Stay
        } else {
            Step::Move(Base::from_index(d - 1))
        }
    }
}

/// Decoded path: the state before the first frame plus one step per frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveSequence {
    pub initial_state: usize,
    pub steps: Vec<Step>,
}

impl MoveSequence {
    /// Build from per-frame transition indices (`state * 5 + decision`).
    pub fn from_transitions(transitions: &[usize]) -> MoveSequence {
        let initial_state = transitions.first().map_or(0, |&i| i / DECISIONS);
        MoveSequence {
            initial_state,
            steps: transitions
                .iter()
                .map(|&i| Step::from_decision(i % DECISIONS))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Bases with the frame index that emitted each; the initial state is
    /// attributed to frame 0.
    pub fn called_bases(&self) -> Vec<(Base, usize)> {
        let mut out = Vec::with_capacity(self.steps.len() / 2 + 1);
        if self.steps.is_empty() {
            return out;
        }
        out.push((Base::from_index(self.initial_state), 0));
        for (t, step) in self.steps.iter().enumerate() {
            if let Step::Move(b) = step {
                out.push((*b, t));
            }
        }
        out
    }
}

/// Collapse a move sequence into its base string.
pub fn collapse_moves(moves: &MoveSequence) -> String {
    moves
        .called_bases()
        .into_iter()
        .map(|(b, _)| b.to_char())
        .collect()
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn layout_dest_table(layout: CrfLayout) -> Vec<usize> {
    (0..layout.n_transitions())
        .map(|i| layout.dest(i / DECISIONS, i % DECISIONS))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoder_choice_json() {
        let c = DecoderChoice::LookAround(LaParams::new(2, 3).unwrap());
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(text, r#"{"kind":"look_around","l_tp":2,"l_mlp":3}"#);
        assert_eq!(serde_json::from_str::<DecoderChoice>(&text).unwrap(), c);
        assert!(serde_json::from_str::<DecoderChoice>(
            r#"{"kind":"look_around","l_tp":0,"l_mlp":1}"#
        )
        .is_err());
    }

    fn seq(initial: Base, steps: &[Step]) -> MoveSequence {
        MoveSequence {
            initial_state: initial.index(),
            steps: steps.to_vec(),
        }
    }

    #[test]
    fn collapse_examples() {
        use Step::*;
        assert_eq!(collapse_moves(&seq(Base::A, &[Stay, Stay, Stay])), "A");
        assert_eq!(
            collapse_moves(&seq(Base::A, &[Stay, Move(Base::C), Stay, Move(Base::C)])),
            "ACC"
        );
        assert_eq!(
            collapse_moves(&seq(Base::G, &[Move(Base::A), Move(Base::T)])),
            "GAT"
        );
    }

    #[test]
    fn empty_sequence_collapses_to_nothing() {
        assert_eq!(collapse_moves(&seq(Base::A, &[])), "");
    }

    #[test]
    fn argmax_ties_take_lowest() {
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_lowest(&[0.0; 20]), 0);
    }
}
