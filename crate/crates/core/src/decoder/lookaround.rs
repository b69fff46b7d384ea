use std::collections::VecDeque;

use super::semiring::{backward_window, forward_step, marginal, LogSum, MaxPlus};
use super::{argmax_lowest, layout_dest_table, LaParams, MoveSequence};
use crate::error::{Error, Result};
use crate::frames::{CrfLayout, TransitionFrames, DECISIONS};

/// One emitted decision: the chosen transition (`state * 5 + decision`) for
/// frame `frame`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub frame: usize,
    pub transition: usize,
}

/// Observed buffering behaviour of a decoder instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StreamStats {
    pub frames_in: usize,
    pub decisions_out: usize,
    /// Largest gap between the newest frame seen and a frame being decided.
    pub max_lookahead: usize,
    /// Largest number of frame-sized vectors held at once.
    pub max_buffered: usize,
}

/// Streaming LookAround decoder.
///
/// The forward recursions (log-sum-exp for posteriors, max-plus for the path
/// stage) carry the full history in one state vector. Backward terms only see
/// `l_tp` frames (posterior stage) and `l_mlp` posterior vectors (path stage)
/// ahead, starting from a uniform terminal. A decision for frame `t` is
/// emitted once frame `t + l_tp + l_mlp` has been pushed.
pub struct LookAroundDecoder {
    params: LaParams,
    layout: CrfLayout,
    dest: Vec<usize>,
    alpha: Vec<f64>,
    best: Vec<f64>,
    pending: VecDeque<Vec<f64>>,
    posteriors: VecDeque<Vec<f64>>,
    next_posterior: usize,
    next_decision: usize,
    stats: StreamStats,
}

impl LookAroundDecoder {
    pub fn new(params: LaParams, layout: CrfLayout) -> Self {
        LookAroundDecoder {
            params,
            layout,
            dest: layout_dest_table(layout),
            alpha: vec![0.0; layout.n_states],
            best: vec![0.0; layout.n_states],
            pending: VecDeque::with_capacity(params.l_tp() + 2),
            posteriors: VecDeque::with_capacity(params.l_mlp() + 2),
            next_posterior: 0,
            next_decision: 0,
            stats: StreamStats::default(),
        }
    }

    pub fn stats(&self) -> StreamStats {
        self.stats
    }

    /// Feed the next frame; returns the decision it unlocks, if any.
    pub fn push(&mut self, frame: &[f32]) -> Result<Option<Decision>> {
        if frame.len() != self.layout.n_transitions() {
            return Err(Error::DimensionMismatch {
                what: "frame width",
                expected: self.layout.n_transitions(),
                got: frame.len(),
            });
        }
        if frame.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                frame: self.stats.frames_in,
            });
        }
        self.pending
            .push_back(frame.iter().map(|&v| f64::from(v)).collect());
        self.stats.frames_in += 1;
        self.note_buffer();

        if self.pending.len() > self.params.l_tp() {
            self.emit_posterior();
        }
        if self.posteriors.len() > self.params.l_mlp() {
            return Ok(Some(self.emit_decision()));
        }
        Ok(None)
    }

    /// Drain the remaining decisions with windows clipped at the stream end.
    pub fn finish(&mut self) -> Vec<Decision> {
        while !self.pending.is_empty() {
            self.emit_posterior();
        }
        let mut out = Vec::with_capacity(self.posteriors.len());
        while !self.posteriors.is_empty() {
            out.push(self.emit_decision());
        }
        out
    }

    fn note_buffer(&mut self) {
        let held = self.pending.len() + self.posteriors.len();
        self.stats.max_buffered = self.stats.max_buffered.max(held);
    }

    fn emit_posterior(&mut self) {
        let window = self.pending.make_contiguous();
        let beta =
            backward_window::<LogSum>(&window[1..], self.layout.n_states, &self.dest, DECISIONS);
        let current = &window[0];
        let u = marginal(&self.alpha, current, &beta, &self.dest, DECISIONS);
        self.alpha = forward_step::<LogSum>(&self.alpha, current, &self.dest, DECISIONS);
        self.pending.pop_front();
        self.posteriors.push_back(u);
        self.next_posterior += 1;
        self.note_buffer();
    }

    fn emit_decision(&mut self) -> Decision {
        let window = self.posteriors.make_contiguous();
        let beta =
            backward_window::<MaxPlus>(&window[1..], self.layout.n_states, &self.dest, DECISIONS);
        let current = &window[0];
        let scores = marginal(&self.best, current, &beta, &self.dest, DECISIONS);
        self.best = forward_step::<MaxPlus>(&self.best, current, &self.dest, DECISIONS);
        self.posteriors.pop_front();
        let frame = self.next_decision;
        self.next_decision += 1;
        self.stats.decisions_out += 1;
        let newest = self.stats.frames_in - 1;
        self.stats.max_lookahead = self.stats.max_lookahead.max(newest - frame);
        Decision {
            frame,
            transition: argmax_lowest(&scores),
        }
    }
}

/// Decode a whole frame set through the streaming decoder.
pub fn lookaround_decode(
    frames: &TransitionFrames,
    params: LaParams,
) -> Result<(MoveSequence, StreamStats)> {
    if frames.is_empty() {
        return Err(Error::Empty("transition frames"));
    }
    let mut dec = LookAroundDecoder::new(params, frames.layout());
    let mut picks = Vec::with_capacity(frames.len());
    for f in frames.frames() {
        if let Some(d) = dec.push(f)? {
            picks.push(d.transition);
        }
    }
    picks.extend(dec.finish().into_iter().map(|d| d.transition));
    Ok((MoveSequence::from_transitions(&picks), dec.stats()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::full_crf_decode;

    fn pseudo_frames(t: usize, seed: u64) -> TransitionFrames {
        let mut x = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let data = (0..t * 20)
            .map(|_| {
                x = x
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((x >> 33) as f32 / (1u64 << 31) as f32) * 6.0 - 3.0
            })
            .collect();
        TransitionFrames::new(4, data).unwrap()
    }

    #[test]
    fn single_frame_matches_full_decode() {
        let fr = pseudo_frames(1, 3);
        for (a, b) in [(1, 1), (4, 1), (2, 3)] {
            let (m, _) = lookaround_decode(&fr, LaParams::new(a, b).unwrap()).unwrap();
            assert_eq!(m, full_crf_decode(&fr).unwrap());
        }
    }

    #[test]
    fn wide_windows_reproduce_full_decode() {
        for seed in 0..20 {
            let fr = pseudo_frames(12, seed);
            let (m, _) = lookaround_decode(&fr, LaParams::new(11, 11).unwrap()).unwrap();
            assert_eq!(m, full_crf_decode(&fr).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn one_decision_per_frame_after_fill() {
        let fr = pseudo_frames(30, 9);
        let p = LaParams::new(4, 1).unwrap();
        let mut dec = LookAroundDecoder::new(p, fr.layout());
        let mut emitted = Vec::new();
        for (i, f) in fr.frames().enumerate() {
            let d = dec.push(f).unwrap();
            if i >= 5 {
                assert_eq!(d.unwrap().frame, i - 5);
            } else {
                assert!(d.is_none());
            }
            emitted.extend(d);
        }
        emitted.extend(dec.finish());
        assert_eq!(emitted.len(), 30);
        let s = dec.stats();
        assert_eq!(s.max_lookahead, 5);
        assert!(s.max_buffered <= 10);
    }

    #[test]
    fn rejects_wrong_width() {
        let mut dec =
            LookAroundDecoder::new(LaParams::new(1, 1).unwrap(), CrfLayout { n_states: 4 });
        assert!(dec.push(&[0.0; 19]).is_err());
    }
}
