//! Per-timestep CRF transition scores shared by the network and the decoders.

use crate::error::{Error, Result};

/// Number of decisions per source state: one stay plus a move to each base.
pub const DECISIONS: usize = 5;
/// Alphabet size.
pub const N_BASES: usize = 4;

/// A nucleotide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    A,
    C,
    G,
    T,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Base {
        Base::ALL[i % N_BASES]
    }

    pub fn to_char(self) -> char {
        b"ACGT"[self as usize] as char
    }

    pub fn from_char(c: char) -> Result<Base> {
        match c.to_ascii_uppercase() {
            'A' => Ok(Base::A),
            'C' => Ok(Base::C),
            'G' => Ok(Base::G),
            'T' => Ok(Base::T),
            other => Err(Error::InvalidBase(other)),
        }
    }
}

/// Parse an ACGT string.
pub fn parse_bases(s: &str) -> Result<Vec<Base>> {
    s.chars().map(Base::from_char).collect()
}

pub fn bases_to_string(bases: &[Base]) -> String {
    bases.iter().map(|b| b.to_char()).collect()
}

/// Layout of the per-frame transition block.
///
/// Frame entry `s * 5 + d` scores the transition out of state `s` with
/// decision `d`: `d == 0` stays in `s`, `d == 1 + b` shifts base `b` into the
/// state. States encode the last `state_len` bases, newest base in the lowest
/// base-4 digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrfLayout {
    pub n_states: usize,
}

impl CrfLayout {
    pub fn with_state_len(state_len: u32) -> Self {
        CrfLayout {
            n_states: N_BASES.pow(state_len),
        }
    }

    pub fn n_transitions(&self) -> usize {
        self.n_states * DECISIONS
    }

    pub fn dest(&self, state: usize, decision: usize) -> usize {
        if decision == 0 {
            state
        } else {
            (state * N_BASES + decision - 1) % self.n_states
        }
    }

    pub fn state_len(&self) -> u32 {
        let mut n = self.n_states;
        let mut len = 0;
        while n > 1 {
            n /= N_BASES;
            len += 1;
        }
        len
    }
}

/// `T x S x 5` transition log-scores.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionFrames {
    layout: CrfLayout,
    data: Vec<f32>,
}

impl TransitionFrames {
    pub fn new(n_states: usize, data: Vec<f32>) -> Result<Self> {
        let mut n = n_states;
        while n > 1 && n.is_multiple_of(N_BASES) {
            n /= N_BASES;
        }
        if n_states == 0 || n != 1 {
            return Err(Error::param("n_states", "must be a power of 4"));
        }
        let layout = CrfLayout { n_states };
        if !data.len().is_multiple_of(layout.n_transitions()) {
            return Err(Error::DimensionMismatch {
                what: "transition frame data",
                expected: layout.n_transitions(),
                got: data.len() % layout.n_transitions(),
            });
        }
        Ok(TransitionFrames { layout, data })
    }

    /// Frames from a flat buffer whose width tells the state count.
    pub fn from_width(width: usize, data: Vec<f32>) -> Result<Self> {
        if !width.is_multiple_of(DECISIONS) {
            return Err(Error::param("width", "must be a multiple of 5"));
        }
        Self::new(width / DECISIONS, data)
    }

    pub fn layout(&self) -> CrfLayout {
        self.layout
    }

    pub fn width(&self) -> usize {
        self.layout.n_transitions()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        let w = self.width();
        &self.data[t * w..(t + 1) * w]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.width())
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite {
                frame: i / self.width(),
            }),
            None => Ok(()),
        }
    }

    /// Keep only frames `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> TransitionFrames {
        let w = self.width();
        TransitionFrames {
            layout: self.layout,
            data: self.data[range.start * w..range.end * w].to_vec(),
        }
    }
}
