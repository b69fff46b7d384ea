use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lookahead depths of the two decoder stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLaParams", into = "RawLaParams")]
pub struct LaParams {
    l_tp: usize,
    l_mlp: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaParams {
    l_tp: usize,
    l_mlp: usize,
}

impl TryFrom<RawLaParams> for LaParams {
    type Error = Error;
    fn try_from(r: RawLaParams) -> Result<Self> {
        LaParams::new(r.l_tp, r.l_mlp)
    }
}

impl From<LaParams> for RawLaParams {
    fn from(p: LaParams) -> Self {
        RawLaParams {
            l_tp: p.l_tp,
            l_mlp: p.l_mlp,
        }
    }
}

impl Default for LaParams {
    fn default() -> Self {
        LaParams { l_tp: 4, l_mlp: 1 }
    }
}

/// Register, latency and parallelism figures for a decoder configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DecoderCost {
    pub registers: usize,
    pub latency_cycles: usize,
    pub parallel_units: (usize, usize),
}

impl LaParams {
    pub fn new(l_tp: usize, l_mlp: usize) -> Result<Self> {
        if l_tp < 1 {
            return Err(Error::param("l_tp", "lookahead must be at least 1"));
        }
        if l_mlp < 1 {
            return Err(Error::param("l_mlp", "lookahead must be at least 1"));
        }
        Ok(LaParams { l_tp, l_mlp })
    }

    pub fn l_tp(&self) -> usize {
        self.l_tp
    }

    pub fn l_mlp(&self) -> usize {
        self.l_mlp
    }

    pub fn cost(&self) -> DecoderCost {
        let registers = 2 * self.l_tp + 2 * self.l_mlp;
        DecoderCost {
            registers,
            latency_cycles: registers + 1,
            parallel_units: (self.l_tp, self.l_mlp),
        }
    }
}

/// Cost for raw lookahead values, rejecting zero depths.
pub fn decoder_cost(l_tp: usize, l_mlp: usize) -> Result<DecoderCost> {
    Ok(LaParams::new(l_tp, l_mlp)?.cost())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_formula() {
        let c = decoder_cost(4, 1).unwrap();
        assert_eq!(
            (c.registers, c.latency_cycles, c.parallel_units),
            (10, 11, (4, 1))
        );
        let c = decoder_cost(1, 1).unwrap();
        assert_eq!((c.registers, c.latency_cycles), (4, 5));
        let c = decoder_cost(2, 3).unwrap();
        assert_eq!(
            (c.registers, c.latency_cycles, c.parallel_units),
            (10, 11, (2, 3))
        );
    }

    #[test]
    fn zero_depth_rejected() {
        assert!(decoder_cost(0, 1).is_err());
        assert!(decoder_cost(1, 0).is_err());
        assert!(serde_json::from_str::<LaParams>(r#"{"l_tp":0,"l_mlp":1}"#).is_err());
    }
}
