//! PCM unit-cell model: differential weight encoding, programming and read
//! noise, power-law conductance drift, and the crossbar vector-matrix
//! multiply with signed 8-bit inputs and signed 10-bit ADC outputs.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Crossbar edge length in unit cells.
pub const TILE_DIM: usize = 512;

/// Device and converter parameters. Conductances and noise are in µS,
/// times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceParams {
    pub g_max: f64,
    pub sigma_prog: f64,
    pub sigma_read: f64,
    pub drift_nu: f64,
    pub t0: f64,
    pub adc_bits: u32,
    pub input_bits: u32,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            g_max: 25.0,
            sigma_prog: 1.0,
            sigma_read: 0.1,
            drift_nu: 0.06,
            t0: 20.0,
            adc_bits: 10,
            input_bits: 8,
        }
    }
}

impl DeviceParams {
    /// All noise sources and drift disabled.
    pub fn ideal() -> Self {
        DeviceParams {
            sigma_prog: 0.0,
            sigma_read: 0.0,
            drift_nu: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("g_max", self.g_max > 0.0),
            ("sigma_prog", self.sigma_prog >= 0.0),
            ("sigma_read", self.sigma_read >= 0.0),
            ("drift_nu", self.drift_nu >= 0.0),
            ("t0", self.t0 > 0.0),
            ("adc_bits", (2..=16).contains(&self.adc_bits)),
            ("input_bits", (2..=16).contains(&self.input_bits)),
        ];
        for (field, ok) in checks {
            if !ok {
                return Err(Error::param(field, "out of range"));
            }
        }
        Ok(())
    }

    pub fn adc_range(&self) -> (i32, i32) {
        let half = 1i32 << (self.adc_bits - 1);
        (-half, half - 1)
    }

    pub fn input_range(&self) -> (i32, i32) {
        let half = 1i32 << (self.input_bits - 1);
        (-half, half - 1)
    }

    /// Multiplicative drift at `elapsed` seconds after programming. Reads
    /// earlier than `t0` see the reference conductance.
    pub fn drift_factor(&self, elapsed: f64) -> f64 {
        if self.drift_nu == 0.0 {
            return 1.0;
        }
        (elapsed.max(self.t0) / self.t0).powf(-self.drift_nu)
    }
}

/// Differential pair of PCM devices for one signed weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConductancePair {
    pub g_plus: f64,
    pub g_minus: f64,
    pub t_programmed: f64,
}

impl ConductancePair {
    /// Noise-free weight readback for a layer scaled to `w_max`.
    pub fn decode(&self, w_max: f64, params: &DeviceParams) -> f64 {
        (self.g_plus - self.g_minus) * (w_max / params.g_max)
    }
}

/// One-sided differential encoding: positive weights on `g_plus`, negative on
/// `g_minus`. Weights beyond `w_max` clip to full conductance.
pub fn map_weight_to_conductance(w: f64, w_max: f64, params: &DeviceParams) -> ConductancePair {
    if w_max <= 0.0 || w == 0.0 {
        return ConductancePair::default();
    }
    let g = (w.abs().min(w_max) / w_max) * params.g_max;
    if w > 0.0 {
        ConductancePair {
            g_plus: g,
            ..Default::default()
        }
    } else {
        ConductancePair {
            g_minus: g,
            ..Default::default()
        }
    }
}

/// True when `w` lies outside `[-w_max, w_max]` and will be clipped.
pub fn saturates(w: f64, w_max: f64) -> bool {
    w.abs() > w_max
}

/// Single-shot programming error on every non-zero device, clipped to the
/// physical range.
pub fn apply_programming_noise<R: Rng + ?Sized>(
    pair: ConductancePair,
    params: &DeviceParams,
    rng: &mut R,
) -> ConductancePair {
    if params.sigma_prog == 0.0 {
        return pair;
    }
    let mut perturb = |g: f64| {
        if g == 0.0 {
            0.0
        } else {
            let z: f64 = StandardNormal.sample(rng);
            (g + params.sigma_prog * z).clamp(0.0, params.g_max)
        }
    };
    ConductancePair {
        g_plus: perturb(pair.g_plus),
        g_minus: perturb(pair.g_minus),
        t_programmed: pair.t_programmed,
    }
}

/// Power-law drift `g * ((t_now - t_prog) / t0)^(-nu)`.
pub fn apply_drift(
    pair: ConductancePair,
    t_now: f64,
    params: &DeviceParams,
) -> Result<ConductancePair> {
    let elapsed = t_now - pair.t_programmed;
    if elapsed < 0.0 {
        return Err(Error::TimeOrder {
            t_now,
            t_programmed: pair.t_programmed,
        });
    }
    let k = params.drift_factor(elapsed);
    Ok(ConductancePair {
        g_plus: pair.g_plus * k,
        g_minus: pair.g_minus * k,
        t_programmed: pair.t_programmed,
    })
}

/// A 512x512 crossbar with per-column digital gain/offset correction.
#[derive(Clone, Debug)]
pub struct ProgrammedTile {
    cells: Vec<ConductancePair>,
    pub col_scale: Vec<f64>,
    pub col_offset: Vec<f64>,
    pub rows_used: usize,
    pub cols_used: usize,
    pub t_programmed: f64,
}

impl ProgrammedTile {
    pub fn new(t_programmed: f64) -> Self {
        ProgrammedTile {
            cells: vec![
                ConductancePair {
                    t_programmed,
                    ..Default::default()
                };
                TILE_DIM * TILE_DIM
            ],
            col_scale: vec![1.0; TILE_DIM],
            col_offset: vec![0.0; TILE_DIM],
            rows_used: 0,
            cols_used: 0,
            t_programmed,
        }
    }

    pub fn cell(&self, row: usize, col: usize) -> &ConductancePair {
        &self.cells[row * TILE_DIM + col]
    }

    /// Write a cell and grow the used region to include it.
    pub fn set_cell(&mut self, row: usize, col: usize, mut pair: ConductancePair) {
        pair.t_programmed = self.t_programmed;
        self.cells[row * TILE_DIM + col] = pair;
        self.rows_used = self.rows_used.max(row + 1);
        self.cols_used = self.cols_used.max(col + 1);
    }

    /// Program `weights` (row-major, `rows x cols`) at `(row0, col0)`.
    #[allow(clippy::too_many_arguments)]
    pub fn program_block<R: Rng + ?Sized>(
        &mut self,
        row0: usize,
        col0: usize,
        cols: usize,
        weights: &[f64],
        w_max: f64,
        params: &DeviceParams,
        rng: &mut R,
    ) -> Result<()> {
        let rows = weights.len() / cols.max(1);
        if row0 + rows > TILE_DIM || col0 + cols > TILE_DIM {
            return Err(Error::DimensionMismatch {
                what: "tile block extent",
                expected: TILE_DIM,
                got: (row0 + rows).max(col0 + cols),
            });
        }
        for r in 0..rows {
            for c in 0..cols {
                let pair = map_weight_to_conductance(weights[r * cols + c], w_max, params);
                let pair = apply_programming_noise(pair, params, rng);
                self.set_cell(row0 + r, col0 + c, pair);
            }
        }
        Ok(())
    }
}

/// Analog VMM over the tile's used region.
pub fn analog_vmm<R: Rng + ?Sized>(
    tile: &ProgrammedTile,
    input: &[i8],
    params: &DeviceParams,
    rng: &mut R,
    t_now: f64,
) -> Result<Vec<i16>> {
    if input.len() != tile.rows_used {
        return Err(Error::DimensionMismatch {
            what: "analog_vmm input",
            expected: tile.rows_used,
            got: input.len(),
        });
    }
    analog_vmm_region(tile, 0, 0..tile.cols_used, input, params, rng, t_now)
}

/// Analog VMM over rows `row0..row0 + input.len()` and columns `cols`.
///
/// Column `j` integrates `sum_i x_i (g+ - g- + n_ij) / g_max` with drift
/// applied to the programmed conductances. The per-cell read noise terms are
/// independent Gaussians, so their input-weighted sum is drawn directly as
/// one Gaussian per column with standard deviation `sigma_read * ||x||_2`.
pub fn analog_vmm_region<R: Rng + ?Sized>(
    tile: &ProgrammedTile,
    row0: usize,
    cols: std::ops::Range<usize>,
    input: &[i8],
    params: &DeviceParams,
    rng: &mut R,
    t_now: f64,
) -> Result<Vec<i16>> {
    let elapsed = t_now - tile.t_programmed;
    if elapsed < 0.0 {
        return Err(Error::TimeOrder {
            t_now,
            t_programmed: tile.t_programmed,
        });
    }
    if row0 + input.len() > TILE_DIM || cols.end > TILE_DIM {
        return Err(Error::DimensionMismatch {
            what: "analog_vmm region",
            expected: TILE_DIM,
            got: (row0 + input.len()).max(cols.end),
        });
    }
    let drift = params.drift_factor(elapsed);
    let width = cols.len();
    let mut acc = vec![0.0f64; width];
    for (i, &x) in input.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let x = f64::from(x);
        let row = &tile.cells[(row0 + i) * TILE_DIM + cols.start..(row0 + i) * TILE_DIM + cols.end];
        for (a, cell) in acc.iter_mut().zip(row) {
            *a += x * (cell.g_plus - cell.g_minus);
        }
    }
    let norm = input
        .iter()
        .map(|&x| f64::from(x).powi(2))
        .sum::<f64>()
        .sqrt();
    let (lo, hi) = params.adc_range();
    let out = acc
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            let j = cols.start + k;
            let mut s = a * drift;
            if params.sigma_read > 0.0 && norm > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                s += params.sigma_read * norm * z;
            }
            let y = (tile.col_scale[j] * s / params.g_max + tile.col_offset[j]).round();
            y.clamp(f64::from(lo), f64::from(hi)) as i16
        })
        .collect();
    Ok(out)
}
