use serde::{Deserialize, Serialize};

use crate::decoder::LaParams;
use crate::error::{Error, Result};
use crate::mapper::ArchDescription;

/// Energy in joules and latency in cycles of one operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpCost {
    pub energy_j: f64,
    pub cycles: u64,
}

const fn op(energy_j: f64, cycles: u64) -> OpCost {
    OpCost { energy_j, cycles }
}

/// How the mesh latency entry is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshLatencyMode {
    /// Once per straight leg and once per turn.
    #[default]
    PerLeg,
    /// Once per hop and once per turn.
    PerHop,
}

/// Latency and energy of every micro-op class.
///
/// VMM energy is per operation. DPU and decoder energies are per element
/// processed, memory and mesh energies per bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostTable {
    pub vmm: OpCost,
    pub batchnorm: OpCost,
    pub lut_swish: OpCost,
    pub lstm_aux: OpCost,
    pub sram_bit: OpCost,
    pub decode: OpCost,
    pub mesh_ew_bit_j: f64,
    pub mesh_ns_bit_j: f64,
    pub mesh_turn_bit_j: f64,
    pub mesh_latency_cycles: u64,
    pub mesh_latency_mode: MeshLatencyMode,
    pub clock_hz: f64,
    /// Width of activations on the mesh.
    pub activation_bits: u64,
    /// Width of DPU floating-point values held in SRAM.
    pub dpu_value_bits: u64,
    /// Width of a raw sample in the signal buffer.
    pub sample_bits: u64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            vmm: op(5.2e-9, 40),
            batchnorm: op(1.24e-12, 3),
            lut_swish: op(1.49e-12, 4),
            lstm_aux: op(19.3e-12, 25),
            sram_bit: op(2.5e-15, 1),
            decode: op(0.16e-9, 11),
            mesh_ew_bit_j: 44.9e-15,
            mesh_ns_bit_j: 81.4e-15,
            mesh_turn_bit_j: 126e-15,
            mesh_latency_cycles: 3,
            mesh_latency_mode: MeshLatencyMode::PerLeg,
            clock_hz: 1e9,
            activation_bits: 10,
            dpu_value_bits: 16,
            sample_bits: 16,
        }
    }
}

impl CostTable {
    pub fn validate(&self) -> Result<()> {
        let ops = [
            ("vmm", self.vmm),
            ("batchnorm", self.batchnorm),
            ("lut_swish", self.lut_swish),
            ("lstm_aux", self.lstm_aux),
            ("sram_bit", self.sram_bit),
            ("decode", self.decode),
        ];
        for (name, c) in ops {
            if c.cycles == 0 || !(c.energy_j > 0.0) {
                return Err(Error::param(
                    format!("costs.{name}"),
                    "energy and latency must be positive",
                ));
            }
        }
        let mesh = [
            self.mesh_ew_bit_j,
            self.mesh_ns_bit_j,
            self.mesh_turn_bit_j,
            self.clock_hz,
        ];
        if mesh.iter().any(|v| !(*v > 0.0)) || self.mesh_latency_cycles == 0 {
            return Err(Error::param(
                "costs.mesh",
                "energies, latency and clock must be positive",
            ));
        }
        if self.activation_bits == 0 || self.dpu_value_bits == 0 || self.sample_bits == 0 {
            return Err(Error::param("costs.bits", "widths must be positive"));
        }
        Ok(())
    }

    /// The decoder latency must agree with the LookAround cost model.
    pub fn check_decoder(&self, la: LaParams) -> Result<()> {
        let want = la.cost().latency_cycles as u64;
        if self.decode.cycles != want {
            return Err(Error::param(
                "costs.decode.cycles",
                format!(
                    "{} disagrees with {want} from the decoder parameters",
                    self.decode.cycles
                ),
            ));
        }
        Ok(())
    }
}

/// Peak analog compute of the tile array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeakCompute {
    pub tops_per_tile: f64,
    pub tops_total: f64,
    pub tops_per_mm2: f64,
}

/// One MAC counts as one operation.
pub fn peak_compute(arch: &ArchDescription, costs: &CostTable, area_mm2: f64) -> PeakCompute {
    let seconds = costs.vmm.cycles as f64 / costs.clock_hz;
    let per_tile = arch.macs_per_vmm() as f64 / seconds / 1e12;
    let total = per_tile * arch.n_tiles() as f64;
    PeakCompute {
        tops_per_tile: per_tile,
        tops_total: total,
        tops_per_mm2: total / area_mm2,
    }
}
