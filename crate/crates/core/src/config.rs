//! Experiment configuration: one versioned JSON document covering the
//! architecture, costs, device, network, mapping, pipeline, decoder,
//! simulation and sweep settings. Every section has defaults; unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoder::{DecoderChoice, LaParams};
use crate::device::DeviceParams;
use crate::dnn::{build_al_dorado, build_dorado_fast, load_network, toy, NetworkGraph};
use crate::error::{Error, Result};
use crate::mapper::{map_network, ArchDescription, Mapping, MappingStrategy};
use crate::pipeline::{ChunkPlan, PoreModel};
use crate::sim::CostTable;

pub const CONFIG_VERSION: u32 = 1;

/// Where the network comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    AlDorado { seed: u64 },
    DoradoFast { seed: u64 },
    Toy,
    Manifest { path: PathBuf },
}

impl Default for NetworkSource {
    fn default() -> Self {
        NetworkSource::AlDorado { seed: 0 }
    }
}

impl NetworkSource {
    pub fn build(&self) -> Result<NetworkGraph> {
        match self {
            NetworkSource::AlDorado { seed } => Ok(build_al_dorado(*seed)),
            NetworkSource::DoradoFast { seed } => Ok(build_dorado_fast(*seed)),
            NetworkSource::Toy => Ok(toy::toy_network()),
            NetworkSource::Manifest { path } => load_network(path),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MappingSource {
    Auto {
        #[serde(default)]
        strategy: MappingStrategy,
    },
    File {
        path: PathBuf,
    },
}

impl Default for MappingSource {
    fn default() -> Self {
        MappingSource::Auto {
            strategy: MappingStrategy::default(),
        }
    }
}

impl MappingSource {
    pub fn resolve(&self, graph: &NetworkGraph, arch: &ArchDescription) -> Result<Mapping> {
        match self {
            MappingSource::Auto { strategy } => map_network(graph, arch, strategy),
            MappingSource::File { path } => Mapping::from_json(&std::fs::read_to_string(path)?),
        }
    }
}

/// Pore model, given by recipe so configs stay short.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PoreSpec {
    Toy { noise_std: f32 },
    Random { k: u32, seed: u64, noise_std: f32 },
    Explicit { model: PoreModel },
}

impl Default for PoreSpec {
    fn default() -> Self {
        PoreSpec::Toy {
            noise_std: toy::BENCHMARK_NOISE,
        }
    }
}

impl PoreSpec {
    pub fn build(&self) -> Result<PoreModel> {
        let model = match self {
            PoreSpec::Toy { noise_std } => toy::toy_pore_model(*noise_std),
            PoreSpec::Random { k, seed, noise_std } => PoreModel {
                noise_std: *noise_std,
                ..PoreModel::random(*k, *seed)
            },
            PoreSpec::Explicit { model } => model.clone(),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Float reference or simulated tiles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    #[default]
    Reference,
    Analog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub chunk: ChunkPlan,
    pub pore: PoreSpec,
    /// Synthetic reads when no input is given.
    pub reads: usize,
    pub read_length: usize,
    pub samples_per_base: f64,
    pub execution: Execution,
    /// Seconds between programming and reading, for analog execution.
    pub read_time_s: f64,
    pub raw_bytes_per_sample: f64,
    pub bytes_per_base: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            chunk: ChunkPlan::default(),
            pore: PoreSpec::default(),
            reads: 20,
            read_length: 300,
            samples_per_base: 10.0,
            execution: Execution::Reference,
            read_time_s: 20.0,
            raw_bytes_per_sample: 4.0,
            bytes_per_base: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub tokens: usize,
    pub area_mm2: f64,
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tokens: 256,
            area_mm2: 25.0,
            trace: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Seconds after programming.
    pub drift_times: Vec<f64>,
    /// `[l_tp, l_mlp]` cells.
    pub la_grid: Vec<[usize; 2]>,
    /// Read time of the layer sensitivity sweep.
    pub sensitivity_time_s: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            drift_times: crate::analog::DRIFT_TIMES.to_vec(),
            la_grid: (1..=4).flat_map(|t| (1..=4).map(move |m| [t, m])).collect(),
            sensitivity_time_s: 86_400.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    /// Root of all randomness; components derive their own seeds from it.
    pub seed: u64,
    pub arch: ArchDescription,
    pub costs: CostTable,
    pub device: DeviceParams,
    pub network: NetworkSource,
    pub mapping: MappingSource,
    pub pipeline: PipelineConfig,
    pub decoder: DecoderChoice,
    pub sim: SimConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            seed: 0,
            arch: ArchDescription::default(),
            costs: CostTable::default(),
            device: DeviceParams::default(),
            network: NetworkSource::default(),
            mapping: MappingSource::default(),
            pipeline: PipelineConfig::default(),
            decoder: DecoderChoice::LookAround(LaParams::default()),
            sim: SimConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// Seed streams derived from the root seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedStream {
    Reads = 1,
    Programming = 2,
    Inference = 3,
    Calibration = 4,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str::<ExperimentConfig>(&text)
            .map_err(|e| Error::Format {
                kind: "config",
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
            .and_then(|cfg| cfg.validate().map(|_| cfg))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::param(
                "version",
                format!("expected {CONFIG_VERSION}, got {}", self.version),
            ));
        }
        self.arch.validate()?;
        self.costs.validate()?;
        self.device.validate()?;
        self.pipeline.chunk.validate()?;
        self.pipeline.pore.build()?;
        if let DecoderChoice::LookAround(la) = self.decoder {
            self.costs.check_decoder(la)?;
        }
        let p = &self.pipeline;
        let positive = [
            ("pipeline.samples_per_base", p.samples_per_base),
            ("pipeline.raw_bytes_per_sample", p.raw_bytes_per_sample),
            ("pipeline.bytes_per_base", p.bytes_per_base),
            ("sim.area_mm2", self.sim.area_mm2),
        ];
        for (field, v) in positive {
            if !(v > 0.0) {
                return Err(Error::param(field, "must be positive"));
            }
        }
        if p.read_time_s < 0.0 {
            return Err(Error::param("pipeline.read_time_s", "must not be negative"));
        }
        if self.sim.tokens == 0 {
            return Err(Error::param("sim.tokens", "must be at least 1"));
        }
        for &[t, m] in &self.sweep.la_grid {
            LaParams::new(t, m)
                .map_err(|_| Error::param("sweep.la_grid", format!("invalid cell [{t}, {m}]")))?;
        }
        Ok(())
    }

    /// Independent seed for one component.
    pub fn seed_for(&self, stream: SeedStream) -> u64 {
        let mut z = self.seed ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}
