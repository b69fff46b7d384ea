//! Experiment commands behind the `cimba` binary.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error,
//! 3 mapping failure, 4 unreadable input, 5 empty sweep axis.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analog::{
    drift_sweep, layer_sensitivity_sweep, program_network, write_sweep_csv, EvalSetup,
    ProgrammedSystem, SweepRow,
};
use crate::basecall::{basecall_read, evaluate, mean};
use crate::config::{Execution, ExperimentConfig, SeedStream};
use crate::decoder::{DecoderChoice, DecoderCost, LaParams};
use crate::dnn::infer_reference;
use crate::dnn::toy::{synthetic_reads, BenchmarkRead};
use crate::dnn::NetworkGraph;
use crate::error::{Error, Result};
use crate::frames::TransitionFrames;
use crate::mapper::{validate_mapping, Mapping};
use crate::pipeline::io::{read_fasta, read_raw, write_fasta, FastaRecord};
use crate::pipeline::{
    aligned_accuracy, data_reduction_report, DataReductionReport, Dwell, ReadSizes, SignalBuffer,
    StorageOverhead, CHANNELS, TABLE_ONE, TABLE_ONE_TOTAL,
};
use crate::sim::{
    build_job_graph, critical_path, peak_compute, real_time_floor, report, schedule, write_trace,
    PeakCompute, Stats,
};

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "CIMBA_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("mapping error: {0}")]
    Mapping(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("empty sweep axis: {0}")]
    EmptyAxis(String),
    #[error(transparent)]
    Other(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Mapping(_) => 3,
            CliError::Input(_) => 4,
            CliError::EmptyAxis(_) => 5,
            CliError::Other(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Load a config file, or the defaults when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> CliResult<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => ExperimentConfig::load(p).map_err(|e| CliError::Config(e.to_string())),
    }
}

/// `explicit`, else `$CIMBA_OUT_DIR`, else `./out`.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn create(dir: &Path, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(Error::from)?;
    Ok((path, BufWriter::new(f)))
}

fn network(cfg: &ExperimentConfig) -> CliResult<NetworkGraph> {
    cfg.network
        .build()
        .map_err(|e| CliError::Config(format!("network: {e}")))
}

fn mapping(cfg: &ExperimentConfig, graph: &NetworkGraph) -> CliResult<Mapping> {
    let m = cfg
        .mapping
        .resolve(graph, &cfg.arch)
        .map_err(|e| CliError::Mapping(e.to_string()))?;
    if let Some(v) = validate_mapping(&m, graph, &cfg.arch).first() {
        return Err(CliError::Mapping(v.to_string()));
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateOutput {
    pub stats: Stats,
    pub critical_path_cycles: u64,
    pub tiles_used: usize,
    pub stats_path: PathBuf,
    pub trace_path: Option<PathBuf>,
}

/// Map, simulate and report; writes `stats.json` and `trace.jsonl`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<SimulateOutput> {
    let graph = network(cfg)?;
    let m = mapping(cfg, &graph)?;
    let job = build_job_graph(&graph, &m, &cfg.arch, cfg.sim.tokens)
        .map_err(|e| CliError::Mapping(e.to_string()))?;
    let timeline = schedule(&job, &cfg.costs);
    let stats = report(
        &job,
        &timeline,
        &cfg.costs,
        cfg.pipeline.samples_per_base,
        cfg.sim.area_mm2,
    );
    let trace_path = if cfg.sim.trace {
        let (path, mut w) = create(out_dir, "trace.jsonl")?;
        write_trace(&job, &timeline, &mut w)?;
        w.flush().map_err(Error::from)?;
        Some(path)
    } else {
        None
    };
    let mut out = SimulateOutput {
        critical_path_cycles: critical_path(&job, &cfg.costs),
        tiles_used: m.tiles_used().len(),
        stats,
        stats_path: PathBuf::new(),
        trace_path,
    };
    let (path, mut w) = create(out_dir, "stats.json")?;
    serde_json::to_writer_pretty(&mut w, &out).map_err(Error::from)?;
    w.flush().map_err(Error::from)?;
    out.stats_path = path;
    Ok(out)
}

/// Float reference or a programmed system.
enum Engine {
    Reference(NetworkGraph),
    Analog {
        system: Box<ProgrammedSystem>,
        t_read: f64,
        seed: u64,
    },
}

impl Engine {
    fn new(cfg: &ExperimentConfig, graph: NetworkGraph) -> CliResult<Engine> {
        match cfg.pipeline.execution {
            Execution::Reference => Ok(Engine::Reference(graph)),
            Execution::Analog => {
                let system = program(cfg, &graph)?;
                Ok(Engine::Analog {
                    t_read: system.program_time + cfg.pipeline.read_time_s,
                    system: Box::new(system),
                    seed: cfg.seed_for(SeedStream::Inference),
                })
            }
        }
    }

    fn samples_per_frame(&self) -> usize {
        match self {
            Engine::Reference(g) => g.samples_per_frame(),
            Engine::Analog { system, .. } => system.graph.samples_per_frame(),
        }
    }

    fn infer(&self, read: usize, chunk: usize, samples: &[f32]) -> Result<TransitionFrames> {
        match self {
            Engine::Reference(g) => infer_reference(g, samples),
            Engine::Analog {
                system,
                t_read,
                seed,
            } => {
                let s =
                    seed ^ ((read as u64) << 32 | chunk as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                crate::analog::infer_analog(system, samples, *t_read, s)
            }
        }
    }
}

fn calibration(cfg: &ExperimentConfig) -> CliResult<Vec<Vec<f32>>> {
    let pore = cfg
        .pipeline
        .pore
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let reads = synthetic_reads(
        &pore,
        8,
        cfg.pipeline.read_length,
        cfg.seed_for(SeedStream::Calibration),
    )?;
    Ok(reads.into_iter().map(|r| r.samples).collect())
}

fn program(cfg: &ExperimentConfig, graph: &NetworkGraph) -> CliResult<ProgrammedSystem> {
    let m = mapping(cfg, graph)?;
    let cal = calibration(cfg)?;
    Ok(program_network(
        graph,
        &m,
        &cfg.arch,
        &cfg.device,
        &cal,
        cfg.seed_for(SeedStream::Programming),
    )?)
}

fn synthesize(cfg: &ExperimentConfig) -> CliResult<Vec<BenchmarkRead>> {
    let pore = cfg
        .pipeline
        .pore
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(synthetic_reads(
        &pore,
        cfg.pipeline.reads,
        cfg.pipeline.read_length,
        cfg.seed_for(SeedStream::Reads),
    )?)
}

/// Reads to basecall: synthesized, rendered from a FASTA of sequences, or
/// loaded from a raw signal file (no ground truth).
pub fn load_reads(cfg: &ExperimentConfig, input: Option<&Path>) -> CliResult<Vec<BenchmarkRead>> {
    let Some(path) = input else {
        return synthesize(cfg);
    };
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if bytes.first() == Some(&b'>') {
        let records = read_fasta(path).map_err(|e| CliError::Input(e.to_string()))?;
        let pore = cfg
            .pipeline
            .pore
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let seed = cfg.seed_for(SeedStream::Reads);
        return records
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let read = crate::pipeline::synth_squiggle(&r.sequence, &pore, seed ^ i as u64)
                    .map_err(|e| CliError::Input(format!("{}: {e}", r.id)))?;
                Ok(BenchmarkRead {
                    id: r.id,
                    sequence: r.sequence,
                    samples: read.samples,
                })
            })
            .collect();
    }
    let records = read_raw(path).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(records
        .into_iter()
        .map(|r| BenchmarkRead {
            id: format!("channel{}", r.channel),
            sequence: String::new(),
            samples: r.samples,
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct BasecallOutput {
    pub calls: Vec<FastaRecord>,
    /// Per-read accuracy where ground truth is known.
    pub accuracy: Vec<(String, Option<f64>)>,
    pub mean_accuracy: Option<f64>,
    pub decoder_cost: Option<DecoderCost>,
    pub fasta_path: PathBuf,
    pub csv_path: PathBuf,
}

/// `registers=R latency=L` for the LookAround decoder.
pub fn decoder_cost_line(cost: &DecoderCost) -> String {
    format!(
        "registers={} latency={}",
        cost.registers, cost.latency_cycles
    )
}

/// Basecall every read; writes `calls.fasta` and `accuracy.csv`.
pub fn cmd_basecall(
    cfg: &ExperimentConfig,
    input: Option<&Path>,
    out_dir: &Path,
) -> CliResult<BasecallOutput> {
    let reads = load_reads(cfg, input)?;
    let engine = Engine::new(cfg, network(cfg)?)?;
    let spf = engine.samples_per_frame();
    let calls: Vec<String> = {
        use rayon::prelude::*;
        reads
            .par_iter()
            .enumerate()
            .map(|(r, read)| {
                basecall_read(
                    &read.samples,
                    &cfg.pipeline.chunk,
                    spf,
                    cfg.decoder,
                    |c, s| engine.infer(r, c, s),
                )
            })
            .collect::<Result<_>>()?
    };
    let mut accuracy = Vec::with_capacity(reads.len());
    for (read, call) in reads.iter().zip(&calls) {
        let acc = if read.sequence.is_empty() {
            None
        } else if call.is_empty() {
            Some(0.0)
        } else {
            Some(aligned_accuracy(call, &read.sequence)?)
        };
        accuracy.push((read.id.clone(), acc));
    }
    let known: Vec<f64> = accuracy.iter().filter_map(|a| a.1).collect();
    let records: Vec<FastaRecord> = reads
        .iter()
        .zip(calls)
        .map(|(r, sequence)| FastaRecord {
            id: r.id.clone(),
            sequence,
        })
        .collect();
    std::fs::create_dir_all(out_dir).map_err(Error::from)?;
    let fasta_path = out_dir.join("calls.fasta");
    write_fasta(&fasta_path, &records)?;
    let (csv_path, mut w) = create(out_dir, "accuracy.csv")?;
    writeln!(w, "read,accuracy").map_err(Error::from)?;
    for (id, acc) in &accuracy {
        let v = acc.map(|a| format!("{a:.6}")).unwrap_or_default();
        writeln!(w, "{id},{v}").map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(BasecallOutput {
        calls: records,
        mean_accuracy: (!known.is_empty()).then(|| mean(&known)),
        accuracy,
        decoder_cost: match cfg.decoder {
            DecoderChoice::LookAround(la) => Some(la.cost()),
            _ => None,
        },
        fasta_path,
        csv_path,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    LaGrid,
    Drift,
    Sensitivity,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "la-grid" => Ok(SweepAxis::LaGrid),
            "drift" => Ok(SweepAxis::Drift),
            "sensitivity" => Ok(SweepAxis::Sensitivity),
            _ => Err(format!(
                "unknown axis `{s}` (expected la-grid, drift or sensitivity)"
            )),
        }
    }
}

/// One cell of the decoder lookahead grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaCell {
    pub l_tp: usize,
    pub l_mlp: usize,
    pub accuracy: f64,
    pub registers: usize,
    pub latency_cycles: usize,
}

#[derive(Clone, Debug, Serialize)]
pub enum SweepOutput {
    LaGrid(Vec<LaCell>),
    Rows(Vec<SweepRow>),
}

impl SweepOutput {
    pub fn len(&self) -> usize {
        match self {
            SweepOutput::LaGrid(c) => c.len(),
            SweepOutput::Rows(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Run one sweep and write `sweep_<axis>.csv`.
pub fn cmd_sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    out_dir: &Path,
) -> CliResult<(SweepOutput, PathBuf)> {
    let empty = |what: &str| Err(CliError::EmptyAxis(what.to_string()));
    match axis {
        SweepAxis::LaGrid if cfg.sweep.la_grid.is_empty() => return empty("sweep.la_grid"),
        SweepAxis::Drift if cfg.sweep.drift_times.is_empty() => return empty("sweep.drift_times"),
        _ => {}
    }
    let graph = network(cfg)?;
    let reads = synthesize(cfg)?;
    let setup = EvalSetup {
        plan: cfg.pipeline.chunk,
        decoder: cfg.decoder,
    };
    match axis {
        SweepAxis::LaGrid => {
            let engine = Engine::new(cfg, graph)?;
            let spf = engine.samples_per_frame();
            let mut cells = Vec::new();
            for &[t, m] in &cfg.sweep.la_grid {
                let la = LaParams::new(t, m).map_err(|e| CliError::Config(e.to_string()))?;
                let acc = evaluate(
                    &reads,
                    &setup.plan,
                    spf,
                    DecoderChoice::LookAround(la),
                    |r, c, s| engine.infer(r, c, s),
                )?;
                let cost = la.cost();
                cells.push(LaCell {
                    l_tp: t,
                    l_mlp: m,
                    accuracy: mean(&acc),
                    registers: cost.registers,
                    latency_cycles: cost.latency_cycles,
                });
            }
            let (path, mut w) = create(out_dir, "sweep_la_grid.csv")?;
            writeln!(w, "l_tp,l_mlp,accuracy,registers,latency_cycles").map_err(Error::from)?;
            for c in &cells {
                writeln!(
                    w,
                    "{},{},{:.6},{},{}",
                    c.l_tp, c.l_mlp, c.accuracy, c.registers, c.latency_cycles
                )
                .map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
            Ok((SweepOutput::LaGrid(cells), path))
        }
        SweepAxis::Drift => {
            let system = program(cfg, &graph)?;
            let rows = drift_sweep(
                &system,
                &reads,
                &cfg.sweep.drift_times,
                &setup,
                cfg.seed_for(SeedStream::Inference),
            )
            .map_err(|e| CliError::Config(format!("sweep.drift_times: {e}")))?;
            let path = write_rows(out_dir, "sweep_drift.csv", &rows)?;
            Ok((SweepOutput::Rows(rows), path))
        }
        SweepAxis::Sensitivity => {
            let rows = layer_sensitivity_sweep(
                &graph,
                &cfg.arch,
                &cfg.device,
                &calibration(cfg)?,
                &reads,
                cfg.sweep.sensitivity_time_s,
                &setup,
                cfg.seed_for(SeedStream::Programming),
            )
            .map_err(|e| match e {
                Error::CapacityExceeded { .. } | Error::Mapping(_) | Error::NoRoute { .. } => {
                    CliError::Mapping(e.to_string())
                }
                e => CliError::Other(e),
            })?;
            let path = write_rows(out_dir, "sweep_sensitivity.csv", &rows)?;
            Ok((SweepOutput::Rows(rows), path))
        }
    }
}

fn write_rows(dir: &Path, name: &str, rows: &[SweepRow]) -> CliResult<PathBuf> {
    let (path, mut w) = create(dir, name)?;
    write_sweep_csv(rows, &mut w)?;
    w.flush().map_err(Error::from)?;
    Ok(path)
}

#[derive(Clone, Debug, Serialize)]
pub struct TableOneSummary {
    pub communication_ratio: f64,
    pub storage_ratio: f64,
    /// Ratios recomputed from the per-dataset rows.
    pub column_sum_communication_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemReport {
    pub version: u32,
    pub peak: PeakCompute,
    pub decoder_cost: Option<DecoderCost>,
    pub duplicated_fraction: f64,
    pub real_time_floor_bases_per_s: f64,
    pub signal_buffer_bytes: usize,
    pub data_reduction: DataReductionReport,
    pub table_one: TableOneSummary,
}

/// Static figures of the configured system; writes `report.json`.
///
/// The data reduction section uses synthetic reads whose dwell is fixed at
/// the configured samples per base.
pub fn cmd_report(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<(SystemReport, PathBuf)> {
    let spb = cfg.pipeline.samples_per_base;
    let mut pore = cfg
        .pipeline
        .pore
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pore.dwell = Dwell::fixed(spb.round().max(1.0) as u32);
    let reads = synthetic_reads(
        &pore,
        cfg.pipeline.reads,
        cfg.pipeline.read_length,
        cfg.seed_for(SeedStream::Reads),
    )?;
    let sizes: Vec<ReadSizes> = reads
        .iter()
        .map(|r| ReadSizes {
            raw_samples: r.samples.len(),
            called_bases: r.sequence.len(),
        })
        .collect();
    let data_reduction = data_reduction_report(
        &sizes,
        cfg.pipeline.raw_bytes_per_sample,
        cfg.pipeline.bytes_per_base,
        &[StorageOverhead::fast5_vs_fastq()],
    );
    let raw: f64 = TABLE_ONE.iter().map(|d| d.raw_gb).sum();
    let called: f64 = TABLE_ONE.iter().map(|d| d.string_gb).sum();
    let out = SystemReport {
        version: 1,
        peak: peak_compute(&cfg.arch, &cfg.costs, cfg.sim.area_mm2),
        decoder_cost: match cfg.decoder {
            DecoderChoice::LookAround(la) => Some(la.cost()),
            _ => None,
        },
        duplicated_fraction: cfg.pipeline.chunk.duplicated_fraction(),
        real_time_floor_bases_per_s: real_time_floor(CHANNELS, 4000.0, spb),
        signal_buffer_bytes: SignalBuffer::new(2)?.total_capacity_bytes(),
        data_reduction,
        table_one: TableOneSummary {
            communication_ratio: TABLE_ONE_TOTAL.communication_ratio(),
            storage_ratio: TABLE_ONE_TOTAL.storage_ratio(),
            column_sum_communication_ratio: raw / called,
        },
    };
    let (path, mut w) = create(out_dir, "report.json")?;
    serde_json::to_writer_pretty(&mut w, &out).map_err(Error::from)?;
    w.flush().map_err(Error::from)?;
    Ok((out, path))
}
