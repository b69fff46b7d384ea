use std::path::Path;
use std::process::Command;

use cimba::cli::{cmd_basecall, cmd_report, cmd_simulate, cmd_sweep, SweepAxis, SweepOutput};
use cimba::config::{ExperimentConfig, NetworkSource};
use cimba::pipeline::io::{write_fasta, write_raw, FastaRecord, RawRecord};
use cimba::pipeline::ChunkPlan;

fn toy_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        network: NetworkSource::Toy,
        seed: 42,
        ..Default::default()
    };
    cfg.pipeline.chunk = ChunkPlan::new(1000, 200).unwrap();
    cfg.pipeline.reads = 6;
    cfg.pipeline.samples_per_base = 8.0;
    cfg
}

fn cimba(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_cimba"))
        .args(args)
        .env("CIMBA_OUT_DIR", out)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
    )
}

#[test]
fn simulate_writes_stats_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.sim.tokens = 16;
    let out = cmd_simulate(&cfg, dir.path()).unwrap();
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out.stats_path).unwrap()).unwrap();
    assert_eq!(stats["stats"]["n_tokens"], 16);
    let trace = std::fs::read_to_string(out.trace_path.unwrap()).unwrap();
    let header: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(header["format"], "cimba-trace");
    assert_eq!(trace.lines().count(), out.stats.n_ops + 1);
}

#[test]
fn basecall_reports_decoder_cost_and_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_basecall(&toy_config(), None, dir.path()).unwrap();
    assert_eq!(out.calls.len(), 6);
    let cost = out.decoder_cost.unwrap();
    assert_eq!(
        cimba::cli::decoder_cost_line(&cost),
        "registers=10 latency=11"
    );
    assert!(out.mean_accuracy.unwrap() > 0.85);
    let csv = std::fs::read_to_string(&out.csv_path).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn basecall_accepts_fasta_and_raw_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let fasta = dir.path().join("truth.fasta");
    write_fasta(
        &fasta,
        &[FastaRecord {
            id: "x".into(),
            sequence: "ACGTACGGTCA".repeat(20),
        }],
    )
    .unwrap();
    let out = cmd_basecall(&toy_config(), Some(&fasta), dir.path()).unwrap();
    assert_eq!(out.accuracy[0].0, "x");
    assert!(out.accuracy[0].1.is_some());

    let raw = dir.path().join("reads.craw");
    let samples = cimba::dnn::toy::toy_benchmark(1, 100, 0.1, 3)
        .remove(0)
        .samples;
    write_raw(
        &raw,
        &[RawRecord {
            channel: 7,
            samples,
        }],
    )
    .unwrap();
    let out = cmd_basecall(&toy_config(), Some(&raw), dir.path()).unwrap();
    assert_eq!(out.accuracy, vec![("channel7".to_string(), None)]);
    assert!(out.calls[0].sequence.len() > 50);
}

#[test]
fn la_grid_sweep_has_sixteen_cells() {
    let dir = tempfile::tempdir().unwrap();
    let (out, path) = cmd_sweep(&toy_config(), SweepAxis::LaGrid, dir.path()).unwrap();
    let SweepOutput::LaGrid(cells) = out else {
        panic!()
    };
    assert_eq!(cells.len(), 16);
    assert!(cells
        .iter()
        .any(|c| (c.l_tp, c.l_mlp, c.registers, c.latency_cycles) == (4, 1, 10, 11)));
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 17);
}

#[test]
fn report_carries_system_figures() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _) = cmd_report(&ExperimentConfig::default(), dir.path()).unwrap();
    assert_eq!(r.duplicated_fraction, 0.25);
    assert_eq!(r.data_reduction.communication_ratio, Some(40.0));
    assert_eq!(r.real_time_floor_bases_per_s, 204_800.0);
    assert!((r.table_one.communication_ratio - 43.7).abs() <= 0.5);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let write = |name: &str, text: &str| {
        let p = d.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };

    let (code, stdout) = cimba(&["simulate", "--tokens", "8"], d);
    assert_eq!(code, 0);
    assert!(stdout.contains("bases_per_s="));
    assert!(d.join("stats.json").exists());

    let bad = write("bad.json", r#"{"sim": {"tokens": 0}}"#);
    assert_eq!(cimba(&["simulate", "--config", &bad], d).0, 2);
    assert_eq!(cimba(&["simulate", "--ltp", "0"], d).0, 2);

    let tiny = write(
        "tiny.json",
        r#"{"arch": {"width": 4, "height": 4, "tile_rows": 64, "tile_cols": 64, "nodes": [
        {"kind": "signal_buffer", "x": 0, "y": 0}, {"kind": "dpu", "x": 1, "y": 0},
        {"kind": "decoder", "x": 2, "y": 0}, {"kind": "cim_tile", "x": 3, "y": 0}]}}"#,
    );
    assert_eq!(cimba(&["simulate", "--config", &tiny], d).0, 3);

    assert_eq!(
        cimba(&["basecall", "--input", "/nonexistent/reads.craw"], d).0,
        4
    );

    let empty = write(
        "empty.json",
        r#"{"network": {"kind": "toy"}, "sweep": {"drift_times": []}}"#,
    );
    assert_eq!(
        cimba(&["sweep", "--axis", "drift", "--config", &empty], d).0,
        5
    );

    let (code, stdout) = cimba(&["report"], d);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"duplicated_fraction\": 0.25"));
}
