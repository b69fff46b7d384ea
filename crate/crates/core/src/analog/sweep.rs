use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{infer_analog, program_network, ProgrammedSystem};
use crate::basecall::{evaluate, mean};
use crate::decoder::DecoderChoice;
use crate::device::DeviceParams;
use crate::dnn::reference::infer_reference;
use crate::dnn::toy::BenchmarkRead;
use crate::dnn::NetworkGraph;
use crate::error::{Error, Result};
use crate::mapper::{map_network, ArchDescription, MappingStrategy};
use crate::pipeline::ChunkPlan;

/// Read times after programming: t0, one hour, one day, ten days.
pub const DRIFT_TIMES: [f64; 4] = [20.0, 3600.0, 86_400.0, 864_000.0];

/// How reads are chunked and decoded during an evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSetup {
    pub plan: ChunkPlan,
    pub decoder: DecoderChoice,
}

impl Default for EvalSetup {
    fn default() -> Self {
        EvalSetup {
            plan: crate::basecall::TOY_CHUNK_PLAN,
            decoder: DecoderChoice::Full,
        }
    }
}

/// One line of sweep output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config: String,
    /// Seconds between programming and reading.
    pub time_s: f64,
    /// Weighted layer kept digital, for per-layer rows.
    pub layer: Option<usize>,
    pub accuracy: f64,
}

fn chunk_seed(seed: u64, read: usize, chunk: usize) -> u64 {
    let mut z = seed ^ ((read as u64) << 32 | chunk as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean aligned accuracy of the float reference network.
pub fn evaluate_reference(
    graph: &NetworkGraph,
    reads: &[BenchmarkRead],
    setup: &EvalSetup,
) -> Result<f64> {
    let acc = evaluate(
        reads,
        &setup.plan,
        graph.samples_per_frame(),
        setup.decoder,
        |_, _, s| infer_reference(graph, s),
    )?;
    Ok(mean(&acc))
}

/// Mean aligned accuracy of `system` read `elapsed` seconds after programming.
pub fn evaluate_system(
    system: &ProgrammedSystem,
    reads: &[BenchmarkRead],
    elapsed: f64,
    setup: &EvalSetup,
    seed: u64,
) -> Result<f64> {
    let t_read = system.program_time + elapsed;
    let acc = evaluate(
        reads,
        &setup.plan,
        system.graph.samples_per_frame(),
        setup.decoder,
        |r, c, s| infer_analog(system, s, t_read, chunk_seed(seed, r, c)),
    )?;
    Ok(mean(&acc))
}

/// Accuracy at each read time, given as seconds after programming.
pub fn drift_sweep(
    system: &ProgrammedSystem,
    reads: &[BenchmarkRead],
    times: &[f64],
    setup: &EvalSetup,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if times.is_empty() {
        return Err(Error::Empty("time axis"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be ascending"));
    }
    if times[0] < system.device.t0 {
        return Err(Error::param("times", "must not precede t0"));
    }
    let config = system.plan.label();
    times
        .iter()
        .map(|&t| {
            Ok(SweepRow {
                config: config.clone(),
                time_s: t,
                layer: None,
                accuracy: evaluate_system(system, reads, t, setup, seed)?,
            })
        })
        .collect()
}

/// Accuracy with each weighted layer kept digital in turn, plus the
/// all-digital and all-analog baselines. The all-digital row is the float
/// reference network.
#[allow(clippy::too_many_arguments)]
pub fn layer_sensitivity_sweep(
    graph: &NetworkGraph,
    arch: &ArchDescription,
    device: &DeviceParams,
    calibration: &[Vec<f32>],
    reads: &[BenchmarkRead],
    elapsed: f64,
    setup: &EvalSetup,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = vec![SweepRow {
        config: "all_digital".into(),
        time_s: elapsed,
        layer: None,
        accuracy: evaluate_reference(graph, reads, setup)?,
    }];
    let mut strategies = vec![(None, MappingStrategy::all_analog())];
    for li in graph.weighted_layers() {
        strategies.push((
            Some(li),
            MappingStrategy {
                first_layer_digital: false,
                digital_layers: vec![li],
            },
        ));
    }
    for (layer, strategy) in strategies {
        let mapping = map_network(graph, arch, &strategy)?;
        let system = program_network(graph, &mapping, arch, device, calibration, seed)?;
        rows.push(SweepRow {
            config: system.plan.label(),
            time_s: elapsed,
            layer,
            accuracy: evaluate_system(&system, reads, elapsed, setup, seed)?,
        });
    }
    Ok(rows)
}

/// CSV with columns `config,time_s,layer,accuracy`.
pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "config,time_s,layer,accuracy")?;
    for r in rows {
        let layer = r.layer.map(|l| l.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{:.6}", r.config, r.time_s, layer, r.accuracy)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::toy::{toy_benchmark, toy_network};

    fn setup() -> (
        NetworkGraph,
        ArchDescription,
        Vec<Vec<f32>>,
        Vec<BenchmarkRead>,
    ) {
        let cal = toy_benchmark(4, 120, 0.33, 99)
            .into_iter()
            .map(|r| r.samples)
            .collect();
        (
            toy_network(),
            ArchDescription::default(),
            cal,
            toy_benchmark(6, 80, 0.33, 1),
        )
    }

    #[test]
    fn sensitivity_has_weighted_plus_two_rows() {
        let (g, arch, cal, reads) = setup();
        let rows = layer_sensitivity_sweep(
            &g,
            &arch,
            &DeviceParams::default(),
            &cal,
            &reads,
            20.0,
            &EvalSetup::default(),
            1,
        )
        .unwrap();
        assert_eq!(rows.len(), g.weighted_layers().len() + 2);
        let reference = evaluate_reference(&g, &reads, &EvalSetup::default()).unwrap();
        assert_eq!(rows[0].accuracy, reference);
    }

    #[test]
    fn drift_sweep_is_deterministic_and_checks_axis() {
        let (g, arch, cal, reads) = setup();
        let m = map_network(&g, &arch, &MappingStrategy::all_analog()).unwrap();
        let sys = program_network(&g, &m, &arch, &DeviceParams::default(), &cal, 4).unwrap();
        let a = drift_sweep(&sys, &reads, &DRIFT_TIMES[..2], &EvalSetup::default(), 7).unwrap();
        let b = drift_sweep(&sys, &reads, &DRIFT_TIMES[..2], &EvalSetup::default(), 7).unwrap();
        assert_eq!(a, b);
        assert!(drift_sweep(&sys, &reads, &[], &EvalSetup::default(), 7).is_err());
        assert!(drift_sweep(&sys, &reads, &[3600.0, 20.0], &EvalSetup::default(), 7).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = vec![SweepRow {
            config: "all_analog".into(),
            time_s: 20.0,
            layer: None,
            accuracy: 0.5,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "config,time_s,layer,accuracy\nall_analog,20,,0.500000\n"
        );
    }
}
