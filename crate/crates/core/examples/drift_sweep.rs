//! Program the toy network onto noisy PCM tiles and read it back after
//! increasing amounts of conductance drift.
//!
//! ```text
//! cargo run --release --example drift_sweep [reads]
//! ```

use cimba::analog::{drift_sweep, program_network, EvalSetup, DRIFT_TIMES};
use cimba::device::DeviceParams;
use cimba::dnn::toy::{toy_benchmark, toy_network, BENCHMARK_NOISE};
use cimba::mapper::{map_network, ArchDescription, MappingStrategy};

fn main() -> cimba::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    let graph = toy_network();
    let arch = ArchDescription::default();
    let device = DeviceParams::default();
    let calibration: Vec<Vec<f32>> = toy_benchmark(8, 300, BENCHMARK_NOISE, 99)
        .into_iter()
        .map(|r| r.samples)
        .collect();
    let reads = toy_benchmark(n, 300, BENCHMARK_NOISE, 42);

    println!(
        "drift factor at 1 day: {:.3}",
        device.drift_factor(86_400.0)
    );
    for strategy in [
        MappingStrategy::first_layer_digital(),
        MappingStrategy::all_analog(),
    ] {
        let mapping = map_network(&graph, &arch, &strategy)?;
        let system = program_network(&graph, &mapping, &arch, &device, &calibration, 8)?;
        for row in drift_sweep(&system, &reads, &DRIFT_TIMES, &EvalSetup::default(), 8)? {
            println!(
                "{:<20} t={:>9}s accuracy {:.4}",
                row.config, row.time_s, row.accuracy
            );
        }
    }
    Ok(())
}
