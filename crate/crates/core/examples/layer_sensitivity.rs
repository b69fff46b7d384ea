//! Keep one weighted layer digital at a time and see which layer's
//! analog errors cost the most accuracy after a day of drift.

use cimba::analog::{layer_sensitivity_sweep, EvalSetup};
use cimba::device::DeviceParams;
use cimba::dnn::toy::{toy_benchmark, toy_network, BENCHMARK_NOISE};
use cimba::mapper::ArchDescription;

fn main() -> cimba::Result<()> {
    let graph = toy_network();
    let calibration: Vec<Vec<f32>> = toy_benchmark(8, 300, BENCHMARK_NOISE, 99)
        .into_iter()
        .map(|r| r.samples)
        .collect();
    let reads = toy_benchmark(50, 300, BENCHMARK_NOISE, 42);
    let rows = layer_sensitivity_sweep(
        &graph,
        &ArchDescription::default(),
        &DeviceParams::default(),
        &calibration,
        &reads,
        86_400.0,
        &EvalSetup::default(),
        8,
    )?;
    for r in rows {
        let layer = r.layer.map_or("-".to_string(), |l| l.to_string());
        println!(
            "{:<24} digital layer {layer:>2}  accuracy {:.4}",
            r.config, r.accuracy
        );
    }
    Ok(())
}
