//! Run the same chunk through the float reference and the programmed analog
//! system, with and without device non-idealities.

use cimba::analog::{infer_analog, program_network};
use cimba::basecall::TOY_CHUNK_PLAN;
use cimba::decoder::{collapse_moves, full_crf_decode};
use cimba::device::DeviceParams;
use cimba::dnn::infer_reference;
use cimba::dnn::toy::{toy_benchmark, toy_network, BENCHMARK_NOISE};
use cimba::mapper::{map_network, ArchDescription, MappingStrategy};
use cimba::pipeline::chunk;

fn main() -> cimba::Result<()> {
    let graph = toy_network();
    let arch = ArchDescription::default();
    let mapping = map_network(&graph, &arch, &MappingStrategy::default())?;
    let calibration: Vec<Vec<f32>> = toy_benchmark(8, 300, BENCHMARK_NOISE, 99)
        .into_iter()
        .map(|r| r.samples)
        .collect();
    let read = &toy_benchmark(1, 300, BENCHMARK_NOISE, 42)[0];
    let first = &chunk(&read.samples, &TOY_CHUNK_PLAN)[0];

    let reference = collapse_moves(&full_crf_decode(&infer_reference(&graph, &first.samples)?)?);
    println!("reference {}", &reference[..50.min(reference.len())]);
    for (name, device) in [
        ("ideal", DeviceParams::ideal()),
        ("pcm", DeviceParams::default()),
    ] {
        let system = program_network(&graph, &mapping, &arch, &device, &calibration, 5)?;
        for elapsed in [20.0, 86_400.0] {
            let frames = infer_analog(&system, &first.samples, system.program_time + elapsed, 0)?;
            let call = collapse_moves(&full_crf_decode(&frames)?);
            println!("{name:<5} {elapsed:>7}s {}", &call[..50.min(call.len())]);
        }
    }
    Ok(())
}
