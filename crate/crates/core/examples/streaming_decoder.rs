//! Feed transition frames one at a time to the streaming look-around
//! decoder and watch decisions come out with a fixed delay.

use cimba::decoder::{full_crf_decode, LaParams, LookAroundDecoder, MoveSequence};
use cimba::dnn::infer_reference;
use cimba::dnn::toy::{toy_benchmark, toy_network, BENCHMARK_NOISE};

fn main() -> cimba::Result<()> {
    let graph = toy_network();
    let read = &toy_benchmark(1, 120, BENCHMARK_NOISE, 7)[0];
    let frames = infer_reference(&graph, &read.samples)?;

    let la = LaParams::new(4, 1)?;
    let mut decoder = LookAroundDecoder::new(la, frames.layout());
    let mut decisions = Vec::new();
    for (t, frame) in frames.frames().enumerate() {
        if let Some(d) = decoder.push(frame)? {
            if decisions.len() < 5 {
                println!(
                    "frame {t:>3} in -> decided frame {} (transition {})",
                    d.frame, d.transition
                );
            }
            decisions.push(d.transition);
        }
    }
    decisions.extend(decoder.finish().into_iter().map(|d| d.transition));

    let stats = decoder.stats();
    let cost = la.cost();
    println!(
        "{} frames, max lookahead {}, max buffered {} (registers {})",
        stats.frames_in, stats.max_lookahead, stats.max_buffered, cost.registers
    );
    let full = full_crf_decode(&frames)?;
    let streamed = MoveSequence::from_transitions(&decisions);
    let agree = full
        .steps
        .iter()
        .zip(&streamed.steps)
        .filter(|(a, b)| a == b)
        .count();
    println!("agrees with full decode on {agree}/{} frames", full.len());
    Ok(())
}
