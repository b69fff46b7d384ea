//! Basecall synthetic reads with the float reference network and compare
//! decoders.
//!
//! ```text
//! cargo run --release --example basecall_toy [reads]
//! ```

use cimba::basecall::{basecall_read, evaluate, mean, TOY_CHUNK_PLAN};
use cimba::decoder::{DecoderChoice, LaParams};
use cimba::dnn::infer_reference;
use cimba::dnn::toy::{toy_benchmark, toy_network, BENCHMARK_NOISE};

fn main() -> cimba::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    let graph = toy_network();
    let reads = toy_benchmark(n, 300, BENCHMARK_NOISE, 42);

    let first = &reads[0];
    let call = basecall_read(
        &first.samples,
        &TOY_CHUNK_PLAN,
        1,
        DecoderChoice::Full,
        |_, c| infer_reference(&graph, c),
    )?;
    println!("{} truth {}...", first.id, &first.sequence[..60]);
    println!("{} call  {}...", first.id, &call[..60.min(call.len())]);

    for decoder in [
        DecoderChoice::Full,
        DecoderChoice::Greedy,
        DecoderChoice::LookAround(LaParams::default()),
    ] {
        let acc = evaluate(&reads, &TOY_CHUNK_PLAN, 1, decoder, |_, _, s| {
            infer_reference(&graph, s)
        })?;
        println!(
            "{decoder:?}: mean accuracy {:.4} over {n} reads",
            mean(&acc)
        );
    }
    Ok(())
}
