//! Accuracy and hardware cost of the look-around decoder over its two
//! window lengths.
//!
//! ```text
//! cargo run --release --example lookaround_grid [reads]
//! ```

use cimba::basecall::{evaluate, mean, TOY_CHUNK_PLAN};
use cimba::decoder::{DecoderChoice, LaParams};
use cimba::dnn::infer_reference;
use cimba::dnn::toy::{toy_benchmark, toy_network, BENCHMARK_NOISE};

fn main() -> cimba::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let graph = toy_network();
    let reads = toy_benchmark(n, 300, BENCHMARK_NOISE, 42);
    let accuracy = |d| -> cimba::Result<f64> {
        let acc = evaluate(&reads, &TOY_CHUNK_PLAN, 1, d, |_, _, s| {
            infer_reference(&graph, s)
        })?;
        Ok(mean(&acc))
    };

    println!("full decode {:.4}", accuracy(DecoderChoice::Full)?);
    println!("l_tp l_mlp accuracy registers latency");
    for l_mlp in 1..=4 {
        for l_tp in 1..=4 {
            let la = LaParams::new(l_tp, l_mlp)?;
            let cost = la.cost();
            println!(
                "{l_tp:>4} {l_mlp:>5} {:>8.4} {:>9} {:>7}",
                accuracy(DecoderChoice::LookAround(la))?,
                cost.registers,
                cost.latency_cycles
            );
        }
    }
    Ok(())
}
