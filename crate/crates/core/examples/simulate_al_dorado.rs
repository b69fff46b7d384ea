//! Map AL-Dorado onto the default tile mesh and simulate a stream of tokens.
//!
//! ```text
//! cargo run --release --example simulate_al_dorado [tokens]
//! ```

use cimba::dnn::build_al_dorado;
use cimba::mapper::{map_network, ArchDescription, MappingStrategy};
use cimba::sim::{critical_path, simulate, CostTable, REAL_TIME_FLOOR};

fn main() -> cimba::Result<()> {
    let tokens = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(256);
    let graph = build_al_dorado(0);
    let arch = ArchDescription::default();
    let mapping = map_network(&graph, &arch, &MappingStrategy::default())?;
    let costs = CostTable::default();
    let (job, timeline, stats) = simulate(&graph, &mapping, &arch, &costs, tokens, 10.0, 25.0)?;

    println!("{} ops over {tokens} tokens", job.ops.len());
    println!(
        "makespan {} cycles, critical path {}",
        timeline.makespan,
        critical_path(&job, &costs)
    );
    println!(
        "{:.2} Mbases/s ({:.1}x real time), {:.3} W",
        stats.bases_per_s / 1e6,
        stats.bases_per_s / REAL_TIME_FLOOR,
        stats.average_power_w
    );
    let b = stats.breakdown;
    println!(
        "token latency {:.0} cycles: vmm {:.0}% lstm {:.0}% movement {:.0}% contention {:.0}% other {:.0}%",
        b.token_latency_cycles,
        b.vmm * 100.0,
        b.lstm_ops * 100.0,
        b.data_movement * 100.0,
        b.contention * 100.0,
        b.other * 100.0
    );
    Ok(())
}
