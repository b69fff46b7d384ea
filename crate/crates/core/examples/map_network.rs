//! Place each weighted layer of a network on crossbar tiles or DPUs.
//!
//! ```text
//! cargo run --example map_network [all-analog]
//! ```

use cimba::dnn::build_al_dorado;
use cimba::mapper::{map_network, validate_mapping, ArchDescription, MappingStrategy, Placement};

fn main() -> cimba::Result<()> {
    let strategy = match std::env::args().nth(1).as_deref() {
        Some("all-analog") => MappingStrategy::all_analog(),
        _ => MappingStrategy::first_layer_digital(),
    };
    let graph = build_al_dorado(0);
    let arch = ArchDescription::default();
    let mapping = map_network(&graph, &arch, &strategy)?;

    for l in &mapping.layers {
        let kind = &graph.layers[l.layer].kind;
        match &l.placement {
            Placement::Digital { dpu } => println!("layer {:>2} {kind:?}\n    dpu {dpu}", l.layer),
            Placement::Analog { blocks } => {
                println!("layer {:>2} {kind:?}", l.layer);
                for b in blocks {
                    println!(
                        "    tile {:>2} rows {}..{} cols {}..{}",
                        b.tile,
                        b.row0,
                        b.row0 + b.rows,
                        b.col0,
                        b.col0 + b.cols
                    );
                }
            }
        }
    }
    let problems = validate_mapping(&mapping, &graph, &arch);
    println!(
        "{} of {} tiles used, {} problems",
        mapping.tiles_used().len(),
        arch.n_tiles(),
        problems.len()
    );
    Ok(())
}
