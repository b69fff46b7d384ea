//! Regenerate the checked-in toy network from the toy pore model.
//!
//! ```text
//! cargo run --example fit_toy_fixture [output-dir]
//! ```

use std::path::PathBuf;

use cimba::dnn::{save_network, toy::fit_toy_network};
use cimba::pipeline::PoreModel;

fn main() -> cimba::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy"));
    std::fs::create_dir_all(&dir)?;
    let net = fit_toy_network(&PoreModel::toy())?;
    save_network(&net, &dir.join("weights.json"))?;
    println!(
        "wrote {} parameters to {}",
        net.parameter_count(),
        dir.display()
    );
    Ok(())
}
