//! One PCM crossbar: encode weights as conductance pairs, add programming
//! noise, run a VMM and watch the result decay with drift.

use cimba::device::{analog_vmm, DeviceParams, ProgrammedTile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cimba::Result<()> {
    let params = DeviceParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (rows, cols) = (64, 8);
    let weights: Vec<f64> = (0..rows * cols)
        .map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0)
        .collect();

    let mut tile = ProgrammedTile::new(0.0);
    tile.program_block(0, 0, cols, &weights, 1.0, &params, &mut rng)?;
    let input: Vec<i8> = (0..rows).map(|i| (i as i8 % 16) * 8 - 60).collect();

    for t in [20.0, 3600.0, 86_400.0, 864_000.0] {
        let out = analog_vmm(&tile, &input, &params, &mut rng, t)?;
        println!(
            "t={t:>9}s drift x{:.3} outputs {:?}",
            params.drift_factor(t),
            out
        );
    }
    Ok(())
}
