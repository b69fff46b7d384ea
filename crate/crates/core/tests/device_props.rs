mod common;

use cimba::device::{
    analog_vmm, apply_drift, apply_programming_noise, map_weight_to_conductance, ConductancePair,
    DeviceParams, ProgrammedTile,
};
use common::rng;
use proptest::prelude::*;
use rand::Rng;

fn ideal_tile(weights: &[i32], rows: usize, cols: usize) -> ProgrammedTile {
    // w_max = g_max so one weight unit is one microsiemens
    let p = DeviceParams::ideal();
    let w: Vec<f64> = weights.iter().map(|&v| f64::from(v)).collect();
    let mut tile = ProgrammedTile::new(0.0);
    tile.program_block(0, 0, cols, &w, p.g_max, &p, &mut rng(0))
        .unwrap();
    assert_eq!((tile.rows_used, tile.cols_used), (rows, cols));
    for j in 0..cols {
        tile.col_scale[j] = p.g_max;
    }
    tile
}

#[test]
fn drift_after_one_day() {
    let p = DeviceParams::default();
    let pair = ConductancePair {
        g_plus: 25.0,
        g_minus: 0.0,
        t_programmed: 0.0,
    };
    let g = apply_drift(pair, 86_400.0, &p).unwrap().g_plus;
    assert!((g - 25.0 * 4320f64.powf(-0.06)).abs() < 1e-9);
    assert!((g - 15.13).abs() < 0.01);
}

#[test]
fn vmm_matches_integer_dot_product() {
    let mut r = rng(9);
    let p = DeviceParams::ideal();
    for _ in 0..100 {
        let w: Vec<i32> = (0..256).map(|_| r.gen_range(-25..=25)).collect();
        let x: Vec<i8> = (0..16).map(|_| r.gen_range(-3..=3)).collect();
        let tile = ideal_tile(&w, 16, 16);
        let got = analog_vmm(&tile, &x, &p, &mut rng(1), 0.0).unwrap();
        for j in 0..16 {
            let want: i32 = (0..16).map(|i| i32::from(x[i]) * w[i * 16 + j]).sum();
            let want = want.clamp(-512, 511);
            assert!(
                (i32::from(got[j]) - want).abs() <= 1,
                "col {j}: {} vs {want}",
                got[j]
            );
        }
    }
}

#[test]
fn extreme_inputs_saturate() {
    let p = DeviceParams::ideal();
    let tile = ideal_tile(&[25; 16], 16, 1);
    let hi = analog_vmm(&tile, &[127; 16], &p, &mut rng(0), 0.0).unwrap();
    let lo = analog_vmm(&tile, &[-128; 16], &p, &mut rng(0), 0.0).unwrap();
    assert_eq!((hi[0], lo[0]), (511, -512));
    assert_eq!(
        analog_vmm(&tile, &[0; 16], &p, &mut rng(0), 0.0).unwrap(),
        vec![0]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn weights_round_trip(w_max in 0.01f64..10.0, frac in -1.0f64..=1.0) {
        let p = DeviceParams::default();
        let w = frac * w_max;
        let back = map_weight_to_conductance(w, w_max, &p).decode(w_max, &p);
        prop_assert!((back - w).abs() <= 1e-12 * w_max, "{w} -> {back}");
    }

    #[test]
    fn out_of_range_weights_clip(w_max in 0.01f64..10.0, over in 1.0f64..100.0, neg: bool) {
        let p = DeviceParams::default();
        let w = if neg { -over * w_max } else { over * w_max };
        let pair = map_weight_to_conductance(w, w_max, &p);
        prop_assert!(pair.g_plus <= p.g_max && pair.g_minus <= p.g_max);
        prop_assert!((pair.decode(w_max, &p) - w.signum() * w_max).abs() < 1e-9);
    }

    #[test]
    fn programmed_conductances_stay_in_range(w in -2.0f64..2.0, seed: u64) {
        let p = DeviceParams { sigma_prog: 5.0, ..Default::default() };
        let pair = apply_programming_noise(map_weight_to_conductance(w, 1.0, &p), &p, &mut rng(seed));
        prop_assert!((0.0..=p.g_max).contains(&pair.g_plus));
        prop_assert!((0.0..=p.g_max).contains(&pair.g_minus));
    }

    #[test]
    fn drift_never_raises_conductance(
        g in 0.0f64..25.0,
        nu in 0.001f64..0.2,
        t1 in 20.0f64..1e6,
        dt in 1e-3f64..1e6,
        t_prog in 0.0f64..100.0,
    ) {
        let p = DeviceParams { drift_nu: nu, ..Default::default() };
        let pair = ConductancePair { g_plus: g, g_minus: g / 2.0, t_programmed: t_prog };
        let a = apply_drift(pair, t_prog + t1, &p).unwrap();
        let b = apply_drift(pair, t_prog + t1 + dt, &p).unwrap();
        prop_assert!(b.g_plus <= a.g_plus && b.g_minus <= a.g_minus);
    }

    #[test]
    fn adc_output_in_range(x in prop::collection::vec(any::<i8>(), 8), seed: u64, w in -3.0f64..3.0) {
        let p = DeviceParams::default();
        let mut tile = ProgrammedTile::new(0.0);
        tile.program_block(0, 0, 4, &[w; 32], 1.0, &p, &mut rng(seed)).unwrap();
        tile.col_scale.iter_mut().for_each(|s| *s = 1e3);
        let out = analog_vmm(&tile, &x, &p, &mut rng(seed), 3600.0).unwrap();
        prop_assert!(out.iter().all(|v| (-512..=511).contains(v)));
        prop_assert_eq!(&out, &analog_vmm(&tile, &x, &p, &mut rng(seed), 3600.0).unwrap());
    }
}
