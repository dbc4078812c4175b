use std::f64::consts::PI;

use gsqg::diagnostics::{
    linear_scaling_field, scaling_field, sobolev_norm, sup_derivative_norms, DiagnosticsConfig,
    DiagnosticsRecord,
};
use gsqg::evolve::propagate_linear;
use gsqg::rhs::linear_term;
use gsqg::spectral::refined_values;
use gsqg::{FrontState, Grid, Params};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn band_limited(grid: Grid, band: usize, seed: u64) -> FrontState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<(f64, f64)> = (0..band).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3))).collect();
    let dxi = grid.dxi();
    FrontState::from_fn(grid, 0.0, |x| {
        amps.iter()
            .enumerate()
            .map(|(m, (a, p))| a * ((m as f64 + 1.0) * dxi * x + p).cos() / (m as f64 + 1.0))
            .sum()
    })
}

#[test]
fn sobolev_zero_is_direct_l2() {
    let grid = Grid::new(128, 7.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vals: Vec<f64> = (0..128).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = FrontState::new(grid, 0.0, vals.clone()).unwrap();
    let direct = (vals.iter().map(|v| v * v).sum::<f64>() * grid.dx()).sqrt();
    assert!((sobolev_norm(&f, 0.0) - direct).abs() < 1e-12 * direct);
}

#[test]
fn sup_norms_against_refined_grid() {
    // band well inside the grid: the sampled max is then within (ξ dx)²/8 of the true one
    let grid = Grid::new(256, 2.0 * PI).unwrap();
    for seed in 0..4 {
        let f = band_limited(grid, 8, seed);
        let norms = sup_derivative_norms(&f, 9);
        for (j, got) in norms.iter().enumerate() {
            let d = if j == 0 { f.clone() } else { gsqg::spectral::derivative(&f, j as u32) };
            let fine = refined_values(&d, 16).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(*got <= fine * (1.0 + 1e-12));
            assert!((fine - got) <= 0.01 * fine, "seed {seed} j {j}: {got} vs {fine}");
        }
    }
    let k = 4.0;
    let c = FrontState::from_fn(grid, 0.0, |x| (k * x).cos());
    for (j, v) in sup_derivative_norms(&c, 5).iter().enumerate() {
        let want = k.powi(j as i32);
        // round-off in the top modes is amplified by ξ_max^j
        assert!((v - want).abs() < 1e-7 * want, "j={j}: {v} vs {want}");
    }
}

#[test]
fn scaling_field_of_linear_packet_two_ways() {
    let grid = Grid::new(512, 100.0).unwrap();
    let params = Params::with_alpha(1.5).unwrap();
    let w = 3.0;
    let k0 = 3.0;
    let init = FrontState::from_fn(grid, 0.0, |x| {
        let y = x - 50.0;
        1e-2 * (-y * y / (2.0 * w * w)).exp() * (k0 * y).cos()
    });
    for t in [0.0, 2.0, 5.0] {
        let phi = propagate_linear(&init, t, &params);
        let phi_t = linear_term(&phi, &params);
        let by_definition = scaling_field(&phi, &phi_t, &params).unwrap();
        let by_commutation = linear_scaling_field(&init, t, &params);
        let err = by_definition
            .values()
            .iter()
            .zip(by_commutation.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "t={t}: {err}");
    }
    let wrong = FrontState::zeros(grid, 1.0);
    assert!(scaling_field(&init, &wrong, &params).is_err());
}

#[test]
fn lp_energies_add_up_to_l2() {
    let grid = Grid::new(256, 30.0).unwrap();
    let params = Params::with_alpha(1.5).unwrap();
    let f = band_limited(grid, 100, 9);
    let rhs = FrontState::zeros(grid, 0.0);
    let rec = DiagnosticsRecord::compute(&f, &rhs, 0, &params, &DiagnosticsConfig::default()).unwrap();
    let sum: f64 = rec.lp_energies.iter().map(|(_, e)| e * e).sum::<f64>() + rec.lp_low.powi(2);
    assert!((sum - rec.l2_norm.powi(2)).abs() < 1e-8 * rec.l2_norm.powi(2));
    assert_eq!(rec.l2_norm, f.l2_norm());
    assert!((rec.sobolev[0].1 - rec.l2_norm).abs() < 1e-12 * rec.l2_norm);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn records_are_finite_and_nonnegative(seed in 0u64..10_000, amp in 1e-6f64..1.0, t in 0.0f64..50.0) {
        let grid = Grid::new(64, 20.0).unwrap();
        let params = Params::with_alpha(1.4).unwrap();
        let f = band_limited(grid, 20, seed).scaled(amp).with_time(t);
        let rhs = linear_term(&f, &params);
        let rec = DiagnosticsRecord::compute(&f, &rhs, 3, &params, &DiagnosticsConfig::default()).unwrap();
        for (k, v) in rec.fields() {
            if k == "mean" {
                prop_assert!(v.is_finite());
            } else {
                prop_assert!(v.is_finite() && v >= 0.0, "{} = {}", k, v);
            }
        }
    }
}
