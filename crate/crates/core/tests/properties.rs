mod common;

use common::{
    decoupled_sector_check, free_phase_check, norm_drift_check, random_params, step_halving_check, structural_errors,
};
use memsim::circuit::{CircuitParams, Compiler};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn structural_identities_hold(seed in any::<u64>(), coupled in any::<bool>(), flux in 0.0f64..0.2) {
        let p = random_params(&mut ChaCha8Rng::seed_from_u64(seed), coupled);
        let [dressed, half, root8, lambda, b] = structural_errors(&p, flux);
        prop_assert!(dressed < 1e-12, "dressed {dressed}");
        prop_assert!(half < 1e-12, "zero-point product {half}");
        // The printed amplitudes give 1/2, not 1/√8.
        prop_assert!(root8 > 0.4);
        prop_assert!(lambda < 1e-12, "lambda {lambda}");
        prop_assert!(b < 1e-10, "B {b}");
    }

    #[test]
    fn coefficients_are_finite_away_from_the_singularity(seed in any::<u64>(), flux in 0.0f64..0.249) {
        let p = random_params(&mut ChaCha8Rng::seed_from_u64(seed), true);
        let c = Compiler::default();
        let h = c.coeffs_coupled(&p, flux * c.constants.flux_quantum, 1.0).unwrap();
        prop_assert!(h.omega.iter().chain(&h.drive_per_gate_charge).all(|v| v.is_finite() && *v > 0.0));
        prop_assert!(h.couplings.iter().all(|m| m.plus().is_finite() && m.minus().is_finite()));
    }
}

#[test]
fn frequency_is_monotonic_in_flux_on_the_first_quarter() {
    // L̃ shrinks as cos φx falls, so E_L and ω grow towards the singularity.
    let c = Compiler::default();
    let p = CircuitParams::table1();
    let w = |f: f64| c.coeffs_single(&p, f * c.constants.flux_quantum, 0.0).unwrap().omega;
    let mut last = w(0.0);
    for k in 1..60 {
        let now = w(0.248 * k as f64 / 59.0);
        assert!(now[0] > last[0] && now[1] > last[1], "step {k}");
        last = now;
    }
}

#[test]
fn frequency_is_smooth_in_flux() {
    let c = Compiler::default();
    let p = CircuitParams::table2();
    let w = |f: f64| c.coeffs_coupled(&p, f * c.constants.flux_quantum, 0.0).unwrap().omega;
    for f in [0.02, 0.1, 0.18, 0.22] {
        for m in 0..4 {
            let d = |h: f64| (w(f + h)[m] - w(f - h)[m]) / (2.0 * h);
            let (coarse, fine) = (d(1e-4), d(2.5e-5));
            assert!(
                (coarse - fine).abs() <= 0.01 * fine.abs(),
                "flux {f} mode {m}: {coarse} vs {fine}"
            );
        }
    }
}

#[test]
fn norm_is_conserved_over_ten_periods() {
    let c = norm_drift_check();
    assert!(c.ok, "{}", c.detail);
}

#[test]
fn free_evolution_phase_is_exact() {
    let c = free_phase_check();
    assert!(c.ok, "{}", c.detail);
}

#[test]
fn decoupled_sector_is_constant() {
    let c = decoupled_sector_check();
    assert!(c.ok, "{}", c.detail);
}

#[test]
fn integrator_is_fourth_order() {
    let c = step_halving_check();
    assert!(c.ok, "{}", c.detail);
}
