//! Checks shared by the integration tests and the acceptance report.

#![allow(dead_code)]

use std::f64::consts::PI;

use memsim::circuit::{CircuitParams, Compiler, SecondDevice};
use memsim::dynamics::{
    run_feedback, CoeffsProvider, DriveSpec, FeedbackSpec, OperatorBasis, Rk4, SimConfig, Simulation, SplitHamiltonian,
};
use memsim::exec::Execution;
use memsim::fock::{build_state, ModeLayout, StateSpec, StateVector, C64};
use rand::Rng;

/// Outcome of one check: the measured quantity and whether it passed.
#[derive(Debug, Clone)]
pub struct Check {
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(ok: bool, detail: impl Into<String>) -> Self {
        Check {
            ok,
            detail: detail.into(),
        }
    }

    pub fn all(checks: Vec<Check>) -> Check {
        let ok = checks.iter().all(|c| c.ok);
        let detail = checks.iter().map(|c| c.detail.as_str()).collect::<Vec<_>>().join("; ");
        Check { ok, detail }
    }
}

/// Table values with every element scaled by a factor in `[0.7, 1.3]`.
pub fn random_params(rng: &mut impl Rng, coupled: bool) -> CircuitParams {
    let mut s = || rng.random_range(0.7..1.3);
    let base = CircuitParams::table2();
    let second = base.second.unwrap();
    CircuitParams {
        c_c: base.c_c * s(),
        c_1: base.c_1 * s(),
        c_2: base.c_2 * s(),
        c_g: base.c_g * s(),
        c_j: base.c_j * s(),
        l_1: base.l_1 * s(),
        l_2: base.l_2 * s(),
        e_j: base.e_j * s(),
        second: coupled.then(|| SecondDevice {
            c_3: second.c_3 * s(),
            c_4: second.c_4 * s(),
            l_3: second.l_3 * s(),
            l_4: second.l_4 * s(),
            c_m: second.c_m * s(),
        }),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Worst relative errors of the structural identities for one parameter set
/// at flux `flux_over_phi0`:
/// `[dressed identities, n·φ vs 1/2, n·φ vs 1/√8, λ± reconstruction, B·B⁻¹]`.
pub fn structural_errors(p: &CircuitParams, flux_over_phi0: f64) -> [f64; 5] {
    let c = Compiler::default();
    let flux = flux_over_phi0 * c.constants.flux_quantum;
    let single = CircuitParams { second: None, ..*p };
    let d = c.dressed_single(&single, flux).unwrap();
    let alpha = p.c_2 * (p.c_1 + p.c_g) / ((p.c_c + p.c_1 + p.c_g) * (p.c_c + p.c_2) - p.c_c * p.c_c);
    let dressed = rel(d.c1_t, d.c1g_t)
        .max(rel(d.c12_t, d.c2g_t))
        .max(rel(d.alpha_2 - d.alpha_1, alpha));

    let en = c.energies_single(&d);
    let (mut half, mut root8) = (0.0f64, 0.0f64);
    for i in 0..2 {
        let prod = en.n_zpf[i] * en.phi_zpf[i];
        half = half.max(rel(prod, 0.5));
        root8 = root8.max(rel(prod, 1.0 / 8f64.sqrt()));
    }

    let h = c.coeffs_single(&single, flux, 0.0).unwrap();
    let hbar = c.constants.hbar;
    let ratio = (en.e_l[0] * en.e_l[1] / (4.0 * en.e_c[0] * en.e_c[1])).powf(0.25);
    let i12 = en.e_l12 / ratio / hbar;
    let g12 = 2.0 * en.e_c12 * ratio / hbar;
    let (lp, lm) = h.lambda();
    let lambda = rel(lp, i12 + g12).max(rel(lm, i12 - g12));

    let mut b_err = 0.0f64;
    if p.is_coupled() {
        let dc = c.dressed_coupled(p, flux).unwrap();
        let b = &dc.b;
        let bmax = b.entries.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..4 {
            for j in 0..4 {
                let prod: f64 = (0..4).map(|k| b.entries[i][k] * b.inverse[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                b_err = b_err.max((prod - want).abs());
                b_err = b_err.max((b.entries[i][j] - b.entries[j][i]).abs() / bmax);
            }
        }
    }
    [dressed, half, root8, lambda, b_err]
}

/// Driven single-device configuration at the rest flux `c₁ = 1.84`.
pub fn driven_config(initial: StateSpec, v0: f64, ratio: f64, cutoff: usize, periods: usize) -> SimConfig {
    let params = CircuitParams::table1();
    let c = Compiler::default();
    let w1 = c
        .coeffs_single(&params, 1.84 * c.constants.flux_quantum, 0.0)
        .unwrap()
        .omega[0];
    let omega_nu = ratio * w1;
    SimConfig {
        params,
        layout: ModeLayout::uniform(2, cutoff).unwrap(),
        initial,
        drive: DriveSpec {
            v0,
            omega_nu,
            phase: 0.0,
        },
        feedback: FeedbackSpec {
            c1: 1.84,
            c2: 0.08,
            delta_t: 2.0 * PI / omega_nu / 200.0,
        },
        n_periods: periods,
        substeps_per_window: 8,
        cos_floor: 1e-3,
        truncation_threshold: 0.999,
        norm_tolerance: 1e-6,
        operating_point: None,
        exec: Execution::Auto,
    }
}

/// Largest norm deviation over ten periods at the default cutoff of 12.
pub fn norm_drift_check() -> Check {
    let cfg = driven_config(StateSpec::Vacuum, 0.01e-6, PI / 5.94, 12, 10);
    match run_feedback(&cfg) {
        Ok(t) => {
            let d = t.max_norm_deviation();
            Check::new(d < 1e-6, format!("norm drift {d:.2e} over 10 periods"))
        }
        Err(e) => Check::new(false, format!("run failed: {e}")),
    }
}

/// Free single-mode rotation: after time `t`, `⟨a⟩ = α e^{−iωt}`.
pub fn free_phase_check() -> Check {
    let layout = ModeLayout::uniform(2, 20).unwrap();
    let basis = OperatorBasis::new(&layout);
    let c = Compiler::default();
    let mut h = c
        .coeffs_single(&CircuitParams::table1(), 1.84 * c.constants.flux_quantum, 0.0)
        .unwrap();
    h.couplings.clear();
    let stat = basis.static_values(&h).unwrap();
    let drive = basis.drive_values(&h).unwrap();
    let split = SplitHamiltonian {
        pattern: basis.pattern(),
        static_part: &stat,
        drive_part: &drive,
    };
    let psi0 = build_state(&StateSpec::Coherent { r: 0.7, phi: 0.4 }, &layout, 0.999).unwrap();
    let a0 = psi0.mean_annihilation(1);
    let w2 = h.omega[1];
    let period = 2.0 * PI / w2;
    let steps = 3 * 1600;
    let dt = 3.0 * period / steps as f64;
    let mut psi: Vec<C64> = psi0.amplitudes.iter().copied().collect();
    let mut rk = Rk4::new(psi.len(), Execution::Sequential);
    for k in 0..steps {
        rk.step(&split, |_| 0.0, &mut psi, k as f64 * dt, dt);
    }
    let t = steps as f64 * dt;
    let state = StateVector::new(psi.into(), layout).unwrap();
    let want = a0 * C64::from_polar(1.0, -w2 * t);
    let err = (state.mean_annihilation(1) - want).norm();
    Check::new(err < 1e-8, format!("free-rotation phase error {err:.2e}"))
}

/// With the couplings removed and the drive acting on mode 1 only, `⟨n₂⟩`
/// stays constant through the full feedback run.
pub fn decoupled_sector_check() -> Check {
    let provider = |flux: f64| {
        let mut h = Compiler::default().coeffs_single(&CircuitParams::table1(), flux, 0.0)?;
        h.couplings.clear();
        h.drive_per_gate_charge[1] = 0.0;
        h.drive_per_gate_charge[0] *= 30.0;
        Ok(h)
    };
    let cfg = driven_config(
        StateSpec::FockSuperposition { eta: 1.0, chi: 0.3 },
        0.01e-6,
        PI / 5.94,
        6,
        1,
    );
    let sim = Simulation::new(cfg, &provider as &dyn CoeffsProvider).unwrap();
    let mut n1 = Vec::new();
    let mut n2 = Vec::new();
    sim.run(|_, _, s| {
        n1.push(s.mean_number(0));
        n2.push(s.mean_number(1));
        Ok(())
    })
    .unwrap();
    let moved = n1.iter().map(|n| (n - n1[0]).abs()).fold(0.0, f64::max);
    let drift = n2.iter().map(|n| (n - n2[0]).abs()).fold(0.0, f64::max);
    Check::new(
        drift < 1e-10 && moved > 1e-6,
        format!("<n2> drift {drift:.2e} while <n1> moved {moved:.2e}"),
    )
}

/// Error ratio between step sizes `h` and `h/2` against a fine reference;
/// fourth order gives about 16.
pub fn step_halving_check() -> Check {
    let layout = ModeLayout::uniform(2, 6).unwrap();
    let basis = OperatorBasis::new(&layout);
    let h = Compiler::default()
        .coeffs_single(&CircuitParams::table1(), 0.0, 0.0)
        .unwrap();
    let stat = basis.static_values(&h).unwrap();
    let drive = basis.drive_values(&h).unwrap();
    let split = SplitHamiltonian {
        pattern: basis.pattern(),
        static_part: &stat,
        drive_part: &drive,
    };
    let psi0 = build_state(&StateSpec::Coherent { r: 0.5, phi: 0.0 }, &layout, 0.999).unwrap();
    let span = 2.0 * 2.0 * PI / h.omega[0];
    let wd = 0.5 * h.omega[0];
    let run = |n: usize| {
        let mut psi: Vec<C64> = psi0.amplitudes.iter().copied().collect();
        let mut rk = Rk4::new(psi.len(), Execution::Sequential);
        let dt = span / n as f64;
        for k in 0..n {
            rk.step(&split, |t| 0.05 * (wd * t).cos(), &mut psi, k as f64 * dt, dt);
        }
        psi
    };
    let reference = run(12800);
    let err = |n: usize| {
        run(n)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let (e1, e2) = (err(100), err(200));
    let ratio = e1 / e2;
    Check::new(
        ratio > 14.0 && ratio < 18.0,
        format!("step-halving error ratio {ratio:.2}"),
    )
}
