use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::hamiltonian::OperatorBasis;
use super::integrator::{Rk4, SplitHamiltonian};
use super::trajectory::{Trajectory, TrajectoryRow};
use crate::circuit::{CircuitParams, Compiler, HamiltonianCoeffs};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{build_state, ModeLayout, StateSpec, StateVector};

pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-6;

/// `V_g(t) = V₀ cos(ω_ν t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub v0: f64,
    pub omega_nu: f64,
    pub phase: f64,
}

impl DriveSpec {
    pub fn voltage(&self, t: f64) -> f64 {
        self.v0 * (self.omega_nu * t + self.phase).cos()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_nu
    }
}

/// `Φx/Φ₀ = c₁ − c₂⟨φ̂₁⟩²`, refreshed every `delta_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSpec {
    pub c1: f64,
    pub c2: f64,
    pub delta_t: f64,
}

/// Target intra-device couplings at the rest flux `c₁Φ₀`. When set, the
/// compiled capacitive and inductive couplings are rescaled by constant
/// factors so that `G₁₂/ω₁` and `I₁₂/ω₁` hit these values there; the flux
/// dependence is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPoint {
    pub g12_over_omega1: f64,
    pub i12_over_omega1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: CircuitParams,
    pub layout: ModeLayout,
    pub initial: StateSpec,
    pub drive: DriveSpec,
    pub feedback: FeedbackSpec,
    pub n_periods: usize,
    pub substeps_per_window: usize,
    pub cos_floor: f64,
    pub truncation_threshold: f64,
    pub norm_tolerance: f64,
    pub operating_point: Option<OperatingPoint>,
    pub exec: Execution,
}

impl SimConfig {
    pub fn coupled(&self) -> bool {
        self.params.is_coupled()
    }

    pub fn n_windows(&self) -> usize {
        (self.n_periods as f64 * self.drive.period() / self.feedback.delta_t).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        let modes = if self.coupled() { 4 } else { 2 };
        if self.layout.n_modes() != modes {
            return Err(Error::DimensionMismatch {
                context: "mode layout",
                expected: modes,
                found: self.layout.n_modes(),
            });
        }
        if !(self.drive.v0 >= 0.0 && self.drive.v0.is_finite()) {
            return invalid(format!("drive amplitude must be non-negative, got {}", self.drive.v0));
        }
        if !(self.drive.omega_nu > 0.0 && self.drive.omega_nu.is_finite()) {
            return invalid(format!("drive frequency must be positive, got {}", self.drive.omega_nu));
        }
        if !(self.feedback.delta_t > 0.0) {
            return invalid(format!(
                "feedback window must be positive, got {}",
                self.feedback.delta_t
            ));
        }
        let wdt = self.drive.omega_nu * self.feedback.delta_t;
        if wdt >= 0.1 {
            return invalid(format!("ω_ν·Δt = {wdt:.3} violates ω_ν·Δt ≪ 1 (limit 0.1)"));
        }
        if wdt > 0.05 {
            log::warn!("ω_ν·Δt = {wdt:.3} is close to the 0.1 limit");
        }
        if self.n_periods < 1 {
            return invalid("n_periods must be at least 1".into());
        }
        if self.substeps_per_window < 4 {
            return invalid(format!(
                "substeps_per_window must be at least 4, got {}",
                self.substeps_per_window
            ));
        }
        if !(self.cos_floor > 0.0 && self.cos_floor < 1.0) {
            return invalid(format!("cos_floor must lie in (0, 1), got {}", self.cos_floor));
        }
        if !(self.norm_tolerance > 0.0) {
            return invalid("norm_tolerance must be positive".into());
        }
        if let Some(op) = &self.operating_point {
            if !(op.g12_over_omega1.is_finite() && op.i12_over_omega1.is_finite()) {
                return invalid("operating point ratios must be finite".into());
            }
        }
        Ok(())
    }
}

/// Source of Hamiltonian coefficients as a function of flux (webers).
pub trait CoeffsProvider {
    fn coeffs(&self, flux: f64) -> Result<HamiltonianCoeffs>;
}

impl<F: Fn(f64) -> Result<HamiltonianCoeffs>> CoeffsProvider for F {
    fn coeffs(&self, flux: f64) -> Result<HamiltonianCoeffs> {
        self(flux)
    }
}

/// Runs the circuit compiler, optionally rescaling intra-device couplings.
#[derive(Debug, Clone)]
pub struct CompiledProvider {
    pub compiler: Compiler,
    pub params: CircuitParams,
    /// Multipliers on the (capacitive, inductive) intra-device couplings.
    pub scale: (f64, f64),
}

impl CompiledProvider {
    pub fn new(compiler: Compiler, params: CircuitParams) -> Self {
        CompiledProvider {
            compiler,
            params,
            scale: (1.0, 1.0),
        }
    }

    pub fn with_operating_point(mut self, op: &OperatingPoint, reference_flux: f64) -> Result<Self> {
        let raw = self.raw(reference_flux)?;
        let w1 = raw.omega[0];
        let c = raw.coupling(0, 1).expect("intra-device coupling is always compiled");
        self.scale = (
            op.g12_over_omega1 / (c.capacitive / w1),
            op.i12_over_omega1 / (c.inductive / w1),
        );
        Ok(self)
    }

    fn raw(&self, flux: f64) -> Result<HamiltonianCoeffs> {
        if self.params.is_coupled() {
            self.compiler.coeffs_coupled(&self.params, flux, 0.0)
        } else {
            self.compiler.coeffs_single(&self.params, flux, 0.0)
        }
    }
}

impl CoeffsProvider for CompiledProvider {
    fn coeffs(&self, flux: f64) -> Result<HamiltonianCoeffs> {
        let mut h = self.raw(flux)?;
        if self.scale != (1.0, 1.0) {
            for c in h.couplings.iter_mut() {
                if c.modes == (0, 1) || c.modes == (2, 3) {
                    *c = c.scaled(self.scale.1, self.scale.0);
                }
            }
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxUpdate {
    pub flux_over_phi0: f64,
    pub clamped: bool,
}

/// Feedback law, pulled back to `|cos(2πΦx/Φ₀)| = cos_floor` when it lands
/// on the SQUID singularity.
pub fn flux_update(exp_phi1: f64, c1: f64, c2: f64, cos_floor: f64) -> FluxUpdate {
    let f = c1 - c2 * exp_phi1 * exp_phi1;
    if (2.0 * PI * f).cos().abs() >= cos_floor {
        return FluxUpdate {
            flux_over_phi0: f,
            clamped: false,
        };
    }
    let singular = 0.25 + 0.5 * ((f - 0.25) * 2.0).round();
    let offset = cos_floor.asin() / (2.0 * PI) * (1.0 + 1e-9);
    let side = if f >= singular { 1.0 } else { -1.0 };
    FluxUpdate {
        flux_over_phi0: singular + side * offset,
        clamped: true,
    }
}

/// One prepared feedback run.
pub struct Simulation<'p> {
    config: SimConfig,
    provider: &'p dyn CoeffsProvider,
    basis: OperatorBasis,
    omega1: f64,
}

impl<'p> Simulation<'p> {
    pub fn new(config: SimConfig, provider: &'p dyn CoeffsProvider) -> Result<Self> {
        config.validate()?;
        let phi0 = Compiler::default().constants.flux_quantum;
        let reference = provider.coeffs(config.feedback.c1 * phi0)?;
        if reference.n_modes() != config.layout.n_modes() {
            return Err(Error::DimensionMismatch {
                context: "provider modes",
                expected: config.layout.n_modes(),
                found: reference.n_modes(),
            });
        }
        let basis = OperatorBasis::new(&config.layout);
        Ok(Simulation {
            omega1: reference.omega[0],
            config,
            provider,
            basis,
        })
    }

    /// `ω₁` at the rest flux `c₁Φ₀`.
    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        build_state(
            &self.config.initial,
            &self.config.layout,
            self.config.truncation_threshold,
        )
    }

    /// Runs all windows. `observer(window, t, state)` sees the state at each
    /// window start, before it is propagated.
    pub fn run(&self, mut observer: impl FnMut(usize, f64, &StateVector) -> Result<()>) -> Result<Trajectory> {
        let cfg = &self.config;
        let constants = Compiler::default().constants;
        let phi0 = constants.flux_quantum;
        let gate_per_volt = cfg.params.c_g / (2.0 * constants.electron_charge);
        let drive = cfg.drive;
        let gate = move |t: f64| gate_per_volt * drive.voltage(t);

        let mut state = self.initial_state()?;
        let n_windows = cfg.n_windows();
        let dt_window = cfg.feedback.delta_t;
        let dt = dt_window / cfg.substeps_per_window as f64;
        let mut rk = Rk4::new(cfg.layout.total_dim(), cfg.exec);
        let mut in_force = self.provider.coeffs(cfg.feedback.c1 * phi0)?;
        let mut trajectory = Trajectory {
            rows: Vec::with_capacity(n_windows),
            clamped_windows: 0,
        };
        let coupled = cfg.coupled();

        for j in 0..n_windows {
            let t_j = j as f64 * dt_window;
            let norm = state.norm();
            if (norm - 1.0).abs() > cfg.norm_tolerance {
                return Err(Error::NormDrift {
                    norm,
                    t: t_j,
                    tolerance: cfg.norm_tolerance,
                });
            }
            // Observables use the zero-point amplitudes of the Hamiltonian
            // that produced the state.
            let exp_phi1 = in_force.phase_zpf[0] * state.mean_phase_quadrature(0);
            let exp_n2 = in_force.charge_zpf[1] * state.mean_charge_quadrature(1);
            let exp_n5 = coupled.then(|| in_force.charge_zpf[3] * state.mean_charge_quadrature(3));

            let update = flux_update(exp_phi1, cfg.feedback.c1, cfg.feedback.c2, cfg.cos_floor);
            if update.clamped {
                if trajectory.clamped_windows == 0 {
                    log::warn!(
                        "feedback flux clamped off the SQUID singularity at t = {t_j:e} s (Φx/Φ0 = {})",
                        update.flux_over_phi0
                    );
                }
                trajectory.clamped_windows += 1;
            }
            trajectory.rows.push(TrajectoryRow {
                t: t_j,
                v_g: drive.voltage(t_j),
                flux_over_phi0: update.flux_over_phi0,
                exp_phi1,
                exp_n2,
                exp_n5,
                norm,
            });
            observer(j, t_j, &state)?;

            let coeffs = self.provider.coeffs(update.flux_over_phi0 * phi0)?;
            let s = self.basis.static_values(&coeffs)?;
            let d = self.basis.drive_values(&coeffs)?;
            let h = SplitHamiltonian {
                pattern: self.basis.pattern(),
                static_part: &s,
                drive_part: &d,
            };
            let psi = state.amplitudes.as_mut_slice();
            for k in 0..cfg.substeps_per_window {
                rk.step(&h, gate, psi, t_j + k as f64 * dt, dt);
            }
            in_force = coeffs;
        }
        let norm = state.norm();
        if (norm - 1.0).abs() > cfg.norm_tolerance {
            return Err(Error::NormDrift {
                norm,
                t: n_windows as f64 * dt_window,
                tolerance: cfg.norm_tolerance,
            });
        }
        Ok(trajectory)
    }
}

fn default_provider(config: &SimConfig) -> Result<CompiledProvider> {
    let compiler = Compiler::with_cos_floor(config.cos_floor);
    let provider = CompiledProvider::new(compiler, config.params);
    match &config.operating_point {
        Some(op) => provider.with_operating_point(op, config.feedback.c1 * compiler.constants.flux_quantum),
        None => Ok(provider),
    }
}

/// Runs the feedback loop with the compiled coefficients.
pub fn run_feedback(config: &SimConfig) -> Result<Trajectory> {
    run_feedback_with(config, |_, _, _| Ok(()))
}

/// [`run_feedback`] with a per-window state observer.
pub fn run_feedback_with(
    config: &SimConfig,
    observer: impl FnMut(usize, f64, &StateVector) -> Result<()>,
) -> Result<Trajectory> {
    let provider = default_provider(config)?;
    Simulation::new(config.clone(), &provider)?.run(observer)
}

#[cfg(test)]
mod tests {
    use std::cell::RefCell;

    use super::*;

    fn config(initial: StateSpec, v0: f64, cutoff: usize, periods: usize) -> SimConfig {
        let params = CircuitParams::table1();
        let c = Compiler::default();
        let w1 = c
            .coeffs_single(&params, 1.84 * c.constants.flux_quantum, 0.0)
            .unwrap()
            .omega[0];
        let omega_nu = PI / 5.94 * w1;
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
            exec: Execution::Sequential,
        }
    }

    #[test]
    fn flux_law_examples() {
        let u = flux_update(0.0, 1.84, 0.08, 1e-3);
        assert_eq!((u.flux_over_phi0, u.clamped), (1.84, false));
        assert!(
            flux_update((1.84f64 / 0.08).sqrt(), 1.84, 0.08, 1e-3)
                .flux_over_phi0
                .abs()
                < 1e-12
        );
        assert!((flux_update(1.0, 1.84, 0.08, 1e-3).flux_over_phi0 - 1.76).abs() < 1e-12);
    }

    #[test]
    fn flux_is_clamped_off_the_singularity() {
        // c1 = 1.75 sits exactly on a zero of cos(2πΦx/Φ₀).
        for x in [0.0, 0.01, -0.01] {
            let u = flux_update(x, 1.75 + 1e-6, 0.08, 1e-3);
            assert!(u.clamped);
            let c = (2.0 * PI * u.flux_over_phi0).cos().abs();
            assert!((1e-3..1.001e-3).contains(&c), "{c}");
        }
    }

    #[test]
    fn undriven_vacuum_keeps_the_rest_flux() {
        let t = run_feedback(&config(StateSpec::Vacuum, 0.0, 6, 2)).unwrap();
        for r in &t.rows {
            assert!(r.exp_phi1.abs() < 1e-14, "{}", r.exp_phi1);
            assert!((r.flux_over_phi0 - 1.84).abs() < 1e-14);
        }
    }

    #[test]
    fn drive_only_on_mode_one_leaves_mode_two_untouched() {
        let layout = ModeLayout::uniform(2, 6).unwrap();
        let provider = |flux: f64| {
            let mut h = Compiler::default().coeffs_single(&CircuitParams::table1(), flux, 0.0)?;
            h.couplings.clear();
            h.drive_per_gate_charge[1] = 0.0;
            h.drive_per_gate_charge[0] *= 30.0;
            Ok(h)
        };
        let mut cfg = config(StateSpec::FockSuperposition { eta: 1.0, chi: 0.3 }, 0.01e-6, 6, 1);
        cfg.layout = layout;
        let sim = Simulation::new(cfg, &provider).unwrap();
        let mut n2 = Vec::new();
        let mut n1 = Vec::new();
        sim.run(|_, _, s| {
            n2.push(s.mean_number(1));
            n1.push(s.mean_number(0));
            Ok(())
        })
        .unwrap();
        assert!(n1.iter().any(|&n| n > 1e-6), "drive did nothing");
        for n in &n2 {
            assert!(
                (n - n2[0]).abs() < 1e-10,
                "{:e} max n1 {:e}",
                n - n2[0],
                n1.iter().cloned().fold(0.0, f64::max)
            );
        }
    }

    #[test]
    fn flux_in_each_window_depends_only_on_the_state_at_its_start() {
        let fluxes = RefCell::new(Vec::new());
        let provider = |flux: f64| {
            fluxes.borrow_mut().push(flux);
            Compiler::default().coeffs_single(&CircuitParams::table1(), flux, 0.0)
        };
        let cfg = config(StateSpec::Coherent { r: 0.3, phi: 0.2 }, 0.01e-6, 6, 1);
        let phi0 = Compiler::default().constants.flux_quantum;
        let sim = Simulation::new(cfg.clone(), &provider).unwrap();
        fluxes.borrow_mut().clear();
        let mut implied = Vec::new();
        let t = sim.run(|_, _, _| Ok(())).unwrap();
        for r in &t.rows {
            implied.push(flux_update(r.exp_phi1, 1.84, 0.08, 1e-3).flux_over_phi0 * phi0);
        }
        // First call is the initial in-force Hamiltonian, then one per window.
        let calls = fluxes.borrow();
        assert_eq!(calls.len(), t.len() + 1);
        assert_eq!(&calls[1..], &implied[..]);
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let cfg = config(StateSpec::Coherent { r: 0.5, phi: 0.4 }, 0.01e-6, 6, 1);
        let a = run_feedback(&cfg).unwrap().to_csv_string();
        let b = run_feedback(&cfg).unwrap().to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_coarse_windows() {
        let mut cfg = config(StateSpec::Vacuum, 0.0, 4, 1);
        cfg.feedback.delta_t = 0.2 / cfg.drive.omega_nu;
        assert!(matches!(run_feedback(&cfg), Err(Error::InvalidArgument(_))));
        let mut cfg = config(StateSpec::Vacuum, 0.0, 4, 1);
        cfg.substeps_per_window = 2;
        assert!(run_feedback(&cfg).is_err());
    }
}
