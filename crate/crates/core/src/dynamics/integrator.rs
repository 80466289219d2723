use crate::exec::Execution;
use crate::fock::C64;
use crate::sparse::CsrPattern;

/// `H(t) = H_s + g(t)·H_d` on a shared sparse pattern.
#[derive(Debug, Clone, Copy)]
pub struct SplitHamiltonian<'a> {
    pub pattern: &'a CsrPattern,
    pub static_part: &'a [C64],
    pub drive_part: &'a [C64],
}

/// Classic fourth-order Runge–Kutta for `i ∂_t ψ = H(t) ψ` (ħ = 1, H in rad/s).
#[derive(Debug, Clone)]
pub struct Rk4 {
    k: [Vec<C64>; 4],
    stage: Vec<C64>,
    pub exec: Execution,
}

impl Rk4 {
    pub fn new(dim: usize, exec: Execution) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Rk4 {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            stage: z,
            exec,
        }
    }

    fn derivative(h: &SplitHamiltonian, g: f64, x: &[C64], out: &mut [C64], exec: Execution) {
        h.pattern.matvec_pair(h.static_part, h.drive_part, g, x, out, exec);
        for v in out.iter_mut() {
            *v = C64::new(v.im, -v.re);
        }
    }

    /// Advances `psi` from `t0` to `t0 + dt`; `g` is the drive weight as a
    /// function of time, sampled at the stage times.
    pub fn step(&mut self, h: &SplitHamiltonian, g: impl Fn(f64) -> f64, psi: &mut [C64], t0: f64, dt: f64) {
        let exec = self.exec;
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        let half = 0.5 * dt;

        Self::derivative(h, g(t0), psi, k1, exec);
        for ((s, p), k) in stage.iter_mut().zip(psi.iter()).zip(k1.iter()) {
            *s = p + k * half;
        }
        Self::derivative(h, g(t0 + half), stage, k2, exec);
        for ((s, p), k) in stage.iter_mut().zip(psi.iter()).zip(k2.iter()) {
            *s = p + k * half;
        }
        Self::derivative(h, g(t0 + half), stage, k3, exec);
        for ((s, p), k) in stage.iter_mut().zip(psi.iter()).zip(k3.iter()) {
            *s = p + k * dt;
        }
        Self::derivative(h, g(t0 + dt), stage, k4, exec);
        let w = dt / 6.0;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::dynamics::hamiltonian::OperatorBasis;
    use crate::fock::{build_state, ModeLayout, StateSpec};

    fn single_mode(omega: f64, cutoff: usize) -> (CsrPattern, Vec<C64>, Vec<C64>) {
        let pattern = CsrPattern::from_positions(cutoff, (0..cutoff).map(|i| (i, i)).collect());
        let vals = (0..cutoff).map(|n| C64::new(omega * n as f64, 0.0)).collect();
        (pattern, vals, vec![C64::new(0.0, 0.0); cutoff])
    }

    #[test]
    fn zero_hamiltonian_leaves_state_unchanged() {
        let (p, _, zero) = single_mode(0.0, 6);
        let h = SplitHamiltonian {
            pattern: &p,
            static_part: &zero,
            drive_part: &zero,
        };
        let mut psi: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0)).collect();
        let before = psi.clone();
        Rk4::new(6, Execution::Sequential).step(&h, |_| 1.0, &mut psi, 0.0, 0.1);
        assert_eq!(psi, before);
    }

    #[test]
    fn free_evolution_rotates_coherent_amplitude() {
        let omega = 2.0 * PI;
        let cutoff = 30;
        let (p, vals, zero) = single_mode(omega, cutoff);
        let h = SplitHamiltonian {
            pattern: &p,
            static_part: &vals,
            drive_part: &zero,
        };
        let layout = ModeLayout::new(vec![cutoff]).unwrap();
        let s = build_state(&StateSpec::Coherent { r: 0.8, phi: 0.3 }, &layout, 0.999).unwrap();
        let a0 = s.mean_annihilation(0);
        let mut psi: Vec<C64> = s.amplitudes.iter().copied().collect();
        let steps = 4000;
        let dt = 1.0 / steps as f64;
        let mut rk = Rk4::new(cutoff, Execution::Sequential);
        for k in 0..steps / 2 {
            rk.step(&h, |_| 0.0, &mut psi, k as f64 * dt, dt);
        }
        let half = crate::fock::StateVector::new(psi.clone().into(), layout.clone()).unwrap();
        let want = a0 * C64::from_polar(1.0, -omega * 0.5);
        assert!((half.mean_annihilation(0) - want).norm() < 1e-8);
        for k in steps / 2..steps {
            rk.step(&h, |_| 0.0, &mut psi, k as f64 * dt, dt);
        }
        let full = crate::fock::StateVector::new(psi.into(), layout).unwrap();
        assert!((full.mean_annihilation(0) - a0).norm() < 1e-8);
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let layout = ModeLayout::new(vec![6, 6]).unwrap();
        let basis = OperatorBasis::new(&layout);
        let coeffs = crate::circuit::HamiltonianCoeffs {
            flux: 0.0,
            flux_over_phi0: 0.0,
            gate_charge: 1.0,
            omega: vec![1.0, 1.3],
            drive_per_gate_charge: vec![0.2, 0.1],
            charge_zpf: vec![1.0; 2],
            phase_zpf: vec![1.0; 2],
            couplings: vec![crate::circuit::ModeCoupling {
                modes: (0, 1),
                inductive: 0.05,
                capacitive: 0.02,
            }],
        };
        let s = basis.static_values(&coeffs).unwrap();
        let d = basis.drive_values(&coeffs).unwrap();
        let h = SplitHamiltonian {
            pattern: basis.pattern(),
            static_part: &s,
            drive_part: &d,
        };
        let psi0 = build_state(&StateSpec::Vacuum, &layout, 0.999).unwrap();
        let run = |n: usize| {
            let mut psi: Vec<C64> = psi0.amplitudes.iter().copied().collect();
            let mut rk = Rk4::new(psi.len(), Execution::Sequential);
            let dt = 2.0 / n as f64;
            for k in 0..n {
                rk.step(&h, |t| (0.7 * t).cos(), &mut psi, k as f64 * dt, dt);
            }
            psi
        };
        let reference = run(6400);
        let err = |n: usize| {
            run(n)
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let (e1, e2) = (err(50), err(100));
        assert!(e1 / e2 > 14.0, "ratio {}", e1 / e2);
    }
}
