use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{ladder, tensor, CMatrix, CVector, ModeLayout, StateVector, C64};
use crate::error::{Error, Result};

pub const DEFAULT_TRUNCATION_THRESHOLD: f64 = 0.999;

/// Declarative initial state.
///
/// Single-mode families (`vacuum`, `fock_superposition`, `coherent`,
/// `squeezed_coherent`) occupy one mode, the correlated families
/// (`bell_like`, `noon`, `cat`) a pair of modes. A bare spec is placed on
/// every device: a single-mode spec goes on the second resonator with the
/// first in vacuum (`|0⟩ ⊗ ψ`), a pair spec spans both resonators. Use
/// `product` to place factors explicitly, mode by mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum,
    /// `cos(η/2)|0⟩ + e^{iχ} sin(η/2)|1⟩`
    FockSuperposition {
        eta: f64,
        chi: f64,
    },
    /// `|α⟩`, `α = r e^{iφ}`
    Coherent {
        r: f64,
        phi: f64,
    },
    /// `S(ξ)|α⟩` with `S(ξ) = exp(ξ a² − ξ* a†²)`, `ξ = R e^{iθ}`
    SqueezedCoherent {
        r: f64,
        phi: f64,
        squeeze_r: f64,
        squeeze_theta: f64,
    },
    /// `cos θ |0,0⟩ + sin θ |1,1⟩`
    BellLike {
        theta: f64,
    },
    /// `(|n,0⟩ + |0,n⟩)/√2`
    Noon {
        n: usize,
    },
    /// `(|α,0⟩ + |0,α⟩)/√2`, renormalized
    Cat {
        r: f64,
        phi: f64,
    },
    Product {
        factors: Vec<StateSpec>,
    },
}

impl StateSpec {
    pub fn modes_spanned(&self) -> usize {
        match self {
            StateSpec::Vacuum
            | StateSpec::FockSuperposition { .. }
            | StateSpec::Coherent { .. }
            | StateSpec::SqueezedCoherent { .. } => 1,
            StateSpec::BellLike { .. } | StateSpec::Noon { .. } | StateSpec::Cat { .. } => 2,
            StateSpec::Product { factors } => factors.iter().map(Self::modes_spanned).sum(),
        }
    }

    /// Flat list of primitive factors covering `n_modes` modes.
    fn placement(&self, n_modes: usize) -> Result<Vec<StateSpec>> {
        let mut flat = Vec::new();
        match self {
            StateSpec::Product { factors } => {
                for f in factors {
                    flat.extend(f.placement(f.modes_spanned())?);
                }
            }
            StateSpec::Vacuum => flat.extend(std::iter::repeat_n(StateSpec::Vacuum, n_modes)),
            spec if spec.modes_spanned() == n_modes => flat.push(spec.clone()),
            spec if n_modes.is_multiple_of(2) => {
                for _ in 0..n_modes / 2 {
                    if spec.modes_spanned() == 1 {
                        flat.push(StateSpec::Vacuum);
                    }
                    flat.push(spec.clone());
                }
            }
            _ => {}
        }
        let covered: usize = flat.iter().map(Self::modes_spanned).sum();
        if covered != n_modes {
            return Err(Error::DimensionMismatch {
                context: "initial state modes",
                expected: n_modes,
                found: covered,
            });
        }
        Ok(flat)
    }
}

/// Builds the normalized state. Fails with [`Error::Truncation`] when a
/// factor keeps less than `threshold` of its exact norm inside the cutoffs.
pub fn build_state(spec: &StateSpec, layout: &ModeLayout, threshold: f64) -> Result<StateVector> {
    let factors = spec.placement(layout.n_modes())?;
    let mut parts = Vec::with_capacity(factors.len());
    let mut mode = 0;
    for f in &factors {
        let span = f.modes_spanned();
        let cut = &layout.cutoffs()[mode..mode + span];
        let (v, retained) = if span == 1 {
            single_mode(f, cut[0])?
        } else {
            two_mode(f, cut[0], cut[1])?
        };
        if !(retained >= threshold) {
            return Err(Error::Truncation { retained, threshold });
        }
        parts.push(&v / C64::new(v.norm(), 0.0));
        mode += span;
    }
    StateVector::new(tensor(&parts), layout.clone())
}

fn fock(n: usize, cutoff: usize) -> CVector {
    let mut v = CVector::zeros(cutoff);
    v[n] = C64::new(1.0, 0.0);
    v
}

/// Exact coherent-state series `e^{−|α|²/2} αⁿ/√n!` on `cutoff` levels.
pub(crate) fn coherent(alpha: C64, cutoff: usize) -> CVector {
    let mut v = CVector::zeros(cutoff);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        v[n] = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    v
}

fn squeeze_operator(xi: C64, dim: usize) -> CMatrix {
    let (a, adag) = ladder(dim);
    let k = &a * &a * xi - &adag * &adag * xi.conj();
    // k is anti-Hermitian, so i·k is Hermitian and exp(k) = V e^{−iΛ} V†.
    let eig = SymmetricEigen::new(&k * C64::i());
    let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, -l));
    &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

fn truncate(v: &CVector, cutoff: usize) -> CVector {
    v.rows(0, cutoff.min(v.len())).into_owned()
}

fn single_mode(spec: &StateSpec, cutoff: usize) -> Result<(CVector, f64)> {
    let v = match *spec {
        StateSpec::Vacuum => fock(0, cutoff),
        StateSpec::FockSuperposition { eta, chi } => {
            let mut v = CVector::zeros(cutoff);
            v[0] = C64::new((eta / 2.0).cos(), 0.0);
            v[1] = C64::from_polar((eta / 2.0).sin(), chi);
            v
        }
        StateSpec::Coherent { r, phi } => coherent(C64::from_polar(r, phi), cutoff),
        StateSpec::SqueezedCoherent {
            r,
            phi,
            squeeze_r,
            squeeze_theta,
        } => {
            let padded = (2 * cutoff).max(cutoff + 60);
            let alpha = coherent(C64::from_polar(r, phi), padded);
            let s = squeeze_operator(C64::from_polar(squeeze_r, squeeze_theta), padded);
            truncate(&(s * alpha), cutoff)
        }
        _ => unreachable!("single_mode called with a pair spec"),
    };
    let retained = v.norm_squared();
    Ok((v, retained))
}

fn two_mode(spec: &StateSpec, c0: usize, c1: usize) -> Result<(CVector, f64)> {
    let layout = ModeLayout::new(vec![c0, c1])?;
    let at = |n0: usize, n1: usize| n0 * c1 + n1;
    let mut v = CVector::zeros(layout.total_dim());
    let exact_norm_sqr = match *spec {
        StateSpec::BellLike { theta } => {
            v[at(0, 0)] = C64::new(theta.cos(), 0.0);
            v[at(1, 1)] = C64::new(theta.sin(), 0.0);
            1.0
        }
        StateSpec::Noon { n } => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            if n < c0 {
                v[at(n, 0)] += C64::new(h, 0.0);
            }
            if n < c1 {
                v[at(0, n)] += C64::new(h, 0.0);
            }
            if n == 0 {
                2.0
            } else {
                1.0
            }
        }
        StateSpec::Cat { r, phi } => {
            let alpha = C64::from_polar(r, phi);
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let left = tensor(&[coherent(alpha, c0), fock(0, c1)]);
            let right = tensor(&[fock(0, c0), coherent(alpha, c1)]);
            v = (left + right) * h;
            1.0 + (-r * r).exp()
        }
        _ => unreachable!("two_mode called with a single-mode spec"),
    };
    let retained = v.norm_squared() / exact_norm_sqr;
    Ok((v, retained))
}
