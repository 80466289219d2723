//! Truncated Fock spaces: ladder operators, Kronecker embedding into a
//! multimode layout, and state vectors.
//!
//! Basis ordering is row-major over the modes: the first mode is the most
//! significant digit, so `|n_1, n_2, …⟩` sits at `Σ n_k · stride_k` with the
//! last mode having stride 1.

mod state;

pub use state::{build_state, StateSpec, DEFAULT_TRUNCATION_THRESHOLD};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ModeLayout {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl ModeLayout {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidArgument("mode layout needs at least one mode".into()));
        }
        if let Some(&c) = cutoffs.iter().find(|&&c| c < 2) {
            return Err(Error::InvalidArgument(format!(
                "Fock cutoff must be at least 2, got {c}"
            )));
        }
        let mut strides = vec![1; cutoffs.len()];
        for k in (0..cutoffs.len() - 1).rev() {
            strides[k] = strides[k + 1] * cutoffs[k + 1];
        }
        let total_dim = strides[0] * cutoffs[0];
        Ok(ModeLayout {
            cutoffs,
            strides,
            total_dim,
        })
    }

    pub fn uniform(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; n_modes])
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Occupation number of `mode` in basis state `index`.
    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.cutoffs[mode]
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                context: "occupation list",
                expected: self.n_modes(),
                found: occupations.len(),
            });
        }
        let mut idx = 0;
        for (k, &n) in occupations.iter().enumerate() {
            if n >= self.cutoffs[k] {
                return Err(Error::InvalidArgument(format!(
                    "occupation {n} exceeds cutoff {} of mode {k}",
                    self.cutoffs[k]
                )));
            }
            idx += n * self.strides[k];
        }
        Ok(idx)
    }

    /// Layout of a contiguous run of modes.
    pub fn sub_layout(&self, modes: std::ops::Range<usize>) -> Result<Self> {
        Self::new(self.cutoffs[modes].to_vec())
    }
}

impl TryFrom<Vec<usize>> for ModeLayout {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ModeLayout> for Vec<usize> {
    fn from(value: ModeLayout) -> Self {
        value.cutoffs
    }
}

/// Annihilation and creation matrices on `cutoff` levels.
pub fn ladder(cutoff: usize) -> (CMatrix, CMatrix) {
    assert!(cutoff >= 2, "cutoff must be at least 2");
    let mut a = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    (a, adag)
}

pub fn number(cutoff: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_fn(cutoff, |n, _| C64::new(n as f64, 0.0)))
}

/// Dimensionless charge operator `i (a† − a)` (without zero-point factor).
pub fn charge_quadrature(cutoff: usize) -> CMatrix {
    let (a, adag) = ladder(cutoff);
    (adag - a) * C64::i()
}

/// Dimensionless phase operator `a† + a` (without zero-point factor).
pub fn phase_quadrature(cutoff: usize) -> CMatrix {
    let (a, adag) = ladder(cutoff);
    adag + a
}

/// Places a single-mode operator on `mode`, identities elsewhere.
pub fn embed(op: &CMatrix, mode: usize, layout: &ModeLayout) -> Result<CMatrix> {
    if mode >= layout.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "embed mode index",
            expected: layout.n_modes(),
            found: mode,
        });
    }
    let c = layout.cutoffs[mode];
    if op.nrows() != c || op.ncols() != c {
        return Err(Error::DimensionMismatch {
            context: "embedded operator",
            expected: c,
            found: op.nrows(),
        });
    }
    let mut out = CMatrix::identity(1, 1);
    for (k, &ck) in layout.cutoffs.iter().enumerate() {
        out = if k == mode {
            out.kronecker(op)
        } else {
            out.kronecker(&CMatrix::identity(ck, ck))
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: CVector,
    pub layout: ModeLayout,
}

impl StateVector {
    pub fn new(amplitudes: CVector, layout: ModeLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "state amplitudes",
                expected: layout.total_dim(),
                found: amplitudes.len(),
            });
        }
        Ok(StateVector { amplitudes, layout })
    }

    pub fn basis(layout: &ModeLayout, occupations: &[usize]) -> Result<Self> {
        let mut v = CVector::zeros(layout.total_dim());
        v[layout.index_of(occupations)?] = C64::new(1.0, 0.0);
        Self::new(v, layout.clone())
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        expectation(op, self)
    }

    /// `⟨a_mode⟩` straight from the amplitudes, without materializing `a`.
    pub fn mean_annihilation(&self, mode: usize) -> C64 {
        let stride = self.layout.strides[mode];
        let psi = &self.amplitudes;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..psi.len() {
            let n = self.layout.occupation(i, mode);
            if n > 0 {
                acc += psi[i - stride].conj() * psi[i] * (n as f64).sqrt();
            }
        }
        acc
    }

    pub fn mean_number(&self, mode: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm_sqr() * self.layout.occupation(i, mode) as f64)
            .sum()
    }

    /// `⟨a + a†⟩`.
    pub fn mean_phase_quadrature(&self, mode: usize) -> f64 {
        2.0 * self.mean_annihilation(mode).re
    }

    /// `⟨i(a† − a)⟩`.
    pub fn mean_charge_quadrature(&self, mode: usize) -> f64 {
        2.0 * self.mean_annihilation(mode).im
    }
}

pub fn expectation(op: &CMatrix, state: &StateVector) -> Result<C64> {
    let d = state.amplitudes.len();
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "expectation operator",
            expected: d,
            found: op.nrows(),
        });
    }
    Ok(state.amplitudes.dotc(&(op * &state.amplitudes)))
}

/// Kronecker product of state vectors (first factor most significant).
pub fn tensor(parts: &[CVector]) -> CVector {
    let mut out = CVector::from_element(1, C64::new(1.0, 0.0));
    for p in parts {
        out = out.kronecker(p);
    }
    out
}
