//! Reduced density matrices, von Neumann entropy and one-sided quantum
//! discord.
//!
//! Subsystems are ordered as in [`crate::fock::ModeLayout`]: the first
//! subsystem is the most significant digit of a flat index. Entropies are in
//! bits.

mod discord;
mod measurement;
mod optimize;

pub use discord::{
    discord, discord_series, leading_block, pair_discord, parse_pair, DiscordResult, DiscordSample, Pair,
    TruncationPolicy, DEFAULT_BLOCK_THRESHOLD, DEFAULT_MAX_BLOCK_DIM, MAX_ANGLES,
};
pub use measurement::{angle_count, conditional_entropy, measurement_unitary, ConditionalEntropy, MeasurementAngles};
pub use optimize::{basin_hopping, nelder_mead, BasinHoppingSettings, LocalMinimum};

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::fock::{CMatrix, CVector, C64};

/// Tolerance on Hermiticity, trace and negative eigenvalues.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below this are treated as zero in entropies.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// A validated density matrix over a tensor product of subsystems.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: CMatrix,
    dims: Vec<usize>,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    /// Validates and cleans `entries`: the matrix is symmetrized, eigenvalues
    /// in `(−1e-10, 0)` are clamped to zero and the trace renormalized.
    pub fn new(entries: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                context: "density matrix",
                expected: dim,
                found: entries.nrows(),
            });
        }
        if dims.contains(&0) {
            return Err(Error::NotADensityMatrix("zero-dimensional subsystem".into()));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let asym = (&entries - entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > DENSITY_TOLERANCE * scale {
            return Err(Error::NotADensityMatrix(format!(
                "not Hermitian (max deviation {asym:.3e})"
            )));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(Error::NotADensityMatrix(format!("trace is {trace}")));
        }
        let hermitian = (&entries + entries.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(hermitian.clone());
        let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if lowest < -DENSITY_TOLERANCE {
            return Err(Error::NotADensityMatrix(format!("negative eigenvalue {lowest:.3e}")));
        }
        if lowest >= 0.0 {
            let eigenvalues = eig.eigenvalues.iter().copied().collect();
            let entries = hermitian.unscale(trace.re);
            return Ok(DensityMatrix {
                entries,
                dims,
                eigenvalues: rescale(eigenvalues, trace.re),
            });
        }
        let clamped: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let v = &eig.eigenvectors;
        let mut rebuilt = CMatrix::zeros(dim, dim);
        for (k, &p) in clamped.iter().enumerate() {
            if p > 0.0 {
                let col = v.column(k);
                rebuilt += (col * col.adjoint()) * C64::new(p / total, 0.0);
            }
        }
        Ok(DensityMatrix {
            entries: rebuilt,
            dims,
            eigenvalues: rescale(clamped, total),
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn from_pure(psi: &CVector, dims: Vec<usize>) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) {
            return Err(Error::NotADensityMatrix("zero state vector".into()));
        }
        let v = psi.unscale(n);
        DensityMatrix::new(&v * v.adjoint(), dims)
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }
}

fn rescale(mut values: Vec<f64>, total: f64) -> Vec<f64> {
    for v in &mut values {
        *v /= total;
    }
    values
}

/// Splits flat indices into (kept, traced) coordinates.
struct Split {
    keep_dim: usize,
    trace_dim: usize,
    kept_dims: Vec<usize>,
    kept: Vec<usize>,
    traced: Vec<usize>,
}

impl Split {
    fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument(
                "partial trace must keep at least one subsystem".into(),
            ));
        }
        if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::DimensionMismatch {
                context: "partial trace subsystem index",
                expected: dims.len(),
                found: bad,
            });
        }
        if keep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "kept subsystems must be strictly increasing, got {keep:?}"
            )));
        }
        let total: usize = dims.iter().product();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let keep_dim: usize = kept_dims.iter().product();
        let mut kept = vec![0; total];
        let mut traced = vec![0; total];
        let mut digits = vec![0usize; dims.len()];
        for i in 0..total {
            let (mut k, mut t) = (0, 0);
            for (s, (&d, &x)) in dims.iter().zip(&digits).enumerate() {
                if keep.contains(&s) {
                    k = k * d + x;
                } else {
                    t = t * d + x;
                }
            }
            kept[i] = k;
            traced[i] = t;
            for s in (0..dims.len()).rev() {
                digits[s] += 1;
                if digits[s] < dims[s] {
                    break;
                }
                digits[s] = 0;
            }
        }
        Ok(Split {
            keep_dim,
            trace_dim: total / keep_dim,
            kept_dims,
            kept,
            traced,
        })
    }
}

/// Traces out every subsystem not listed in `keep` (strictly increasing).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let split = Split::new(&rho.dims, keep)?;
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); split.trace_dim];
    for i in 0..rho.dim() {
        groups[split.traced[i]].push((split.kept[i], i));
    }
    let mut out = CMatrix::zeros(split.keep_dim, split.keep_dim);
    let e = &rho.entries;
    for g in &groups {
        for &(kr, r) in g {
            for &(kc, c) in g {
                out[(kr, kc)] += e[(r, c)];
            }
        }
    }
    DensityMatrix::new(out, split.kept_dims)
}

/// Reduced density matrix of the pure state `psi` (normalized first) over
/// the subsystems in `keep`.
pub fn reduce_pure(psi: &CVector, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if psi.len() != total {
        return Err(Error::DimensionMismatch {
            context: "state vector",
            expected: total,
            found: psi.len(),
        });
    }
    let n = psi.norm();
    if !(n > 0.0) {
        return Err(Error::NotADensityMatrix("zero state vector".into()));
    }
    let split = Split::new(dims, keep)?;
    let mut m = CMatrix::zeros(split.keep_dim, split.trace_dim);
    for (i, a) in psi.iter().enumerate() {
        m[(split.kept[i], split.traced[i])] = a / n;
    }
    DensityMatrix::new(&m * m.adjoint(), split.kept_dims)
}

/// `−Σ p log₂ p` over eigenvalues `p ≥ 1e-12`.
pub fn entropy_of(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = eigenvalues
        .into_iter()
        .filter(|&p| p >= EIGEN_FLOOR)
        .map(|p| -p * p.log2())
        .sum();
    s.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.eigenvalues.iter().copied())
}
