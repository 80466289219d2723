//! Compressed-row complex matrices sharing one sparsity pattern.
//!
//! A Hamiltonian is a sum of a few fixed operator structures with
//! flux-dependent weights. All structures are laid out on the union pattern
//! so that a weighted sum is a plain vector combination of value arrays.

use crate::exec::{for_each_chunk_mut, Execution};
use crate::fock::{CMatrix, C64};

/// Rows below this count are multiplied on the calling thread under
/// [`Execution::Auto`].
pub const PARALLEL_MIN_ROWS: usize = 2048;
const ROW_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrPattern {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl CsrPattern {
    /// Union pattern of the given `(row, col)` positions.
    pub fn from_positions(dim: usize, mut positions: Vec<(usize, usize)>) -> Self {
        positions.sort_unstable();
        positions.dedup();
        let mut row_ptr = vec![0; dim + 1];
        for &(r, _) in &positions {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols = positions.into_iter().map(|(_, c)| c).collect();
        CsrPattern { dim, row_ptr, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Storage slot of `(row, col)`, if it is part of the pattern.
    pub fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.cols[lo..hi].binary_search(&col).ok().map(|k| lo + k)
    }

    /// Scatters `(row, col, value)` triplets onto the pattern, summing
    /// duplicates. Panics if a position is missing from the pattern.
    pub fn values_from_triplets(&self, triplets: &[(usize, usize, C64)]) -> Vec<C64> {
        let mut vals = vec![C64::new(0.0, 0.0); self.nnz()];
        for &(r, c, v) in triplets {
            let k = self.slot(r, c).expect("triplet outside the sparsity pattern");
            vals[k] += v;
        }
        vals
    }

    /// `y = (A + g·B) x` for value arrays `a`, `b` on this pattern.
    pub fn matvec_pair(&self, a: &[C64], b: &[C64], g: f64, x: &[C64], y: &mut [C64], exec: Execution) {
        debug_assert_eq!(a.len(), self.nnz());
        debug_assert_eq!(b.len(), self.nnz());
        debug_assert_eq!(x.len(), self.dim);
        let exec = if exec.is_parallel(self.dim, PARALLEL_MIN_ROWS) {
            Execution::Parallel
        } else {
            Execution::Sequential
        };
        for_each_chunk_mut(y, ROW_CHUNK, exec, |offset, out| {
            for (k, yr) in out.iter_mut().enumerate() {
                let r = offset + k;
                let mut acc = C64::new(0.0, 0.0);
                for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += (a[s] + b[s] * g) * x[self.cols[s]];
                }
                *yr = acc;
            }
        });
    }

    /// `y = A x`.
    pub fn matvec(&self, a: &[C64], x: &[C64], y: &mut [C64], exec: Execution) {
        let exec = if exec.is_parallel(self.dim, PARALLEL_MIN_ROWS) {
            Execution::Parallel
        } else {
            Execution::Sequential
        };
        for_each_chunk_mut(y, ROW_CHUNK, exec, |offset, out| {
            for (k, yr) in out.iter_mut().enumerate() {
                let r = offset + k;
                let mut acc = C64::new(0.0, 0.0);
                for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += a[s] * x[self.cols[s]];
                }
                *yr = acc;
            }
        });
    }

    pub fn to_dense(&self, vals: &[C64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[s])] += vals[s];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_matches_dense() {
        let dim = 5000;
        let mut trip = Vec::new();
        for r in 0..dim {
            trip.push((r, r, C64::new(r as f64, 0.5)));
            trip.push((r, (r * 7 + 3) % dim, C64::new(0.1, -0.2)));
            trip.push((r, (r * 7 + 3) % dim, C64::new(0.3, 0.0)));
        }
        let pattern = CsrPattern::from_positions(dim, trip.iter().map(|t| (t.0, t.1)).collect());
        let a = pattern.values_from_triplets(&trip);
        let b: Vec<C64> = a.iter().map(|z| z.conj()).collect();
        let x: Vec<C64> = (0..dim).map(|i| C64::new((i as f64).sin(), (i as f64).cos())).collect();
        let mut y_seq = vec![C64::new(0.0, 0.0); dim];
        let mut y_par = y_seq.clone();
        pattern.matvec_pair(&a, &b, 0.7, &x, &mut y_seq, Execution::Sequential);
        pattern.matvec_pair(&a, &b, 0.7, &x, &mut y_par, Execution::Parallel);
        assert_eq!(y_seq, y_par);
        for r in [0, 17, dim - 1] {
            let c = (r * 7 + 3) % dim;
            let off = C64::new(0.4, -0.2);
            let want = if c == r {
                (C64::new(r as f64, 0.5) + off + (C64::new(r as f64, 0.5) + off).conj() * 0.7) * x[r]
            } else {
                (C64::new(r as f64, 0.5) * 1.0 + C64::new(r as f64, 0.5).conj() * 0.7) * x[r]
                    + (off + off.conj() * 0.7) * x[c]
            };
            assert!((y_seq[r] - want).norm() < 1e-9);
        }
    }
}
