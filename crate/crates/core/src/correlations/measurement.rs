use super::{entropy_of, DensityMatrix, EIGEN_FLOOR};
use crate::error::{Error, Result};
use crate::fock::{CMatrix, C64};

/// Number of angles parametrizing a `d`-dimensional measurement basis.
pub fn angle_count(d: usize) -> usize {
    3 * d * d.saturating_sub(1) / 2
}

/// Angles of the two-level factors `U_{k,n}` in lexicographic `(k, n)`
/// order, three per factor as `(φ₁, φ₂, φ₃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAngles {
    dim: usize,
    angles: Vec<f64>,
}

impl MeasurementAngles {
    pub fn new(dim: usize, angles: Vec<f64>) -> Result<Self> {
        let expected = angle_count(dim);
        if dim < 2 || angles.len() != expected {
            return Err(Error::BadAngleCount {
                dim,
                expected,
                found: angles.len(),
            });
        }
        Ok(MeasurementAngles { dim, angles })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        MeasurementAngles::new(dim, vec![0.0; angle_count(dim)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.angles
    }
}

/// Entries `(v_kk, v_k,k+n, v_k+n,k, v_k+n,k+n)` of one two-level factor.
fn block(phi: &[f64]) -> [C64; 4] {
    let (s, c) = phi[0].sin_cos();
    let e2 = C64::from_polar(1.0, phi[1]);
    let e3 = C64::from_polar(1.0, phi[2]);
    [e2 * s, e3.conj() * c, e3 * c, -e2.conj() * s]
}

fn unitary_into(angles: &[f64], d: usize, u: &mut CMatrix) {
    u.fill_with_identity();
    let mut idx = 0;
    for k in 0..d - 1 {
        for n in 1..d - k {
            let [vkk, vkl, vlk, vll] = block(&angles[idx..idx + 3]);
            idx += 3;
            let l = k + n;
            // Right-multiplication only mixes columns k and l.
            for r in 0..d {
                let (x, y) = (u[(r, k)], u[(r, l)]);
                u[(r, k)] = x * vkk + y * vlk;
                u[(r, l)] = x * vkl + y * vll;
            }
        }
    }
}

/// `U = Π_{k=1}^{d−1} Π_{n=1}^{d−k} U_{k,n}`, factors multiplied left to right.
pub fn measurement_unitary(angles: &MeasurementAngles) -> CMatrix {
    let d = angles.dim;
    let mut u = CMatrix::identity(d, d);
    unitary_into(&angles.angles, d, &mut u);
    u
}

/// Measurement on the second subsystem of a bipartite state, with the
/// state-dependent precomputation done once.
#[derive(Debug, Clone)]
pub struct ConditionalEntropy {
    kept: usize,
    measured: usize,
    kernel: Kernel,
}

#[derive(Debug, Clone)]
enum Kernel {
    Qubits([[C64; 4]; 4]),
    General(CMatrix),
}

impl ConditionalEntropy {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        if rho.dims().len() != 2 {
            return Err(Error::DimensionMismatch {
                context: "bipartite subsystem count",
                expected: 2,
                found: rho.dims().len(),
            });
        }
        let (kept, measured) = (rho.dims()[0], rho.dims()[1]);
        if measured < 2 {
            return Err(Error::DimensionMismatch {
                context: "measured subsystem dimension",
                expected: 2,
                found: measured,
            });
        }
        let e = rho.entries();
        let kernel = if kept == 2 && measured == 2 {
            let mut m = [[C64::new(0.0, 0.0); 4]; 4];
            for (r, row) in m.iter_mut().enumerate() {
                for (c, x) in row.iter_mut().enumerate() {
                    *x = e[(r, c)];
                }
            }
            Kernel::Qubits(m)
        } else {
            Kernel::General(e.clone())
        };
        Ok(ConditionalEntropy { kept, measured, kernel })
    }

    pub fn measured_dim(&self) -> usize {
        self.measured
    }

    pub fn kept_dim(&self) -> usize {
        self.kept
    }

    pub fn angle_count(&self) -> usize {
        angle_count(self.measured)
    }

    /// `Σ_m p_m S(ρ_{i|m})` for the basis encoded by `angles`.
    ///
    /// # Panics
    /// If `angles.len()` differs from [`ConditionalEntropy::angle_count`].
    pub fn eval(&self, angles: &[f64]) -> f64 {
        assert_eq!(angles.len(), self.angle_count(), "angle count");
        match &self.kernel {
            Kernel::Qubits(rho) => qubit_conditional(rho, angles),
            Kernel::General(rho) => {
                let d = self.measured;
                let mut u = CMatrix::identity(d, d);
                unitary_into(angles, d, &mut u);
                general_conditional(rho, self.kept, &u)
            }
        }
    }
}

fn entropy_2x2(a: f64, b: f64, off: C64) -> f64 {
    let t = a + b;
    if t < EIGEN_FLOOR {
        return 0.0;
    }
    let disc = ((a - b) * (a - b) + 4.0 * off.norm_sqr()).sqrt();
    let (l1, l2) = ((t + disc) / (2.0 * t), (t - disc) / (2.0 * t));
    t * entropy_of([l1, l2])
}

fn qubit_conditional(rho: &[[C64; 4]; 4], angles: &[f64]) -> f64 {
    let [vkk, vkl, vlk, vll] = block(angles);
    // Columns of U are the measurement vectors.
    let basis = [[vkk, vlk], [vkl, vll]];
    let mut total = 0.0;
    for u in &basis {
        // σ[a][a'] = Σ_{b,b'} ū_b ρ[(a,b),(a',b')] u_{b'}
        let s = |a: usize, ap: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..2 {
                for bp in 0..2 {
                    acc += u[b].conj() * rho[2 * a + b][2 * ap + bp] * u[bp];
                }
            }
            acc
        };
        total += entropy_2x2(s(0, 0).re, s(1, 1).re, s(0, 1));
    }
    total
}

fn general_conditional(rho: &CMatrix, kept: usize, u: &CMatrix) -> f64 {
    let d = u.nrows();
    let rows = kept * d;
    let r = rho.as_slice();
    let mut total = 0.0;
    let mut x = vec![C64::new(0.0, 0.0); rows * kept];
    let mut sigma = CMatrix::zeros(kept, kept);
    for m in 0..d {
        let col = u.column(m);
        // x = ρ (I ⊗ u), column-major with `rows` rows.
        for ap in 0..kept {
            let out = &mut x[ap * rows..(ap + 1) * rows];
            out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for bp in 0..d {
                let w = col[bp];
                let src = &r[(ap * d + bp) * rows..(ap * d + bp + 1) * rows];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += s * w;
                }
            }
        }
        let mut p = 0.0;
        for ap in 0..kept {
            for a in 0..=ap {
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..d {
                    acc += col[b].conj() * x[ap * rows + a * d + b];
                }
                sigma[(a, ap)] = acc;
                sigma[(ap, a)] = acc.conj();
            }
            p += sigma[(ap, ap)].re;
        }
        if p < EIGEN_FLOOR {
            continue;
        }
        for a in 0..kept {
            sigma[(a, a)].im = 0.0;
        }
        let eig = sigma.symmetric_eigenvalues();
        total += p * entropy_of(eig.iter().map(|&v| v / p));
    }
    total
}

/// Conditional entropy of the first subsystem after measuring the second in
/// the basis `U|m⟩`.
pub fn conditional_entropy(rho_ij: &DensityMatrix, angles: &MeasurementAngles) -> Result<f64> {
    let ce = ConditionalEntropy::new(rho_ij)?;
    if angles.dim() != ce.measured_dim() {
        return Err(Error::DimensionMismatch {
            context: "measurement dimension",
            expected: ce.measured_dim(),
            found: angles.dim(),
        });
    }
    Ok(ce.eval(angles.as_slice()))
}
