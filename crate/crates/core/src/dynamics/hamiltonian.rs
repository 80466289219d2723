use crate::circuit::HamiltonianCoeffs;
use crate::error::{Error, Result};
use crate::fock::{embed, ladder, number, CMatrix, ModeLayout, C64};
use crate::sparse::CsrPattern;

/// Operator structures appearing in the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    /// `a†a`
    Number(usize),
    /// `i(a† − a)`
    Drive(usize),
    /// `a_i† a_j + a_i a_j†`
    Exchange(usize, usize),
    /// `a_i† a_j† + a_i a_j`
    Pair(usize, usize),
}

fn check_modes(coeffs: &HamiltonianCoeffs, layout: &ModeLayout) -> Result<()> {
    if coeffs.n_modes() != layout.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "Hamiltonian modes",
            expected: coeffs.n_modes(),
            found: layout.n_modes(),
        });
    }
    Ok(())
}

/// Sparse operator structures of one layout on their union pattern.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    layout: ModeLayout,
    pattern: CsrPattern,
    terms: Vec<(Term, Vec<C64>)>,
}

impl OperatorBasis {
    /// Number and drive terms on every mode, exchange and pair terms on every
    /// mode pair.
    pub fn new(layout: &ModeLayout) -> Self {
        let m = layout.n_modes();
        let mut kinds = Vec::new();
        for i in 0..m {
            kinds.push(Term::Number(i));
            kinds.push(Term::Drive(i));
        }
        for i in 0..m {
            for j in i + 1..m {
                kinds.push(Term::Exchange(i, j));
                kinds.push(Term::Pair(i, j));
            }
        }
        let triplets: Vec<Vec<(usize, usize, C64)>> = kinds.iter().map(|&k| term_triplets(k, layout)).collect();
        let positions = triplets.iter().flatten().map(|&(r, c, _)| (r, c)).collect();
        let pattern = CsrPattern::from_positions(layout.total_dim(), positions);
        let terms = kinds
            .into_iter()
            .zip(&triplets)
            .map(|(k, t)| (k, pattern.values_from_triplets(t)))
            .collect();
        OperatorBasis {
            layout: layout.clone(),
            pattern,
            terms,
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn pattern(&self) -> &CsrPattern {
        &self.pattern
    }

    fn weighted(&self, weight: impl Fn(Term) -> f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.pattern.nnz()];
        for (kind, vals) in &self.terms {
            let w = weight(*kind);
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(vals) {
                    *o += v * w;
                }
            }
        }
        out
    }

    /// Flux-dependent part: frequencies and mode couplings.
    pub fn static_values(&self, coeffs: &HamiltonianCoeffs) -> Result<Vec<C64>> {
        check_modes(coeffs, &self.layout)?;
        Ok(self.weighted(|t| match t {
            Term::Number(i) => coeffs.omega[i],
            Term::Exchange(i, j) => coeffs.coupling(i, j).map_or(0.0, |c| c.plus()),
            Term::Pair(i, j) => coeffs.coupling(i, j).map_or(0.0, |c| c.minus()),
            Term::Drive(_) => 0.0,
        }))
    }

    /// Drive part per unit gate charge; multiply by `n_g(t)`.
    pub fn drive_values(&self, coeffs: &HamiltonianCoeffs) -> Result<Vec<C64>> {
        check_modes(coeffs, &self.layout)?;
        Ok(self.weighted(|t| match t {
            Term::Drive(i) => coeffs.drive_per_gate_charge[i],
            _ => 0.0,
        }))
    }
}

fn term_triplets(kind: Term, layout: &ModeLayout) -> Vec<(usize, usize, C64)> {
    let dim = layout.total_dim();
    let cut = layout.cutoffs();
    let stride = layout.strides();
    let sq = |n: usize| (n as f64).sqrt();
    let re = |x: f64| C64::new(x, 0.0);
    let mut out = Vec::new();
    for col in 0..dim {
        let n = |m: usize| layout.occupation(col, m);
        match kind {
            Term::Number(i) => {
                if n(i) > 0 {
                    out.push((col, col, re(n(i) as f64)));
                }
            }
            Term::Drive(i) => {
                if n(i) + 1 < cut[i] {
                    out.push((col + stride[i], col, C64::new(0.0, sq(n(i) + 1))));
                }
                if n(i) > 0 {
                    out.push((col - stride[i], col, C64::new(0.0, -sq(n(i)))));
                }
            }
            Term::Exchange(i, j) => {
                // a_i† a_j and its adjoint a_i a_j†.
                if n(j) > 0 && n(i) + 1 < cut[i] {
                    out.push((col + stride[i] - stride[j], col, re(sq(n(i) + 1) * sq(n(j)))));
                }
                if n(i) > 0 && n(j) + 1 < cut[j] {
                    out.push((col - stride[i] + stride[j], col, re(sq(n(i)) * sq(n(j) + 1))));
                }
            }
            Term::Pair(i, j) => {
                if n(i) + 1 < cut[i] && n(j) + 1 < cut[j] {
                    out.push((col + stride[i] + stride[j], col, re(sq(n(i) + 1) * sq(n(j) + 1))));
                }
                if n(i) > 0 && n(j) > 0 {
                    out.push((col - stride[i] - stride[j], col, re(sq(n(i)) * sq(n(j)))));
                }
            }
        }
    }
    out
}

/// Dense `H` at the gate charge stored in `coeffs` (units of rad/s).
pub fn assemble_hamiltonian(coeffs: &HamiltonianCoeffs, layout: &ModeLayout) -> Result<CMatrix> {
    check_modes(coeffs, layout)?;
    let dim = layout.total_dim();
    let ops: Vec<(CMatrix, CMatrix)> = (0..layout.n_modes())
        .map(|m| {
            let (a, adag) = ladder(layout.cutoffs()[m]);
            Ok((embed(&a, m, layout)?, embed(&adag, m, layout)?))
        })
        .collect::<Result<_>>()?;
    let g = coeffs.g_drive();
    let mut h = CMatrix::zeros(dim, dim);
    for (m, (a, adag)) in ops.iter().enumerate() {
        h += embed(&number(layout.cutoffs()[m]), m, layout)? * C64::new(coeffs.omega[m], 0.0);
        h += (adag - a) * C64::new(0.0, g[m]);
    }
    for c in &coeffs.couplings {
        let (i, j) = c.modes;
        let (ai, adi) = &ops[i];
        let (aj, adj) = &ops[j];
        h += (adi * aj + ai * adj) * C64::new(c.plus(), 0.0);
        h += (adi * adj + ai * aj) * C64::new(c.minus(), 0.0);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitParams, Compiler, ModeCoupling};

    fn symbolic(w: [f64; 2], g: [f64; 2], lp: f64, lm: f64) -> HamiltonianCoeffs {
        HamiltonianCoeffs {
            flux: 0.0,
            flux_over_phi0: 0.0,
            gate_charge: 1.0,
            omega: w.to_vec(),
            drive_per_gate_charge: g.to_vec(),
            charge_zpf: vec![1.0, 1.0],
            phase_zpf: vec![1.0, 1.0],
            couplings: vec![ModeCoupling {
                modes: (0, 1),
                inductive: (lp + lm) / 2.0,
                capacitive: (lp - lm) / 2.0,
            }],
        }
    }

    #[test]
    fn two_level_truncation_by_hand() {
        let (w1, w2, g1, g2, lp, lm) = (1.0, 2.0, 0.3, 0.5, 0.07, -0.04);
        let h = assemble_hamiltonian(
            &symbolic([w1, w2], [g1, g2], lp, lm),
            &ModeLayout::new(vec![2, 2]).unwrap(),
        )
        .unwrap();
        // Basis |00⟩, |01⟩, |10⟩, |11⟩.
        let c = |re: f64, im: f64| C64::new(re, im);
        #[rustfmt::skip]
        let want = [
            [c(0.0, 0.0),  c(0.0, -g2),  c(0.0, -g1),  c(lm, 0.0)],
            [c(0.0, g2),   c(w2, 0.0),   c(lp, 0.0),   c(0.0, -g1)],
            [c(0.0, g1),   c(lp, 0.0),   c(w1, 0.0),   c(0.0, -g2)],
            [c(lm, 0.0),   c(0.0, g1),   c(0.0, g2),   c(w1 + w2, 0.0)],
        ];
        for r in 0..4 {
            for col in 0..4 {
                assert!(
                    (h[(r, col)] - want[r][col]).norm() < 1e-15,
                    "({r},{col}) {}",
                    h[(r, col)]
                );
            }
        }
    }

    #[test]
    fn uncoupled_undriven_is_diagonal() {
        let layout = ModeLayout::new(vec![4, 3]).unwrap();
        let h = assemble_hamiltonian(&symbolic([1.5, 2.5], [0.0, 0.0], 0.0, 0.0), &layout).unwrap();
        for r in 0..12 {
            for c in 0..12 {
                if r != c {
                    assert_eq!(h[(r, c)].norm(), 0.0);
                } else {
                    let n = [layout.occupation(r, 0), layout.occupation(r, 1)];
                    assert_eq!(h[(r, r)].re, 1.5 * n[0] as f64 + 2.5 * n[1] as f64);
                }
            }
        }
    }

    #[test]
    fn sparse_assembly_matches_dense_for_compiled_coefficients() {
        let c = Compiler::default();
        let flux = 1.84 * c.constants.flux_quantum;
        for (params, cutoffs) in [
            (CircuitParams::table1(), vec![4, 5]),
            (CircuitParams::table2(), vec![3, 3, 2, 3]),
        ] {
            let coeffs = if params.is_coupled() {
                c.coeffs_coupled(&params, flux, 0.37).unwrap()
            } else {
                c.coeffs_single(&params, flux, 0.37).unwrap()
            };
            let layout = ModeLayout::new(cutoffs).unwrap();
            let dense = assemble_hamiltonian(&coeffs, &layout).unwrap();
            let basis = OperatorBasis::new(&layout);
            let s = basis.static_values(&coeffs).unwrap();
            let d = basis.drive_values(&coeffs).unwrap();
            let total: Vec<C64> = s.iter().zip(&d).map(|(a, b)| a + b * coeffs.gate_charge).collect();
            let sparse = basis.pattern().to_dense(&total);
            let scale = dense.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((&dense - &sparse).iter().all(|z| z.norm() <= 1e-12 * scale));
            assert!((&dense - dense.adjoint()).iter().all(|z| z.norm() <= 1e-12 * scale));
        }
    }

    #[test]
    fn rejects_mismatched_layout() {
        let coeffs = symbolic([1.0, 1.0], [0.0, 0.0], 0.0, 0.0);
        let layout = ModeLayout::new(vec![2, 2, 2]).unwrap();
        assert!(assemble_hamiltonian(&coeffs, &layout).is_err());
        assert!(OperatorBasis::new(&layout).static_values(&coeffs).is_err());
    }
}
