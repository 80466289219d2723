use std::f64::consts::PI;

use nalgebra::{Matrix4, Matrix6};
use serde::Serialize;

use super::single::intra_coupling;
use super::{CircuitParams, Compiler, DressedSingle, EnergyScales, HamiltonianCoeffs, ModeCoupling};
use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e12;

/// Reduced capacitance matrix over the four resonator nodes (1, 2, 4, 5) and
/// its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BMatrix {
    pub entries: [[f64; 4]; 4],
    pub inverse: [[f64; 4]; 4],
    pub condition: f64,
}

impl BMatrix {
    pub fn assemble(p: &CircuitParams) -> Result<Self> {
        let s = p.second.ok_or(Error::MissingSecondDevice)?;
        #[rustfmt::skip]
        let b = Matrix4::new(
            p.c_c + p.c_g + p.c_1, -p.c_c,                0.0,                   0.0,
            -p.c_c,                p.c_c + s.c_m + p.c_2, -s.c_m,                0.0,
            0.0,                   -s.c_m,                p.c_c + s.c_m + s.c_3, -p.c_c,
            0.0,                   0.0,                   -p.c_c,                p.c_c + s.c_4,
        );
        let sv = b.singular_values();
        let condition = sv.max() / sv.min();
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::SingularBMatrix { condition });
        }
        let inv = b.try_inverse().ok_or(Error::SingularBMatrix { condition })?;
        Ok(BMatrix {
            entries: to_rows4(&b),
            inverse: to_rows4(&inv),
            condition,
        })
    }

    fn inv(&self, i: usize, j: usize) -> f64 {
        self.inverse[i - 1][j - 1]
    }
}

fn to_rows4(m: &Matrix4<f64>) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// Full nodal capacitance matrix of the two-device chain (nodes 1..6, the
/// SQUID nodes being 3 and 6).
pub fn capacitance_matrix(p: &CircuitParams) -> Result<Matrix6<f64>> {
    let s = p.second.ok_or(Error::MissingSecondDevice)?;
    let mut c = Matrix6::zeros();
    let ground = |i: usize, v: f64, c: &mut Matrix6<f64>| c[(i, i)] += v;
    let link = |i: usize, j: usize, v: f64, c: &mut Matrix6<f64>| {
        c[(i, i)] += v;
        c[(j, j)] += v;
        c[(i, j)] -= v;
        c[(j, i)] -= v;
    };
    ground(0, p.c_g + p.c_1, &mut c);
    link(0, 1, p.c_c, &mut c);
    link(1, 2, p.c_2, &mut c);
    link(1, 3, s.c_m, &mut c);
    ground(2, p.c_j, &mut c);
    ground(3, s.c_3, &mut c);
    link(3, 4, p.c_c, &mut c);
    link(4, 5, s.c_4, &mut c);
    ground(5, p.c_j, &mut c);
    Ok(c)
}

/// Dressed quantities of the coupled chain. Cross-device couplings are kept as
/// inverses (`1/C̃_mn`, `1/L̃_mn`) because they vanish in the decoupled limit;
/// index `[m][n]` pairs mode `a_{m+1}` with `b_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedCoupled {
    pub b: BMatrix,
    pub inv_c_mn: [[f64; 2]; 2],
    pub inv_l_mn: [[f64; 2]; 2],
    pub device1: DressedSingle,
    pub device2: DressedSingle,
}

impl DressedCoupled {
    pub fn c_mn(&self, m: usize, n: usize) -> f64 {
        1.0 / self.inv_c_mn[m][n]
    }

    pub fn l_mn(&self, m: usize, n: usize) -> f64 {
        1.0 / self.inv_l_mn[m][n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupledEnergies {
    pub device1: EnergyScales,
    pub device2: EnergyScales,
    pub e_c_mn: [[f64; 2]; 2],
    pub e_l_mn: [[f64; 2]; 2],
}

impl Compiler {
    pub fn dressed_coupled(&self, p: &CircuitParams, flux: f64) -> Result<DressedCoupled> {
        p.validate()?;
        let s = p.second.ok_or(Error::MissingSecondDevice)?;
        let device1 = self.dressed_single(p, flux)?;
        let device2 = self.dressed_single(&p.second_as_single().unwrap(), flux)?;
        let cos = self.squid_cos(flux)?;
        let phi0 = self.constants.flux_quantum;

        let b = BMatrix::assemble(p)?;
        let full = capacitance_matrix(p)?;
        let ci = full.try_inverse().ok_or(Error::SingularBMatrix {
            condition: f64::INFINITY,
        })?;
        // One-based node indexing to keep the closed form readable.
        let cinv = |i: usize, j: usize| ci[(i - 1, j - 1)];
        let bi = |i: usize, j: usize| b.inv(i, j);
        let (c2, c4) = (p.c_2, s.c_4);
        let inductors = [p.l_1, p.l_2, s.l_3, s.l_4];

        let mut inv_c_mn = [[0.0; 2]; 2];
        let mut inv_l_mn = [[0.0; 2]; 2];
        for m in 1..=2 {
            for n in 3..=4 {
                let node_n = n + 1;
                let inv_c = cinv(m, node_n) + cinv(3, 3) * c2 * c2 * bi(2, m) * bi(2, n)
                    - c2 * cinv(m, 3) * bi(2, n)
                    - c2 * cinv(3, node_n) * bi(2, m)
                    + c4 * c4 * cinv(6, 6) * bi(4, m) * bi(4, n)
                    - c4 * cinv(m, 6) * bi(4, n)
                    - c4 * cinv(node_n, 6) * bi(4, m)
                    + c4 * c2 * cinv(3, 6) * bi(2, m) * bi(4, n)
                    + c4 * c2 * cinv(3, 6) * bi(2, n) * bi(4, m);
                let inv_l = phi0 * phi0 / (4.0 * PI * PI * p.e_j * cos)
                    * (c2 * c2 * bi(2, m) * bi(2, n) + c4 * c4 * bi(4, m) * bi(4, n))
                    / (inductors[m - 1] * inductors[n - 1]);
                inv_c_mn[m - 1][n - 3] = inv_c;
                inv_l_mn[m - 1][n - 3] = inv_l;
            }
        }

        Ok(DressedCoupled {
            b,
            inv_c_mn,
            inv_l_mn,
            device1,
            device2,
        })
    }

    pub fn energies_coupled(&self, d: &DressedCoupled) -> CoupledEnergies {
        let e = self.constants.electron_charge;
        let phi0 = self.constants.flux_quantum;
        CoupledEnergies {
            device1: self.energies_single(&d.device1),
            device2: self.energies_single(&d.device2),
            e_c_mn: d.inv_c_mn.map(|row| row.map(|x| e * e / 2.0 * x)),
            e_l_mn: d.inv_l_mn.map(|row| row.map(|x| phi0 * phi0 / (4.0 * PI * PI) * x)),
        }
    }

    pub fn coeffs_coupled(&self, p: &CircuitParams, flux: f64, gate_charge: f64) -> Result<HamiltonianCoeffs> {
        let d = self.dressed_coupled(p, flux)?;
        let en = self.energies_coupled(&d);
        let hbar = self.constants.hbar;
        let devices = [&en.device1, &en.device2];

        let mut omega = Vec::with_capacity(4);
        let mut n_zpf = Vec::with_capacity(4);
        let mut phi_zpf = Vec::with_capacity(4);
        let mut e_c = Vec::with_capacity(4);
        let mut e_l = Vec::with_capacity(4);
        for dev in devices {
            for i in 0..2 {
                omega.push((8.0 * dev.e_c[i] * dev.e_l[i]).sqrt() / hbar);
                n_zpf.push(dev.n_zpf[i]);
                phi_zpf.push(dev.phi_zpf[i]);
                e_c.push(dev.e_c[i]);
                e_l.push(dev.e_l[i]);
            }
        }

        let d1 = &en.device1;
        let mut drive: Vec<f64> = (0..2).map(|i| 8.0 * d1.e_cg[i] * d1.n_zpf[i] / hbar).collect();
        // The gate reaches device 2 only through the cross capacitances from node 1.
        for k in 0..2 {
            drive.push(8.0 * en.e_c_mn[0][k] * n_zpf[2 + k] / hbar);
        }

        let mut couplings = vec![
            intra_coupling(&en.device1, hbar, (0, 1)),
            intra_coupling(&en.device2, hbar, (2, 3)),
        ];
        for j in 0..2 {
            for k in 0..2 {
                let (a, b) = (j, 2 + k);
                let ratio = (e_l[a] * e_l[b] / (4.0 * e_c[a] * e_c[b])).powf(0.25);
                couplings.push(ModeCoupling {
                    modes: (a, b),
                    inductive: en.e_l_mn[j][k] / ratio / hbar,
                    capacitive: 2.0 * en.e_c_mn[j][k] * ratio / hbar,
                });
            }
        }

        Ok(HamiltonianCoeffs {
            flux,
            flux_over_phi0: flux / self.constants.flux_quantum,
            gate_charge,
            omega,
            drive_per_gate_charge: drive,
            charge_zpf: n_zpf,
            phase_zpf: phi_zpf,
            couplings,
        })
    }
}
