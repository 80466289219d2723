use std::f64::consts::PI;

use serde::Serialize;

use super::{CircuitParams, Compiler, HamiltonianCoeffs, ModeCoupling};
use crate::error::Result;

/// Dressed capacitances and flux-dependent inductances of the single device
/// after the SQUID node has been eliminated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedSingle {
    pub c1_t: f64,
    pub c2_t: f64,
    pub c12_t: f64,
    pub c1g_t: f64,
    pub c2g_t: f64,
    pub l1_t: f64,
    pub l2_t: f64,
    pub l12_t: f64,
    pub alpha_1: f64,
    pub alpha_2: f64,
}

/// Charging, inductive and coupling energies (joules) plus the zero-point
/// amplitudes of charge `n_ℓ` and phase `φ_ℓ` for both modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyScales {
    pub e_c: [f64; 2],
    pub e_l: [f64; 2],
    pub e_c12: f64,
    pub e_l12: f64,
    pub e_cg: [f64; 2],
    pub n_zpf: [f64; 2],
    pub phi_zpf: [f64; 2],
}

impl Compiler {
    pub fn dressed_single(&self, p: &CircuitParams, flux: f64) -> Result<DressedSingle> {
        p.validate()?;
        let cos = self.squid_cos(flux)?;
        let phi0 = self.constants.flux_quantum;

        let numerator = (p.c_2 + p.c_g) * (p.c_1 + p.c_g) + p.c_c * p.c_2;
        let c1_t = numerator / (p.c_2 + p.c_c);
        let c2_t = numerator / (p.c_c + p.c_1 + p.c_g);
        let c12_t = numerator / p.c_c;

        let det = (p.c_c + p.c_1 + p.c_g) * (p.c_c + p.c_2) - p.c_c * p.c_c;
        let alpha_1 = p.c_2 * p.c_c / det;
        let alpha_2 = p.c_2 * (p.c_c + p.c_1 + p.c_g) / det;

        let ej_cos = p.e_j * cos;
        let dress = |l: f64, alpha: f64| l * l / (l + phi0 * phi0 * alpha * alpha / (8.0 * PI * PI * ej_cos));
        let l12_t = 4.0 * PI * PI * ej_cos * p.l_1 * p.l_2 / (alpha_1 * alpha_2 * phi0 * phi0);

        Ok(DressedSingle {
            c1_t,
            c2_t,
            c12_t,
            c1g_t: c1_t,
            c2g_t: c12_t,
            l1_t: dress(p.l_1, alpha_1),
            l2_t: dress(p.l_2, alpha_2),
            l12_t,
            alpha_1,
            alpha_2,
        })
    }

    pub fn energies_single(&self, d: &DressedSingle) -> EnergyScales {
        let e = self.constants.electron_charge;
        let phi0 = self.constants.flux_quantum;
        let charging = |c: f64| e * e / (2.0 * c);
        let inductive = |l: f64| phi0 * phi0 / (4.0 * PI * PI * l);

        let e_c = [charging(d.c1_t), charging(d.c2_t)];
        let e_l = [inductive(d.l1_t), inductive(d.l2_t)];
        let n_zpf = [0, 1].map(|i| (e_l[i] / (32.0 * e_c[i])).powf(0.25));
        let phi_zpf = [0, 1].map(|i| (2.0 * e_c[i] / e_l[i]).powf(0.25));
        EnergyScales {
            e_c,
            e_l,
            e_c12: charging(d.c12_t),
            e_l12: inductive(d.l12_t),
            e_cg: [charging(d.c1g_t), charging(d.c2g_t)],
            n_zpf,
            phi_zpf,
        }
    }

    pub fn coeffs_single(&self, p: &CircuitParams, flux: f64, gate_charge: f64) -> Result<HamiltonianCoeffs> {
        let dressed = self.dressed_single(p, flux)?;
        let en = self.energies_single(&dressed);
        let hbar = self.constants.hbar;
        let omega = [0, 1].map(|i| (8.0 * en.e_c[i] * en.e_l[i]).sqrt() / hbar);
        let drive = [0, 1].map(|i| 8.0 * en.e_cg[i] * en.n_zpf[i] / hbar);
        Ok(HamiltonianCoeffs {
            flux,
            flux_over_phi0: flux / self.constants.flux_quantum,
            gate_charge,
            omega: omega.to_vec(),
            drive_per_gate_charge: drive.to_vec(),
            charge_zpf: en.n_zpf.to_vec(),
            phase_zpf: en.phi_zpf.to_vec(),
            couplings: vec![intra_coupling(&en, hbar, (0, 1))],
        })
    }
}

/// `I_12` (inductive) and `G_12` (capacitive) between the two resonators of
/// one device.
pub(super) fn intra_coupling(en: &EnergyScales, hbar: f64, modes: (usize, usize)) -> ModeCoupling {
    let ratio = (en.e_l[0] * en.e_l[1] / (4.0 * en.e_c[0] * en.e_c[1])).powf(0.25);
    ModeCoupling {
        modes,
        inductive: en.e_l12 / ratio / hbar,
        capacitive: 2.0 * en.e_c12 * ratio / hbar,
    }
}
