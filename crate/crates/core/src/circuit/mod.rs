//! Circuit-to-Hamiltonian compilation.
//!
//! Turns the electrical parameters of the single device (two LC resonators
//! coupled by `C_c`, the second one grounded through a flux-tunable SQUID) and
//! of the two-device chain (coupled through `C_m`) into the second-quantized
//! coefficients used by the dynamics engine. All arithmetic is SI; the
//! reporting helpers convert to GHz.

mod coeffs;
mod coupled;
mod single;

pub use coeffs::{CoefficientReport, HamiltonianCoeffs, ModeCoupling};
pub use coupled::{BMatrix, CoupledEnergies, DressedCoupled};
pub use single::{DressedSingle, EnergyScales};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact SI values (2019 redefinition) used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub electron_charge: f64,
    pub planck_h: f64,
    pub flux_quantum: f64,
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = {
        let e = 1.602_176_634e-19;
        let h = 6.626_070_15e-34;
        PhysicalConstants {
            electron_charge: e,
            planck_h: h,
            flux_quantum: h / (2.0 * e),
            hbar: h / (2.0 * std::f64::consts::PI),
        }
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

pub const FEMTO: f64 = 1e-15;
pub const PICO: f64 = 1e-12;
pub const GIGA: f64 = 1e9;

/// Default guard on `|cos(2π Φx/Φ0)|` below which the SQUID is treated as
/// collapsed.
pub const DEFAULT_COS_FLOOR: f64 = 1e-3;

/// Second-device block of the coupled chain. Device 2 mirrors device 1 with
/// `C_3, C_4, L_3, L_4` in place of `C_1, C_2, L_1, L_2` and shares `C_c`,
/// `C_J`, `C_g` and `E_J`; `c_m` joins node 2 to node 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondDevice {
    pub c_3: f64,
    pub c_4: f64,
    pub l_3: f64,
    pub l_4: f64,
    pub c_m: f64,
}

/// Raw electrical parameters in SI units (farads, henries, joules).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub c_c: f64,
    pub c_1: f64,
    pub c_2: f64,
    pub c_g: f64,
    pub c_j: f64,
    pub l_1: f64,
    pub l_2: f64,
    pub e_j: f64,
    pub second: Option<SecondDevice>,
}

impl CircuitParams {
    /// Single-device parameter set of the reference design.
    pub fn table1() -> Self {
        let h = PhysicalConstants::SI.planck_h;
        CircuitParams {
            c_c: 5.657 * FEMTO,
            c_1: 413.5 * FEMTO,
            c_2: 530.4 * FEMTO,
            c_g: 116.9 * FEMTO,
            c_j: 536.0 * FEMTO,
            l_1: 746.2 * PICO,
            l_2: 749.8 * PICO,
            e_j: h * 219.1 * GIGA,
            second: None,
        }
    }

    /// Two identical devices coupled through `C_m = 11.69 fF`.
    pub fn table2() -> Self {
        CircuitParams {
            second: Some(SecondDevice {
                c_3: 413.5 * FEMTO,
                c_4: 530.4 * FEMTO,
                l_3: 746.2 * PICO,
                l_4: 749.8 * PICO,
                c_m: 11.69 * FEMTO,
            }),
            ..Self::table1()
        }
    }

    /// `E_J / h` in GHz, the value quoted in parameter tables.
    pub fn e_j_ghz(&self) -> f64 {
        self.e_j / PhysicalConstants::SI.planck_h / GIGA
    }

    pub fn is_coupled(&self) -> bool {
        self.second.is_some()
    }

    /// Parameters of device 2 expressed as a standalone single device.
    pub fn second_as_single(&self) -> Option<CircuitParams> {
        self.second.map(|s| CircuitParams {
            c_1: s.c_3,
            c_2: s.c_4,
            l_1: s.l_3,
            l_2: s.l_4,
            second: None,
            ..*self
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut checks: Vec<(&'static str, f64)> = vec![
            ("c_c", self.c_c),
            ("c_1", self.c_1),
            ("c_2", self.c_2),
            ("c_g", self.c_g),
            ("c_j", self.c_j),
            ("l_1", self.l_1),
            ("l_2", self.l_2),
            ("e_j", self.e_j),
        ];
        if let Some(s) = &self.second {
            checks.extend([("c_3", s.c_3), ("c_4", s.c_4), ("l_3", s.l_3), ("l_4", s.l_4)]);
            // C_m = 0 is the decoupled limit and is allowed.
            if !(s.c_m.is_finite() && s.c_m >= 0.0) {
                return Err(Error::NonPositiveParam {
                    name: "c_m",
                    value: s.c_m,
                });
            }
        }
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveParam { name, value });
            }
        }
        Ok(())
    }
}

/// Evaluates the compiler formulas under a fixed set of constants and
/// singularity guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compiler {
    pub constants: PhysicalConstants,
    pub cos_floor: f64,
}

impl Default for Compiler {
    fn default() -> Self {
        Compiler {
            constants: PhysicalConstants::SI,
            cos_floor: DEFAULT_COS_FLOOR,
        }
    }
}

impl Compiler {
    pub fn with_cos_floor(cos_floor: f64) -> Self {
        Compiler {
            cos_floor,
            ..Default::default()
        }
    }

    /// `|cos(2π Φx/Φ0)|`, checked against the floor.
    pub fn squid_cos(&self, flux: f64) -> Result<f64> {
        let ratio = flux / self.constants.flux_quantum;
        let c = (2.0 * std::f64::consts::PI * ratio).cos().abs();
        if !c.is_finite() || c < self.cos_floor {
            return Err(Error::FluxSingularity {
                flux_over_phi0: ratio,
                cos: c,
                floor: self.cos_floor,
            });
        }
        Ok(c)
    }

    /// Dimensionless gate charge `n_g = C_g V_g / 2e`.
    pub fn gate_charge(&self, params: &CircuitParams, v_g: f64) -> f64 {
        params.c_g * v_g / (2.0 * self.constants.electron_charge)
    }
}

pub fn dressed_single(params: &CircuitParams, flux: f64) -> Result<DressedSingle> {
    Compiler::default().dressed_single(params, flux)
}

pub fn coeffs_single(params: &CircuitParams, flux: f64, gate_charge: f64) -> Result<HamiltonianCoeffs> {
    Compiler::default().coeffs_single(params, flux, gate_charge)
}

pub fn dressed_coupled(params: &CircuitParams, flux: f64) -> Result<DressedCoupled> {
    Compiler::default().dressed_coupled(params, flux)
}

pub fn coeffs_coupled(params: &CircuitParams, flux: f64, gate_charge: f64) -> Result<HamiltonianCoeffs> {
    Compiler::default().coeffs_coupled(params, flux, gate_charge)
}
