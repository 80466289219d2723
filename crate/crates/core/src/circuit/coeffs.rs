use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Two-mode coupling split into its inductive and capacitive parts.
///
/// `plus = inductive + capacitive` multiplies the excitation-exchange term
/// `a_i† a_j + a_i a_j†`, `minus = inductive − capacitive` the pair term
/// `a_i† a_j† + a_i a_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCoupling {
    pub modes: (usize, usize),
    pub inductive: f64,
    pub capacitive: f64,
}

impl ModeCoupling {
    pub fn plus(&self) -> f64 {
        self.inductive + self.capacitive
    }

    pub fn minus(&self) -> f64 {
        self.inductive - self.capacitive
    }

    pub fn scaled(&self, inductive: f64, capacitive: f64) -> Self {
        ModeCoupling {
            inductive: self.inductive * inductive,
            capacitive: self.capacitive * capacitive,
            ..*self
        }
    }
}

/// Second-quantized coefficients at one working point `(Φx, n_g)`, all in
/// angular frequency (rad/s).
///
/// Modes are ordered `(a1, a2)` for one device and `(a1, a2, b1, b2)` for the
/// coupled chain, i.e. circuit nodes 1, 2 (and 4, 5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianCoeffs {
    pub flux: f64,
    pub flux_over_phi0: f64,
    pub gate_charge: f64,
    pub omega: Vec<f64>,
    /// Gate coupling per unit gate charge; `G_gℓ = drive_per_gate_charge[ℓ] · n_g`.
    pub drive_per_gate_charge: Vec<f64>,
    pub charge_zpf: Vec<f64>,
    pub phase_zpf: Vec<f64>,
    pub couplings: Vec<ModeCoupling>,
}

impl HamiltonianCoeffs {
    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    pub fn is_coupled(&self) -> bool {
        self.n_modes() == 4
    }

    pub fn g_drive(&self) -> Vec<f64> {
        self.drive_per_gate_charge
            .iter()
            .map(|g| g * self.gate_charge)
            .collect()
    }

    pub fn with_gate_charge(&self, gate_charge: f64) -> Self {
        HamiltonianCoeffs {
            gate_charge,
            ..self.clone()
        }
    }

    pub fn coupling(&self, i: usize, j: usize) -> Option<&ModeCoupling> {
        self.couplings.iter().find(|c| c.modes == (i, j) || c.modes == (j, i))
    }

    fn plus_minus(&self, i: usize, j: usize) -> (f64, f64) {
        self.coupling(i, j).map_or((0.0, 0.0), |c| (c.plus(), c.minus()))
    }

    /// `(λ⁺, λ⁻)` inside device 1.
    pub fn lambda(&self) -> (f64, f64) {
        self.plus_minus(0, 1)
    }

    /// `(Λ⁺, Λ⁻)` inside device 2; `None` for a single device.
    pub fn big_lambda(&self) -> Option<(f64, f64)> {
        self.is_coupled().then(|| self.plus_minus(2, 3))
    }

    /// `(γ⁺_{j,k}, γ⁻_{j,k})` between mode `a_j` of device 1 and `b_k` of
    /// device 2, one-based as in the tables.
    pub fn gamma(&self, j: usize, k: usize) -> Option<(f64, f64)> {
        (self.is_coupled() && (1..=2).contains(&j) && (1..=2).contains(&k)).then(|| self.plus_minus(j - 1, k + 1))
    }

    pub fn report(&self) -> CoefficientReport {
        let w1 = self.omega[0];
        let ghz = |w: f64| w / (2.0 * PI * 1e9);
        let g = self.g_drive();
        let (lp, lm) = self.lambda();
        let coupled = self.is_coupled();
        let gammas = coupled.then(|| {
            let mut plus = [[0.0; 2]; 2];
            let mut minus = [[0.0; 2]; 2];
            for j in 0..2 {
                for k in 0..2 {
                    let (p, m) = self.gamma(j + 1, k + 1).unwrap();
                    plus[j][k] = p / w1;
                    minus[j][k] = m / w1;
                }
            }
            (plus, minus)
        });
        CoefficientReport {
            omega_ghz: self.omega[..2].iter().map(|&w| ghz(w)).collect(),
            big_omega_ghz: coupled.then(|| self.omega[2..].iter().map(|&w| ghz(w)).collect()),
            g_g: g[..2].iter().map(|x| x / w1).collect(),
            j_g: coupled.then(|| g[2..].iter().map(|x| x / w1).collect()),
            lambda_plus: lp / w1,
            lambda_minus: lm / w1,
            big_lambda_plus: self.big_lambda().map(|l| l.0 / w1),
            big_lambda_minus: self.big_lambda().map(|l| l.1 / w1),
            gamma_plus: gammas.map(|g| g.0),
            gamma_minus: gammas.map(|g| g.1),
            flux_over_phi0: self.flux_over_phi0,
        }
    }
}

/// Table-style summary emitted by `derive-params`: frequencies as `ω/2π` in
/// GHz, every coupling as a ratio to `ω1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub omega_ghz: Vec<f64>,
    #[serde(rename = "Omega_ghz")]
    pub big_omega_ghz: Option<Vec<f64>>,
    #[serde(rename = "G_g")]
    pub g_g: Vec<f64>,
    #[serde(rename = "J_g")]
    pub j_g: Option<Vec<f64>>,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    #[serde(rename = "Lambda_plus")]
    pub big_lambda_plus: Option<f64>,
    #[serde(rename = "Lambda_minus")]
    pub big_lambda_minus: Option<f64>,
    pub gamma_plus: Option<[[f64; 2]; 2]>,
    pub gamma_minus: Option<[[f64; 2]; 2]>,
    pub flux_over_phi0: f64,
}
