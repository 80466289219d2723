//! JSON run configuration.
//!
//! A config is parsed strictly (unknown keys are rejected), defaults are
//! filled in by [`RunConfig::resolve`], and the resolved form is what every
//! command runs from and what gets echoed next to the outputs. Physical
//! inputs use laboratory units (fF, pH, GHz, µV); conversion to SI happens in
//! [`RunConfig::sim_config`].

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{CircuitParams, Compiler, SecondDevice, DEFAULT_COS_FLOOR, FEMTO, GIGA, PICO};
use crate::correlations::{parse_pair, BasinHoppingSettings, Pair, TruncationPolicy};
use crate::dynamics::{DriveSpec, FeedbackSpec, OperatingPoint, SimConfig, DEFAULT_NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{ModeLayout, StateSpec, DEFAULT_TRUNCATION_THRESHOLD};
use crate::hysteresis::Thresholds;

pub const DEFAULT_SINGLE_CUTOFF: usize = 12;
pub const DEFAULT_COUPLED_CUTOFF: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    DeriveParams,
    Simulate,
    Discord,
    Analyze,
    Sweep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::DeriveParams => "derive-params",
            Mode::Simulate => "simulate",
            Mode::Discord => "discord",
            Mode::Analyze => "analyze",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Table1,
    Table2,
}

/// Circuit values in fF, pH and GHz. `preset` supplies every field that is
/// not given explicitly; after resolution the preset is dropped and all
/// fields are present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, rename = "c_c_fF")]
    pub c_c_ff: Option<f64>,
    #[serde(default, rename = "c_1_fF")]
    pub c_1_ff: Option<f64>,
    #[serde(default, rename = "c_2_fF")]
    pub c_2_ff: Option<f64>,
    #[serde(default, rename = "c_g_fF")]
    pub c_g_ff: Option<f64>,
    #[serde(default, rename = "c_j_fF")]
    pub c_j_ff: Option<f64>,
    #[serde(default, rename = "l_1_pH")]
    pub l_1_ph: Option<f64>,
    #[serde(default, rename = "l_2_pH")]
    pub l_2_ph: Option<f64>,
    /// `E_J/h`.
    #[serde(default)]
    pub e_j_ghz: Option<f64>,
    #[serde(default)]
    pub second: Option<SecondDeviceConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondDeviceConfig {
    #[serde(rename = "c_3_fF")]
    pub c_3_ff: f64,
    #[serde(rename = "c_4_fF")]
    pub c_4_ff: f64,
    #[serde(rename = "l_3_pH")]
    pub l_3_ph: f64,
    #[serde(rename = "l_4_pH")]
    pub l_4_ph: f64,
    #[serde(rename = "c_m_fF")]
    pub c_m_ff: f64,
}

impl CircuitConfig {
    pub fn from_params(p: &CircuitParams) -> Self {
        CircuitConfig {
            preset: None,
            c_c_ff: Some(p.c_c / FEMTO),
            c_1_ff: Some(p.c_1 / FEMTO),
            c_2_ff: Some(p.c_2 / FEMTO),
            c_g_ff: Some(p.c_g / FEMTO),
            c_j_ff: Some(p.c_j / FEMTO),
            l_1_ph: Some(p.l_1 / PICO),
            l_2_ph: Some(p.l_2 / PICO),
            e_j_ghz: Some(p.e_j_ghz()),
            second: p.second.map(|s| SecondDeviceConfig {
                c_3_ff: s.c_3 / FEMTO,
                c_4_ff: s.c_4 / FEMTO,
                l_3_ph: s.l_3 / PICO,
                l_4_ph: s.l_4 / PICO,
                c_m_ff: s.c_m / FEMTO,
            }),
        }
    }

    fn resolve(&self) -> Result<Self> {
        let b = self
            .preset
            .map(|p| {
                Self::from_params(&match p {
                    Preset::Table1 => CircuitParams::table1(),
                    Preset::Table2 => CircuitParams::table2(),
                })
            })
            .unwrap_or_default();
        let pick = |name: &str, own: Option<f64>, preset: Option<f64>| {
            own.or(preset)
                .map(Some)
                .ok_or_else(|| Error::config(format!("circuit.{name}"), "missing field (no preset given)"))
        };
        Ok(CircuitConfig {
            preset: None,
            c_c_ff: pick("c_c_fF", self.c_c_ff, b.c_c_ff)?,
            c_1_ff: pick("c_1_fF", self.c_1_ff, b.c_1_ff)?,
            c_2_ff: pick("c_2_fF", self.c_2_ff, b.c_2_ff)?,
            c_g_ff: pick("c_g_fF", self.c_g_ff, b.c_g_ff)?,
            c_j_ff: pick("c_j_fF", self.c_j_ff, b.c_j_ff)?,
            l_1_ph: pick("l_1_pH", self.l_1_ph, b.l_1_ph)?,
            l_2_ph: pick("l_2_pH", self.l_2_ph, b.l_2_ph)?,
            e_j_ghz: pick("e_j_ghz", self.e_j_ghz, b.e_j_ghz)?,
            second: self.second.or(b.second),
        })
    }

    /// SI parameters. Only valid on a resolved config.
    pub fn params(&self) -> Result<CircuitParams> {
        let get =
            |name: &str, v: Option<f64>| v.ok_or_else(|| Error::config(format!("circuit.{name}"), "missing field"));
        let h = crate::circuit::PhysicalConstants::SI.planck_h;
        let p = CircuitParams {
            c_c: get("c_c_fF", self.c_c_ff)? * FEMTO,
            c_1: get("c_1_fF", self.c_1_ff)? * FEMTO,
            c_2: get("c_2_fF", self.c_2_ff)? * FEMTO,
            c_g: get("c_g_fF", self.c_g_ff)? * FEMTO,
            c_j: get("c_j_fF", self.c_j_ff)? * FEMTO,
            l_1: get("l_1_pH", self.l_1_ph)? * PICO,
            l_2: get("l_2_pH", self.l_2_ph)? * PICO,
            e_j: get("e_j_ghz", self.e_j_ghz)? * GIGA * h,
            second: self.second.map(|s| SecondDevice {
                c_3: s.c_3_ff * FEMTO,
                c_4: s.c_4_ff * FEMTO,
                l_3: s.l_3_ph * PICO,
                l_4: s.l_4_ph * PICO,
                c_m: s.c_m_ff * FEMTO,
            }),
        };
        p.validate().map_err(|e| Error::config("circuit", e.to_string()))?;
        Ok(p)
    }
}

/// `V_g(t) = V₀ cos(ω_ν t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(rename = "v0_uV")]
    pub v0_uv: f64,
    /// `ω_ν/ω₁`, with `ω₁` taken at the rest flux `c₁Φ₀`.
    pub omega_nu_over_omega1: f64,
    /// Absolute `ω_ν/2π`; replaces the ratio when set.
    #[serde(default)]
    pub omega_nu_ghz: Option<f64>,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedbackConfig {
    pub c1: f64,
    pub c2: f64,
    /// Feedback windows per drive period, so `Δt = T/windows_per_period`.
    pub windows_per_period: usize,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig {
            c1: 1.84,
            c2: 0.08,
            windows_per_period: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_periods: usize,
    pub substeps_per_window: usize,
    /// Per-mode Fock cutoffs; defaults to 12 per mode for one device and 5
    /// for two.
    pub cutoffs: Option<Vec<usize>>,
    pub cos_floor: f64,
    pub truncation_threshold: f64,
    pub norm_tolerance: f64,
    pub execution: Execution,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_periods: 10,
            substeps_per_window: 8,
            cutoffs: None,
            cos_floor: DEFAULT_COS_FLOOR,
            truncation_threshold: DEFAULT_TRUNCATION_THRESHOLD,
            norm_tolerance: DEFAULT_NORM_TOLERANCE,
            execution: Execution::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscordConfig {
    pub optimizer: BasinHoppingSettings,
    pub block: TruncationPolicy,
    /// One-based labels, first mode kept and second measured. Defaults to
    /// every pair `i < j`.
    pub pairs: Option<Vec<String>>,
    /// Feedback windows between discord samples.
    pub sample_every: usize,
}

impl Default for DiscordConfig {
    fn default() -> Self {
        DiscordConfig {
            optimizer: BasinHoppingSettings::default(),
            block: TruncationPolicy::default(),
            pairs: None,
            sample_every: 50,
        }
    }
}

impl DiscordConfig {
    pub fn parsed_pairs(&self) -> Result<Vec<Pair>> {
        self.pairs
            .iter()
            .flatten()
            .enumerate()
            .map(|(k, s)| parse_pair(s).map_err(|e| Error::config(format!("discord.pairs[{k}]"), e.to_string())))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Values are `ω_ν/ω₁`.
    OmegaNu,
    Chi,
    Theta,
    R,
    PhiCoherent,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::OmegaNu => "omega_nu",
            SweepAxis::Chi => "chi",
            SweepAxis::Theta => "theta",
            SweepAxis::R => "r",
            SweepAxis::PhiCoherent => "phi_coherent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub trajectory: PathBuf,
    /// Drive periods spanned by the file; defaults to `simulation.n_periods`.
    #[serde(default)]
    pub periods: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeriveConfig {
    pub flux_over_phi0: f64,
    /// Gate charge used for `G_g` and `J_g`; the default of one reports them
    /// per unit `n_g`.
    pub gate_charge: f64,
}

impl Default for DeriveConfig {
    fn default() -> Self {
        DeriveConfig {
            flux_over_phi0: 0.0,
            gate_charge: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    pub circuit: CircuitConfig,
    #[serde(default = "vacuum")]
    pub initial_state: StateSpec,
    #[serde(default)]
    pub drive: Option<DriveConfig>,
    #[serde(default)]
    pub feedback: FeedbackConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub operating_point: Option<OperatingPoint>,
    #[serde(default)]
    pub hysteresis: Thresholds,
    #[serde(default)]
    pub discord: DiscordConfig,
    #[serde(default)]
    pub derive_params: DeriveConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub analyze: Option<AnalyzeConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub plot: bool,
    /// Sweep worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
}

fn vacuum() -> StateSpec {
    StateSpec::Vacuum
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

/// Strict parse of a JSON document; errors carry the field path and the
/// line and column.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let message = inner.to_string();
        // Missing fields are reported against their parent; name the field.
        let missing = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next())
            .filter(|_| inner.classify() == serde_json::error::Category::Data);
        let path = match (missing, path.as_str()) {
            (Some(f), ".") => f.to_string(),
            (Some(f), p) => format!("{p}.{f}"),
            (None, p) => p.to_string(),
        };
        Error::config(path, message)
    })
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.mode {
            self.mode = Some(m);
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(s) = o.seed {
            self.discord.optimizer.seed = s;
        }
    }

    /// Fills every default and validates. Resolving twice is a no-op.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut r = self.clone();
        r.circuit = self.circuit.resolve()?;
        let params = r.circuit.params()?;
        let modes = if params.is_coupled() { 4 } else { 2 };
        let cutoff = if params.is_coupled() {
            DEFAULT_COUPLED_CUTOFF
        } else {
            DEFAULT_SINGLE_CUTOFF
        };
        let cutoffs = r.simulation.cutoffs.clone().unwrap_or_else(|| vec![cutoff; modes]);
        ModeLayout::new(cutoffs.clone()).map_err(|e| Error::config("simulation.cutoffs", e.to_string()))?;
        if cutoffs.len() != modes {
            return Err(Error::config(
                "simulation.cutoffs",
                format!("expected {modes} cutoffs, got {}", cutoffs.len()),
            ));
        }
        r.simulation.cutoffs = Some(cutoffs);
        if r.discord.pairs.is_none() {
            let labels = (0..modes)
                .flat_map(|i| (i + 1..modes).map(move |j| Pair { i, j }.label()))
                .collect();
            r.discord.pairs = Some(labels);
        }
        let pairs = r.discord.parsed_pairs()?;
        if let Some((k, p)) = pairs.iter().enumerate().find(|(_, p)| p.i >= modes || p.j >= modes) {
            return Err(Error::config(
                format!("discord.pairs[{k}]"),
                format!("pair {p} exceeds {modes} modes"),
            ));
        }
        r.discord
            .optimizer
            .validate()
            .map_err(|e| Error::config("discord.optimizer", e.to_string()))?;
        r.discord
            .block
            .validate()
            .map_err(|e| Error::config("discord.block", e.to_string()))?;
        if r.discord.sample_every == 0 {
            return Err(Error::config("discord.sample_every", "must be at least 1"));
        }
        if r.feedback.windows_per_period == 0 {
            return Err(Error::config("feedback.windows_per_period", "must be at least 1"));
        }
        if let Some(s) = &r.sweep {
            if s.values.is_empty() {
                return Err(Error::config("sweep.values", "sweep needs at least one value"));
            }
            if let Some(k) = s.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::config(format!("sweep.values[{k}]"), "value is not finite"));
            }
            if s.axis != SweepAxis::OmegaNu && apply_axis(&r.initial_state, s.axis, 0.0).is_none() {
                return Err(Error::config(
                    "sweep.axis",
                    format!("initial state has no `{}` parameter", s.axis.as_str()),
                ));
            }
        }
        if let Some(d) = &r.drive {
            if let Some(g) = d.omega_nu_ghz {
                if !(g > 0.0 && g.is_finite()) {
                    return Err(Error::config(
                        "drive.omega_nu_ghz",
                        format!("must be positive, got {g}"),
                    ));
                }
            } else if !(d.omega_nu_over_omega1 > 0.0 && d.omega_nu_over_omega1.is_finite()) {
                return Err(Error::config(
                    "drive.omega_nu_over_omega1",
                    format!("must be positive, got {}", d.omega_nu_over_omega1),
                ));
            }
        }
        Ok(r)
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode
            .ok_or_else(|| Error::config("mode", "no mode given in the file or on the command line"))
    }

    pub fn cutoffs(&self) -> Result<Vec<usize>> {
        self.simulation
            .cutoffs
            .clone()
            .ok_or_else(|| Error::config("simulation.cutoffs", "config is not resolved"))
    }

    /// SI simulation inputs. Expects a resolved config.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let drive = self.drive.ok_or_else(|| Error::config("drive", "missing field"))?;
        let params = self.circuit.params()?;
        let compiler = Compiler::with_cos_floor(self.simulation.cos_floor);
        let rest = self.feedback.c1 * compiler.constants.flux_quantum;
        let omega1 = if params.is_coupled() {
            compiler.coeffs_coupled(&params, rest, 0.0)?
        } else {
            compiler.coeffs_single(&params, rest, 0.0)?
        }
        .omega[0];
        let omega_nu = match drive.omega_nu_ghz {
            Some(g) => 2.0 * PI * g * GIGA,
            None => drive.omega_nu_over_omega1 * omega1,
        };
        let period = 2.0 * PI / omega_nu;
        let cfg = SimConfig {
            params,
            layout: ModeLayout::new(self.cutoffs()?)?,
            initial: self.initial_state.clone(),
            drive: DriveSpec {
                v0: drive.v0_uv * 1e-6,
                omega_nu,
                phase: drive.phase,
            },
            feedback: FeedbackSpec {
                c1: self.feedback.c1,
                c2: self.feedback.c2,
                delta_t: period / self.feedback.windows_per_period as f64,
            },
            n_periods: self.simulation.n_periods,
            substeps_per_window: self.simulation.substeps_per_window,
            cos_floor: self.simulation.cos_floor,
            truncation_threshold: self.simulation.truncation_threshold,
            norm_tolerance: self.simulation.norm_tolerance,
            operating_point: self.operating_point,
            exec: self.simulation.execution,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy with one sweep coordinate applied.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<RunConfig> {
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            SweepAxis::OmegaNu => {
                let d = c
                    .drive
                    .as_mut()
                    .ok_or_else(|| Error::config("drive", "missing field"))?;
                d.omega_nu_over_omega1 = value;
                d.omega_nu_ghz = None;
            }
            _ => {
                c.initial_state = apply_axis(&self.initial_state, axis, value).ok_or_else(|| {
                    Error::config(
                        "sweep.axis",
                        format!("initial state has no `{}` parameter", axis.as_str()),
                    )
                })?;
            }
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Hex SHA-256 of [`RunConfig::to_json`].
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Sets `axis` on every factor of `spec` that has it; `None` if none does.
fn apply_axis(spec: &StateSpec, axis: SweepAxis, value: f64) -> Option<StateSpec> {
    use StateSpec::*;
    let out = match (spec.clone(), axis) {
        (FockSuperposition { eta, .. }, SweepAxis::Chi) => FockSuperposition { eta, chi: value },
        (BellLike { .. }, SweepAxis::Theta) => BellLike { theta: value },
        (Coherent { phi, .. }, SweepAxis::R) => Coherent { r: value, phi },
        (Coherent { r, .. }, SweepAxis::PhiCoherent) => Coherent { r, phi: value },
        (Cat { phi, .. }, SweepAxis::R) => Cat { r: value, phi },
        (Cat { r, .. }, SweepAxis::PhiCoherent) => Cat { r, phi: value },
        (
            SqueezedCoherent {
                phi,
                squeeze_r,
                squeeze_theta,
                ..
            },
            SweepAxis::R,
        ) => SqueezedCoherent {
            r: value,
            phi,
            squeeze_r,
            squeeze_theta,
        },
        (
            SqueezedCoherent {
                r,
                squeeze_r,
                squeeze_theta,
                ..
            },
            SweepAxis::PhiCoherent,
        ) => SqueezedCoherent {
            r,
            phi: value,
            squeeze_r,
            squeeze_theta,
        },
        (Product { factors }, _) => {
            let mut hit = false;
            let factors = factors
                .iter()
                .map(|f| match apply_axis(f, axis, value) {
                    Some(g) => {
                        hit = true;
                        g
                    }
                    None => f.clone(),
                })
                .collect();
            if !hit {
                return None;
            }
            Product { factors }
        }
        _ => return None,
    };
    Some(out)
}
