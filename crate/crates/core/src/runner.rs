//! Command orchestration: each mode takes a resolved [`RunConfig`], computes
//! its results and writes them through an [`OutputDir`].

use std::path::PathBuf;

use serde::Serialize;

use crate::circuit::{CoefficientReport, Compiler};
use crate::config::{Mode, RunConfig, SweepAxis};
use crate::correlations::{discord_series, DiscordSample};
use crate::dynamics::{run_feedback, run_feedback_with, Trajectory};
use crate::error::{Error, Result};
use crate::exec::{map_indices, with_workers, Execution};
use crate::hysteresis::{classify, loop_metrics, HysteresisMetrics, Label, Thresholds};
use crate::output::{discord_csv, line_plot_svg, OutputDir, OutputRecord, Series};

/// Hysteresis metrics with their classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub label: Label,
    pub metrics: HysteresisMetrics,
    pub thresholds: Thresholds,
}

impl Analysis {
    pub fn of(traj: &Trajectory, periods: usize, thresholds: &Thresholds) -> Result<Self> {
        let metrics = loop_metrics(traj, periods)?;
        Ok(Analysis {
            label: classify(&metrics, thresholds),
            metrics,
            thresholds: *thresholds,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub trajectory: Trajectory,
    /// Absent for runs shorter than two periods.
    pub analysis: Option<Analysis>,
}

#[derive(Debug, Serialize)]
struct SimulationReport<'a> {
    rows: usize,
    max_norm_deviation: f64,
    clamped_windows: usize,
    analysis: Option<&'a Analysis>,
}

#[derive(Debug)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub outcome: Result<SimulationOutcome>,
}

/// Coefficient table at the configured flux and gate charge.
pub fn derive_params(config: &RunConfig) -> Result<CoefficientReport> {
    let params = config.circuit.params()?;
    let compiler = Compiler::with_cos_floor(config.simulation.cos_floor);
    let flux = config.derive_params.flux_over_phi0 * compiler.constants.flux_quantum;
    let n_g = config.derive_params.gate_charge;
    let coeffs = if params.is_coupled() {
        compiler.coeffs_coupled(&params, flux, n_g)?
    } else {
        compiler.coeffs_single(&params, flux, n_g)?
    };
    Ok(coeffs.report())
}

pub fn simulate(config: &RunConfig) -> Result<SimulationOutcome> {
    let sim = config.sim_config()?;
    let trajectory = run_feedback(&sim)?;
    let analysis = if sim.n_periods >= 2 {
        Some(Analysis::of(&trajectory, sim.n_periods, &config.hysteresis)?)
    } else {
        None
    };
    Ok(SimulationOutcome { trajectory, analysis })
}

/// Runs the dynamics and evaluates the discord of every configured pair at
/// every `sample_every`-th window start.
pub fn discord_run(config: &RunConfig) -> Result<(Trajectory, Vec<DiscordSample>)> {
    let sim = config.sim_config()?;
    let every = config.discord.sample_every;
    let mut states = Vec::new();
    let trajectory = run_feedback_with(&sim, |window, t, state| {
        if window % every == 0 {
            states.push((t, state.clone()));
        }
        Ok(())
    })?;
    let pairs = config.discord.parsed_pairs()?;
    let samples = discord_series(
        &states,
        &pairs,
        &config.discord.optimizer,
        &config.discord.block,
        config.simulation.execution,
    )?;
    Ok((trajectory, samples))
}

/// Every sweep point, each run independently. Failures stay in their slot.
pub fn sweep(config: &RunConfig) -> Result<(SweepAxis, Vec<SweepPoint>)> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "sweep mode needs a `sweep` section"))?;
    let points = map_indices(spec.values.len(), Execution::Auto, |index| {
        let value = spec.values[index];
        let outcome = config.with_axis(spec.axis, value).and_then(|c| simulate(&c));
        if let Err(e) = &outcome {
            log::warn!("sweep point {index} ({} = {value}) failed: {e}", spec.axis.as_str());
        }
        SweepPoint { index, value, outcome }
    });
    Ok((spec.axis, points))
}

/// Runs the configured mode and writes all of its outputs. `inputs` are
/// listed in the manifest.
pub fn execute(config: &RunConfig, inputs: &[PathBuf]) -> Result<Vec<OutputRecord>> {
    let mode = config.mode()?;
    let mut out = OutputDir::create(&config.output_dir)?;
    with_workers(config.workers, || -> Result<()> {
        match mode {
            Mode::DeriveParams => {
                out.write_json("derive_params.json", &derive_params(config)?)?;
            }
            Mode::Simulate => write_simulation(&mut out, "", &simulate(config)?, config.plot)?,
            Mode::Discord => {
                let (traj, samples) = discord_run(config)?;
                out.write("trajectory.csv", traj.to_csv_string().as_bytes())?;
                out.write("discord.csv", discord_csv(&samples).as_bytes())?;
                if config.plot {
                    out.write("discord.svg", discord_svg(&samples).as_bytes())?;
                }
            }
            Mode::Analyze => {
                let a = config
                    .analyze
                    .as_ref()
                    .ok_or_else(|| Error::config("analyze", "analyze mode needs an `analyze` section"))?;
                if !a.trajectory.is_file() {
                    return Err(Error::config(
                        "analyze.trajectory",
                        format!("{} does not exist", a.trajectory.display()),
                    ));
                }
                let file = std::fs::File::open(&a.trajectory).map_err(|e| Error::io(&a.trajectory, e))?;
                let traj = Trajectory::read_csv(std::io::BufReader::new(file))?;
                let periods = a.periods.unwrap_or(config.simulation.n_periods);
                out.write_json("metrics.json", &Analysis::of(&traj, periods, &config.hysteresis)?)?;
            }
            Mode::Sweep => {
                let (axis, points) = sweep(config)?;
                if points.iter().all(|p| p.outcome.is_err()) {
                    let first = points.into_iter().next().expect("sweep has values");
                    return first.outcome.map(|_| ());
                }
                for p in &points {
                    if let Ok(o) = &p.outcome {
                        write_simulation(&mut out, &format!("point_{:03}_", p.index), o, config.plot)?;
                    }
                }
                out.write("sweep_metrics.csv", sweep_csv(axis, &points).as_bytes())?;
            }
        }
        Ok(())
    })?;
    let mut inputs = inputs.to_vec();
    if let (Mode::Analyze, Some(a)) = (mode, &config.analyze) {
        inputs.push(a.trajectory.clone());
    }
    out.finish(config, &inputs)
}

fn write_simulation(out: &mut OutputDir, prefix: &str, o: &SimulationOutcome, plot: bool) -> Result<()> {
    let t = &o.trajectory;
    out.write(&format!("{prefix}trajectory.csv"), t.to_csv_string().as_bytes())?;
    let report = SimulationReport {
        rows: t.len(),
        max_norm_deviation: t.max_norm_deviation(),
        clamped_windows: t.clamped_windows,
        analysis: o.analysis.as_ref(),
    };
    out.write_json(&format!("{prefix}metrics.json"), &report)?;
    if plot {
        let x = t.column(|r| r.v_g);
        let y = t.column(|r| r.exp_n2);
        let svg = line_plot_svg(
            "hysteresis",
            "V_g [V]",
            "<n2>",
            &[Series {
                name: "n2",
                x: &x,
                y: &y,
            }],
        );
        out.write(&format!("{prefix}trajectory.svg"), svg.as_bytes())?;
    }
    Ok(())
}

fn discord_svg(samples: &[DiscordSample]) -> String {
    let mut pairs: Vec<String> = samples.iter().map(|s| s.pair.label()).collect();
    pairs.sort();
    pairs.dedup();
    let columns: Vec<(String, Vec<f64>, Vec<f64>)> = pairs
        .into_iter()
        .map(|p| {
            let (t, q) = samples
                .iter()
                .filter(|s| s.pair.label() == p)
                .map(|s| (s.t, s.result.discord))
                .unzip();
            (format!("Q{p}"), t, q)
        })
        .collect();
    let series: Vec<Series> = columns.iter().map(|(name, x, y)| Series { name, x, y }).collect();
    line_plot_svg("discord", "t [s]", "discord [bits]", &series)
}

/// One row per sweep point; failed points carry `status = failed` and the
/// error text with empty metric columns.
pub fn sweep_csv(axis: SweepAxis, points: &[SweepPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index",
        "axis",
        "value",
        "status",
        "label",
        "pinch_distance",
        "pinch_level",
        "mean_area",
        "area_trend",
        "linearity_ratio",
        "cycles",
        "max_norm_deviation",
        "clamped_windows",
        "error",
    ])
    .expect("in-memory write");
    for p in points {
        let mut row = vec![p.index.to_string(), axis.as_str().to_string(), format!("{:e}", p.value)];
        match &p.outcome {
            Ok(o) => {
                row.push("ok".into());
                match &o.analysis {
                    Some(a) => {
                        let m = &a.metrics;
                        row.extend([
                            a.label.as_str().to_string(),
                            format!("{:e}", m.pinch_distance),
                            format!("{:e}", m.pinch_level),
                            format!("{:e}", m.mean_area),
                            m.area_trend.map(|v| format!("{v:e}")).unwrap_or_default(),
                            format!("{:e}", m.linearity_ratio),
                            m.cycles.to_string(),
                        ]);
                    }
                    None => row.extend(std::iter::repeat_n(String::new(), 7)),
                }
                row.push(format!("{:e}", o.trajectory.max_norm_deviation()));
                row.push(o.trajectory.clamped_windows.to_string());
                row.push(String::new());
            }
            Err(e) => {
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push(e.to_string());
            }
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}
