//! Shape metrics for input–output curves `(V_g, ⟨n̂₂⟩)`.
//!
//! Both axes are normalized by their largest magnitude, the first half drive
//! period is dropped as transient, and only complete drive periods enter
//! the metrics. A lobe is the stretch of curve between consecutive zero
//! crossings of the input, closed by the straight chord between them, so a
//! figure-eight has two lobes of opposite orientation and a circle has two
//! half-discs. Per-cycle area is the sum of absolute lobe areas.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Samples on each side of a zero crossing searched for the closest approach
/// to the pinch point.
const PINCH_WINDOW: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisMetrics {
    /// Largest, over input zero crossings, of the closest approach of the
    /// normalized curve to `(0, z)`, `z` being the mean output at crossings.
    pub pinch_distance: f64,
    pub pinch_level: f64,
    pub loop_area_per_cycle: Vec<f64>,
    pub mean_area: f64,
    /// Last over first cycle area; absent when the first area vanishes.
    pub area_trend: Option<f64>,
    /// Ratio of the smaller to the larger singular value of the centered
    /// point cloud.
    pub linearity_ratio: f64,
    pub cycles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub pinch: f64,
    pub area: f64,
    pub linear: f64,
    pub oscillator: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pinch: 0.05,
            area: 0.01,
            linear: 0.1,
            oscillator: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Memristive,
    Linear,
    Oscillator,
    Indeterminate,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Memristive => "memristive",
            Label::Linear => "linear",
            Label::Oscillator => "oscillator",
            Label::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(m: &HysteresisMetrics, t: &Thresholds) -> Label {
    if m.pinch_distance < t.pinch && m.mean_area > t.area {
        Label::Memristive
    } else if m.linearity_ratio < t.linear {
        Label::Linear
    } else if m.linearity_ratio > t.oscillator && m.pinch_distance > t.pinch {
        Label::Oscillator
    } else {
        Label::Indeterminate
    }
}

/// Metrics of a trajectory spanning `periods` drive periods, using the gate
/// voltage as input and `⟨n̂₂⟩` as output.
pub fn loop_metrics(traj: &Trajectory, periods: usize) -> Result<HysteresisMetrics> {
    let x = traj.column(|r| r.v_g);
    let y = traj.column(|r| r.exp_n2);
    loop_metrics_xy(&x, &y, periods)
}

/// Metrics of uniformly sampled `(x, y)` spanning `periods` drive periods.
pub fn loop_metrics_xy(x: &[f64], y: &[f64], periods: usize) -> Result<HysteresisMetrics> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "loop input and output lengths",
            expected: x.len(),
            found: y.len(),
        });
    }
    let per = x.len().checked_div(periods).unwrap_or(0);
    if periods < 2 || per < 4 {
        return Err(Error::TooFewPeriods {
            found: periods.min(x.len() / 4),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("trajectory contains non-finite values".into()));
    }
    let start = per / 2;
    let cycles = (x.len() - start) / per;
    let end = start + cycles * per;
    let scale = |v: &[f64]| {
        let m = v[start..end].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if m > 0.0 {
            m
        } else {
            1.0
        }
    };
    let (sx, sy) = (scale(x), scale(y));
    let pts: Vec<(f64, f64)> = (start..end).map(|k| (x[k] / sx, y[k] / sy)).collect();

    let crossings = zero_crossings(&pts);
    let pinch_level = if crossings.is_empty() {
        0.0
    } else {
        crossings.iter().map(|c| c.y).sum::<f64>() / crossings.len() as f64
    };
    let pinch_distance = crossings
        .iter()
        .map(|c| {
            let lo = c.index.saturating_sub(PINCH_WINDOW - 1);
            let hi = (c.index + PINCH_WINDOW + 1).min(pts.len());
            pts[lo..hi]
                .iter()
                .map(|&(px, py)| px.hypot(py - pinch_level))
                .fold((c.y - pinch_level).abs(), f64::min)
        })
        .fold(if crossings.is_empty() { f64::INFINITY } else { 0.0 }, f64::max);

    let loop_area_per_cycle: Vec<f64> = pts.chunks(per).map(cycle_area).collect();
    let mean_area = loop_area_per_cycle.iter().sum::<f64>() / cycles as f64;
    let first = loop_area_per_cycle[0];
    let area_trend = (first > 1e-12).then(|| loop_area_per_cycle[cycles - 1] / first);

    Ok(HysteresisMetrics {
        pinch_distance,
        pinch_level,
        loop_area_per_cycle,
        mean_area,
        area_trend,
        linearity_ratio: linearity(&pts),
        cycles,
    })
}

#[derive(Debug, Clone, Copy)]
struct Crossing {
    /// Sample just before the crossing.
    index: usize,
    y: f64,
}

fn zero_crossings(pts: &[(f64, f64)]) -> Vec<Crossing> {
    let mut out = Vec::new();
    for k in 0..pts.len().saturating_sub(1) {
        let (x0, y0) = pts[k];
        let (x1, y1) = pts[k + 1];
        let up = x0 <= 0.0 && x1 > 0.0;
        let down = x0 >= 0.0 && x1 < 0.0;
        if up || down {
            let frac = x0 / (x0 - x1);
            out.push(Crossing {
                index: k,
                y: y0 + frac * (y1 - y0),
            });
        }
    }
    out
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % n];
        s += x0 * y1 - x1 * y0;
    }
    0.5 * s
}

/// Sum of absolute lobe areas over one (wrapped) cycle.
fn cycle_area(cycle: &[(f64, f64)]) -> f64 {
    let n = cycle.len();
    // Treat the cycle as closed so the crossing between its last and first
    // samples is found too.
    let mut wrapped = cycle.to_vec();
    wrapped.push(cycle[0]);
    let crossings = zero_crossings(&wrapped);
    if crossings.len() < 2 {
        return shoelace(cycle).abs();
    }
    let point = |c: &Crossing| (0.0, c.y);
    let mut total = 0.0;
    for (i, a) in crossings.iter().enumerate() {
        let b = &crossings[(i + 1) % crossings.len()];
        let mut lobe = vec![point(a)];
        let mut k = (a.index + 1) % n;
        loop {
            lobe.push(cycle[k]);
            if k == b.index % n {
                break;
            }
            k = (k + 1) % n;
        }
        lobe.push(point(b));
        total += shoelace(&lobe).abs();
    }
    total
}

fn linearity(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Singular values of the centered data are square roots of the scatter
    // matrix eigenvalues.
    let half_tr = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let (l1, l2) = (half_tr + disc, (half_tr - disc).max(0.0));
    if l1 <= 0.0 {
        return 0.0;
    }
    (l2 / l1).sqrt().clamp(0.0, 1.0)
}
