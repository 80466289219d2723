use serde::{Deserialize, Serialize};

use super::measurement::{angle_count, ConditionalEntropy, MeasurementAngles};
use super::optimize::{basin_hopping, BasinHoppingSettings};
use super::{reduce_pure, von_neumann_entropy, DensityMatrix};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::fock::{CMatrix, StateVector};

/// Largest optimization dimension accepted by [`discord`] (d = 5).
pub const MAX_ANGLES: usize = 30;
pub const DEFAULT_BLOCK_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_MAX_BLOCK_DIM: usize = 5;

/// Negative discord within this distance of zero is reported as zero.
const ZERO_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordResult {
    /// Bits. Not capped at one: a measured side with d > 2 can exceed it.
    pub discord: f64,
    pub optimal_angles: MeasurementAngles,
    pub entropy_marginal: f64,
    pub min_conditional_entropy: f64,
    /// False if the best local search hit its budget or the raw value fell
    /// below zero by more than the tolerance.
    pub converged: bool,
}

/// One-sided discord of `rho_ij`, measuring the second subsystem.
pub fn discord(rho_ij: &DensityMatrix, settings: &BasinHoppingSettings) -> Result<DiscordResult> {
    let ce = ConditionalEntropy::new(rho_ij)?;
    let d = ce.measured_dim();
    let n = angle_count(d);
    if n > MAX_ANGLES {
        return Err(Error::InvalidArgument(format!(
            "measured dimension {d} needs {n} angles; at most {MAX_ANGLES} are supported (truncate the block first)"
        )));
    }
    let s_i = von_neumann_entropy(&rho_ij.partial_trace(&[0])?);
    let best = basin_hopping(|x| ce.eval(x), &vec![0.0; n], settings)?;
    let raw = s_i - best.value;
    let mut converged = best.converged;
    let value = if raw < 0.0 && raw > -ZERO_TOLERANCE {
        0.0
    } else {
        if raw < 0.0 {
            converged = false;
            log::warn!("discord evaluated to {raw:.3e} bits");
        }
        raw
    };
    Ok(DiscordResult {
        discord: value,
        optimal_angles: MeasurementAngles::new(d, best.x)?,
        entropy_marginal: s_i,
        min_conditional_entropy: best.value,
        converged,
    })
}

/// How reduced two-mode states are cut down before the discord search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationPolicy {
    /// Trace allowed to be discarded.
    pub threshold: f64,
    pub max_dim: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            threshold: DEFAULT_BLOCK_THRESHOLD,
            max_dim: DEFAULT_MAX_BLOCK_DIM,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold >= 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "block threshold must lie in [0, 1), got {}",
                self.threshold
            )));
        }
        if self.max_dim < 2 {
            return Err(Error::InvalidArgument("block max_dim must be at least 2".into()));
        }
        Ok(())
    }
}

/// Projects a bipartite state onto its smallest leading Fock block keeping
/// at least `1 − threshold` of the trace (each side keeps `1 − threshold/2`
/// of its marginal), capped at `max_dim` per side, and renormalizes.
/// Returns the block and the retained trace.
pub fn leading_block(rho: &DensityMatrix, policy: &TruncationPolicy) -> Result<(DensityMatrix, f64)> {
    policy.validate()?;
    let dims = rho.dims();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch {
            context: "bipartite subsystem count",
            expected: 2,
            found: dims.len(),
        });
    }
    let (da, db) = (dims[0], dims[1]);
    let e = rho.entries();
    let mut pop_a = vec![0.0; da];
    let mut pop_b = vec![0.0; db];
    for a in 0..da {
        for b in 0..db {
            let p = e[(a * db + b, a * db + b)].re;
            pop_a[a] += p;
            pop_b[b] += p;
        }
    }
    let size = |pop: &[f64], min: usize| {
        let target = 1.0 - policy.threshold / 2.0;
        let mut acc = 0.0;
        let mut k = pop.len();
        for (i, p) in pop.iter().enumerate() {
            acc += p;
            if acc >= target {
                k = i + 1;
                break;
            }
        }
        k.max(min).min(policy.max_dim).min(pop.len())
    };
    let ka = size(&pop_a, 1);
    let kb = size(&pop_b, 2);
    let idx: Vec<usize> = (0..ka).flat_map(|a| (0..kb).map(move |b| a * db + b)).collect();
    let block = CMatrix::from_fn(idx.len(), idx.len(), |r, c| e[(idx[r], idx[c])]);
    let retained = block.trace().re;
    if retained < 1.0 - policy.threshold {
        log::warn!(
            "leading {ka}x{kb} block keeps {retained:.8} of the trace, below 1 - {}",
            policy.threshold
        );
    }
    if !(retained > 0.0) {
        return Err(Error::Truncation {
            retained,
            threshold: 1.0 - policy.threshold,
        });
    }
    Ok((DensityMatrix::new(block.unscale(retained), vec![ka, kb])?, retained))
}

/// Ordered mode pair `(i, j)`: `i` is kept, `j` is measured. Zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
}

impl Pair {
    /// One-based label such as `"12"`.
    pub fn label(&self) -> String {
        format!("{}{}", self.i + 1, self.j + 1)
    }
}

impl std::fmt::Display for Pair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses a one-based two-digit label (`"13"` is modes 0 and 2).
pub fn parse_pair(label: &str) -> Result<Pair> {
    let digits: Vec<u32> = label.trim().chars().map(|c| c.to_digit(10).unwrap_or(0)).collect();
    match digits[..] {
        [a, b] if a >= 1 && b >= 1 && a != b => Ok(Pair {
            i: a as usize - 1,
            j: b as usize - 1,
        }),
        _ => Err(Error::InvalidArgument(format!(
            "pair label `{label}` must be two distinct digits from 1 to 9"
        ))),
    }
}

/// Bipartite `ρ_ij` of a pure multimode state, subsystem order `(i, j)`.
fn pair_density(state: &StateVector, pair: Pair) -> Result<DensityMatrix> {
    let m = state.layout.n_modes();
    if pair.i >= m || pair.j >= m || pair.i == pair.j {
        return Err(Error::InvalidArgument(format!(
            "pair {} is not valid for a {m}-mode state",
            pair.label()
        )));
    }
    let dims = state.layout.cutoffs();
    if pair.i < pair.j {
        return reduce_pure(&state.amplitudes, dims, &[pair.i, pair.j]);
    }
    let rho = reduce_pure(&state.amplitudes, dims, &[pair.j, pair.i])?;
    let (dj, di) = (rho.dims()[0], rho.dims()[1]);
    let e = rho.entries();
    // Reorder from (j, i) to (i, j).
    let perm = |x: usize| (x % di) * dj + x / di;
    let mut swapped = CMatrix::zeros(e.nrows(), e.ncols());
    for r in 0..e.nrows() {
        for c in 0..e.ncols() {
            swapped[(perm(r), perm(c))] = e[(r, c)];
        }
    }
    DensityMatrix::new(swapped, vec![di, dj])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordSample {
    pub t: f64,
    pub pair: Pair,
    pub result: DiscordResult,
    /// Trace kept by the leading-block projection.
    pub retained_trace: f64,
}

pub fn pair_discord(
    state: &StateVector,
    pair: Pair,
    settings: &BasinHoppingSettings,
    policy: &TruncationPolicy,
) -> Result<(DiscordResult, f64)> {
    let rho = pair_density(state, pair)?;
    let (block, retained) = leading_block(&rho, policy)?;
    Ok((discord(&block, settings)?, retained))
}

/// Discord for every `(time, pair)` combination. The pair at list position
/// `p` uses seed `settings.seed + p`. Output is ordered by time, then pair.
pub fn discord_series(
    samples: &[(f64, StateVector)],
    pairs: &[Pair],
    settings: &BasinHoppingSettings,
    policy: &TruncationPolicy,
    exec: Execution,
) -> Result<Vec<DiscordSample>> {
    settings.validate()?;
    policy.validate()?;
    let np = pairs.len();
    map_indices(samples.len() * np, exec, |k| {
        let (t, state) = &samples[k / np];
        let p = k % np;
        let s = settings.with_seed(settings.seed.wrapping_add(p as u64));
        let (result, retained_trace) = pair_discord(state, pairs[p], &s, policy)?;
        Ok(DiscordSample {
            t: *t,
            pair: pairs[p],
            result,
            retained_trace,
        })
    })
    .into_iter()
    .collect()
}
