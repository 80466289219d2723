use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Basin-hopping hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasinHoppingSettings {
    pub iterations: usize,
    /// Half-width of the uniform per-angle perturbation, in radians.
    pub step_size: f64,
    pub temperature: f64,
    pub seed: u64,
    /// Simplex convergence tolerance on both the function values and the
    /// vertex spread.
    pub local_tol: f64,
}

impl Default for BasinHoppingSettings {
    fn default() -> Self {
        BasinHoppingSettings {
            iterations: 100,
            step_size: 0.5,
            temperature: 1.0,
            seed: 0,
            local_tol: 1e-8,
        }
    }
}

impl BasinHoppingSettings {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidArgument(
                "basin hopping needs at least one iteration".into(),
            ));
        }
        for (name, v) in [
            ("step_size", self.step_size),
            ("temperature", self.temperature),
            ("local_tol", self.local_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "basin hopping {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        BasinHoppingSettings { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// False when the evaluation budget ran out before the tolerance was met.
    pub converged: bool,
    pub evaluations: usize,
}

/// Nelder–Mead simplex search with dimension-adapted coefficients
/// (Gao and Han, 2012): reflection 1, expansion 1 + 2/n, contraction
/// ¾ − 1/(2n) and shrink 1 − 1/n. In two dimensions these reduce to the
/// classic (1, 2, ½, ½).
///
/// The initial simplex offsets each coordinate of `x0` by `initial_step`.
/// Stops when both the spread of function values and the largest vertex
/// offset from the best vertex are at most `tol`, or after `200·n`
/// iterations.
pub fn nelder_mead(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], initial_step: f64, tol: f64) -> LocalMinimum {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let value = eval(x0, &mut evaluations);
        return LocalMinimum {
            x: Vec::new(),
            value,
            converged: true,
            evaluations,
        };
    }
    let mut sim: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    sim.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += initial_step;
        sim.push(v);
    }
    let mut fs: Vec<f64> = sim.iter().map(|x| eval(x, &mut evaluations)).collect();
    let nf = n as f64;
    let (expand, contract, shrink_by) = (1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let max_iter = 200 * n;
    let max_evals = 200 * n;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut converged = false;
    let mut iter = 0;

    loop {
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        let best = order[0];
        let spread_f = order[1..].iter().map(|&i| (fs[i] - fs[best]).abs()).fold(0.0, f64::max);
        let spread_x = order[1..]
            .iter()
            .flat_map(|&i| sim[i].iter().zip(&sim[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread_f <= tol && spread_x <= tol {
            converged = true;
            break;
        }
        if iter >= max_iter || evaluations >= max_evals {
            break;
        }
        iter += 1;

        let worst = order[n];
        let second_worst = order[n - 1];
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&sim[i]) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64, out: &mut [f64], c: &[f64], w: &[f64]| {
            for ((o, &ci), &wi) in out.iter_mut().zip(c).zip(w) {
                *o = ci + t * (ci - wi);
            }
        };
        along(1.0, &mut trial, &centroid, &sim[worst]);
        let fr = eval(&trial, &mut evaluations);
        let mut shrink = false;
        if fr < fs[best] {
            along(expand, &mut trial2, &centroid, &sim[worst]);
            let fe = eval(&trial2, &mut evaluations);
            if fe < fr {
                sim[worst].copy_from_slice(&trial2);
                fs[worst] = fe;
            } else {
                sim[worst].copy_from_slice(&trial);
                fs[worst] = fr;
            }
        } else if fr < fs[second_worst] {
            sim[worst].copy_from_slice(&trial);
            fs[worst] = fr;
        } else if fr < fs[worst] {
            along(contract, &mut trial2, &centroid, &sim[worst]);
            let fc = eval(&trial2, &mut evaluations);
            if fc <= fr {
                sim[worst].copy_from_slice(&trial2);
                fs[worst] = fc;
            } else {
                shrink = true;
            }
        } else {
            along(-contract, &mut trial2, &centroid, &sim[worst]);
            let fcc = eval(&trial2, &mut evaluations);
            if fcc < fs[worst] {
                sim[worst].copy_from_slice(&trial2);
                fs[worst] = fcc;
            } else {
                shrink = true;
            }
        }
        if shrink {
            let anchor = sim[best].clone();
            for &i in &order[1..] {
                for (x, a) in sim[i].iter_mut().zip(&anchor) {
                    *x = a + shrink_by * (*x - a);
                }
                fs[i] = eval(&sim[i], &mut evaluations);
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| fs[a].total_cmp(&fs[b]))
        .expect("non-empty simplex");
    LocalMinimum {
        x: sim[best].clone(),
        value: fs[best],
        converged,
        evaluations,
    }
}

/// Initial simplex edge for the local searches inside [`basin_hopping`].
const SIMPLEX_STEP: f64 = 0.1;

/// Global minimization by random perturbation, Nelder–Mead descent and
/// Metropolis acceptance. Returns the best local minimum seen; identical
/// settings give bit-identical results.
pub fn basin_hopping(
    mut objective: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    settings: &BasinHoppingSettings,
) -> Result<LocalMinimum> {
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let start = objective(x0);
    if !start.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "objective is not finite at the start point ({start})"
        )));
    }
    let mut current = nelder_mead(&mut objective, x0, SIMPLEX_STEP, settings.local_tol);
    let mut best = current.clone();
    let mut total_evals = current.evaluations + 1;
    let mut proposal = vec![0.0; x0.len()];
    for _ in 0..settings.iterations {
        for (p, x) in proposal.iter_mut().zip(&current.x) {
            *p = x + rng.random_range(-settings.step_size..=settings.step_size);
        }
        let trial = nelder_mead(&mut objective, &proposal, SIMPLEX_STEP, settings.local_tol);
        total_evals += trial.evaluations;
        let delta = trial.value - current.value;
        let accept = delta < 0.0 || rng.random::<f64>() < (-delta / settings.temperature).exp();
        if trial.value < best.value {
            best = trial.clone();
        }
        if accept {
            current = trial;
        }
    }
    best.evaluations = total_evals;
    Ok(best)
}
