use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rules and move coefficients for the downhill simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplexConfig {
    pub max_iterations: usize,
    /// Function-spread test: `f_worst - f_best <= f_tolerance * max(1, (|f_best| + |f_worst|) / 2)`.
    pub f_tolerance: f64,
    /// Diameter test: every vertex within this max-norm distance of the best one.
    /// Convergence needs both tests to pass.
    pub x_tolerance: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            f_tolerance: 1e-12,
            x_tolerance: 1e-10,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("simplex config: {what}")));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.f_tolerance >= 0.0) || !(self.x_tolerance >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if !(self.reflection > 0.0) {
            return bad("reflection must be > 0");
        }
        if !(self.expansion > 1.0) {
            return bad("expansion must be > 1");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Outcome of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexReport {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Default per-coordinate initial steps: `max(0.05·|x0_i|, 1e-4)`.
pub fn default_steps(x0: &[f64]) -> Vec<f64> {
    x0.iter().map(|x| (0.05 * x.abs()).max(1e-4)).collect()
}

/// Minimizes `f` from `x0` with the default initial simplex.
pub fn nelder_mead<F>(f: F, x0: &[f64], cfg: &SimplexConfig) -> Result<SimplexReport>
where
    F: Fn(&[f64]) -> f64,
{
    let steps = default_steps(x0);
    nelder_mead_with_steps(f, x0, &steps, cfg)
}

/// Minimizes `f` from `x0`; vertex `i + 1` of the initial simplex is `x0`
/// displaced by `steps[i]` along coordinate `i`.
///
/// Non-finite objective values rank as worst, so objectives may encode
/// bounds as `+∞`. `f(x0)` itself must be finite.
pub fn nelder_mead_with_steps<F>(
    f: F,
    x0: &[f64],
    steps: &[f64],
    cfg: &SimplexConfig,
) -> Result<SimplexReport>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    let d = x0.len();
    if d == 0 {
        return Err(Error::InvalidParameter("empty initial point".into()));
    }
    if steps.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            actual: steps.len(),
        });
    }
    if steps.iter().any(|s| !(s.is_finite() && *s != 0.0)) {
        return Err(Error::InvalidParameter(
            "initial steps must be finite and nonzero".into(),
        ));
    }

    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(Error::NonFiniteObjective);
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut values: Vec<f64> = Vec::with_capacity(d + 1);
    simplex.push(x0.to_vec());
    values.push(f0);
    for (i, step) in steps.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += step;
        values.push(eval(&v));
        simplex.push(v);
    }
    let mut evaluations = d + 1;
    let mut order: Vec<usize> = (0..=d).collect();
    let mut centroid = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let mut trial2 = vec![0.0; d];

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Stable sort keeps earlier vertices ahead on ties.
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d - 1];

        let f_best = values[best];
        let f_worst = values[worst];
        let f_scale = (0.5 * (f_best.abs() + f_worst.abs())).max(1.0);
        let f_spread_ok = f_worst - f_best <= cfg.f_tolerance * f_scale;
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_spread_ok && diameter <= cfg.x_tolerance {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= d as f64);

        // reflect
        for j in 0..d {
            trial[j] = centroid[j] + cfg.reflection * (centroid[j] - simplex[worst][j]);
        }
        let f_r = eval(&trial);
        evaluations += 1;

        if f_r < f_best {
            // expand
            for j in 0..d {
                trial2[j] = centroid[j] + cfg.expansion * (trial[j] - centroid[j]);
            }
            let f_e = eval(&trial2);
            evaluations += 1;
            if f_e < f_r {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_e;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second_worst] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_r;
            continue;
        }
        if f_r < f_worst {
            // outside contraction
            for j in 0..d {
                trial2[j] = centroid[j] + cfg.contraction * (trial[j] - centroid[j]);
            }
            let f_c = eval(&trial2);
            evaluations += 1;
            if f_c <= f_r {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_c;
                continue;
            }
        } else {
            // inside contraction
            for j in 0..d {
                trial2[j] = centroid[j] - cfg.contraction * (centroid[j] - simplex[worst][j]);
            }
            let f_c = eval(&trial2);
            evaluations += 1;
            if f_c < f_worst {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_c;
                continue;
            }
        }

        // shrink towards the best vertex
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for (x, a) in simplex[idx].iter_mut().zip(&anchor) {
                *x = a + cfg.shrink * (*x - a);
            }
            values[idx] = eval(&simplex[idx]);
            evaluations += 1;
        }
    }

    let best = order
        .iter()
        .copied()
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Ok(SimplexReport {
        point: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    })
}
