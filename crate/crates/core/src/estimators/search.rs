use std::f64::consts::PI;

use rayon::prelude::*;

use super::{BlindSearch, SearchConfig, StageReport};
use crate::error::{Error, Result};
use crate::optim::{hit_order, nelder_mead_with_steps, DechirpScanner};

/// Grid cell of the blind periodogram scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Start {
    pub theta: (f64, f64),
    pub periodogram: f64,
}

/// `(θ1, θ2)` axes of the blind scan for a series of length `n`.
pub(crate) struct BlindGrid {
    pub n_freq: usize,
    pub theta2_step: f64,
    pub theta2_count: usize,
}

impl BlindGrid {
    pub fn new(n: usize, cfg: &BlindSearch) -> Result<Self> {
        cfg.validate()?;
        let n_freq = (cfg.theta1_oversample * n).next_power_of_two().max(4);
        let theta2_step = cfg.theta2_spacing / (n as f64 * n as f64);
        let theta2_count = (cfg.theta2_upper / theta2_step).floor() as usize;
        if theta2_count == 0 {
            return Err(Error::InvalidParameter(
                "theta2 scan is empty; decrease theta2_spacing".into(),
            ));
        }
        Ok(Self {
            n_freq,
            theta2_step,
            theta2_count,
        })
    }

    /// Number of interior `θ1` points `2πj/n_freq`, `j = 1..n_freq/2`.
    pub fn theta1_count(&self) -> usize {
        self.n_freq / 2 - 1
    }

    pub fn theta1(&self, j: usize) -> f64 {
        2.0 * PI * (j + 1) as f64 / self.n_freq as f64
    }

    pub fn theta2(&self, k: usize) -> f64 {
        (k + 1) as f64 * self.theta2_step
    }
}

fn keep_best(mut a: Vec<(f64, usize)>, mut b: Vec<(f64, usize)>, m: usize) -> Vec<(f64, usize)> {
    a.append(&mut b);
    a.sort_unstable_by(hit_order);
    a.truncate(m);
    a
}

/// The `top_m` cells with the largest periodogram, best first. Cells are
/// flattened row-major over `(θ1, θ2)` and ties go to the lower index.
pub(crate) fn blind_starts(y: &[f64], cfg: &BlindSearch) -> Result<Vec<Start>> {
    let grid = BlindGrid::new(y.len(), cfg)?;
    let n1 = grid.theta1_count();
    let n2 = grid.theta2_count;
    let m = cfg.top_m.min(n1 * n2);
    let best = (0..n2)
        .into_par_iter()
        .map_init(
            || {
                let scanner = DechirpScanner::new(grid.n_freq).expect("n_freq is a power of two");
                (scanner, Vec::new())
            },
            |(scanner, buf), k| -> Result<Vec<(f64, usize)>> {
                scanner.scan_into(y, grid.theta2(k), buf)?;
                let mut row: Vec<(f64, usize)> =
                    (0..n1).map(|j| (-buf[j + 1], j * n2 + k)).collect();
                if row.len() > m {
                    row.select_nth_unstable_by(m - 1, hit_order);
                    row.truncate(m);
                }
                Ok(row)
            },
        )
        .try_reduce(Vec::new, |a, b| Ok(keep_best(a, b, m)))?;
    Ok(best
        .into_iter()
        .map(|(v, idx)| Start {
            theta: (grid.theta1(idx / n2), grid.theta2(idx % n2)),
            periodogram: -v,
        })
        .collect())
}

/// Maps `(θ1, θ2)` with `θ2 > π/2` onto its twin `(π − θ1, π − θ2)`.
///
/// Because `t + t²` is even for integer `t`, the twin reproduces the same
/// samples with the sine amplitude negated.
pub(crate) fn fold(theta: (f64, f64)) -> (f64, f64) {
    if theta.1 > PI / 2.0 {
        (PI - theta.0, PI - theta.1)
    } else {
        theta
    }
}

/// Initial simplex steps for one `(θ1, θ2)` pair.
pub(crate) fn chirp_steps(n: usize) -> [f64; 2] {
    let n = n as f64;
    [1.0 / n, 1.0 / (n * n)]
}

pub(crate) struct Refined {
    pub point: Vec<f64>,
    pub value: f64,
    pub report: StageReport,
}

/// Best point of a `k × k` lattice spanning `±π/n` in `θ1` and `±π/n²` in
/// `θ2` around `start`. `start` itself wins ties and is returned for `k < 2`.
pub(crate) fn window_lattice_start<F>(f: &F, start: (f64, f64), n: usize, k: usize) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = (f(&[start.0, start.1]), start);
    if k < 2 {
        return best.1;
    }
    let h1 = PI / n as f64;
    let h2 = h1 / n as f64;
    let offset = |i: usize| -1.0 + 2.0 * i as f64 / (k - 1) as f64;
    for i in 0..k {
        for j in 0..k {
            let th = (start.0 + h1 * offset(i), start.1 + h2 * offset(j));
            let v = f(&[th.0, th.1]);
            if v < best.0 {
                best = (v, th);
            }
        }
    }
    best.1
}

/// Simplex minimization from `start`, restarted from each optimum with
/// steps shrunk tenfold while that still improves the objective.
pub(crate) fn refine<F>(
    f: F,
    start: &[f64],
    steps: &[f64],
    cfg: &SearchConfig,
    stage: String,
) -> Result<Refined>
where
    F: Fn(&[f64]) -> f64,
{
    let mut run = nelder_mead_with_steps(&f, start, steps, &cfg.simplex)?;
    let mut iterations = run.iterations;
    let mut evaluations = run.evaluations;
    let mut scale = 1.0;
    for _ in 0..cfg.restarts {
        scale *= 0.1;
        let small: Vec<f64> = steps.iter().map(|s| s * scale).collect();
        let next = nelder_mead_with_steps(&f, &run.point, &small, &cfg.simplex)?;
        iterations += next.iterations;
        evaluations += next.evaluations;
        let gain = run.value - next.value;
        let converged = next.converged;
        if next.value <= run.value {
            run = next;
        }
        run.converged = converged;
        if !(gain > cfg.simplex.f_tolerance * run.value.abs()) {
            break;
        }
    }
    Ok(Refined {
        report: StageReport {
            stage,
            start: start.to_vec(),
            iterations,
            evaluations,
            converged: run.converged,
            objective: run.value,
        },
        point: run.point,
        value: run.value,
    })
}
