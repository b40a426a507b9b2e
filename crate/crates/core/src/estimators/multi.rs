use super::search::{chirp_steps, refine};
use super::single::{alse_objective, alse_single, diagnostics, fit_stage, lse_single};
use super::{
    alse_amplitudes_raw, in_range, periodogram_raw, profile_rss_joint_raw, EstimationResult, Init,
    Method, SearchConfig,
};
use crate::error::{Error, Result};
use crate::model::{phase, time_of, ChirpComponent, SampleSeries};

fn sort_by_power(components: &mut [ChirpComponent]) {
    components.sort_by(|a, b| b.power().total_cmp(&a.power()));
}

/// Estimates `p` chirp components.
///
/// ALSE: component `k` maximizes the periodogram of `y` minus the fitted
/// components `1..k`; final amplitudes are projection sums on `y` itself.
/// LSE: starts from the sequential ALSE and refines all `p` frequency pairs
/// jointly on the profiled residual sum of squares.
///
/// Components come back ordered by decreasing `A² + B²`.
pub fn estimate_multi(
    y: &SampleSeries,
    p: usize,
    method: Method,
    search: &SearchConfig,
) -> Result<EstimationResult> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    if y.n() < 8 * p {
        return Err(Error::InvalidParameter(format!(
            "n = {} is too small for {p} components (need n >= {})",
            y.n(),
            8 * p
        )));
    }
    if let Init::Window(starts) = &search.init {
        if starts.len() != p {
            return Err(Error::InvalidParameter(format!(
                "window init needs {p} starts, got {}",
                starts.len()
            )));
        }
    }
    if p == 1 {
        return match method {
            Method::Lse => lse_single(y, search),
            Method::Alse => alse_single(y, search),
        };
    }

    let alse = sequential_alse(y, p, search)?;
    match method {
        Method::Alse => Ok(alse),
        Method::Lse => joint_lse(y, &alse, search),
    }
}

fn sequential_alse(y: &SampleSeries, p: usize, search: &SearchConfig) -> Result<EstimationResult> {
    let original = y.values();
    let mut residual = original.to_vec();
    let mut thetas = Vec::with_capacity(p);
    let mut reports = Vec::new();
    let mut objective = 0.0;
    for k in 0..p {
        let window = match &search.init {
            Init::Window(starts) => Some(starts[k]),
            Init::Blind(_) => None,
        };
        let label = format!("alse[{}]", k + 1);
        let fit = fit_stage(
            &residual,
            alse_objective(&residual),
            &search.init,
            window,
            search,
            &label,
        )?;
        objective += periodogram_raw(fit.theta, &residual);
        let (a, b) = alse_amplitudes_raw(fit.theta, &residual);
        for (i, r) in residual.iter_mut().enumerate() {
            let (s, c) = phase(fit.theta.0, fit.theta.1, time_of(i)).sin_cos();
            *r -= a * c + b * s;
        }
        thetas.push(fit.theta);
        reports.extend(fit.reports);
    }
    let mut components = thetas
        .iter()
        .map(|&th| {
            let (a, b) = alse_amplitudes_raw(th, original);
            ChirpComponent::new(a, b, th.0, th.1)
        })
        .collect::<Result<Vec<_>>>()?;
    sort_by_power(&mut components);
    Ok(EstimationResult {
        method: Method::Alse,
        components,
        objective_value: objective,
        diagnostics: diagnostics(&search.init, reports),
    })
}

fn joint_lse(
    y: &SampleSeries,
    alse: &EstimationResult,
    search: &SearchConfig,
) -> Result<EstimationResult> {
    let v = y.values();
    let p = alse.components.len();
    let start: Vec<f64> = alse
        .components
        .iter()
        .flat_map(|c| [c.theta1, c.theta2])
        .collect();
    let steps: Vec<f64> = (0..p).flat_map(|_| chirp_steps(v.len())).collect();
    let objective = |x: &[f64]| {
        let thetas: Vec<(f64, f64)> = x.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        if !thetas.iter().all(|&th| in_range(th)) {
            return f64::INFINITY;
        }
        profile_rss_joint_raw(&thetas, v).map_or(f64::INFINITY, |(value, _)| value)
    };
    let refined = refine(objective, &start, &steps, search, "lse-joint".to_string())?;
    let thetas: Vec<(f64, f64)> = refined
        .point
        .chunks_exact(2)
        .map(|c| (c[0], c[1]))
        .collect();
    if let Some(th) = thetas.iter().find(|&&th| !in_range(th)) {
        return Err(Error::OutOfRange(format!(
            "refined (theta1, theta2) = ({}, {}) left (0, π)",
            th.0, th.1
        )));
    }
    let (value, amps) = profile_rss_joint_raw(&thetas, v)?;
    let mut components = thetas
        .iter()
        .zip(&amps)
        .map(|(th, ab)| ChirpComponent::new(ab.0, ab.1, th.0, th.1))
        .collect::<Result<Vec<_>>>()?;
    sort_by_power(&mut components);
    let mut stages = alse.diagnostics.stages.clone();
    stages.push(refined.report);
    Ok(EstimationResult {
        method: Method::Lse,
        components,
        objective_value: value,
        diagnostics: diagnostics(&search.init, stages),
    })
}
