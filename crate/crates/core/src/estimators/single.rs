use rayon::prelude::*;

use super::search::{blind_starts, chirp_steps, fold, refine, window_lattice_start, Refined};
use super::{
    alse_amplitudes_raw, check_theta, in_range, periodogram_raw, profile_rss_raw, Diagnostics,
    EstimationResult, Init, Method, SearchConfig, StageReport,
};
use crate::error::{Error, Result};
use crate::model::{ChirpComponent, SampleSeries};

/// A fitted `(θ1, θ2)` pair with the report of the stage that produced it.
pub(crate) struct StageFit {
    pub theta: (f64, f64),
    pub reports: Vec<StageReport>,
}

pub(crate) fn lse_objective(y: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x: &[f64]| {
        let th = (x[0], x[1]);
        if !in_range(th) {
            return f64::INFINITY;
        }
        profile_rss_raw(th, y).map_or(f64::INFINITY, |p| p.value)
    }
}

pub(crate) fn alse_objective(y: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x: &[f64]| {
        let th = (x[0], x[1]);
        if !in_range(th) {
            return f64::INFINITY;
        }
        -periodogram_raw(th, y)
    }
}

fn range_checked(theta: (f64, f64)) -> Result<(f64, f64)> {
    if in_range(theta) {
        Ok(theta)
    } else {
        Err(Error::OutOfRange(format!(
            "refined (theta1, theta2) = ({}, {}) left (0, π)",
            theta.0, theta.1
        )))
    }
}

/// Refines one `(θ1, θ2)` pair on `y`. Window mode starts from `window`;
/// blind mode refines every periodogram-grid start and keeps the best.
pub(crate) fn fit_stage<F>(
    y: &[f64],
    objective: F,
    init: &Init,
    window: Option<(f64, f64)>,
    cfg: &SearchConfig,
    label: &str,
) -> Result<StageFit>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let steps = chirp_steps(y.len());
    let refined: Vec<Refined> = match init {
        Init::Window(_) => {
            let start = window.ok_or_else(|| {
                Error::InvalidParameter("window init needs one start per component".into())
            })?;
            check_theta(start)?;
            let start = window_lattice_start(&objective, start, y.len(), cfg.window_scan);
            vec![refine(
                &objective,
                &[start.0, start.1],
                &steps,
                cfg,
                label.to_string(),
            )?]
        }
        Init::Blind(blind) => {
            let starts = blind_starts(y, blind)?;
            starts
                .par_iter()
                .enumerate()
                .map(|(i, s)| {
                    refine(
                        &objective,
                        &[s.theta.0, s.theta.1],
                        &steps,
                        cfg,
                        format!("{label}/start{}", i + 1),
                    )
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut reports = Vec::with_capacity(refined.len());
    let mut best: Option<(f64, (f64, f64))> = None;
    for r in refined {
        let th = (r.point[0], r.point[1]);
        if best.is_none_or(|(v, _)| r.value < v) {
            best = Some((r.value, th));
        }
        reports.push(r.report);
    }
    let (_, theta) = best.ok_or(Error::Empty("no refinement starts"))?;
    let theta = match init {
        Init::Blind(_) => fold(theta),
        Init::Window(_) => theta,
    };
    Ok(StageFit {
        theta: range_checked(theta)?,
        reports,
    })
}

pub(crate) fn diagnostics(init: &Init, stages: Vec<StageReport>) -> Diagnostics {
    Diagnostics {
        init_mode: init.label().to_string(),
        converged: stages.iter().all(|s| s.converged),
        stages,
    }
}

fn window_start(init: &Init) -> Result<Option<(f64, f64)>> {
    match init {
        Init::Window(starts) if starts.len() != 1 => Err(Error::InvalidParameter(format!(
            "single-component window init needs 1 start, got {}",
            starts.len()
        ))),
        Init::Window(starts) => Ok(Some(starts[0])),
        Init::Blind(_) => Ok(None),
    }
}

/// Least squares estimate of a single chirp.
pub fn lse_single(y: &SampleSeries, search: &SearchConfig) -> Result<EstimationResult> {
    let v = y.values();
    let window = window_start(&search.init)?;
    let fit = fit_stage(v, lse_objective(v), &search.init, window, search, "lse")?;
    let profile = profile_rss_raw(fit.theta, v)?;
    let (a, b) = profile.amplitudes;
    Ok(EstimationResult {
        method: Method::Lse,
        components: vec![ChirpComponent::new(a, b, fit.theta.0, fit.theta.1)?],
        objective_value: profile.value,
        diagnostics: diagnostics(&search.init, fit.reports),
    })
}

/// Approximate least squares estimate of a single chirp.
pub fn alse_single(y: &SampleSeries, search: &SearchConfig) -> Result<EstimationResult> {
    let v = y.values();
    let window = window_start(&search.init)?;
    let fit = fit_stage(v, alse_objective(v), &search.init, window, search, "alse")?;
    let (a, b) = alse_amplitudes_raw(fit.theta, v);
    Ok(EstimationResult {
        method: Method::Alse,
        components: vec![ChirpComponent::new(a, b, fit.theta.0, fit.theta.1)?],
        objective_value: periodogram_raw(fit.theta, v),
        diagnostics: diagnostics(&search.init, fit.reports),
    })
}
