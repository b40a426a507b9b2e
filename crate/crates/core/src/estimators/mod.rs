//! Least squares (LSE) and approximate least squares (ALSE) estimation.
//!
//! The LSE profiles the amplitudes out of the residual sum of squares and
//! minimizes the profile over `(θ1, θ2)` per component. The ALSE maximizes
//! the chirp periodogram and reads the amplitudes off projection sums.
//! Multi-component ALSE runs one component at a time on the residual of the
//! previous fits; multi-component LSE refines all frequency pairs jointly.

mod multi;
mod search;
mod single;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{phase, time_of, ChirpComponent, SampleSeries};
use crate::optim::SimplexConfig;

pub use multi::estimate_multi;
pub use single::{alse_single, lse_single};

/// Largest accepted condition number of `XᵀX`.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "LSE")]
    Lse,
    #[serde(rename = "ALSE")]
    Alse,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lse => "LSE",
            Method::Alse => "ALSE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lse" => Ok(Method::Lse),
            "alse" => Ok(Method::Alse),
            other => Err(Error::InvalidParameter(format!(
                "unknown method {other:?} (expected lse or alse)"
            ))),
        }
    }
}

/// Settings of the blind periodogram scan.
///
/// `θ1` is scanned on the Fourier grid of a zero-padded FFT of length
/// `next_pow2(theta1_oversample · n)`. `θ2` is scanned on
/// `(0, theta2_upper]` with spacing `theta2_spacing / n²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlindSearch {
    pub theta1_oversample: usize,
    pub theta2_spacing: f64,
    pub theta2_upper: f64,
    pub top_m: usize,
}

impl Default for BlindSearch {
    fn default() -> Self {
        Self {
            theta1_oversample: 8,
            theta2_spacing: 4.0,
            theta2_upper: PI / 2.0,
            top_m: 5,
        }
    }
}

impl BlindSearch {
    pub fn validate(&self) -> Result<()> {
        if self.theta1_oversample < 2 {
            return Err(Error::InvalidParameter(
                "theta1_oversample must be at least 2".into(),
            ));
        }
        if !(self.theta2_spacing > 0.0 && self.theta2_spacing.is_finite()) {
            return Err(Error::InvalidParameter(
                "theta2_spacing must be positive".into(),
            ));
        }
        if !(self.theta2_upper > 0.0 && self.theta2_upper < PI) {
            return Err(Error::InvalidParameter(
                "theta2_upper must lie in (0, π)".into(),
            ));
        }
        if self.top_m == 0 {
            return Err(Error::InvalidParameter("top_m must be positive".into()));
        }
        Ok(())
    }
}

/// Where the simplex refinement starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Periodogram grid scan followed by refinement of the best cells.
    Blind(BlindSearch),
    /// Explicit `(θ1, θ2)` start per component, in component order.
    Window(Vec<(f64, f64)>),
}

impl Init {
    pub fn label(&self) -> &'static str {
        match self {
            Init::Blind(_) => "blind",
            Init::Window(_) => "window",
        }
    }
}

/// Initialization plus simplex settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub init: Init,
    pub simplex: SimplexConfig,
    /// Extra simplex runs restarted from the previous optimum.
    pub restarts: usize,
    /// Window mode first evaluates a `window_scan × window_scan` lattice
    /// spanning `±π/n` and `±π/n²` around each start and refines from the
    /// best lattice point. `0` disables the scan.
    pub window_scan: usize,
}

impl SearchConfig {
    pub fn blind() -> Self {
        Self::with_init(Init::Blind(BlindSearch::default()))
    }

    pub fn window(starts: Vec<(f64, f64)>) -> Self {
        Self::with_init(Init::Window(starts))
    }

    pub fn with_init(init: Init) -> Self {
        Self {
            init,
            simplex: SimplexConfig::default(),
            restarts: 2,
            window_scan: 5,
        }
    }
}

/// Optimizer report for one refinement stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub start: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub init_mode: String,
    pub converged: bool,
    pub stages: Vec<StageReport>,
}

/// Estimated components with the method that produced them.
///
/// `objective_value` is the profiled residual sum of squares for the LSE and
/// the maximized periodogram (summed over stages) for the ALSE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    pub method: Method,
    pub components: Vec<ChirpComponent>,
    #[serde(rename = "objective")]
    pub objective_value: f64,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    pub fn converged(&self) -> bool {
        self.diagnostics.converged
    }
}

/// Profiled residual sum of squares and its minimizing amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileFit {
    pub value: f64,
    pub amplitudes: (f64, f64),
}

pub(crate) fn check_theta(theta: (f64, f64)) -> Result<()> {
    crate::model::check_open_interval("theta1", theta.0)?;
    crate::model::check_open_interval("theta2", theta.1)
}

#[inline]
pub(crate) fn in_range(theta: (f64, f64)) -> bool {
    theta.0 > 0.0 && theta.0 < PI && theta.1 > 0.0 && theta.1 < PI
}

/// `X(θ)`: row `t` is `(cos φ_t, sin φ_t)` with `φ_t = θ1 t + θ2 t²`.
pub fn design_matrix(theta: (f64, f64), n: usize) -> Result<DMatrix<f64>> {
    check_theta(theta)?;
    Ok(DMatrix::from_fn(n, 2, |i, j| {
        let (s, c) = phase(theta.0, theta.1, time_of(i)).sin_cos();
        if j == 0 {
            c
        } else {
            s
        }
    }))
}

/// `Yᵀ(I − P_X)Y` at `θ` together with `(XᵀX)⁻¹XᵀY`.
pub fn profile_rss(theta: (f64, f64), y: &SampleSeries) -> Result<ProfileFit> {
    check_theta(theta)?;
    profile_rss_raw(theta, y.values())
}

pub(crate) fn profile_rss_raw(theta: (f64, f64), y: &[f64]) -> Result<ProfileFit> {
    let mut basis = Vec::with_capacity(y.len());
    let (mut scc, mut scs, mut sss, mut scy, mut ssy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let (s, c) = phase(theta.0, theta.1, time_of(i)).sin_cos();
        scc += c * c;
        scs += c * s;
        sss += s * s;
        scy += c * v;
        ssy += s * v;
        basis.push((c, s));
    }
    let half_trace = 0.5 * (scc + sss);
    let radius = (0.25 * (scc - sss).powi(2) + scs * scs).sqrt();
    let lmax = half_trace + radius;
    let det = scc * sss - scs * scs;
    let lmin = if lmax > 0.0 { det / lmax } else { 0.0 };
    let condition = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::DegenerateDesign { condition });
    }
    let a = (sss * scy - scs * ssy) / det;
    let b = (scc * ssy - scs * scy) / det;
    let value = y
        .iter()
        .zip(&basis)
        .map(|(v, (c, s))| {
            let r = v - a * c - b * s;
            r * r
        })
        .sum();
    Ok(ProfileFit {
        value,
        amplitudes: (a, b),
    })
}

/// Profiled residual sum of squares for several components at once, using
/// the stacked design `[X(θ_1) … X(θ_p)]`.
pub fn profile_rss_joint(
    thetas: &[(f64, f64)],
    y: &SampleSeries,
) -> Result<(f64, Vec<(f64, f64)>)> {
    for &th in thetas {
        check_theta(th)?;
    }
    profile_rss_joint_raw(thetas, y.values())
}

pub(crate) fn profile_rss_joint_raw(
    thetas: &[(f64, f64)],
    y: &[f64],
) -> Result<(f64, Vec<(f64, f64)>)> {
    if thetas.is_empty() {
        return Err(Error::Empty("no components"));
    }
    let n = y.len();
    let q = 2 * thetas.len();
    let mut x = DMatrix::<f64>::zeros(n, q);
    for (k, th) in thetas.iter().enumerate() {
        for i in 0..n {
            let (s, c) = phase(th.0, th.1, time_of(i)).sin_cos();
            x[(i, 2 * k)] = c;
            x[(i, 2 * k + 1)] = s;
        }
    }
    let yv = DVector::from_column_slice(y);
    let gram = x.tr_mul(&x);
    let eig = gram.clone().symmetric_eigenvalues();
    let lmax = eig.max();
    let lmin = eig.min();
    let condition = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::DegenerateDesign { condition });
    }
    let rhs = x.tr_mul(&yv);
    let coef = gram
        .cholesky()
        .ok_or(Error::DegenerateDesign { condition })?
        .solve(&rhs);
    let resid = yv - &x * &coef;
    let amps = (0..thetas.len())
        .map(|k| (coef[2 * k], coef[2 * k + 1]))
        .collect();
    Ok((resid.norm_squared(), amps))
}

/// `I(θ) = (2/n)|Σ_t y(t) e^{−i(θ1 t + θ2 t²)}|²`.
pub fn periodogram(y: &SampleSeries, theta: (f64, f64)) -> f64 {
    periodogram_raw(theta, y.values())
}

pub(crate) fn periodogram_raw(theta: (f64, f64), y: &[f64]) -> f64 {
    let (c, s) = projection_sums(theta, y);
    2.0 / y.len() as f64 * (c * c + s * s)
}

#[inline]
fn projection_sums(theta: (f64, f64), y: &[f64]) -> (f64, f64) {
    y.iter().enumerate().fold((0.0, 0.0), |(c, s), (i, &v)| {
        let (si, ci) = phase(theta.0, theta.1, time_of(i)).sin_cos();
        (c + v * ci, s + v * si)
    })
}

/// Projection amplitudes `((2/n)Σ y cos φ_t, (2/n)Σ y sin φ_t)`.
pub fn alse_amplitudes(y: &SampleSeries, theta: (f64, f64)) -> (f64, f64) {
    alse_amplitudes_raw(theta, y.values())
}

pub(crate) fn alse_amplitudes_raw(theta: (f64, f64), y: &[f64]) -> (f64, f64) {
    let (c, s) = projection_sums(theta, y);
    let k = 2.0 / y.len() as f64;
    (k * c, k * s)
}
