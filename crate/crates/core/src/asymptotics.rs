//! Asymptotic distribution of the least squares estimator.
//!
//! Centred estimates scaled by `D2⁻¹` converge to a symmetric α-stable law
//! whose characteristic function is `exp(−2^α σ^α τ_v)`, with
//! `v = Γ⁻¹ t` and `τ` the Cesàro limit of `|K_v(r)|^α`. This module
//! evaluates all of those pieces, the limiting Hessian `Γ` and the
//! trigonometric averages the limits rest on.

use nalgebra::{DMatrix, Matrix4, Vector4};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{phase, time_of, ChirpComponent, ChirpModel};

/// Default truncation point of the `τ` limit.
pub const DEFAULT_N_APPROX: usize = 100_000;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (1, 2], got {alpha}"
        )))
    }
}

fn check_amplitudes(a: f64, b: f64) -> Result<f64> {
    let rho2 = a * a + b * b;
    if rho2 > 0.0 && rho2.is_finite() {
        Ok(rho2)
    } else {
        Err(Error::InvalidParameter(format!(
            "A² + B² must be positive, got A={a}, B={b}"
        )))
    }
}

/// Exponents `e` with `D = diag(n^e)` for the `(A, B, θ1, θ2)` scalings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingExponents {
    pub d1: [f64; 4],
    pub d2: [f64; 4],
}

impl ScalingExponents {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let a = alpha;
        Ok(Self {
            d1: [-1.0 / a, -1.0 / a, -(1.0 + a) / a, -(1.0 + 2.0 * a) / a],
            d2: [
                -(a - 1.0) / a,
                -(a - 1.0) / a,
                -(2.0 * a - 1.0) / a,
                -(3.0 * a - 1.0) / a,
            ],
        })
    }
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        Err(Error::InvalidParameter("n must be at least 1".into()))
    } else {
        Ok(n as f64)
    }
}

/// Diagonal of `D1` (gradient scaling).
pub fn scaling_d1(n: usize, alpha: f64) -> Result<[f64; 4]> {
    let n = check_n(n)?;
    Ok(ScalingExponents::new(alpha)?.d1.map(|e| n.powf(e)))
}

/// Diagonal of `D2` (estimation-error scaling).
pub fn scaling_d2(n: usize, alpha: f64) -> Result<[f64; 4]> {
    let n = check_n(n)?;
    Ok(ScalingExponents::new(alpha)?.d2.map(|e| n.powf(e)))
}

/// `p` copies of a per-component diagonal, as used for `Δ1` and `Δ2`.
pub fn block_scaling(d: &[f64; 4], p: usize) -> Vec<f64> {
    (0..p).flat_map(|_| d.iter().copied()).collect()
}

/// Limit of the scaled Hessian `D2 Q″ D1`.
pub fn gamma_matrix(a: f64, b: f64) -> Result<Matrix4<f64>> {
    let r = check_amplitudes(a, b)?;
    #[rustfmt::skip]
    let g = Matrix4::new(
        1.0,       0.0,        b / 2.0,  b / 3.0,
        0.0,       1.0,       -a / 2.0, -a / 3.0,
        b / 2.0,  -a / 2.0,    r / 3.0,  r / 4.0,
        b / 3.0,  -a / 3.0,    r / 4.0,  r / 5.0,
    );
    Ok(g)
}

/// Closed-form `Γ⁻¹`.
pub fn gamma_inverse(a: f64, b: f64) -> Result<Matrix4<f64>> {
    let r = check_amplitudes(a, b)?;
    #[rustfmt::skip]
    let m = Matrix4::new(
        a * a + 9.0 * b * b, -8.0 * a * b,         -36.0 * b,  30.0 * b,
        -8.0 * a * b,         9.0 * a * a + b * b,  36.0 * a, -30.0 * a,
        -36.0 * b,            36.0 * a,             192.0,    -180.0,
        30.0 * b,            -30.0 * a,            -180.0,     180.0,
    );
    Ok(m / r)
}

/// Block-diagonal `Γ_G` over the components of `model`.
pub fn gamma_block(model: &ChirpModel) -> Result<DMatrix<f64>> {
    let p = model.p();
    let mut g = DMatrix::zeros(4 * p, 4 * p);
    for (k, c) in model.components().iter().enumerate() {
        g.view_mut((4 * k, 4 * k), (4, 4))
            .copy_from(&gamma_matrix(c.a, c.b)?);
    }
    Ok(g)
}

/// `K_t(r)` at component `xi` for a series of length `n`.
pub fn k_function(t4: &[f64; 4], r: usize, n: usize, xi: &ChirpComponent) -> f64 {
    let (s, c) = phase(xi.theta1, xi.theta2, r as f64).sin_cos();
    let g = xi.a * s - xi.b * c;
    let u = r as f64 / n as f64;
    -t4[0] * c - t4[1] * s + u * t4[2] * g + u * u * t4[3] * g
}

const TAU_CHUNK: usize = 4096;

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (lo, hi) = v.split_at(v.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// `(1/N) Σ_{r=1}^{N} |K_t(r)|^α` with `N = n_approx`.
///
/// The sum is evaluated in fixed chunks with pairwise reduction, so the
/// result does not depend on the thread count.
pub fn tau(t4: &[f64; 4], xi: &ChirpComponent, alpha: f64, n_approx: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 2], got {alpha}"
        )));
    }
    if n_approx < 1000 {
        return Err(Error::InvalidParameter(format!(
            "n_approx must be at least 1000, got {n_approx}"
        )));
    }
    let chunks: Vec<f64> = (0..n_approx.div_ceil(TAU_CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * TAU_CHUNK + 1;
            let hi = ((c + 1) * TAU_CHUNK).min(n_approx);
            let vals: Vec<f64> = (lo..=hi)
                .map(|r| k_function(t4, r, n_approx, xi).abs().powf(alpha))
                .collect();
            pairwise_sum(&vals)
        })
        .collect();
    Ok(pairwise_sum(&chunks) / n_approx as f64)
}

/// `τ` at two truncation points and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauReport {
    pub value: f64,
    pub coarse: f64,
    pub n_approx: usize,
    pub n_coarse: usize,
    pub relative_gap: f64,
}

/// `τ` at `n_approx` with a self-consistency check against `n_approx / 10`.
pub fn tau_with_diagnostic(
    t4: &[f64; 4],
    xi: &ChirpComponent,
    alpha: f64,
    n_approx: usize,
) -> Result<TauReport> {
    let value = tau(t4, xi, alpha, n_approx)?;
    let n_coarse = (n_approx / 10).max(1000);
    let coarse = tau(t4, xi, alpha, n_coarse)?;
    let relative_gap = if value > 0.0 {
        (value - coarse).abs() / value
    } else {
        (value - coarse).abs()
    };
    Ok(TauReport {
        value,
        coarse,
        n_approx,
        n_coarse,
        relative_gap,
    })
}

/// `v = Γ⁻¹ t`.
pub fn v_transform(t4: &[f64; 4], a: f64, b: f64) -> Result<[f64; 4]> {
    let v = gamma_inverse(a, b)? * Vector4::from_column_slice(t4);
    Ok([v[0], v[1], v[2], v[3]])
}

/// Limiting characteristic function of `D2⁻¹`-scaled LSE errors of one
/// component, evaluated at `t4`.
pub fn limiting_cf(
    t4: &[f64; 4],
    xi: &ChirpComponent,
    alpha: f64,
    sigma: f64,
    n_approx: usize,
) -> Result<f64> {
    check_alpha(alpha)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let v = v_transform(t4, xi.a, xi.b)?;
    let tv = tau(&v, xi, alpha, n_approx)?;
    Ok((-(2f64.powf(alpha)) * sigma.powf(alpha) * tv).exp())
}

/// Joint limiting characteristic function for a multi-component model at
/// the stacked argument `t` of length `4p`, using `v = Γ_G⁻¹ t`.
pub fn limiting_cf_multi(
    t: &[f64],
    model: &ChirpModel,
    alpha: f64,
    sigma: f64,
    n_approx: usize,
) -> Result<f64> {
    check_alpha(alpha)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let p = model.p();
    if t.len() != 4 * p {
        return Err(Error::LengthMismatch {
            expected: 4 * p,
            actual: t.len(),
        });
    }
    let mut inv = DMatrix::zeros(4 * p, 4 * p);
    for (k, c) in model.components().iter().enumerate() {
        inv.view_mut((4 * k, 4 * k), (4, 4))
            .copy_from(&gamma_inverse(c.a, c.b)?);
    }
    let v = inv * nalgebra::DVector::from_column_slice(t);
    let mut total = 0.0;
    for (k, c) in model.components().iter().enumerate() {
        let vk = [v[4 * k], v[4 * k + 1], v[4 * k + 2], v[4 * k + 3]];
        total += tau(&vk, c, alpha, n_approx)?;
    }
    Ok((-(2f64.powf(alpha)) * sigma.powf(alpha) * total).exp())
}

/// One trigonometric average with its limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigLimitEntry {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Trigonometric averages of `φ_t = θ1 t + θ2 t²` weighted by `t^k`.
///
/// Squares and the cross product are normalized by `n^{k+1}`; plain sums by
/// `n^{k+1}` and by `n^{k+1/2}`.
pub fn trig_limit_check(theta: (f64, f64), n: usize, k: u32) -> Result<Vec<TrigLimitEntry>> {
    crate::model::check_open_interval("theta1", theta.0)?;
    crate::model::check_open_interval("theta2", theta.1)?;
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 100, got {n}"
        )));
    }
    if k > 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be 0, 1 or 2, got {k}"
        )));
    }
    let mut acc = [0.0f64; 5];
    for i in 0..n {
        let t = time_of(i);
        let w = t.powi(k as i32);
        let (s, c) = phase(theta.0, theta.1, t).sin_cos();
        acc[0] += w * c * c;
        acc[1] += w * s * s;
        acc[2] += w * c * s;
        acc[3] += w * c;
        acc[4] += w * s;
    }
    let nf = n as f64;
    let full = nf.powi(k as i32 + 1);
    let half = nf.powf(k as f64 + 0.5);
    let sq = 1.0 / (2.0 * (k as f64 + 1.0));
    let entry = |name: &str, value: f64, limit: f64| TrigLimitEntry {
        name: name.to_string(),
        value,
        limit,
        gap: (value - limit).abs(),
    };
    Ok(vec![
        entry("cos2", acc[0] / full, sq),
        entry("sin2", acc[1] / full, sq),
        entry("cos_sin", acc[2] / full, 0.0),
        entry("cos", acc[3] / full, 0.0),
        entry("sin", acc[4] / full, 0.0),
        entry("cos_sqrt_scaled", acc[3] / half, 0.0),
        entry("sin_sqrt_scaled", acc[4] / half, 0.0),
    ])
}

/// Analytic gradient of `Q(ξ) = Σ_t (y(t) − μ_t(ξ))²` in `(A, B, θ1, θ2)`.
pub fn gradient(xi: &ChirpComponent, y: &[f64]) -> Vector4<f64> {
    let mut g = Vector4::zeros();
    for (i, &v) in y.iter().enumerate() {
        let t = time_of(i);
        let (s, c) = phase(xi.theta1, xi.theta2, t).sin_cos();
        let resid = v - (xi.a * c + xi.b * s);
        let gg = xi.a * s - xi.b * c;
        let jac = Vector4::new(c, s, -t * gg, -t * t * gg);
        g -= 2.0 * resid * jac;
    }
    g
}

/// Analytic Hessian `Q″(ξ) = 2 Σ_t (J Jᵀ − (y − μ) ∇²μ)`.
pub fn hessian(xi: &ChirpComponent, y: &[f64]) -> Matrix4<f64> {
    let mut h = Matrix4::zeros();
    for (i, &v) in y.iter().enumerate() {
        let t = time_of(i);
        let t2 = t * t;
        let (s, c) = phase(xi.theta1, xi.theta2, t).sin_cos();
        let resid = v - (xi.a * c + xi.b * s);
        let g = xi.a * s - xi.b * c;
        let hh = xi.a * c + xi.b * s;
        let jac = Vector4::new(c, s, -t * g, -t2 * g);
        #[rustfmt::skip]
        let second = Matrix4::new(
            0.0,     0.0,    -t * s,       -t2 * s,
            0.0,     0.0,     t * c,        t2 * c,
            -t * s,  t * c,  -t2 * hh,     -t2 * t * hh,
            -t2 * s, t2 * c, -t2 * t * hh, -t2 * t2 * hh,
        );
        h += 2.0 * (jac * jac.transpose() - resid * second);
    }
    h
}

/// `D2 Q″ D1` on noiseless data with the `α = 2` scalings.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianCheck {
    pub scaled: Matrix4<f64>,
    pub gamma: Matrix4<f64>,
    pub max_gap: f64,
}

pub fn hessian_limit_check(xi: &ChirpComponent, n: usize) -> Result<HessianCheck> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 100, got {n}"
        )));
    }
    let gamma = gamma_matrix(xi.a, xi.b)?;
    let y: Vec<f64> = (0..n).map(|i| xi.value_at(time_of(i))).collect();
    let h = hessian(xi, &y);
    let d1 = Matrix4::from_diagonal(&Vector4::from(scaling_d1(n, 2.0)?));
    let d2 = Matrix4::from_diagonal(&Vector4::from(scaling_d2(n, 2.0)?));
    let scaled = d2 * h * d1;
    let max_gap = (scaled - gamma).abs().max();
    Ok(HessianCheck {
        scaled,
        gamma,
        max_gap,
    })
}
