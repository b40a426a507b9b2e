//! Symmetric α-stable noise.
//!
//! Draws use the Chambers–Mallows–Stuck transform with zero skewness on top
//! of a ChaCha8 stream seeded per noise vector. A noise vector is a pure
//! function of `(alpha, sigma, seed, n)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law `SαS(σ)` with characteristic function `exp(-σ^α |t|^α)` plus the seed
/// of the stream that realizes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableNoiseSpec {
    pub alpha: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl StableNoiseSpec {
    pub fn new(alpha: f64, sigma: f64, seed: u64) -> Result<Self> {
        let spec = Self { alpha, sigma, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (1, 2], got {}",
                self.alpha
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Draws `n` i.i.d. `SαS(σ)` variates.
pub fn sample_sas(spec: &StableNoiseSpec, n: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Empty("noise length must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let alpha = spec.alpha;
    let inv_alpha = 1.0 / alpha;
    let tail_exp = (1.0 - alpha) / alpha;
    Ok((0..n)
        .map(|_| {
            // V ~ U(-π/2, π/2), W ~ Exp(1)
            let u: f64 = rng.sample(Open01);
            let v = std::f64::consts::PI * (u - 0.5);
            let w: f64 = rng.sample(Exp1);
            let x = (alpha * v).sin() / v.cos().powf(inv_alpha)
                * ((v * (1.0 - alpha)).cos() / w).powf(tail_exp);
            spec.sigma * x
        })
        .collect())
}

/// `(1/n) Σ_j exp(i t x_j)`.
pub fn empirical_cf(sample: &[f64], t: f64) -> Result<Complex64> {
    if sample.is_empty() {
        return Err(Error::Empty("empirical_cf needs a nonempty sample"));
    }
    let (re, im) = sample.iter().fold((0.0, 0.0), |(re, im), &x| {
        let (s, c) = (t * x).sin_cos();
        (re + c, im + s)
    });
    let n = sample.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}

/// `exp(-σ^α |t|^α)`.
pub fn theoretical_cf(alpha: f64, sigma: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 2], got {alpha}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    Ok((-(sigma.powf(alpha)) * t.abs().powf(alpha)).exp())
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a key path
/// (for example cell identifiers and a replication index).
pub fn stream_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(master), |acc, &k| {
        splitmix64(acc ^ splitmix64(k))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: f64, sigma: f64, seed: u64) -> StableNoiseSpec {
        StableNoiseSpec::new(alpha, sigma, seed).unwrap()
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(StableNoiseSpec::new(1.0, 1.0, 0).is_err());
        assert!(StableNoiseSpec::new(2.1, 1.0, 0).is_err());
        assert!(StableNoiseSpec::new(1.5, 0.0, 0).is_err());
        assert!(StableNoiseSpec::new(1.5, -1.0, 0).is_err());
        assert!(StableNoiseSpec::new(2.0, 1.0, 0).is_ok());
        let bad = StableNoiseSpec {
            alpha: 0.5,
            sigma: 1.0,
            seed: 1,
        };
        assert!(sample_sas(&bad, 10).is_err());
        assert!(sample_sas(&spec(1.5, 1.0, 1), 0).is_err());
    }

    #[test]
    fn gaussian_endpoint_has_variance_two_sigma_squared() {
        let x = sample_sas(&spec(2.0, 1.0, 11), 100_000).unwrap();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 2.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn median_is_near_zero() {
        let mut x = sample_sas(&spec(1.5, 0.1, 5), 100_000).unwrap();
        x.sort_by(|a, b| a.total_cmp(b));
        let med = 0.5 * (x[49_999] + x[50_000]);
        assert!(med.abs() < 0.01, "median {med}");
    }

    #[test]
    fn empirical_cf_matches_theory() {
        for &(alpha, sigma) in &[(1.5, 0.1), (1.5, 1.0), (1.7, 1.0), (1.9, 0.1), (2.0, 1.0)] {
            let x = sample_sas(&spec(alpha, sigma, 99), 10_000).unwrap();
            for &t in &[0.5, 1.0, 2.0] {
                let emp = empirical_cf(&x, t).unwrap();
                let th = theoretical_cf(alpha, sigma, t).unwrap();
                assert!((emp - Complex64::new(th, 0.0)).norm() < 0.05);
                assert!(emp.im.abs() < 4.0 / (x.len() as f64).sqrt());
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = spec(1.7, 0.3, 42);
        let a = sample_sas(&s, 1000).unwrap();
        let b = sample_sas(&s, 1000).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = sample_sas(&spec(1.7, 0.3, 43), 1000).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stable_under_summation() {
        let alpha = 1.5;
        let sigma = 0.7;
        let n = 100_000;
        let x1 = sample_sas(&spec(alpha, sigma, 1), n).unwrap();
        let x2 = sample_sas(&spec(alpha, sigma, 2), n).unwrap();
        let scale = 2f64.powf(1.0 / alpha);
        let s: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| (a + b) / scale).collect();
        for &t in &[0.5, 1.0, 2.0] {
            let d = (empirical_cf(&s, t).unwrap() - empirical_cf(&x1, t).unwrap()).norm();
            assert!(d < 0.05);
            let th = theoretical_cf(alpha, sigma, t).unwrap();
            assert!((empirical_cf(&s, t).unwrap().re - th).abs() < 0.05);
        }
    }

    #[test]
    fn empirical_cf_examples() {
        let zeros = vec![0.0; 7];
        assert_eq!(empirical_cf(&zeros, 3.3).unwrap(), Complex64::new(1.0, 0.0));
        let any = [1.0, -4.0, 2.5];
        assert_eq!(empirical_cf(&any, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let pm = [-1.0, 1.0];
        let v = empirical_cf(&pm, std::f64::consts::PI).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(empirical_cf(&[], 1.0).is_err());
    }

    #[test]
    fn theoretical_cf_examples() {
        assert!((theoretical_cf(2.0, 1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((theoretical_cf(2.0, 1.0, 1.0).unwrap() - 0.367_879).abs() < 1e-6);
        assert_eq!(theoretical_cf(1.3, 5.0, 0.0).unwrap(), 1.0);
        let v = theoretical_cf(1.5, 0.1, 2.0).unwrap();
        assert!((v - (-0.089_443f64).exp()).abs() < 1e-6);
        assert!((v - 0.91444).abs() < 1e-5);
        assert!(theoretical_cf(2.5, 1.0, 1.0).is_err());
        assert!(theoretical_cf(1.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn stream_seeds_differ_by_key() {
        let a = stream_seed(7, &[1, 2, 3]);
        assert_eq!(a, stream_seed(7, &[1, 2, 3]));
        assert_ne!(a, stream_seed(7, &[1, 2, 4]));
        assert_ne!(a, stream_seed(8, &[1, 2, 3]));
        assert_ne!(stream_seed(7, &[1, 2]), stream_seed(7, &[2, 1]));
    }
}
