//! Chirp signal model, signal synthesis and residual sums of squares.
//!
//! Observations are indexed by time `t = 1..=n`. Storage is 0-based:
//! element `i` of every sample vector holds time `t = i + 1`. [`time_of`] is
//! the only place that mapping is written down; everything else goes
//! through it.

use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI_HI: f64 = TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// Time index of storage slot `i`.
#[inline]
pub fn time_of(i: usize) -> f64 {
    (i + 1) as f64
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Chirp phase `θ1 t + θ2 t²` reduced to `[0, 2π)`.
///
/// The products and the reduction are carried in double-double arithmetic,
/// so the result is accurate to a few ulps of 2π even when `θ2 t²` is in the
/// millions. `t` must be an integer below 2^26 so that `t²` is exact.
#[inline]
pub fn phase(theta1: f64, theta2: f64, t: f64) -> f64 {
    let (p2, e2) = two_prod(theta2, t * t);
    let (p1, e1) = two_prod(theta1, t);
    let (s, es) = two_sum(p1, p2);
    let lo = es + e1 + e2;
    let k = (s / TWO_PI_HI).floor();
    let (kp, ke) = two_prod(k, TWO_PI_HI);
    let mut r = ((s - kp) - ke) + (lo - k * TWO_PI_LO);
    if r < 0.0 {
        r += TWO_PI_HI;
    } else if r >= TWO_PI_HI {
        r -= TWO_PI_HI;
    }
    r
}

/// One chirp component: amplitudes `A`, `B`, frequency `θ1` and frequency
/// rate `θ2` (radians per sample and per sample²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpComponent {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl ChirpComponent {
    /// Builds a component, rejecting `θ` outside the open interval `(0, π)`.
    pub fn new(a: f64, b: f64, theta1: f64, theta2: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "amplitudes must be finite, got A={a}, B={b}"
            )));
        }
        check_open_interval("theta1", theta1)?;
        check_open_interval("theta2", theta2)?;
        Ok(Self {
            a,
            b,
            theta1,
            theta2,
        })
    }

    /// `A² + B²`.
    pub fn power(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let (s, c) = phase(self.theta1, self.theta2, t).sin_cos();
        self.a * c + self.b * s
    }
}

pub(crate) fn check_open_interval(name: &str, theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, π), got {theta}"
        )))
    }
}

/// A sum of `p ≥ 1` chirp components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChirpModel {
    components: Vec<ChirpComponent>,
}

impl ChirpModel {
    /// Builds a model suitable as the truth of an estimation problem.
    ///
    /// Requires nonzero amplitudes, pairwise distinct `(θ1, θ2)` and
    /// components ordered by strictly decreasing `A² + B²`.
    pub fn new(components: Vec<ChirpComponent>) -> Result<Self> {
        let model = Self::candidate(components)?;
        for (k, c) in model.components.iter().enumerate() {
            if c.power() <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "component {} has A = B = 0",
                    k + 1
                )));
            }
        }
        for (i, ci) in model.components.iter().enumerate() {
            for cj in &model.components[i + 1..] {
                if ci.theta1 == cj.theta1 && ci.theta2 == cj.theta2 {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate (theta1, theta2) = ({}, {})",
                        ci.theta1, ci.theta2
                    )));
                }
            }
        }
        for w in model.components.windows(2) {
            if w[0].power() <= w[1].power() {
                return Err(Error::InvalidParameter(
                    "components must be ordered by strictly decreasing A² + B²".into(),
                ));
            }
        }
        Ok(model)
    }

    /// Builds a model without the identifiability checks of [`ChirpModel::new`];
    /// used for candidate parameter values such as estimates.
    pub fn candidate(components: Vec<ChirpComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("chirp model needs at least one component"));
        }
        Ok(Self { components })
    }

    /// Single chirp with `A = B = 2.5`, `θ1 = 1.5`, `θ2 = 0.1`.
    pub fn model1() -> Self {
        Self {
            components: vec![ChirpComponent {
                a: 2.5,
                b: 2.5,
                theta1: 1.5,
                theta2: 0.1,
            }],
        }
    }

    /// Two chirps: `(4, 4, 1.5, 0.1)` and `(3, 3, 2.5, 0.2)`.
    pub fn model2() -> Self {
        Self {
            components: vec![
                ChirpComponent {
                    a: 4.0,
                    b: 4.0,
                    theta1: 1.5,
                    theta2: 0.1,
                },
                ChirpComponent {
                    a: 3.0,
                    b: 3.0,
                    theta1: 2.5,
                    theta2: 0.2,
                },
            ],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "model1" => Some(Self::model1()),
            "model2" => Some(Self::model2()),
            _ => None,
        }
    }

    pub fn components(&self) -> &[ChirpComponent] {
        &self.components
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.value_at(t)).sum()
    }
}

/// Real-valued observations `y(1..=n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    t: u64,
    y: f64,
}

impl SampleSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("sample series needs at least one value"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(t, y(t))` pairs with the 1-based time index.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &y)| (time_of(i), y))
    }

    /// Writes the series as CSV with header `t,y`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (i, &y) in self.values.iter().enumerate() {
            w.serialize(CsvRow {
                t: (i + 1) as u64,
                y,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `t,y` CSV. Rows must be in order with `t` running from 1.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "y" {
            return Err(Error::InvalidParameter(format!(
                "expected CSV header `t,y`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut values = Vec::new();
        for row in r.deserialize() {
            let row: CsvRow = row?;
            let expected = values.len() as u64 + 1;
            if row.t != expected {
                return Err(Error::InvalidParameter(format!(
                    "expected t = {expected}, got t = {}",
                    row.t
                )));
            }
            values.push(row.y);
        }
        Self::new(values)
    }
}

/// Samples `model` at `t = 1..=n`, adding `noise` elementwise if given.
pub fn synthesize(model: &ChirpModel, n: usize, noise: Option<&[f64]>) -> Result<SampleSeries> {
    if n == 0 {
        return Err(Error::Empty("n must be at least 1"));
    }
    if let Some(e) = noise {
        if e.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: e.len(),
            });
        }
    }
    let values = (0..n)
        .map(|i| {
            let clean = model.value_at(time_of(i));
            match noise {
                Some(e) => clean + e[i],
                None => clean,
            }
        })
        .collect();
    SampleSeries::new(values)
}

/// Residual sum of squares of `y` against the candidate model.
pub fn rss(candidate: &ChirpModel, y: &SampleSeries) -> f64 {
    y.iter()
        .map(|(t, v)| {
            let r = v - candidate.value_at(t);
            r * r
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_matches_naive_for_small_arguments() {
        for &(a, b, t) in &[(1.5f64, 0.1f64, 1.0f64), (0.3, 0.02, 7.0), (3.0, 3.0, 2.0)] {
            let naive = (a * t + b * t * t).rem_euclid(2.0 * PI);
            assert!((phase(a, b, t) - naive).abs() < 1e-14);
        }
    }

    #[test]
    fn phase_is_accurate_at_large_t() {
        // References computed with 50-digit arithmetic on the exact f64 inputs.
        let cases = [
            (1.5, 0.1, 1000.0, 1.424_547_820_965_602_8),
            (2.5, 0.2, 4000.0, 2.307_970_942_781_199),
            (1.5, 0.1, 50000.0, 2.473_726_047_414_049),
        ];
        for (a, b, t, expected) in cases {
            let got = phase(a, b, t);
            assert!((got - expected).abs() < 4e-15, "{got} vs {expected}");
        }
    }

    #[test]
    fn component_rejects_boundary_frequencies() {
        assert!(ChirpComponent::new(1.0, 0.0, 0.0, 0.1).is_err());
        assert!(ChirpComponent::new(1.0, 0.0, 1.0, PI).is_err());
        assert!(ChirpComponent::new(1.0, 0.0, f64::NAN, 0.1).is_err());
        assert!(ChirpComponent::new(1.0, 0.0, 1.0, 0.1).is_ok());
    }

    #[test]
    fn model_checks_order_and_distinctness() {
        let c1 = ChirpComponent::new(4.0, 4.0, 1.5, 0.1).unwrap();
        let c2 = ChirpComponent::new(3.0, 3.0, 2.5, 0.2).unwrap();
        assert!(ChirpModel::new(vec![c1, c2]).is_ok());
        assert!(ChirpModel::new(vec![c2, c1]).is_err());
        let dup = ChirpComponent::new(1.0, 1.0, 1.5, 0.1).unwrap();
        assert!(ChirpModel::new(vec![c1, dup]).is_err());
        let zero = ChirpComponent::new(0.0, 0.0, 1.0, 0.3).unwrap();
        assert!(ChirpModel::new(vec![zero]).is_err());
        assert!(ChirpModel::candidate(vec![zero]).is_ok());
        assert!(ChirpModel::candidate(vec![]).is_err());
        assert!(ChirpModel::new(ChirpModel::model2().components().to_vec()).is_ok());
    }

    #[test]
    fn synthesize_near_zero_frequency_is_constant() {
        let c = ChirpComponent::new(1.0, 0.0, 1e-12, 1e-12).unwrap();
        let m = ChirpModel::candidate(vec![c]).unwrap();
        let y = synthesize(&m, 3, None).unwrap();
        for &v in y.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_model1_first_sample() {
        let y = synthesize(&ChirpModel::model1(), 1, None).unwrap();
        assert!((y.values()[0] - 2.425_96).abs() < 5e-5);
        assert!((y.values()[0] - 2.425_935_201_850_540_7).abs() < 1e-15);
        assert!((y.values()[0] - (2.5 * 1.6f64.cos() + 2.5 * 1.6f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn synthesize_model2_respects_envelope() {
        let y = synthesize(&ChirpModel::model2(), 250, None).unwrap();
        let bound = 32f64.sqrt() + 18f64.sqrt();
        assert!((bound - 9.899).abs() < 1e-3);
        assert!(y.values().iter().all(|v| v.abs() <= bound + 1e-12));
    }

    #[test]
    fn synthesize_rejects_bad_noise_length() {
        let e = vec![0.0; 4];
        let err = synthesize(&ChirpModel::model1(), 5, Some(&e)).unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                expected: 5,
                actual: 4
            }
        ));
        assert!(synthesize(&ChirpModel::model1(), 0, None).is_err());
    }

    #[test]
    fn rss_examples() {
        let m = ChirpModel::model2();
        let y = synthesize(&m, 100, None).unwrap();
        assert_eq!(rss(&m, &y), 0.0);

        let c = 0.3;
        let shifted = SampleSeries::new(y.values().iter().map(|v| v + c).collect()).unwrap();
        assert!((rss(&m, &shifted) - 100.0 * c * c).abs() < 1e-10);

        let zero = ChirpModel::candidate(
            m.components()
                .iter()
                .map(|k| ChirpComponent {
                    a: 0.0,
                    b: 0.0,
                    ..*k
                })
                .collect(),
        )
        .unwrap();
        let energy: f64 = y.values().iter().map(|v| v * v).sum();
        assert!((rss(&zero, &y) - energy).abs() < 1e-9 * energy);
    }

    #[test]
    fn rss_ignores_component_order() {
        let m = ChirpModel::model2();
        let y = synthesize(&m, 64, Some(&vec![0.25; 64])).unwrap();
        let mut rev = m.components().to_vec();
        rev.reverse();
        let r = ChirpModel::candidate(rev).unwrap();
        assert!((rss(&m, &y) - rss(&r, &y)).abs() < 1e-10);
    }

    #[test]
    fn mean_power_tends_to_half_amplitude_sum() {
        for m in [ChirpModel::model1(), ChirpModel::model2()] {
            let n = 10_000;
            let y = synthesize(&m, n, None).unwrap();
            let mean_sq = y.values().iter().map(|v| v * v).sum::<f64>() / n as f64;
            let limit = 0.5 * m.components().iter().map(|c| c.power()).sum::<f64>();
            assert!((mean_sq - limit).abs() / limit < 0.05);
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let y = SampleSeries::new(vec![
            0.1,
            -2.5e-300,
            1.0 / 3.0,
            123456.789,
            f64::MIN_POSITIVE,
        ])
        .unwrap();
        let mut buf = Vec::new();
        y.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,y\n1,"));
        let back = SampleSeries::read_csv(buf.as_slice()).unwrap();
        for (a, b) in y.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_rejects_bad_header_and_gaps() {
        assert!(SampleSeries::read_csv("x,y\n1,2\n".as_bytes()).is_err());
        assert!(SampleSeries::read_csv("t,y\n1,2\n3,4\n".as_bytes()).is_err());
        assert!(SampleSeries::read_csv("t,y\n".as_bytes()).is_err());
    }
}
