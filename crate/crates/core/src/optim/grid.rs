use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Uniform points on `[lower, upper]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(lower: f64, upper: f64, count: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidParameter(format!(
                "grid axis needs finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid axis needs at least 2 points, got {count}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            count,
        })
    }

    /// `count` points strictly inside `(0, π)`: the uniform grid on
    /// `[0, π]` with `count + 2` points, minus both endpoints.
    pub fn chirp_interior(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid axis needs at least 2 points, got {count}"
            )));
        }
        let h = PI / (count + 1) as f64;
        Self::new(h, PI - h, count)
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.upper;
        }
        self.lower + i as f64 * (self.upper - self.lower) / (self.count - 1) as f64
    }

    pub fn step(&self) -> f64 {
        (self.upper - self.lower) / (self.count - 1) as f64
    }
}

/// Cartesian product of axes, flattened row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<GridAxis>,
}

impl GridSpec {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Empty("grid has no axes"));
        }
        Ok(Self { axes })
    }

    /// A chirp-parameter grid: every bound must lie strictly inside `(0, π)`.
    pub fn chirp(axes: Vec<GridAxis>) -> Result<Self> {
        for ax in &axes {
            if !(ax.lower > 0.0 && ax.upper < PI) {
                return Err(Error::InvalidParameter(format!(
                    "chirp grid bounds must lie in (0, π), got [{}, {}]",
                    ax.lower, ax.upper
                )));
            }
        }
        Self::new(axes)
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the point with flattened index `idx`.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            x[k] = ax.point(idx % ax.count);
            idx /= ax.count;
        }
        x
    }
}

/// One scanned grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHit {
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
}

/// Orders hits by value (non-finite last), then by flattened index.
pub(crate) fn hit_order(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    let key = |v: f64| if v.is_finite() { v } else { f64::INFINITY };
    key(a.0).total_cmp(&key(b.0)).then(a.1.cmp(&b.1))
}

/// Evaluates `f` on every grid point (in parallel) and returns the `top_m`
/// lowest values in ascending order. Ties go to the lower flattened index.
pub fn grid_search<F>(f: F, grid: &GridSpec, top_m: usize) -> Result<Vec<GridHit>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let total = grid.len();
    if total == 0 {
        return Err(Error::Empty("grid has no points"));
    }
    if top_m == 0 || top_m > total {
        return Err(Error::InvalidParameter(format!(
            "top_m must lie in 1..={total}, got {top_m}"
        )));
    }
    let mut scored: Vec<(f64, usize)> = (0..total)
        .into_par_iter()
        .map(|idx| (f(&grid.point(idx)), idx))
        .collect();
    scored.sort_unstable_by(hit_order);
    Ok(scored
        .into_iter()
        .take(top_m)
        .map(|(value, index)| GridHit {
            index,
            point: grid.point(index),
            value,
        })
        .collect())
}
