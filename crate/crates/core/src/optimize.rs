//! Log-spaced load grids and a golden-section maximizer on `ln(Rl)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-spaced grid of load resistances, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadGrid {
    /// Ω
    pub min: f64,
    /// Ω
    pub max: f64,
    pub points: usize,
}

impl LoadGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let grid = Self { min, max, points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min > 0.0 && self.min < self.max) {
            return Err(Error::EmptyGrid(format!(
                "need 0 < min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.points < 2 {
            return Err(Error::EmptyGrid(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// Ratio between neighbouring grid values.
    pub fn step_ratio(&self) -> f64 {
        (self.max / self.min).powf(1.0 / (self.points - 1) as f64)
    }

    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = (self.min.ln(), self.max.ln());
        let last = self.points - 1;
        (0..self.points)
            .map(|i| match i {
                0 => self.min,
                i if i == last => self.max,
                i => (lo + (hi - lo) * i as f64 / last as f64).exp(),
            })
            .collect()
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `width`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Default number of points in the bracketing scan.
pub const COARSE_POINTS: usize = 64;

/// Maximizes `f(r)` for `r` in `[lower, upper]`, searching on `ln r`.
///
/// A coarse log scan brackets the maximum; golden-section search then narrows
/// it to a relative width of `rel_width`. A monotone scan yields
/// [`Error::NoInteriorOptimum`] carrying the better endpoint.
pub fn maximize_log<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    upper: f64,
    coarse_points: usize,
    rel_width: f64,
) -> Result<(f64, f64)> {
    let grid = LoadGrid::new(lower, upper, coarse_points.max(3))?;
    let xs = grid.values();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let best = argmax(&ys).expect("grid is non-empty");
    if best == 0 || best == xs.len() - 1 {
        return Err(Error::NoInteriorOptimum {
            lower,
            upper,
            best_load: xs[best],
            best_power: ys[best],
        });
    }
    let (u, fu) = golden_section_max(
        |u| f(u.exp()),
        xs[best - 1].ln(),
        xs[best + 1].ln(),
        rel_width.ln_1p(),
    );
    if fu >= ys[best] {
        Ok((u.exp(), fu))
    } else {
        Ok((xs[best], ys[best]))
    }
}
