//! Cubic Hermite interpolation of monotone 1D data, with root finding for
//! map inversion.
//!
//! Slopes are supplied by the caller (analytic where available, high-order
//! differences otherwise), so the interpolant is fourth-order accurate on
//! smooth resolved data and exactly reproduces linear maps.

use crate::error::{FieldflowError, Result};

/// Piecewise cubic Hermite interpolant over strictly increasing abscissae.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
    increasing: bool,
}

impl CubicHermite {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.len() != ds.len() {
            return Err(FieldflowError::InvalidInput(
                "Hermite data needs matching xs/ys/ds with at least 2 points".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FieldflowError::InvalidInput(
                "Hermite abscissae must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(&ys).chain(&ds).any(|v| !v.is_finite()) {
            return Err(FieldflowError::InvalidInput(
                "Hermite data must be finite".into(),
            ));
        }
        let increasing = ys.windows(2).all(|w| w[1] > w[0]);
        Ok(Self {
            xs,
            ys,
            ds,
            increasing,
        })
    }

    /// True when the data values are strictly increasing (invertible map).
    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn range_endpoints(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    fn cell_of(&self, x: f64) -> usize {
        // partition_point returns the first index with xs[i] > x.
        let i = self.xs.partition_point(|&v| v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn eval_cell(&self, i: usize, x: f64) -> (f64, f64) {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.ds[i] * h, self.ds[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let dvalue = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (value, dvalue)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_cell(self.cell_of(x), x).0
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        self.eval_cell(self.cell_of(x), x).1
    }

    /// Solves `interpolant(x) = y` for strictly increasing data by bracketed
    /// Newton iteration with bisection fallback.
    pub fn invert(&self, y: f64) -> Result<f64> {
        if !self.increasing {
            return Err(FieldflowError::Configuration(
                "cannot invert non-monotone data".into(),
            ));
        }
        let (ylo, yhi) = self.range_endpoints();
        if y < ylo || y > yhi {
            return Err(FieldflowError::InvalidInput(format!(
                "inversion target {y} outside data range [{ylo}, {yhi}]"
            )));
        }
        // Bracketing cell by value.
        let i = self
            .ys
            .partition_point(|&v| v <= y)
            .clamp(1, self.ys.len() - 1)
            - 1;
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        let mut x = lo + (hi - lo) * (y - self.ys[i]) / (self.ys[i + 1] - self.ys[i]).max(1e-300);
        let scale = (hi - lo).abs().max(1.0);
        for _ in 0..60 {
            let (val, dval) = self.eval_cell(i, x);
            let err = val - y;
            if err.abs() <= 1e-15 * (y.abs().max(1.0)) {
                return Ok(x);
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = if dval.abs() > 1e-300 {
                x - err / dval
            } else {
                f64::NAN
            };
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo).abs() < 1e-16 * scale {
                return Ok(x);
            }
        }
        Ok(x)
    }
}
