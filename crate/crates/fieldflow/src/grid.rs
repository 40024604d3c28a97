//! Uniform 1D grids and finite-difference stencils.
//!
//! All spatial derivatives in the crate go through [`Grid1D`]: second-order
//! central stencils in the interior, periodic wrap-around or one-sided
//! second-order closures at Dirichlet ends.  Fields that wind around a
//! periodic domain (e.g. a particle-label field that gains one full period
//! per revolution) carry their jump as an explicit `winding` offset.

use crate::error::{FieldflowError, Result};

/// Boundary treatment of a 1D domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Node `n` is identified with node `0`; stencils wrap.
    Periodic,
    /// Both end nodes are part of the grid; stencils become one-sided there.
    Dirichlet,
}

/// Uniform 1D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub h: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    /// Builds a grid with `n` nodes spanning `length`.
    ///
    /// Periodic grids place nodes at `i*h` with `h = length/n` (node `n` is
    /// the image of node 0); Dirichlet grids include both ends, so
    /// `h = length/(n-1)`.
    pub fn new(n: usize, length: f64, boundary: Boundary) -> Result<Self> {
        if n < 8 {
            return Err(FieldflowError::InvalidInput(format!(
                "grid needs at least 8 nodes, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(FieldflowError::InvalidInput(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        let h = match boundary {
            Boundary::Periodic => length / n as f64,
            Boundary::Dirichlet => length / (n - 1) as f64,
        };
        Ok(Self { n, h, boundary })
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn length(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.n as f64 * self.h,
            Boundary::Dirichlet => (self.n - 1) as f64 * self.h,
        }
    }

    /// Value of a (possibly winding) periodic field at a signed node index.
    fn fetch(f: &[f64], winding: f64, i: i64) -> f64 {
        let n = f.len() as i64;
        let wrap = i.div_euclid(n);
        f[i.rem_euclid(n) as usize] + wrap as f64 * winding
    }

    /// Second-order first derivative of `f`.
    ///
    /// `winding` is the jump `f(x + L) - f(x)` of the unwrapped field across
    /// the periodic seam; pass 0.0 for genuinely periodic fields.  Ignored on
    /// Dirichlet grids.
    pub fn deriv(&self, f: &[f64], winding: f64) -> Vec<f64> {
        assert_eq!(f.len(), self.n, "field length does not match grid");
        let n = self.n;
        let h = self.h;
        let mut out = vec![0.0; n];
        match self.boundary {
            Boundary::Periodic => {
                for i in 0..n {
                    let fp = Self::fetch(f, winding, i as i64 + 1);
                    let fm = Self::fetch(f, winding, i as i64 - 1);
                    out[i] = (fp - fm) / (2.0 * h);
                }
            }
            Boundary::Dirichlet => {
                out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
                for i in 1..n - 1 {
                    out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
                }
                out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
            }
        }
        out
    }

    /// Fourth-order first derivative, used where interpolation accuracy
    /// matters (picture transforms).  Falls back to the second-order closure
    /// near Dirichlet ends.
    pub fn deriv4(&self, f: &[f64], winding: f64) -> Vec<f64> {
        assert_eq!(f.len(), self.n, "field length does not match grid");
        let n = self.n;
        let h = self.h;
        let mut out = vec![0.0; n];
        let stencil = |fm2: f64, fm1: f64, fp1: f64, fp2: f64| {
            (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
        };
        match self.boundary {
            Boundary::Periodic => {
                for i in 0..n {
                    let i = i as i64;
                    out[i as usize] = stencil(
                        Self::fetch(f, winding, i - 2),
                        Self::fetch(f, winding, i - 1),
                        Self::fetch(f, winding, i + 1),
                        Self::fetch(f, winding, i + 2),
                    );
                }
            }
            Boundary::Dirichlet => {
                out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
                out[1] = (f[2] - f[0]) / (2.0 * h);
                for i in 2..n - 2 {
                    out[i] = stencil(f[i - 2], f[i - 1], f[i + 1], f[i + 2]);
                }
                out[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * h);
                out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
            }
        }
        out
    }

    /// Quadrature of a nodal field over the whole domain: rectangle rule on
    /// periodic grids (exact for the wrap), trapezoid on Dirichlet grids.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n, "field length does not match grid");
        match self.boundary {
            Boundary::Periodic => f.iter().sum::<f64>() * self.h,
            Boundary::Dirichlet => {
                let inner: f64 = f[1..self.n - 1].iter().sum();
                (0.5 * (f[0] + f[self.n - 1]) + inner) * self.h
            }
        }
    }

    /// Trapezoid quadrature over the node range `[lo, hi]` (inclusive).
    pub fn integrate_range(&self, f: &[f64], lo: usize, hi: usize) -> f64 {
        assert!(lo < hi && hi < self.n, "bad quadrature range");
        let inner: f64 = f[lo + 1..hi].iter().sum();
        (0.5 * (f[lo] + f[hi]) + inner) * self.h
    }

    /// Quadrature weight of a single node, consistent with [`Self::integrate`].
    pub fn weight(&self, i: usize) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.h,
            Boundary::Dirichlet => {
                if i == 0 || i == self.n - 1 {
                    0.5 * self.h
                } else {
                    self.h
                }
            }
        }
    }
}

/// Second-order time derivative stencils over three stored levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeStencil {
    /// Derivative at the middle level from (prev, mid, next).
    Central,
    /// Derivative at the first level from (first, second, third).
    Forward,
    /// Derivative at the last level from (antepenultimate, penultimate, last).
    Backward,
}

impl TimeStencil {
    /// First time derivative of a scalar sampled at three consecutive levels
    /// separated by `dt`, evaluated at the level this stencil targets.
    pub fn d1(&self, f0: f64, f1: f64, f2: f64, dt: f64) -> f64 {
        match self {
            TimeStencil::Central => (f2 - f0) / (2.0 * dt),
            TimeStencil::Forward => (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * dt),
            TimeStencil::Backward => (3.0 * f2 - 4.0 * f1 + f0) / (2.0 * dt),
        }
    }

    /// Second time derivative (only meaningful for the central stencil).
    pub fn d2(&self, f0: f64, f1: f64, f2: f64, dt: f64) -> f64 {
        (f2 - 2.0 * f1 + f0) / (dt * dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_grids() {
        assert!(Grid1D::new(4, 1.0, Boundary::Periodic).is_err());
        assert!(Grid1D::new(8, 0.0, Boundary::Periodic).is_err());
    }

    #[test]
    fn periodic_derivative_of_sine_is_second_order() {
        let mut errs = Vec::new();
        for &n in &[32usize, 64, 128] {
            let g = Grid1D::new(n, 2.0 * std::f64::consts::PI, Boundary::Periodic).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|&x| x.sin()).collect();
            let d = g.deriv(&f, 0.0);
            let err = g
                .nodes()
                .iter()
                .zip(&d)
                .map(|(&x, &v)| (v - x.cos()).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.9, "measured order {order}");
    }

    #[test]
    fn winding_field_has_clean_gradient() {
        let n = 64;
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid1D::new(n, l, Boundary::Periodic).unwrap();
        // y = x + 0.1 sin x winds by exactly one domain length.
        let f: Vec<f64> = g.nodes().iter().map(|&x| x + 0.1 * x.sin()).collect();
        let d = g.deriv(&f, l);
        for (&x, &v) in g.nodes().iter().zip(&d) {
            assert!((v - (1.0 + 0.1 * x.cos())).abs() < 1e-3);
        }
    }

    #[test]
    fn dirichlet_closures_are_exact_on_quadratics() {
        let g = Grid1D::new(16, 1.5, Boundary::Dirichlet).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&x| 2.0 + 3.0 * x - x * x).collect();
        let d = g.deriv(&f, 0.0);
        for (&x, &v) in g.nodes().iter().zip(&d) {
            assert!((v - (3.0 - 2.0 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_splits_additively() {
        let g = Grid1D::new(33, 1.0, Boundary::Dirichlet).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&x| (3.0 * x).cos() + 0.5).collect();
        let whole = g.integrate_range(&f, 0, 32);
        let halves = g.integrate_range(&f, 0, 16) + g.integrate_range(&f, 16, 32);
        assert!((whole - halves).abs() < 1e-14);
    }

    #[test]
    fn deriv4_beats_deriv2_on_smooth_data() {
        let g = Grid1D::new(64, 2.0 * std::f64::consts::PI, Boundary::Periodic).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&x| (2.0 * x).sin()).collect();
        let d2 = g.deriv(&f, 0.0);
        let d4 = g.deriv4(&f, 0.0);
        let err = |d: &[f64]| {
            g.nodes()
                .iter()
                .zip(d)
                .map(|(&x, &v)| (v - 2.0 * (2.0 * x).cos()).abs())
                .fold(0.0f64, f64::max)
        };
        assert!(err(&d4) < err(&d2) * 1e-2);
    }
}
