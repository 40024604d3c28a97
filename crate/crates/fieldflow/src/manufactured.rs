//! Manufactured smooth fields for identity and convergence testing.
//!
//! A [`FourierField2`] is a linear ramp plus a handful of periodic modes on a
//! 2D box; values, gradients and Hessians are all closed-form, which is what
//! the analytic-derivative identity checks need.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{Boundary, Grid1D};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One periodic mode `amp * sin(2 pi (f0 u0 / L0 + f1 u1 / L1) + phase)`.
#[derive(Debug, Clone, Copy)]
pub struct Mode2 {
    pub amp: f64,
    pub freq: [i32; 2],
    pub phase: f64,
}

/// Smooth scalar field on the box `[0, L0] x [0, L1]`.
///
/// The ramp part `mean + slope . u` fixes the winding of the field across
/// each periodic direction (`winding_i = slope_i * L_i`).
#[derive(Debug, Clone)]
pub struct FourierField2 {
    pub mean: f64,
    pub slope: [f64; 2],
    pub lengths: [f64; 2],
    pub modes: Vec<Mode2>,
}

impl FourierField2 {
    pub fn value(&self, u: [f64; 2]) -> f64 {
        let mut v = self.mean + self.slope[0] * u[0] + self.slope[1] * u[1];
        for m in &self.modes {
            v += m.amp * (self.arg(m, u)).sin();
        }
        v
    }

    fn arg(&self, m: &Mode2, u: [f64; 2]) -> f64 {
        TWO_PI
            * (m.freq[0] as f64 * u[0] / self.lengths[0]
                + m.freq[1] as f64 * u[1] / self.lengths[1])
            + m.phase
    }

    fn wavevector(&self, m: &Mode2) -> [f64; 2] {
        [
            TWO_PI * m.freq[0] as f64 / self.lengths[0],
            TWO_PI * m.freq[1] as f64 / self.lengths[1],
        ]
    }

    pub fn grad(&self, u: [f64; 2]) -> [f64; 2] {
        let mut g = self.slope;
        for m in &self.modes {
            let k = self.wavevector(m);
            let c = m.amp * (self.arg(m, u)).cos();
            g[0] += c * k[0];
            g[1] += c * k[1];
        }
        g
    }

    pub fn hessian(&self, u: [f64; 2]) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for m in &self.modes {
            let k = self.wavevector(m);
            let s = -m.amp * (self.arg(m, u)).sin();
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += s * k[i] * k[j];
                }
            }
        }
        h
    }

    /// Jump of the field across the periodic seam in direction `dir`.
    pub fn winding(&self, dir: usize) -> f64 {
        self.slope[dir] * self.lengths[dir]
    }

    /// Random small-amplitude field: `base` ramp plus up to three modes whose
    /// amplitudes shrink with frequency so gradients stay under `amp_scale`.
    pub fn random(
        rng: &mut ChaCha8Rng,
        lengths: [f64; 2],
        mean: f64,
        slope: [f64; 2],
        amp_scale: f64,
    ) -> Self {
        let n_modes = rng.gen_range(2..=3);
        let mut modes = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            let f0 = rng.gen_range(-3i32..=3);
            let f1 = rng.gen_range(-3i32..=3);
            let (f0, f1) = if f0 == 0 && f1 == 0 { (1, 1) } else { (f0, f1) };
            let norm = ((f0 * f0 + f1 * f1) as f64).sqrt();
            modes.push(Mode2 {
                amp: amp_scale * rng.gen_range(0.3..1.0) / (norm * norm),
                freq: [f0, f1],
                phase: rng.gen_range(0.0..TWO_PI),
            });
        }
        Self {
            mean,
            slope,
            lengths,
            modes,
        }
    }

    /// Samples the field on an `n x n` periodic spacetime grid covering the
    /// box, returning row-major data indexed `[it * n + ix]`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let dt = self.lengths[0] / n as f64;
        let dx = self.lengths[1] / n as f64;
        let mut out = vec![0.0; n * n];
        for it in 0..n {
            for ix in 0..n {
                out[it * n + ix] = self.value([it as f64 * dt, ix as f64 * dx]);
            }
        }
        out
    }
}

/// One periodic mode on a 3D box.
#[derive(Debug, Clone, Copy)]
pub struct Mode3 {
    pub amp: f64,
    pub freq: [i32; 3],
    pub phase: f64,
}

/// Smooth scalar field on a 3D box; the 3D sibling of [`FourierField2`].
#[derive(Debug, Clone)]
pub struct FourierField3 {
    pub mean: f64,
    pub slope: [f64; 3],
    pub lengths: [f64; 3],
    pub modes: Vec<Mode3>,
}

impl FourierField3 {
    fn arg(&self, m: &Mode3, u: [f64; 3]) -> f64 {
        TWO_PI
            * (0..3)
                .map(|i| m.freq[i] as f64 * u[i] / self.lengths[i])
                .sum::<f64>()
            + m.phase
    }

    pub fn value(&self, u: [f64; 3]) -> f64 {
        let mut v = self.mean + (0..3).map(|i| self.slope[i] * u[i]).sum::<f64>();
        for m in &self.modes {
            v += m.amp * self.arg(m, u).sin();
        }
        v
    }

    pub fn grad(&self, u: [f64; 3]) -> [f64; 3] {
        let mut g = self.slope;
        for m in &self.modes {
            let c = m.amp * self.arg(m, u).cos();
            for i in 0..3 {
                g[i] += c * TWO_PI * m.freq[i] as f64 / self.lengths[i];
            }
        }
        g
    }

    pub fn winding(&self, dir: usize) -> f64 {
        self.slope[dir] * self.lengths[dir]
    }

    pub fn random(
        rng: &mut ChaCha8Rng,
        lengths: [f64; 3],
        mean: f64,
        slope: [f64; 3],
        amp_scale: f64,
        max_freq: i32,
    ) -> Self {
        let n_modes = rng.gen_range(2..=3);
        let mut modes = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            let mut freq = [0i32; 3];
            loop {
                for f in freq.iter_mut() {
                    *f = rng.gen_range(-max_freq..=max_freq);
                }
                if freq.iter().any(|&f| f != 0) {
                    break;
                }
            }
            let norm2 = freq.iter().map(|&f| (f * f) as f64).sum::<f64>();
            modes.push(Mode3 {
                amp: amp_scale * rng.gen_range(0.3..1.0) / norm2,
                freq,
                phase: rng.gen_range(0.0..TWO_PI),
            });
        }
        Self {
            mean,
            slope,
            lengths,
            modes,
        }
    }
}

/// Evaluates a field and its time derivative on the nodes of a spatial grid
/// at a fixed time; convenience for three-level history construction.
pub fn sample_on_grid(field: &FourierField2, grid: &Grid1D, t: f64) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(
        grid.boundary,
        Boundary::Periodic,
        "manufactured sampling assumes a periodic spatial grid"
    );
    let mut value = Vec::with_capacity(grid.n);
    let mut rate = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let u = [t, grid.node(i)];
        value.push(field.value(u));
        rate.push(field.grad(u)[0]);
    }
    (value, rate)
}
