//! Point-wise kinematics: turning gradients of the potential fields into
//! density, molar volume, velocity, temperature and matter current, plus the
//! identities that hold automatically for any potential-derived flow.
//!
//! Dynamics elsewhere in the crate are one-dimensional; the algebra here
//! supports dimensions 1 to 3 so that determinant and Levi-Civita content
//! stays honest.

use crate::error::{FieldflowError, Result};
use crate::grid::{Grid1D, TimeStencil};
use crate::numdiff;

pub use crate::grid::Boundary;

/// Which map a Jacobian differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Entries are `y^a_k = d(label)/d(position)` (Euler-picture gradient).
    LabelByPosition,
    /// Entries are `x^k_a = d(position)/d(label)` (Lagrange-picture gradient).
    PositionByLabel,
}

/// Dense spatial Jacobian in dimension 1, 2 or 3, tagged by orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub d: usize,
    entries: Vec<f64>,
    pub orientation: Orientation,
}

impl Jacobian {
    pub fn new(d: usize, entries: Vec<f64>, orientation: Orientation) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(FieldflowError::InvalidInput(format!(
                "spatial dimension must be 1, 2 or 3, got {d}"
            )));
        }
        if entries.len() != d * d {
            return Err(FieldflowError::InvalidInput(format!(
                "expected {}x{} entries, got {}",
                d,
                d,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(FieldflowError::InvalidInput(
                "Jacobian entries must be finite".into(),
            ));
        }
        Ok(Self {
            d,
            entries,
            orientation,
        })
    }

    pub fn scalar(value: f64, orientation: Orientation) -> Result<Self> {
        Self::new(1, vec![value], orientation)
    }

    pub fn identity(d: usize, orientation: Orientation) -> Self {
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1.0;
        }
        Self {
            d,
            entries,
            orientation,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.d + col]
    }

    pub fn det(&self) -> f64 {
        let e = &self.entries;
        match self.d {
            1 => e[0],
            2 => e[0] * e[3] - e[1] * e[2],
            3 => {
                e[0] * (e[4] * e[8] - e[5] * e[7]) - e[1] * (e[3] * e[8] - e[5] * e[6])
                    + e[2] * (e[3] * e[7] - e[4] * e[6])
            }
            _ => unreachable!(),
        }
    }

    /// Adjugate-based inverse with the orientation flipped.
    pub fn inverse(&self) -> Result<Jacobian> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(FieldflowError::Configuration(format!(
                "singular Jacobian (det = {det})"
            )));
        }
        let e = &self.entries;
        let inv = match self.d {
            1 => vec![1.0 / det],
            2 => vec![e[3] / det, -e[1] / det, -e[2] / det, e[0] / det],
            3 => vec![
                (e[4] * e[8] - e[5] * e[7]) / det,
                (e[2] * e[7] - e[1] * e[8]) / det,
                (e[1] * e[5] - e[2] * e[4]) / det,
                (e[5] * e[6] - e[3] * e[8]) / det,
                (e[0] * e[8] - e[2] * e[6]) / det,
                (e[2] * e[3] - e[0] * e[5]) / det,
                (e[3] * e[7] - e[4] * e[6]) / det,
                (e[1] * e[6] - e[0] * e[7]) / det,
                (e[0] * e[4] - e[1] * e[3]) / det,
            ],
            _ => unreachable!(),
        };
        let orientation = match self.orientation {
            Orientation::LabelByPosition => Orientation::PositionByLabel,
            Orientation::PositionByLabel => Orientation::LabelByPosition,
        };
        Jacobian::new(self.d, inv, orientation)
    }
}

/// Matter density `rho = det(y^a_k)`; the configuration must preserve
/// orientation, so a non-positive determinant is a hard error.
pub fn density_from_jacobian(j: &Jacobian) -> Result<f64> {
    if j.orientation != Orientation::LabelByPosition {
        return Err(FieldflowError::InvalidInput(
            "density needs a label-by-position Jacobian".into(),
        ));
    }
    let det = j.det();
    if det <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "fluid configuration folded: det(y^a_k) = {det} <= 0"
        )));
    }
    Ok(det)
}

/// Molar volume `V = det(x^k_a)`.
pub fn molar_volume(j: &Jacobian) -> Result<f64> {
    if j.orientation != Orientation::PositionByLabel {
        return Err(FieldflowError::InvalidInput(
            "molar volume needs a position-by-label Jacobian".into(),
        ));
    }
    let det = j.det();
    if det <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "fluid configuration folded: det(x^k_a) = {det} <= 0"
        )));
    }
    Ok(det)
}

/// Euler-picture velocity `v^k = -x^k_a ydot^a`, with `x^k_a` the inverse of
/// the label gradient.
pub fn velocity_euler(ydot: &[f64], j: &Jacobian) -> Result<Vec<f64>> {
    if j.orientation != Orientation::LabelByPosition {
        return Err(FieldflowError::InvalidInput(
            "velocity needs a label-by-position Jacobian".into(),
        ));
    }
    if ydot.len() != j.d {
        return Err(FieldflowError::InvalidInput(
            "rate vector length does not match dimension".into(),
        ));
    }
    let inv = j.inverse()?;
    let mut v = vec![0.0; j.d];
    for k in 0..j.d {
        for a in 0..j.d {
            v[k] -= inv.get(k, a) * ydot[a];
        }
    }
    Ok(v)
}

/// Matter current in 3+1 dimensions from the full spacetime gradient
/// `grad[a][mu] = dy^a/dx^mu`: `j^kappa = eps^{kappa mu nu lambda}
/// y^1_mu y^2_nu y^3_lambda`, evaluated through signed 3x3 minors.
pub fn matter_current_3d(grad: &[[f64; 4]; 3]) -> [f64; 4] {
    let minor = |skip: usize| -> f64 {
        let mut cols = [0usize; 3];
        let mut c = 0;
        for mu in 0..4 {
            if mu != skip {
                cols[c] = mu;
                c += 1;
            }
        }
        let m = |a: usize, i: usize| grad[a][cols[i]];
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    };
    let mut j = [0.0; 4];
    for kappa in 0..4 {
        let sign = if kappa % 2 == 0 { 1.0 } else { -1.0 };
        j[kappa] = sign * minor(kappa);
    }
    j
}

/// One-dimensional reduction of the matter current: `j = (rho, rho v)` built
/// from the label field's spacetime gradient `(ydot, y_x)`.
pub fn matter_current_1d(ydot: f64, y_x: f64) -> Result<[f64; 2]> {
    if y_x <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "fluid configuration folded: y_x = {y_x} <= 0"
        )));
    }
    Ok([y_x, -ydot])
}

/// A point-wise bundle of observables with its defining identities checked.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSample {
    pub rho: f64,
    pub vol: f64,
    pub velocity: Vec<f64>,
    pub temperature: Option<f64>,
    pub current: Vec<f64>,
}

impl KinematicSample {
    pub fn new(
        rho: f64,
        vol: f64,
        velocity: Vec<f64>,
        temperature: Option<f64>,
        current: Vec<f64>,
    ) -> Result<Self> {
        if rho <= 0.0 || vol <= 0.0 {
            return Err(FieldflowError::Configuration(format!(
                "non-positive density or volume (rho={rho}, V={vol})"
            )));
        }
        if (rho * vol - 1.0).abs() > 1e-10 {
            return Err(FieldflowError::Configuration(format!(
                "rho*V = {} deviates from 1",
                rho * vol
            )));
        }
        if current.len() != velocity.len() + 1 {
            return Err(FieldflowError::InvalidInput(
                "current must have d+1 components".into(),
            ));
        }
        if (current[0] - rho).abs() > 1e-10 * rho.max(1.0) {
            return Err(FieldflowError::Configuration(
                "current time component does not equal the density".into(),
            ));
        }
        for (k, &v) in velocity.iter().enumerate() {
            if (current[k + 1] - rho * v).abs() > 1e-10 * (rho * v).abs().max(1.0) {
                return Err(FieldflowError::Configuration(
                    "current spatial components do not equal rho v".into(),
                ));
            }
        }
        Ok(Self {
            rho,
            vol,
            velocity,
            temperature,
            current,
        })
    }

    /// Assembles the full observable bundle from label-picture point data in
    /// one dimension; the material-time pair is optional (barotropic flows).
    pub fn from_euler_1d(
        ydot: f64,
        y_x: f64,
        material_time: Option<(f64, f64)>, // (taudot, tau_x)
        beta: f64,
    ) -> Result<Self> {
        let jac = Jacobian::scalar(y_x, Orientation::LabelByPosition)?;
        let rho = density_from_jacobian(&jac)?;
        let vol = molar_volume(&jac.inverse()?)?;
        let velocity = velocity_euler(&[ydot], &jac)?;
        let current = matter_current_1d(ydot, y_x)?;
        let temperature = material_time
            .map(|(taudot, tau_x)| temperature_euler(taudot, &[tau_x], &velocity, beta));
        Self::new(rho, vol, velocity, temperature, current.to_vec())
    }
}

/// Temperature from the material-time field: `T = beta (taudot + v^k d_k tau)`.
///
/// Callers decide whether a non-positive result is fatal; the dynamics
/// modules treat it as such.
pub fn temperature_euler(taudot: f64, grad_tau: &[f64], v: &[f64], beta: f64) -> f64 {
    let advect: f64 = grad_tau.iter().zip(v).map(|(&g, &vv)| g * vv).sum();
    beta * (taudot + advect)
}

/// One time level of a matter current sampled on a 1D grid.
#[derive(Debug, Clone)]
pub struct CurrentLevel {
    pub j0: Vec<f64>,
    pub j1: Vec<f64>,
}

/// Max-norm of the discrete divergence `d_t j^0 + d_x j^1` at the middle of a
/// three-level history (second-order stencils in both directions).
pub fn continuity_residual(
    levels: &[CurrentLevel],
    dt: f64,
    grid: &Grid1D,
    stencil: TimeStencil,
) -> Result<f64> {
    if levels.len() < 3 {
        return Err(FieldflowError::InvalidInput(format!(
            "continuity residual needs at least 3 time levels, got {}",
            levels.len()
        )));
    }
    let (a, b, c) = (&levels[0], &levels[1], &levels[2]);
    let spatial_level = match stencil {
        TimeStencil::Central => b,
        TimeStencil::Forward => a,
        TimeStencil::Backward => c,
    };
    let dj1 = grid.deriv(&spatial_level.j1, 0.0);
    let mut worst = 0.0f64;
    for i in 0..grid.n {
        let dj0 = stencil.d1(a.j0[i], b.j0[i], c.j0[i], dt);
        worst = worst.max((dj0 + dj1[i]).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Identities that hold for arbitrary smooth configurations.
// ---------------------------------------------------------------------------

/// Divergence of the matter current at a point, assembled by the chain rule
/// from the spacetime gradient and a symmetric second-derivative array
/// `hess[a][mu][nu] = d^2 y^a / dx^mu dx^nu`.  Vanishes identically for any
/// configuration; the returned number is the numerical leftovers.
pub fn current_divergence_at_point(grad: &[[f64; 4]; 3], hess: &[[[f64; 4]; 4]; 3]) -> f64 {
    let mut div = 0.0;
    for a in 0..3 {
        for nu in 0..4 {
            let h = numdiff::step_for(grad[a][nu], 1e-3);
            for mu in 0..4 {
                // d j^mu / d grad[a][nu], then contract with y^a_{nu mu}.
                let dj = numdiff::central4(
                    |g| {
                        let mut pert = *grad;
                        pert[a][nu] = g;
                        matter_current_3d(&pert)[mu]
                    },
                    grad[a][nu],
                    h,
                );
                div += dj * hess[a][nu][mu];
            }
        }
    }
    div
}

/// The cofactor-divergence identity `d_a (V y^a_k) = 0` evaluated at a point
/// from the position-by-label Jacobian and its symmetric second derivatives
/// `hess[k][a][b] = x^k_{ab}`.  Returns the per-k residual vector.
pub fn volume_cofactor_divergence(jac: &Jacobian, hess: &[Vec<f64>]) -> Result<Vec<f64>> {
    if jac.orientation != Orientation::PositionByLabel {
        return Err(FieldflowError::InvalidInput(
            "cofactor divergence needs a position-by-label Jacobian".into(),
        ));
    }
    let d = jac.d;
    let vol = molar_volume(jac)?;
    let inv = jac.inverse()?; // y^a_k
    let h = |k: usize, a: usize, b: usize| hess[k][a * d + b];
    let mut res = vec![0.0; d];
    for k in 0..d {
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                for l in 0..d {
                    // d_a V = V y^b_l x^l_{ab};   d_a y^a_k = -y^a_l x^l_{ba} y^b_k
                    acc += vol
                        * (inv.get(b, l) * inv.get(a, k) - inv.get(a, l) * inv.get(b, k))
                        * h(l, a, b);
                }
            }
        }
        res[k] = acc;
    }
    Ok(res)
}

/// Max-norm continuity residual of a manufactured label field on an `n`-node
/// periodic grid with the time spacing tied to `h`: the current components
/// come from the exact derivatives, the divergence from second-order
/// stencils.
pub fn continuity_fd_residual(field: &crate::manufactured::FourierField2, n: usize) -> Result<f64> {
    let grid = Grid1D::new(n, field.lengths[1], Boundary::Periodic)?;
    let dt = grid.h;
    let t0 = 0.5 * field.lengths[0];
    let mut levels = Vec::with_capacity(3);
    for k in [-1.0f64, 0.0, 1.0] {
        let mut j0 = Vec::with_capacity(n);
        let mut j1 = Vec::with_capacity(n);
        for i in 0..n {
            let g = field.grad([t0 + k * dt, grid.node(i)]);
            let current = matter_current_1d(g[0], g[1])?;
            j0.push(current[0]);
            j1.push(current[1]);
        }
        levels.push(CurrentLevel { j0, j1 });
    }
    continuity_residual(&levels, dt, &grid, TimeStencil::Central)
}

/// Max-norm of the cofactor-divergence identity for a manufactured 3D
/// material map, everything by second-order differences on an `n^3` grid.
///
/// Three dimensions are essential here: in 1D and 2D (and in slab-symmetric
/// 3D) the cofactor entries that survive the divergence are linear in the
/// gradients and the discrete stencils cancel them exactly, leaving only
/// roundoff.  Full 3D variation makes the residual a genuine second-order
/// quantity.
pub fn cofactor_fd_residual(
    maps: &[crate::manufactured::FourierField3; 3],
    n: usize,
) -> Result<f64> {
    let l = maps[0].lengths;
    for m in maps {
        if m.lengths != l {
            return Err(FieldflowError::InvalidInput(
                "map components must share the material box".into(),
            ));
        }
    }
    let h = [l[0] / n as f64, l[1] / n as f64, l[2] / n as f64];
    let nn = n as i64;
    let mut sheets = Vec::with_capacity(3);
    for m in maps {
        let mut data = vec![0.0; n * n * n];
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    data[(i0 * n + i1) * n + i2] =
                        m.value([i0 as f64 * h[0], i1 as f64 * h[1], i2 as f64 * h[2]]);
                }
            }
        }
        sheets.push(data);
    }
    let winds: Vec<[f64; 3]> = maps
        .iter()
        .map(|m| [m.winding(0), m.winding(1), m.winding(2)])
        .collect();
    let at = |k: usize, i: [i64; 3]| -> f64 {
        let mut v = sheets[k][(((i[0].rem_euclid(nn) * nn + i[1].rem_euclid(nn)) * nn)
            + i[2].rem_euclid(nn)) as usize];
        for d in 0..3 {
            v += i[d].div_euclid(nn) as f64 * winds[k][d];
        }
        v
    };
    // Cofactor fields W[a][k] = V y^a_k at every node.
    let mut w_fields = vec![[[0.0; 3]; 3]; n * n * n];
    for i0 in 0..nn {
        for i1 in 0..nn {
            for i2 in 0..nn {
                let idx = [i0, i1, i2];
                let mut entries = [0.0; 9];
                for k in 0..3usize {
                    for a in 0..3usize {
                        let mut up = idx;
                        let mut dn = idx;
                        up[a] += 1;
                        dn[a] -= 1;
                        entries[k * 3 + a] = (at(k, up) - at(k, dn)) / (2.0 * h[a]);
                    }
                }
                let jac = Jacobian::new(3, entries.to_vec(), Orientation::PositionByLabel)?;
                let vol = molar_volume(&jac)?;
                let inv = jac.inverse()?;
                let node = ((i0 as usize * n) + i1 as usize) * n + i2 as usize;
                for a in 0..3 {
                    for k in 0..3 {
                        w_fields[node][a][k] = vol * inv.get(a, k);
                    }
                }
            }
        }
    }
    let w_at = |a: usize, k: usize, i: [i64; 3]| -> f64 {
        w_fields[(((i[0].rem_euclid(nn) * nn + i[1].rem_euclid(nn)) * nn) + i[2].rem_euclid(nn))
            as usize][a][k]
    };
    let mut worst = 0.0f64;
    for i0 in 0..nn {
        for i1 in 0..nn {
            for i2 in 0..nn {
                let idx = [i0, i1, i2];
                for k in 0..3 {
                    let mut div = 0.0;
                    for a in 0..3 {
                        let mut up = idx;
                        let mut dn = idx;
                        up[a] += 1;
                        dn[a] -= 1;
                        div += (w_at(a, k, up) - w_at(a, k, dn)) / (2.0 * h[a]);
                    }
                    worst = worst.max(div.abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn permutation_determinant(j: &Jacobian) -> f64 {
        // Brute-force determinant by signed permutation expansion.
        let d = j.d;
        let perms: Vec<(Vec<usize>, f64)> = match d {
            1 => vec![(vec![0], 1.0)],
            2 => vec![(vec![0, 1], 1.0), (vec![1, 0], -1.0)],
            3 => vec![
                (vec![0, 1, 2], 1.0),
                (vec![1, 2, 0], 1.0),
                (vec![2, 0, 1], 1.0),
                (vec![0, 2, 1], -1.0),
                (vec![2, 1, 0], -1.0),
                (vec![1, 0, 2], -1.0),
            ],
            _ => unreachable!(),
        };
        perms
            .into_iter()
            .map(|(p, sign)| sign * (0..d).map(|i| j.get(i, p[i])).product::<f64>())
            .sum()
    }

    fn random_well_conditioned(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = if i == j {
                    1.5 + rng.gen::<f64>()
                } else {
                    0.3 * (rng.gen::<f64>() - 0.5)
                };
            }
        }
        entries
    }

    #[test]
    fn density_of_identity_and_scalar() {
        let id = Jacobian::identity(3, Orientation::LabelByPosition);
        assert_eq!(density_from_jacobian(&id).unwrap(), 1.0);
        let half = Jacobian::scalar(0.5, Orientation::LabelByPosition).unwrap();
        assert_eq!(density_from_jacobian(&half).unwrap(), 0.5);
        let bad = Jacobian::scalar(-0.5, Orientation::LabelByPosition).unwrap();
        assert!(density_from_jacobian(&bad).is_err());
    }

    #[test]
    fn molar_volume_values() {
        let id = Jacobian::identity(2, Orientation::PositionByLabel);
        assert_eq!(molar_volume(&id).unwrap(), 1.0);
        let two = Jacobian::scalar(2.0, Orientation::PositionByLabel).unwrap();
        assert_eq!(molar_volume(&two).unwrap(), 2.0);
    }

    #[test]
    fn determinant_matches_permutation_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let j = Jacobian::new(
                3,
                random_well_conditioned(&mut rng, 3),
                Orientation::LabelByPosition,
            )
            .unwrap();
            assert!((j.det() - permutation_determinant(&j)).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_rest_and_translation() {
        let j = Jacobian::identity(3, Orientation::LabelByPosition);
        let v = velocity_euler(&[0.0, 0.0, 0.0], &j).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0]);
        // y = x - u t in 1D: ydot = -u, y_x = 1 gives v = u.
        let j1 = Jacobian::scalar(1.0, Orientation::LabelByPosition).unwrap();
        let v = velocity_euler(&[-0.7], &j1).unwrap();
        assert!((v[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn velocity_satisfies_defining_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let j = Jacobian::new(
                3,
                random_well_conditioned(&mut rng, 3),
                Orientation::LabelByPosition,
            )
            .unwrap();
            let ydot: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() - 0.5).collect();
            let v = velocity_euler(&ydot, &j).unwrap();
            // Defining relation: ydot + (y^a_k) v^k = 0.
            for a in 0..3 {
                let mut acc = ydot[a];
                for k in 0..3 {
                    acc += j.get(a, k) * v[k];
                }
                assert!(acc.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn current_at_rest_and_translation() {
        let mut grad = [[0.0; 4]; 3];
        for a in 0..3 {
            grad[a][a + 1] = 1.0;
        }
        assert_eq!(matter_current_3d(&grad), [1.0, 0.0, 0.0, 0.0]);
        // Uniform translation with velocity u: y^a = x^a - u^a t.
        let u = [0.3, -0.2, 0.5];
        for a in 0..3 {
            grad[a][0] = -u[a];
        }
        let j = matter_current_3d(&grad);
        assert!((j[0] - 1.0).abs() < 1e-15);
        for k in 0..3 {
            assert!((j[k + 1] - u[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn current_matches_epsilon_contraction() {
        // Oracle: explicit sum over all 4-index permutations.
        fn eps_oracle(grad: &[[f64; 4]; 3]) -> [f64; 4] {
            fn sign(p: &[usize; 4]) -> f64 {
                let mut s = 1.0;
                for i in 0..4 {
                    for j in i + 1..4 {
                        if p[i] > p[j] {
                            s = -s;
                        }
                    }
                }
                s
            }
            let mut out = [0.0; 4];
            let mut idx = [0usize; 4];
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            idx = [a, b, c, d];
                            let mut seen = [false; 4];
                            let mut distinct = true;
                            for &i in &idx {
                                if seen[i] {
                                    distinct = false;
                                    break;
                                }
                                seen[i] = true;
                            }
                            if !distinct {
                                continue;
                            }
                            out[a] += sign(&idx) * grad[0][b] * grad[1][c] * grad[2][d];
                        }
                    }
                }
            }
            let _ = idx;
            out
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let mut grad = [[0.0; 4]; 3];
            for a in 0..3 {
                for mu in 0..4 {
                    grad[a][mu] = if mu == a + 1 {
                        1.0 + 0.3 * rng.gen::<f64>()
                    } else {
                        0.3 * (rng.gen::<f64>() - 0.5)
                    };
                }
            }
            let fast = matter_current_3d(&grad);
            let slow = eps_oracle(&grad);
            for mu in 0..4 {
                assert!((fast[mu] - slow[mu]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn current_divergence_vanishes_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let mut grad = [[0.0; 4]; 3];
            for a in 0..3 {
                for mu in 0..4 {
                    grad[a][mu] = if mu == a + 1 {
                        1.0 + 0.2 * rng.gen::<f64>()
                    } else {
                        0.2 * (rng.gen::<f64>() - 0.5)
                    };
                }
            }
            let mut hess = [[[0.0; 4]; 4]; 3];
            for a in 0..3 {
                for mu in 0..4 {
                    for nu in mu..4 {
                        let v = 0.3 * (rng.gen::<f64>() - 0.5);
                        hess[a][mu][nu] = v;
                        hess[a][nu][mu] = v;
                    }
                }
            }
            let div = current_divergence_at_point(&grad, &hess);
            assert!(div.abs() < 1e-10, "divergence leak {div}");
        }
    }

    #[test]
    fn cofactor_divergence_vanishes_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for &d in &[2usize, 3] {
            for _ in 0..20 {
                let jac = Jacobian::new(
                    d,
                    random_well_conditioned(&mut rng, d),
                    Orientation::PositionByLabel,
                )
                .unwrap();
                let mut hess = vec![vec![0.0; d * d]; d];
                for k in 0..d {
                    for a in 0..d {
                        for b in a..d {
                            let v = 0.4 * (rng.gen::<f64>() - 0.5);
                            hess[k][a * d + b] = v;
                            hess[k][b * d + a] = v;
                        }
                    }
                }
                let res = volume_cofactor_divergence(&jac, &hess).unwrap();
                for r in res {
                    assert!(r.abs() < 1e-10, "cofactor divergence leak {r}");
                }
            }
        }
    }

    #[test]
    fn continuity_exact_cases() {
        let grid = Grid1D::new(32, 1.0, Boundary::Periodic).unwrap();
        let uniform = CurrentLevel {
            j0: vec![1.0; 32],
            j1: vec![0.0; 32],
        };
        let levels = vec![uniform.clone(), uniform.clone(), uniform];
        let r = continuity_residual(&levels, 0.1, &grid, TimeStencil::Central).unwrap();
        assert_eq!(r, 0.0);

        // Exact translation y = x - u t: j0 = 1, j1 = u at every level.
        let level = CurrentLevel {
            j0: vec![1.0; 32],
            j1: vec![0.4; 32],
        };
        let levels = vec![level.clone(), level.clone(), level];
        let r = continuity_residual(&levels, 0.1, &grid, TimeStencil::Central).unwrap();
        assert!(r <= 1e-12);

        assert!(continuity_residual(&levels[..2], 0.1, &grid, TimeStencil::Central).is_err());
    }

    #[test]
    fn mass_scaled_current_scales_the_residual() {
        // Replacing the volume form by M times itself scales the current and
        // its continuity defect by exactly M.
        let grid = Grid1D::new(32, 1.0, Boundary::Periodic).unwrap();
        let mass = 2.7;
        let k = 2.0 * std::f64::consts::PI;
        let mk = |scale: f64, phase: f64| -> CurrentLevel {
            let j0: Vec<f64> = (0..32)
                .map(|i| scale * (1.0 + 0.1 * (grid.node(i) * k + phase).sin()))
                .collect();
            let j1: Vec<f64> = (0..32)
                .map(|i| scale * 0.05 * (grid.node(i) * k + phase).cos())
                .collect();
            CurrentLevel { j0, j1 }
        };
        let base = vec![mk(1.0, -0.1), mk(1.0, 0.0), mk(1.0, 0.1)];
        let scaled = vec![mk(mass, -0.1), mk(mass, 0.0), mk(mass, 0.1)];
        let r1 = continuity_residual(&base, 0.05, &grid, TimeStencil::Central).unwrap();
        let r2 = continuity_residual(&scaled, 0.05, &grid, TimeStencil::Central).unwrap();
        assert!(
            (r2 - mass * r1).abs() <= 1e-12 * r2.abs().max(1.0),
            "{r2} vs {}",
            mass * r1
        );
    }

    #[test]
    fn temperature_contraction() {
        assert!((temperature_euler(0.7, &[0.1], &[0.5], 1.0) - 0.75).abs() < 1e-15);
        // Rest-frame clock: tau = T0 t / beta gives back T0.
        let t0 = 1.3;
        let beta = 2.0;
        assert!((temperature_euler(t0 / beta, &[0.0], &[0.0], beta) - t0).abs() < 1e-15);
    }

    #[test]
    fn kinematic_sample_guards_its_identities() {
        let ok = KinematicSample::new(2.0, 0.5, vec![0.3], None, vec![2.0, 0.6]);
        assert!(ok.is_ok());
        let bad = KinematicSample::new(2.0, 0.6, vec![0.3], None, vec![2.0, 0.6]);
        assert!(bad.is_err());
    }

    #[test]
    fn kinematic_sample_from_point_data() {
        // Thermal point: all identities assembled and cross-checked inside.
        let s = KinematicSample::from_euler_1d(-0.8, 2.0, Some((0.6, 0.1)), 1.0).unwrap();
        assert!((s.rho - 2.0).abs() < 1e-15);
        assert!((s.vol - 0.5).abs() < 1e-15);
        assert!((s.velocity[0] - 0.4).abs() < 1e-15);
        assert!((s.current[1] - 0.8).abs() < 1e-15);
        assert!((s.temperature.unwrap() - (0.6 + 0.4 * 0.1)).abs() < 1e-15);
        // Barotropic point: no temperature attached.
        let s = KinematicSample::from_euler_1d(0.0, 1.0, None, 1.0).unwrap();
        assert!(s.temperature.is_none());
        assert!(KinematicSample::from_euler_1d(0.0, -1.0, None, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn inverse_pair_identity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let jac = Jacobian::new(
                3,
                random_well_conditioned(&mut rng, 3),
                Orientation::PositionByLabel,
            ).unwrap();
            let vol = molar_volume(&jac).unwrap();
            let rho = density_from_jacobian(&jac.inverse().unwrap()).unwrap();
            prop_assert!((vol * rho - 1.0).abs() < 1e-12);
        }

        #[test]
        fn current_time_component_is_density(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(10_000));
            let entries = random_well_conditioned(&mut rng, 3);
            let jac = Jacobian::new(3, entries.clone(), Orientation::LabelByPosition).unwrap();
            let mut grad = [[0.0; 4]; 3];
            for a in 0..3 {
                grad[a][0] = 0.3 * (rng.gen::<f64>() - 0.5);
                for k in 0..3 {
                    grad[a][k + 1] = entries[a * 3 + k];
                }
            }
            let j = matter_current_3d(&grad);
            prop_assert!((j[0] - density_from_jacobian(&jac).unwrap()).abs() < 1e-12);
            // j^k = rho v^k with v from the inverse map.
            let ydot = [grad[0][0], grad[1][0], grad[2][0]];
            let v = velocity_euler(&ydot, &jac).unwrap();
            for k in 0..3 {
                prop_assert!((j[k + 1] - j[0] * v[k]).abs() < 1e-11);
            }
        }
    }
}
