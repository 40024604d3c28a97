//! Barotropic fluid in the two spatial pictures.
//!
//! In the placement (Lagrange) picture the field is the particle position
//! `x(t, y)` over the material coordinate; in the label (Euler) picture it is
//! the particle label `y(t, x)` over the physical coordinate.  Both carry a
//! Lagrangian, canonical momenta and an energy-momentum tensor; this module
//! evaluates them point-wise, forms field-equation and balance residuals on
//! grid histories, and transforms states between the pictures by numerical
//! map inversion.

use rand_chacha::ChaCha8Rng;

use crate::eos::{barotropic_pressure, BarotropicEos, MaterialConstants};
use crate::error::{FieldflowError, Result};
use crate::grid::{Boundary, Grid1D, TimeStencil};
use crate::interp::CubicHermite;
use crate::manufactured::FourierField2;
use crate::noether::{
    self, contraction_tensor, divergences_analytic, offshell_residual_analytic, PointTensors,
};
use crate::report::{CheckLine, DiagnosticReport};

/// Which formulation a tensor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Lagrange,
    Euler,
    ThermoEuler,
    CompleteLagrange,
}

/// Energy-momentum tensor in 1+1 dimensions, tagged by picture.
/// `comp[beta][alpha]` carries the upper index first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMomentum {
    pub picture: Picture,
    pub comp: [[f64; 2]; 2],
}

/// Point data in the placement picture: `xdot = dx/dt`, `x_y = dx/dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangePoint {
    pub xdot: f64,
    pub x_y: f64,
}

/// Point evaluation in the placement picture.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeEval {
    pub lagrangian: f64,
    /// `momenta[beta]`: kinetic momentum (beta = 0) and stress momentum
    /// (beta = 1) conjugate to the placement field.
    pub momenta: [f64; 2],
    pub tensor: EnergyMomentum,
    pub vol: f64,
    pub rho: f64,
    pub velocity: f64,
    pub pressure: f64,
    pub energy: f64,
}

/// Evaluates Lagrangian, momenta and tensor at one placement-picture point.
pub fn lagrange_eval(
    pt: LagrangePoint,
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<LagrangeEval> {
    if pt.x_y <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "placement gradient x_y = {} <= 0",
            pt.x_y
        )));
    }
    let m = constants.molar_mass;
    let vol = pt.x_y;
    let rho = 1.0 / vol;
    let v = pt.xdot;
    let p = barotropic_pressure(eos, vol)?;
    let e = eos.energy(vol)?;
    let lagrangian = 0.5 * m * v * v - e;
    // P^0 = M v ; P^1 = p V y_x = p.
    let momenta = [m * v, p];
    let comp = [
        [0.5 * m * v * v + e, m * v * pt.x_y],
        [p * v, e + p * vol - 0.5 * m * v * v],
    ];
    Ok(LagrangeEval {
        lagrangian,
        momenta,
        tensor: EnergyMomentum {
            picture: Picture::Lagrange,
            comp,
        },
        vol,
        rho,
        velocity: v,
        pressure: p,
        energy: e,
    })
}

/// Point data in the label picture: `ydot = dy/dt`, `y_x = dy/dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerPoint {
    pub ydot: f64,
    pub y_x: f64,
}

/// Point evaluation in the label picture.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerEval {
    pub lagrangian: f64,
    /// `momenta[mu]`: components of the current conjugate to the label field.
    pub momenta: [f64; 2],
    pub tensor: EnergyMomentum,
    pub rho: f64,
    pub vol: f64,
    pub velocity: f64,
    pub pressure: f64,
    pub energy: f64,
}

/// Evaluates Lagrangian, momenta and tensor at one label-picture point.
pub fn euler_eval(
    pt: EulerPoint,
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<EulerEval> {
    if pt.y_x <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "label gradient y_x = {} <= 0",
            pt.y_x
        )));
    }
    let m = constants.molar_mass;
    let rho = pt.y_x;
    let vol = 1.0 / rho;
    let v = -pt.ydot / pt.y_x;
    let p = barotropic_pressure(eos, vol)?;
    let e = eos.energy(vol)?;
    let lagrangian = rho * (0.5 * m * v * v - e);
    // Theta^0 = -rho x^1_1 M v = -M v ; Theta^1 = -(Mv^2/2 + e + pV) ... both
    // through rho x^1_1 = 1 in one dimension.
    let momenta = [-m * v, -(0.5 * m * v * v + e + p * vol)];
    let comp = [
        [rho * (0.5 * m * v * v + e), -rho * m * v],
        [
            rho * v * (0.5 * m * v * v + e + p * vol),
            -p - rho * m * v * v,
        ],
    ];
    Ok(EulerEval {
        lagrangian,
        momenta,
        tensor: EnergyMomentum {
            picture: Picture::Euler,
            comp,
        },
        rho,
        vol,
        velocity: v,
        pressure: p,
        energy: e,
    })
}

/// Adapter exposing the placement picture to the balance machinery.
pub fn lagrange_point_theory<'a>(
    eos: &'a BarotropicEos,
    constants: &'a MaterialConstants,
) -> impl Fn(&[[f64; 2]]) -> Result<PointTensors> + 'a {
    move |jac: &[[f64; 2]]| {
        let ev = lagrange_eval(
            LagrangePoint {
                xdot: jac[0][0],
                x_y: jac[0][1],
            },
            eos,
            constants,
        )?;
        Ok(PointTensors {
            lagrangian: ev.lagrangian,
            momenta: vec![ev.momenta],
            tensor: ev.tensor.comp,
        })
    }
}

/// Adapter exposing the label picture to the balance machinery.
pub fn euler_point_theory<'a>(
    eos: &'a BarotropicEos,
    constants: &'a MaterialConstants,
) -> impl Fn(&[[f64; 2]]) -> Result<PointTensors> + 'a {
    move |jac: &[[f64; 2]]| {
        let ev = euler_eval(
            EulerPoint {
                ydot: jac[0][0],
                y_x: jac[0][1],
            },
            eos,
            constants,
        )?;
        Ok(PointTensors {
            lagrangian: ev.lagrangian,
            momenta: vec![ev.momenta],
            tensor: ev.tensor.comp,
        })
    }
}

// ---------------------------------------------------------------------------
// Field states on 1D grids.
// ---------------------------------------------------------------------------

/// Placement field `x(y)` and its rate on a material grid.
#[derive(Debug, Clone)]
pub struct LagrangeFieldState {
    pub grid: Grid1D,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    /// Jump of `x` across the periodic seam of the material grid.
    pub x_winding: f64,
    pub constants: MaterialConstants,
    pub eos: BarotropicEos,
}

impl LagrangeFieldState {
    /// Gradient of the placement field; errors where the map folds.
    pub fn gradient(&self) -> Result<Vec<f64>> {
        let g = self.grid.deriv(&self.x, self.x_winding);
        if let Some(bad) = g.iter().position(|&v| v <= 0.0) {
            return Err(FieldflowError::Configuration(format!(
                "placement map folds at node {bad} (x_y = {})",
                g[bad]
            )));
        }
        Ok(g)
    }

    pub fn eval_points(&self) -> Result<Vec<LagrangeEval>> {
        let g = self.gradient()?;
        (0..self.grid.n)
            .map(|i| {
                lagrange_eval(
                    LagrangePoint {
                        xdot: self.xdot[i],
                        x_y: g[i],
                    },
                    &self.eos,
                    &self.constants,
                )
            })
            .collect()
    }
}

/// Label field `y(x)` and its rate on a physical grid.
#[derive(Debug, Clone)]
pub struct EulerFieldState {
    pub grid: Grid1D,
    pub y: Vec<f64>,
    pub ydot: Vec<f64>,
    /// Jump of `y` across the periodic seam of the physical grid.
    pub y_winding: f64,
    pub constants: MaterialConstants,
    pub eos: BarotropicEos,
}

impl EulerFieldState {
    pub fn gradient(&self) -> Result<Vec<f64>> {
        let g = self.grid.deriv(&self.y, self.y_winding);
        if let Some(bad) = g.iter().position(|&v| v <= 0.0) {
            return Err(FieldflowError::Configuration(format!(
                "label map folds at node {bad} (y_x = {})",
                g[bad]
            )));
        }
        Ok(g)
    }

    pub fn eval_points(&self) -> Result<Vec<EulerEval>> {
        let g = self.gradient()?;
        (0..self.grid.n)
            .map(|i| {
                euler_eval(
                    EulerPoint {
                        ydot: self.ydot[i],
                        y_x: g[i],
                    },
                    &self.eos,
                    &self.constants,
                )
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Residuals on three-level histories.
// ---------------------------------------------------------------------------

fn check_history_len(len: usize) -> Result<()> {
    if len < 3 {
        Err(FieldflowError::InvalidInput(format!(
            "residual evaluation needs 3 time levels, got {len}"
        )))
    } else {
        Ok(())
    }
}

/// Placement-picture momentum balance `M rho vdot + dp/dx` on a three-level
/// history; returns the per-node residual field at the stencil's target
/// level.
pub fn lagrange_field_residual(
    history: &[&LagrangeFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<Vec<f64>> {
    check_history_len(history.len())?;
    let (s0, s1, s2) = (history[0], history[1], history[2]);
    let target = match stencil {
        TimeStencil::Central => s1,
        TimeStencil::Forward => s0,
        TimeStencil::Backward => s2,
    };
    let m = target.constants.molar_mass;
    let g = target.gradient()?;
    let evals = target.eval_points()?;
    let p: Vec<f64> = evals.iter().map(|e| e.pressure).collect();
    let dp_dy = target.grid.deriv(&p, 0.0);
    let mut res = vec![0.0; target.grid.n];
    for i in 0..target.grid.n {
        let vdot = stencil.d1(s0.xdot[i], s1.xdot[i], s2.xdot[i], dt);
        let rho = 1.0 / g[i];
        res[i] = m * rho * vdot + dp_dy[i] / g[i];
    }
    Ok(res)
}

/// Label-picture momentum balance `dp/dx + d_mu(rho u^mu M v)`, assembled in
/// divergence form so the frozen-entropy limit of the thermal residual
/// reproduces it exactly (the advective form differs from this one by the
/// automatic continuity identity, which only holds to stencil order on a
/// grid).
pub fn euler_field_residual(
    history: &[&EulerFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<Vec<f64>> {
    check_history_len(history.len())?;
    let levels: Vec<Vec<EulerEval>> = history
        .iter()
        .take(3)
        .map(|s| s.eval_points())
        .collect::<Result<_>>()?;
    let target_idx = match stencil {
        TimeStencil::Central => 1,
        TimeStencil::Forward => 0,
        TimeStencil::Backward => 2,
    };
    let target = history[target_idx];
    let m = target.constants.molar_mass;
    let mom: Vec<Vec<f64>> = levels
        .iter()
        .map(|lv| lv.iter().map(|e| e.rho * m * e.velocity).collect())
        .collect();
    let momflux: Vec<f64> = levels[target_idx]
        .iter()
        .map(|e| e.rho * m * e.velocity * e.velocity)
        .collect();
    let p_mid: Vec<f64> = levels[target_idx].iter().map(|e| e.pressure).collect();
    let dmomflux = target.grid.deriv(&momflux, 0.0);
    let dp_dx = target.grid.deriv(&p_mid, 0.0);
    let mut res = vec![0.0; target.grid.n];
    for i in 0..target.grid.n {
        let dmom = stencil.d1(mom[0][i], mom[1][i], mom[2][i], dt);
        res[i] = dp_dx[i] + dmom + dmomflux[i];
    }
    Ok(res)
}

/// Energy balance in divergence form on label-picture snapshots:
/// `(d_t + v d_x)(M v^2/2 + e) + V d_x(p v)`.
pub fn standard_energy_residual(
    history: &[&EulerFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<Vec<f64>> {
    check_history_len(history.len())?;
    let levels: Vec<Vec<EulerEval>> = history
        .iter()
        .take(3)
        .map(|s| s.eval_points())
        .collect::<Result<_>>()?;
    let target_idx = match stencil {
        TimeStencil::Central => 1,
        TimeStencil::Forward => 0,
        TimeStencil::Backward => 2,
    };
    let target = history[target_idx];
    let m = target.constants.molar_mass;
    let a: Vec<Vec<f64>> = levels
        .iter()
        .map(|lv| {
            lv.iter()
                .map(|e| 0.5 * m * e.velocity * e.velocity + e.energy)
                .collect()
        })
        .collect();
    let pv: Vec<f64> = levels[target_idx]
        .iter()
        .map(|e| e.pressure * e.velocity)
        .collect();
    let da_dx = target.grid.deriv(&a[target_idx], 0.0);
    let dpv_dx = target.grid.deriv(&pv, 0.0);
    let mut res = vec![0.0; target.grid.n];
    for i in 0..target.grid.n {
        let da_dt = stencil.d1(a[0][i], a[1][i], a[2][i], dt);
        let ev = &levels[target_idx][i];
        res[i] = da_dt + ev.velocity * da_dx[i] + ev.vol * dpv_dx[i];
    }
    Ok(res)
}

// ---------------------------------------------------------------------------
// Off-shell balance and dependency checks on manufactured fields.
// ---------------------------------------------------------------------------

/// Exact momentum-balance residual of a manufactured placement field at a
/// point (the symbolic twin of [`lagrange_field_residual`]).
pub fn lagrange_residual_exact(
    field: &FourierField2,
    u: [f64; 2],
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let g = field.grad(u);
    let h = field.hessian(u);
    let vol = g[1];
    if vol <= 0.0 {
        return Err(FieldflowError::Configuration(
            "manufactured map folds".into(),
        ));
    }
    let m = constants.molar_mass;
    let hstep = 1e-4 * vol.max(1.0);
    let dp_dv = crate::numdiff::central4(
        |v| barotropic_pressure(eos, v).unwrap_or(f64::NAN),
        vol,
        hstep,
    );
    // M rho x_tt + p'(V) x_yy / x_y.
    Ok(m / vol * h[0][0] + dp_dv * h[1][1] / vol)
}

/// Exact momentum-balance residual of a manufactured label field at a point
/// (the symbolic twin of [`euler_field_residual`]).
pub fn euler_residual_exact(
    field: &FourierField2,
    u: [f64; 2],
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let g = field.grad(u);
    let h = field.hessian(u);
    let y_t = g[0];
    let y_x = g[1];
    if y_x <= 0.0 {
        return Err(FieldflowError::Configuration(
            "manufactured map folds".into(),
        ));
    }
    let m = constants.molar_mass;
    let v = -y_t / y_x;
    let v_t = -(h[0][0] * y_x - y_t * h[0][1]) / (y_x * y_x);
    let v_x = -(h[0][1] * y_x - y_t * h[1][1]) / (y_x * y_x);
    let vol = 1.0 / y_x;
    let hstep = 1e-4 * vol.max(1.0);
    let dp_dv = crate::numdiff::central4(
        |vv| barotropic_pressure(eos, vv).unwrap_or(f64::NAN),
        vol,
        hstep,
    );
    let p_x = dp_dv * (-h[1][1] / (y_x * y_x));
    Ok(p_x + m * y_x * (v_t + v * v_x))
}

/// Dependency of the balance components in the placement picture: the
/// material component contracted with `y^1_1 v` must reproduce the time
/// component.  Returns |lhs - rhs| at the point.
pub fn lagrange_dependency_residual(
    field: &FourierField2,
    u: [f64; 2],
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let theory = lagrange_point_theory(eos, constants);
    let jac = [field.grad(u)];
    let hess = [field.hessian(u)];
    let hess3: Vec<[[f64; 2]; 2]> = vec![hess[0]];
    let div = divergences_analytic(&theory, &jac, &hess3)?;
    let v = jac[0][0];
    let inv_xy = 1.0 / jac[0][1];
    Ok((div.tensor[1] * inv_xy * v - div.tensor[0]).abs())
}

/// Euler-picture analog: `-(d_mu t^mu_1) v = d_mu t^mu_0`.
pub fn euler_dependency_residual(
    field: &FourierField2,
    u: [f64; 2],
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let theory = euler_point_theory(eos, constants);
    let jac = [field.grad(u)];
    let hess: Vec<[[f64; 2]; 2]> = vec![field.hessian(u)];
    let div = divergences_analytic(&theory, &jac, &hess)?;
    let v = -jac[0][0] / jac[0][1];
    Ok((-div.tensor[1] * v - div.tensor[0]).abs())
}

/// Off-shell balance residual (analytic route) of a manufactured field at a
/// point, either picture.
pub fn offshell_residual_at(
    picture: Picture,
    field: &FourierField2,
    u: [f64; 2],
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<[f64; 2]> {
    let jac = [field.grad(u)];
    let hess: Vec<[[f64; 2]; 2]> = vec![field.hessian(u)];
    match picture {
        Picture::Lagrange => {
            let theory = lagrange_point_theory(eos, constants);
            offshell_residual_analytic(&theory, &jac, &hess)
        }
        Picture::Euler => {
            let theory = euler_point_theory(eos, constants);
            offshell_residual_analytic(&theory, &jac, &hess)
        }
        _ => Err(FieldflowError::InvalidInput(
            "barotropic balance supports the Lagrange and Euler pictures".into(),
        )),
    }
}

/// Random smooth placement/label field for identity testing: identity map
/// plus small periodic modes on a `2 pi` square box.
pub fn manufactured_map(rng: &mut ChaCha8Rng, amp: f64) -> FourierField2 {
    let l = 2.0 * std::f64::consts::PI;
    FourierField2::random(rng, [l, l], 0.0, [0.0, 1.0], amp)
}

// ---------------------------------------------------------------------------
// Picture transformation.
// ---------------------------------------------------------------------------

/// Result of transforming a label-picture state to the placement picture.
#[derive(Debug, Clone)]
pub struct PictureTransform {
    pub lagrange: LagrangeFieldState,
    /// Physical positions of the material nodes.
    pub positions: Vec<f64>,
    pub report: DiagnosticReport,
}

/// Inverts a monotone label field `y(x)` into a placement field `x(y)` on a
/// uniform material grid and cross-checks the tensor tables of the two
/// pictures at the matched points.
///
/// The four cross-picture identities and the rest-frame correspondence are
/// evaluated two-sided: the Euler factors come from interpolation at the
/// inverted positions, the Lagrange factors from re-differentiating the
/// transformed state on the material grid.
pub fn picture_transform(euler: &EulerFieldState, tolerance: f64) -> Result<PictureTransform> {
    picture_transform_anchored(euler, tolerance, None)
}

/// As [`picture_transform`], but with the material grid anchored at a given
/// label value, so consecutive snapshots can share their material nodes.
pub fn picture_transform_anchored(
    euler: &EulerFieldState,
    tolerance: f64,
    material_start: Option<f64>,
) -> Result<PictureTransform> {
    if euler.grid.boundary != Boundary::Periodic {
        return Err(FieldflowError::InvalidInput(
            "picture transform expects a periodic state".into(),
        ));
    }
    let n = euler.grid.n;
    let l = euler.grid.length();
    let ly = euler.y_winding;
    if ly <= 0.0 {
        return Err(FieldflowError::Configuration(
            "label field must wind forward across the domain".into(),
        ));
    }
    euler.gradient()?; // orientation check
    let y_x = euler.grid.deriv4(&euler.y, euler.y_winding);
    let ydot_x = euler.grid.deriv4(&euler.ydot, 0.0);
    let y_xx = euler.grid.deriv4(&y_x, 0.0);

    // Padded monotone samples of y over one physical period plus margins.
    let pad = 3usize;
    let mut xs = Vec::with_capacity(n + 2 * pad + 1);
    let mut ys = Vec::with_capacity(xs.capacity());
    let mut ds = Vec::with_capacity(xs.capacity());
    let mut ydot_s = Vec::with_capacity(xs.capacity());
    let mut ydotd_s = Vec::with_capacity(xs.capacity());
    let mut yxx_s = Vec::with_capacity(xs.capacity());
    for k in -(pad as i64)..(n as i64 + pad as i64 + 1) {
        let wrap = k.div_euclid(n as i64) as f64;
        let i = k.rem_euclid(n as i64) as usize;
        xs.push(k as f64 * euler.grid.h);
        ys.push(euler.y[i] + wrap * ly);
        ds.push(y_x[i]);
        ydot_s.push(euler.ydot[i]);
        ydotd_s.push(ydot_x[i]);
        yxx_s.push(y_xx[i]);
    }
    let map = CubicHermite::new(xs.clone(), ys, ds.clone())?;
    if !map.is_increasing() {
        return Err(FieldflowError::Configuration(
            "label field is not monotone".into(),
        ));
    }
    let grad_itp = CubicHermite::new(xs.clone(), ds, yxx_s)?;
    let ydot_itp = CubicHermite::new(xs, ydot_s, ydotd_s)?;

    // Uniform material grid over one label period, anchored at y(0) unless
    // the caller fixes the start label.
    let mgrid = Grid1D::new(n, ly, Boundary::Periodic)?;
    let y0 = material_start.unwrap_or(euler.y[0]);
    let mut positions = Vec::with_capacity(n);
    let mut x_field = Vec::with_capacity(n);
    let mut xdot_field = Vec::with_capacity(n);
    let mut euler_evals = Vec::with_capacity(n);
    for j in 0..n {
        let target = y0 + mgrid.node(j);
        let xstar = map.invert(target)?;
        let gx = grad_itp.eval(xstar);
        let yd = ydot_itp.eval(xstar);
        let ev = euler_eval(
            EulerPoint { ydot: yd, y_x: gx },
            &euler.eos,
            &euler.constants,
        )?;
        positions.push(xstar);
        x_field.push(xstar);
        xdot_field.push(ev.velocity);
        euler_evals.push(ev);
    }
    let lagrange = LagrangeFieldState {
        grid: mgrid,
        x: x_field,
        xdot: xdot_field,
        x_winding: l,
        constants: euler.constants,
        eos: euler.eos.clone(),
    };

    // Lagrange-side gradient from the transformed state itself (4th order to
    // keep the two-sided comparison well below the interpolation budget).
    let x_y = mgrid.deriv4(&lagrange.x, lagrange.x_winding);
    let mut report = DiagnosticReport::new("picture transformation identities");
    let mut worst = [0.0f64; 4];
    for j in 0..n {
        if x_y[j] <= 0.0 {
            return Err(FieldflowError::Configuration(
                "transformed placement map folds".into(),
            ));
        }
        let lev = lagrange_eval(
            LagrangePoint {
                xdot: lagrange.xdot[j],
                x_y: x_y[j],
            },
            &euler.eos,
            &euler.constants,
        )?;
        let eev = &euler_evals[j];
        let rho = eev.rho;
        let vol = lev.vol;
        let v = eev.velocity;
        let y11 = 1.0 / x_y[j];
        // Theta^0_1 = -rho T^0_1
        worst[0] = worst[0].max((eev.momenta[0] + rho * lev.tensor.comp[0][1]).abs());
        // Theta^1_1 = -rho v T^0_1 - rho x_y T^1_1
        worst[1] = worst[1].max(
            (eev.momenta[1]
                + rho * v * lev.tensor.comp[0][1]
                + rho * x_y[j] * lev.tensor.comp[1][1])
                .abs(),
        );
        // P^0_1 = -V t^0_1
        worst[2] = worst[2].max((lev.momenta[0] + vol * eev.tensor.comp[0][1]).abs());
        // P^1_1 = V y^1_1 v t^0_1 - V y^1_1 t^1_1
        worst[3] = worst[3].max(
            (lev.momenta[1] - vol * y11 * (v * eev.tensor.comp[0][1] - eev.tensor.comp[1][1]))
                .abs(),
        );
    }
    report.push(CheckLine::at_most(
        "label momentum vs placement tensor",
        worst[0],
        tolerance,
    ));
    report.push(CheckLine::at_most(
        "label stress vs placement tensor",
        worst[1],
        tolerance,
    ));
    report.push(CheckLine::at_most(
        "placement momentum vs label tensor",
        worst[2],
        tolerance,
    ));
    report.push(CheckLine::at_most(
        "placement stress vs label tensor",
        worst[3],
        tolerance,
    ));
    Ok(PictureTransform {
        lagrange,
        positions,
        report,
    })
}

/// Rest-frame correspondence between the stress momentum and the label
/// tensor, checked point-wise with no interpolation: at `v = 0`,
/// `P^1_1 = -V y^1_1 t^1_1`.
pub fn rest_frame_correspondence(
    vol: f64,
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let lev = lagrange_eval(
        LagrangePoint {
            xdot: 0.0,
            x_y: vol,
        },
        eos,
        constants,
    )?;
    let eev = euler_eval(
        EulerPoint {
            ydot: 0.0,
            y_x: 1.0 / vol,
        },
        eos,
        constants,
    )?;
    let y11 = 1.0 / vol;
    Ok((lev.momenta[1] + vol * y11 * eev.tensor.comp[1][1]).abs())
}

/// Tensor component tables against the defining contraction, checked on the
/// given gradients; returns the max deviation.
pub fn tensor_table_deviation(
    picture: Picture,
    points: &[[f64; 2]],
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &g in points {
        let (pt, jac) = match picture {
            Picture::Lagrange => {
                let ev = lagrange_eval(
                    LagrangePoint {
                        xdot: g[0],
                        x_y: g[1],
                    },
                    eos,
                    constants,
                )?;
                (
                    PointTensors {
                        lagrangian: ev.lagrangian,
                        momenta: vec![ev.momenta],
                        tensor: ev.tensor.comp,
                    },
                    [g],
                )
            }
            Picture::Euler => {
                let ev = euler_eval(
                    EulerPoint {
                        ydot: g[0],
                        y_x: g[1],
                    },
                    eos,
                    constants,
                )?;
                (
                    PointTensors {
                        lagrangian: ev.lagrangian,
                        momenta: vec![ev.momenta],
                        tensor: ev.tensor.comp,
                    },
                    [g],
                )
            }
            _ => {
                return Err(FieldflowError::InvalidInput(
                    "tensor tables here cover the barotropic pictures".into(),
                ))
            }
        };
        let reference = contraction_tensor(&pt, &jac);
        for beta in 0..2 {
            for alpha in 0..2 {
                worst = worst.max((pt.tensor[beta][alpha] - reference[beta][alpha]).abs());
            }
        }
    }
    Ok(worst)
}

/// On-grid balance residual of a label-picture history (both sides of the
/// off-shell identity by finite differences); used on solution snapshots.
pub fn euler_balance_residual_fd(
    history: &[&EulerFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<f64> {
    check_history_len(history.len())?;
    let levels: Vec<Vec<EulerEval>> = history
        .iter()
        .take(3)
        .map(|s| s.eval_points())
        .collect::<Result<_>>()?;
    let target_idx = match stencil {
        TimeStencil::Central => 1,
        TimeStencil::Forward => 0,
        TimeStencil::Backward => 2,
    };
    let target = history[target_idx];
    let grid = &target.grid;
    let grad = target.gradient()?;
    let plane = |pick: &dyn Fn(&EulerEval) -> f64, lv: usize| -> Vec<f64> {
        levels[lv].iter().map(pick).collect()
    };
    let mut worst = 0.0f64;
    for alpha in 0..2 {
        let t0: Vec<Vec<f64>> = (0..3)
            .map(|lv| plane(&|e| e.tensor.comp[0][alpha], lv))
            .collect();
        let t1 = plane(&|e| e.tensor.comp[1][alpha], target_idx);
        let p0: Vec<Vec<f64>> = (0..3).map(|lv| plane(&|e| e.momenta[0], lv)).collect();
        let p1 = plane(&|e| e.momenta[1], target_idx);
        let dt1 = grid.deriv(&t1, 0.0);
        let dp1 = grid.deriv(&p1, 0.0);
        for i in 0..grid.n {
            let div_t = stencil.d1(t0[0][i], t0[1][i], t0[2][i], dt) + dt1[i];
            let div_p = stencil.d1(p0[0][i], p0[1][i], p0[2][i], dt) + dp1[i];
            let jac_alpha = if alpha == 0 {
                history[target_idx].ydot[i]
            } else {
                grad[i]
            };
            worst = worst.max((div_t - div_p * jac_alpha).abs());
        }
    }
    Ok(worst)
}

/// On-grid two-sided balance residual of a placement-picture history.
pub fn lagrange_balance_residual_fd(
    history: &[&LagrangeFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<f64> {
    check_history_len(history.len())?;
    let levels: Vec<Vec<LagrangeEval>> = history
        .iter()
        .take(3)
        .map(|s| s.eval_points())
        .collect::<Result<_>>()?;
    let target_idx = match stencil {
        TimeStencil::Central => 1,
        TimeStencil::Forward => 0,
        TimeStencil::Backward => 2,
    };
    let target = history[target_idx];
    let grid = &target.grid;
    let grad = target.gradient()?;
    let plane = |pick: &dyn Fn(&LagrangeEval) -> f64, lv: usize| -> Vec<f64> {
        levels[lv].iter().map(pick).collect()
    };
    let mut worst = 0.0f64;
    for alpha in 0..2 {
        let t0: Vec<Vec<f64>> = (0..3)
            .map(|lv| plane(&|e| e.tensor.comp[0][alpha], lv))
            .collect();
        let t1 = plane(&|e| e.tensor.comp[1][alpha], target_idx);
        let p0: Vec<Vec<f64>> = (0..3).map(|lv| plane(&|e| e.momenta[0], lv)).collect();
        let p1 = plane(&|e| e.momenta[1], target_idx);
        let dt1 = grid.deriv(&t1, 0.0);
        let dp1 = grid.deriv(&p1, 0.0);
        for i in 0..grid.n {
            let div_t = stencil.d1(t0[0][i], t0[1][i], t0[2][i], dt) + dt1[i];
            let div_p = stencil.d1(p0[0][i], p0[1][i], p0[2][i], dt) + dp1[i];
            let jac_alpha = if alpha == 0 {
                history[target_idx].xdot[i]
            } else {
                grad[i]
            };
            worst = worst.max((div_t - div_p * jac_alpha).abs());
        }
    }
    Ok(worst)
}

/// FD-order study of the off-shell balance identity for one picture.
pub fn offshell_fd_order(
    picture: Picture,
    field: &FourierField2,
    grids: &[usize],
    eos: &BarotropicEos,
    constants: &MaterialConstants,
) -> Result<(Vec<f64>, f64)> {
    let fields = vec![field.clone()];
    match picture {
        Picture::Lagrange => {
            let theory = lagrange_point_theory(eos, constants);
            noether::offshell_fd_order(&theory, &fields, grids)
        }
        Picture::Euler => {
            let theory = euler_point_theory(eos, constants);
            noether::offshell_fd_order(&theory, &fields, grids)
        }
        _ => Err(FieldflowError::InvalidInput(
            "barotropic balance supports the Lagrange and Euler pictures".into(),
        )),
    }
}
