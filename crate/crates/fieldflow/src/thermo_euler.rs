//! Thermo-hydrodynamics in the label picture with the material-time
//! potential.
//!
//! The fields are `z^0 = tau(t, x)` (material time) and `z^1 = y(t, x)`
//! (particle label).  Temperature is the substantial rate of the material
//! time scaled by the constant beta; the Lagrangian carries the Helmholtz
//! free energy as its potential part.

use rand_chacha::ChaCha8Rng;

use crate::barotropic::{EnergyMomentum, Picture};
use crate::eos::{thermal_response, MaterialConstants, ThermalEos};
use crate::error::{FieldflowError, Result};
use crate::grid::{Grid1D, TimeStencil};
use crate::manufactured::FourierField2;
use crate::noether::{self, PointTensors};
use crate::numdiff;

/// Point data: spacetime gradients of the two potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPointData {
    pub taudot: f64,
    pub tau_x: f64,
    pub ydot: f64,
    pub y_x: f64,
}

/// Point evaluation: Lagrangian, momenta, tensor and the local observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoEval {
    pub lagrangian: f64,
    /// `momenta[alpha][mu]`: current conjugate to potential `alpha` with
    /// upper spacetime index `mu`.
    pub momenta: [[f64; 2]; 2],
    pub tensor: EnergyMomentum,
    pub rho: f64,
    pub vol: f64,
    pub velocity: f64,
    pub temperature: f64,
    pub pressure: f64,
    pub entropy: f64,
    pub energy: f64,
    pub free_energy: f64,
}

/// Evaluates the thermo-hydrodynamic point tensors.  A non-positive
/// temperature is fatal: it means the state left the constitutive domain.
pub fn thermo_eval(
    pt: ThermoPointData,
    eos: &ThermalEos,
    constants: &MaterialConstants,
) -> Result<ThermoEval> {
    if pt.y_x <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "label gradient y_x = {} <= 0",
            pt.y_x
        )));
    }
    let m = constants.molar_mass;
    let beta = constants.beta;
    let rho = pt.y_x;
    let vol = 1.0 / rho;
    let v = -pt.ydot / pt.y_x;
    let temperature = beta * (pt.taudot + v * pt.tau_x);
    if !(temperature > 0.0) {
        return Err(FieldflowError::Domain(format!(
            "non-positive temperature T = {temperature} from the material-time rate"
        )));
    }
    let (p, s, e) = thermal_response(eos, vol, temperature)?;
    let f = e - temperature * s;
    let lagrangian = rho * (0.5 * m * v * v - f);
    // Momenta conjugate to tau: beta rho s u^mu.
    let m_tau = [beta * rho * s, beta * rho * s * v];
    // Momenta conjugate to y, with rho x^1_1 = 1 in one dimension.
    let drag = m * v + beta * s * pt.tau_x;
    let m_y = [-drag, -(drag * v + f + p * vol - 0.5 * m * v * v)];
    let e_tot = 0.5 * m * v * v + e;
    let comp = [
        [rho * e_tot, -rho * m * v],
        [rho * v * (e_tot + p * vol), -p - rho * m * v * v],
    ];
    Ok(ThermoEval {
        lagrangian,
        momenta: [m_tau, m_y],
        tensor: EnergyMomentum {
            picture: Picture::ThermoEuler,
            comp,
        },
        rho,
        vol,
        velocity: v,
        temperature,
        pressure: p,
        entropy: s,
        energy: e,
        free_energy: f,
    })
}

/// Adapter for the balance machinery: fields ordered (tau, y).
pub fn thermo_point_theory<'a>(
    eos: &'a ThermalEos,
    constants: &'a MaterialConstants,
) -> impl Fn(&[[f64; 2]]) -> Result<PointTensors> + 'a {
    move |jac: &[[f64; 2]]| {
        let ev = thermo_eval(
            ThermoPointData {
                taudot: jac[0][0],
                tau_x: jac[0][1],
                ydot: jac[1][0],
                y_x: jac[1][1],
            },
            eos,
            constants,
        )?;
        Ok(PointTensors {
            lagrangian: ev.lagrangian,
            momenta: vec![ev.momenta[0], ev.momenta[1]],
            tensor: ev.tensor.comp,
        })
    }
}

/// Potential fields and their rates on a physical grid.
#[derive(Debug, Clone)]
pub struct ThermoFieldState {
    pub grid: Grid1D,
    pub tau: Vec<f64>,
    pub y: Vec<f64>,
    pub taudot: Vec<f64>,
    pub ydot: Vec<f64>,
    /// Jump of `y` across the periodic seam; `tau` is taken spatially
    /// periodic.
    pub y_winding: f64,
    pub constants: MaterialConstants,
    pub eos: ThermalEos,
}

impl ThermoFieldState {
    pub fn eval_points(&self) -> Result<Vec<ThermoEval>> {
        let tau_x = self.grid.deriv(&self.tau, 0.0);
        let y_x = self.grid.deriv(&self.y, self.y_winding);
        (0..self.grid.n)
            .map(|i| {
                thermo_eval(
                    ThermoPointData {
                        taudot: self.taudot[i],
                        tau_x: tau_x[i],
                        ydot: self.ydot[i],
                        y_x: y_x[i],
                    },
                    &self.eos,
                    &self.constants,
                )
            })
            .collect()
    }

    /// Spacetime Jacobian determinant of the potentials per node; the four
    /// balance laws stay independent exactly while this is nonzero.
    pub fn potential_jacobian_det(&self) -> Result<Vec<f64>> {
        let tau_x = self.grid.deriv(&self.tau, 0.0);
        let y_x = self.grid.deriv(&self.y, self.y_winding);
        Ok((0..self.grid.n)
            .map(|i| self.taudot[i] * y_x[i] - tau_x[i] * self.ydot[i])
            .collect())
    }
}

fn check_history_len(len: usize) -> Result<()> {
    if len < 3 {
        Err(FieldflowError::InvalidInput(format!(
            "residual evaluation needs 3 time levels, got {len}"
        )))
    } else {
        Ok(())
    }
}

fn target_index(stencil: TimeStencil) -> usize {
    match stencil {
        TimeStencil::Central => 1,
        TimeStencil::Forward => 0,
        TimeStencil::Backward => 2,
    }
}

/// Entropy conservation residuals in both algebraic forms:
/// divergence form `d_mu(rho s u^mu)` and advective form `rho u^mu d_mu s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyResiduals {
    pub divergence_form: f64,
    pub advective_form: f64,
}

pub fn entropy_residual(
    history: &[&ThermoFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<EntropyResiduals> {
    check_history_len(history.len())?;
    let levels: Vec<Vec<ThermoEval>> = history
        .iter()
        .take(3)
        .map(|s| s.eval_points())
        .collect::<Result<_>>()?;
    let ti = target_index(stencil);
    let grid = &history[ti].grid;
    let rs: Vec<Vec<f64>> = levels
        .iter()
        .map(|lv| lv.iter().map(|e| e.rho * e.entropy).collect())
        .collect();
    let s_only: Vec<Vec<f64>> = levels
        .iter()
        .map(|lv| lv.iter().map(|e| e.entropy).collect())
        .collect();
    let rsv: Vec<f64> = levels[ti]
        .iter()
        .map(|e| e.rho * e.entropy * e.velocity)
        .collect();
    let drsv = grid.deriv(&rsv, 0.0);
    let ds_dx = grid.deriv(&s_only[ti], 0.0);
    let mut div_form = 0.0f64;
    let mut adv_form = 0.0f64;
    for i in 0..grid.n {
        let d_rs = stencil.d1(rs[0][i], rs[1][i], rs[2][i], dt);
        div_form = div_form.max((d_rs + drsv[i]).abs());
        let ds_dt = stencil.d1(s_only[0][i], s_only[1][i], s_only[2][i], dt);
        let ev = &levels[ti][i];
        adv_form = adv_form.max((ev.rho * (ds_dt + ev.velocity * ds_dx[i])).abs());
    }
    Ok(EntropyResiduals {
        divergence_form: div_form,
        advective_form: adv_form,
    })
}

/// Field-equation residual of the label potential:
/// `-(1/y_x) [dp/dx + d_mu(rho u^mu M v)] - beta (tau_x/y_x) d_mu(rho s u^mu)`
/// per node at the stencil target level.
pub fn thermo_field_residual(
    history: &[&ThermoFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<Vec<f64>> {
    check_history_len(history.len())?;
    let levels: Vec<Vec<ThermoEval>> = history
        .iter()
        .take(3)
        .map(|s| s.eval_points())
        .collect::<Result<_>>()?;
    let ti = target_index(stencil);
    let state = history[ti];
    let grid = &state.grid;
    let m = state.constants.molar_mass;
    let beta = state.constants.beta;
    let tau_x = grid.deriv(&state.tau, 0.0);
    let y_x = grid.deriv(&state.y, state.y_winding);

    let mom: Vec<Vec<f64>> = levels
        .iter()
        .map(|lv| lv.iter().map(|e| e.rho * m * e.velocity).collect())
        .collect();
    let rs: Vec<Vec<f64>> = levels
        .iter()
        .map(|lv| lv.iter().map(|e| e.rho * e.entropy).collect())
        .collect();
    let p_mid: Vec<f64> = levels[ti].iter().map(|e| e.pressure).collect();
    let momflux: Vec<f64> = levels[ti]
        .iter()
        .map(|e| e.rho * m * e.velocity * e.velocity)
        .collect();
    let rsv: Vec<f64> = levels[ti]
        .iter()
        .map(|e| e.rho * e.entropy * e.velocity)
        .collect();
    let dp = grid.deriv(&p_mid, 0.0);
    let dmomflux = grid.deriv(&momflux, 0.0);
    let drsv = grid.deriv(&rsv, 0.0);

    let mut res = vec![0.0; grid.n];
    for i in 0..grid.n {
        let d_mom = stencil.d1(mom[0][i], mom[1][i], mom[2][i], dt);
        let d_rs = stencil.d1(rs[0][i], rs[1][i], rs[2][i], dt);
        let balance = dp[i] + d_mom + dmomflux[i];
        let entropy_leak = d_rs + drsv[i];
        res[i] = -(balance + beta * tau_x[i] * entropy_leak) / y_x[i];
    }
    Ok(res)
}

/// First derivatives of the constitutive pair `(p, s)(V, T)` by high-order
/// differencing of the thermal response.
fn response_partials(eos: &ThermalEos, vol: f64, t: f64) -> Result<[f64; 4]> {
    let hv = numdiff::step_for(vol, 1e-4);
    let ht = numdiff::step_for(t, 1e-4);
    let p_of = |v: f64, tt: f64| thermal_response(eos, v, tt).map(|r| r.0);
    let s_of = |v: f64, tt: f64| thermal_response(eos, v, tt).map(|r| r.1);
    let p_v = numdiff::central4(|v| p_of(v, t).unwrap_or(f64::NAN), vol, hv);
    let p_t = numdiff::central4(|tt| p_of(vol, tt).unwrap_or(f64::NAN), t, ht);
    let s_v = numdiff::central4(|v| s_of(v, t).unwrap_or(f64::NAN), vol, hv);
    let s_t = numdiff::central4(|tt| s_of(vol, tt).unwrap_or(f64::NAN), t, ht);
    Ok([p_v, p_t, s_v, s_t])
}

/// Exact residual of the label field equation for a manufactured pair
/// `(tau, y)` at a spacetime point: the symbolic twin of
/// [`thermo_field_residual`].
pub fn thermo_residual_exact(
    tau: &FourierField2,
    y: &FourierField2,
    u: [f64; 2],
    eos: &ThermalEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let m = constants.molar_mass;
    let beta = constants.beta;
    let gt = tau.grad(u);
    let gy = y.grad(u);
    let ht = tau.hessian(u);
    let hy = y.hessian(u);
    let (y_t, y_x) = (gy[0], gy[1]);
    if y_x <= 0.0 {
        return Err(FieldflowError::Configuration(
            "manufactured map folds".into(),
        ));
    }
    let rho = y_x;
    let rho_t = hy[0][1];
    let rho_x = hy[1][1];
    let v = -y_t / y_x;
    let v_t = -(hy[0][0] * y_x - y_t * hy[0][1]) / (y_x * y_x);
    let v_x = -(hy[0][1] * y_x - y_t * hy[1][1]) / (y_x * y_x);
    let vol = 1.0 / y_x;
    let vol_t = -hy[0][1] / (y_x * y_x);
    let vol_x = -hy[1][1] / (y_x * y_x);
    let temp = beta * (gt[0] + v * gt[1]);
    if !(temp > 0.0) {
        return Err(FieldflowError::Domain(
            "manufactured state went cold".into(),
        ));
    }
    let temp_t = beta * (ht[0][0] + v_t * gt[1] + v * ht[0][1]);
    let temp_x = beta * (ht[0][1] + v_x * gt[1] + v * ht[1][1]);
    let (_, s, _) = thermal_response(eos, vol, temp)?;
    let [p_v, p_t, s_v, s_t] = response_partials(eos, vol, temp)?;
    let p_x = p_v * vol_x + p_t * temp_x;
    let s_dt = s_v * vol_t + s_t * temp_t;
    let s_dx = s_v * vol_x + s_t * temp_x;
    let d_mom = m * (rho_t * v + rho * v_t);
    let d_momflux = m * (rho_x * v * v + 2.0 * rho * v * v_x);
    let d_rs = rho_t * s + rho * s_dt;
    let d_rsv = rho_x * s * v + rho * s_dx * v + rho * s * v_x;
    Ok(-((p_x + d_mom + d_momflux) + beta * gt[1] * (d_rs + d_rsv)) / y_x)
}

/// Off-shell balance residual at a point (analytic route) for the
/// four-potential picture; also reports the spacetime Jacobian determinant of
/// the potentials, whose invertibility underpins the equivalence of balance
/// laws and field equations.
pub fn offshell_residual_at(
    tau: &FourierField2,
    y: &FourierField2,
    u: [f64; 2],
    eos: &ThermalEos,
    constants: &MaterialConstants,
) -> Result<([f64; 2], f64)> {
    let theory = thermo_point_theory(eos, constants);
    let jac = [tau.grad(u), y.grad(u)];
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if det.abs() < 1e-12 {
        return Err(FieldflowError::Configuration(
            "potential spacetime Jacobian is singular".into(),
        ));
    }
    let hess = vec![tau.hessian(u), y.hessian(u)];
    let res = noether::offshell_residual_analytic(&theory, &jac, &hess)?;
    Ok((res, det))
}

/// FD-order study of the off-shell balance for the four-potential picture.
pub fn offshell_fd_order(
    tau: &FourierField2,
    y: &FourierField2,
    grids: &[usize],
    eos: &ThermalEos,
    constants: &MaterialConstants,
) -> Result<(Vec<f64>, f64)> {
    let theory = thermo_point_theory(eos, constants);
    let fields = vec![tau.clone(), y.clone()];
    noether::offshell_fd_order(&theory, &fields, grids)
}

/// On-grid two-sided balance residual on solution histories.
pub fn balance_residual_fd(
    history: &[&ThermoFieldState],
    dt: f64,
    stencil: TimeStencil,
) -> Result<f64> {
    check_history_len(history.len())?;
    let levels: Vec<Vec<ThermoEval>> = history
        .iter()
        .take(3)
        .map(|s| s.eval_points())
        .collect::<Result<_>>()?;
    let ti = target_index(stencil);
    let state = history[ti];
    let grid = &state.grid;
    let tau_x = grid.deriv(&state.tau, 0.0);
    let y_x = grid.deriv(&state.y, state.y_winding);
    let plane = |pick: &dyn Fn(&ThermoEval) -> f64, lv: usize| -> Vec<f64> {
        levels[lv].iter().map(pick).collect()
    };
    let mut worst = 0.0f64;
    for nu in 0..2 {
        let t0: Vec<Vec<f64>> = (0..3)
            .map(|lv| plane(&|e| e.tensor.comp[0][nu], lv))
            .collect();
        let t1 = plane(&|e| e.tensor.comp[1][nu], ti);
        let dt1 = grid.deriv(&t1, 0.0);
        let mut div_p = vec![vec![0.0; grid.n]; 2];
        for alpha in 0..2 {
            let p0: Vec<Vec<f64>> = (0..3)
                .map(|lv| plane(&|e| e.momenta[alpha][0], lv))
                .collect();
            let p1 = plane(&|e| e.momenta[alpha][1], ti);
            let dp1 = grid.deriv(&p1, 0.0);
            for i in 0..grid.n {
                div_p[alpha][i] = stencil.d1(p0[0][i], p0[1][i], p0[2][i], dt) + dp1[i];
            }
        }
        for i in 0..grid.n {
            let div_t = stencil.d1(t0[0][i], t0[1][i], t0[2][i], dt) + dt1[i];
            let jac_nu = [
                if nu == 0 { state.taudot[i] } else { tau_x[i] },
                if nu == 0 { state.ydot[i] } else { y_x[i] },
            ];
            let rhs = div_p[0][i] * jac_nu[0] + div_p[1][i] * jac_nu[1];
            worst = worst.max((div_t - rhs).abs());
        }
    }
    Ok(worst)
}

/// Random manufactured potential pair `(tau, y)` keeping the temperature and
/// the label gradient safely positive.
pub fn manufactured_potentials(rng: &mut ChaCha8Rng, amp: f64) -> (FourierField2, FourierField2) {
    let l = 2.0 * std::f64::consts::PI;
    let tau = FourierField2::random(rng, [l, l], 0.0, [1.0, 0.0], amp);
    let y = FourierField2::random(rng, [l, l], 0.0, [0.0, 1.0], amp);
    (tau, y)
}
