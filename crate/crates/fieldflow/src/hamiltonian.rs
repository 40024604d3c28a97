//! Canonical formulation and time integration.
//!
//! Phase space is the pair of potentials `z = (tau, y)` with their conjugate
//! momentum densities `pi = (pi0, pi1)` on a 1D grid.  The Hamiltonian
//! density is the total energy density expressed through the canonical
//! variables; its variational derivatives drive the evolution.  The momentum
//! equations are assembled from the analytically derived flux
//! `Theta^1_alpha = -dH/d(z^alpha_x)`, so the discrete right-hand side is the
//! exact gradient of the discrete total Hamiltonian on periodic grids.

use crate::eos::{FluidEos, MaterialConstants, ThermoPoint};
use crate::error::{FieldflowError, Result};
use crate::grid::{Boundary, Grid1D};
use crate::report::{CheckLine, DiagnosticReport};
use crate::thermo_euler::ThermoFieldState;

/// Dirichlet boundary control: pinned labels and a pinned material-time
/// trajectory (linear in time, slope `T/beta` per end) at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinnedBoundary {
    pub temperature_left: f64,
    pub temperature_right: f64,
    pub y_left: f64,
    pub y_right: f64,
    pub tau_left0: f64,
    pub tau_right0: f64,
}

impl PinnedBoundary {
    /// Pinned material-time values at absolute time `t`.
    pub fn tau_at(&self, t: f64, beta: f64) -> (f64, f64) {
        (
            self.tau_left0 + self.temperature_left * t / beta,
            self.tau_right0 + self.temperature_right * t / beta,
        )
    }
}

/// Phase-space point of the field theory.
#[derive(Debug, Clone)]
pub struct CanonicalState {
    pub grid: Grid1D,
    pub time: f64,
    pub tau: Vec<f64>,
    pub y: Vec<f64>,
    pub pi0: Vec<f64>,
    pub pi1: Vec<f64>,
    pub y_winding: f64,
    pub constants: MaterialConstants,
    pub eos: FluidEos,
    pub pinned: Option<PinnedBoundary>,
}

impl CanonicalState {
    pub fn new(
        grid: Grid1D,
        tau: Vec<f64>,
        y: Vec<f64>,
        pi0: Vec<f64>,
        pi1: Vec<f64>,
        y_winding: f64,
        constants: MaterialConstants,
        eos: FluidEos,
        pinned: Option<PinnedBoundary>,
    ) -> Result<Self> {
        let n = grid.n;
        if tau.len() != n || y.len() != n || pi0.len() != n || pi1.len() != n {
            return Err(FieldflowError::InvalidInput(
                "field arrays must match the grid size".into(),
            ));
        }
        if !eos.is_thermal() && pi0.iter().any(|&p| p != 0.0) {
            return Err(FieldflowError::InvalidInput(
                "barotropic states freeze pi0 to zero".into(),
            ));
        }
        if pinned.is_some() && grid.boundary != Boundary::Dirichlet {
            return Err(FieldflowError::InvalidInput(
                "pinned boundaries require a Dirichlet grid".into(),
            ));
        }
        let state = Self {
            grid,
            time: 0.0,
            tau,
            y,
            pi0,
            pi1,
            y_winding,
            constants,
            eos,
            pinned,
        };
        state.recover_observables()?; // validates rho > 0 and T > 0
        Ok(state)
    }

    /// Per-node observables recovered from the canonical data.
    pub fn recover_observables(&self) -> Result<Observables> {
        recover_observables(self)
    }
}

/// Observables of a canonical state, node by node.
#[derive(Debug, Clone)]
pub struct Observables {
    pub rho: Vec<f64>,
    pub velocity: Vec<f64>,
    pub entropy: Vec<f64>,
    pub temperature: Vec<f64>,
    pub pressure: Vec<f64>,
    pub energy: Vec<f64>,
    pub free_energy: Vec<f64>,
    pub hdensity: Vec<f64>,
    pub tau_x: Vec<f64>,
    pub y_x: Vec<f64>,
}

/// Completes the inverse Legendre map: density from the label gradient,
/// entropy from `pi0`, velocity from the momentum contraction, the
/// constitutive point from the equation of state, and the energy density.
pub fn recover_observables(cs: &CanonicalState) -> Result<Observables> {
    let n = cs.grid.n;
    let m = cs.constants.molar_mass;
    let beta = cs.constants.beta;
    let tau_x = cs.grid.deriv(&cs.tau, 0.0);
    let y_x = cs.grid.deriv(&cs.y, cs.y_winding);
    let mut out = Observables {
        rho: vec![0.0; n],
        velocity: vec![0.0; n],
        entropy: vec![0.0; n],
        temperature: vec![0.0; n],
        pressure: vec![0.0; n],
        energy: vec![0.0; n],
        free_energy: vec![0.0; n],
        hdensity: vec![0.0; n],
        tau_x,
        y_x,
    };
    for i in 0..n {
        let rho = out.y_x[i];
        if rho <= 0.0 {
            return Err(FieldflowError::Configuration(format!(
                "label map folds at node {i} (rho = {rho})"
            )));
        }
        let s = cs.pi0[i] / (beta * rho);
        let v = -(cs.pi0[i] * out.tau_x[i] + cs.pi1[i] * rho) / (m * rho);
        let pt: ThermoPoint = cs.eos.point(rho, s)?;
        out.rho[i] = rho;
        out.velocity[i] = v;
        out.entropy[i] = pt.entropy;
        out.temperature[i] = pt.temperature;
        out.pressure[i] = pt.pressure;
        out.energy[i] = pt.energy;
        out.free_energy[i] = pt.free_energy;
        out.hdensity[i] = rho * (0.5 * m * v * v + pt.energy);
    }
    Ok(out)
}

/// Builds the canonical state from label-picture potentials and rates.  The
/// supplied fluid EOS must agree with the state's thermal EOS; it provides
/// the entropy form used to run the dynamics.
pub fn to_canonical(ts: &ThermoFieldState, eos: FluidEos) -> Result<CanonicalState> {
    let evals = ts.eval_points()?;
    let beta = ts.constants.beta;
    let m = ts.constants.molar_mass;
    let tau_x = ts.grid.deriv(&ts.tau, 0.0);
    let n = ts.grid.n;
    let mut pi0 = vec![0.0; n];
    let mut pi1 = vec![0.0; n];
    for i in 0..n {
        let ev = &evals[i];
        pi0[i] = beta * ev.rho * ev.entropy;
        pi1[i] = -(m * ev.velocity + beta * ev.entropy * tau_x[i]);
    }
    CanonicalState::new(
        ts.grid,
        ts.tau.clone(),
        ts.y.clone(),
        pi0,
        pi1,
        ts.y_winding,
        ts.constants,
        eos,
        None,
    )
}

/// Maps a canonical state back to label-picture potentials with their rates
/// given by the canonical equations.
pub fn from_canonical(cs: &CanonicalState) -> Result<ThermoFieldState> {
    let thermal = match &cs.eos {
        FluidEos::Thermal { thermal, .. } => thermal.clone(),
        FluidEos::Barotropic(_) => {
            return Err(FieldflowError::InvalidInput(
                "label-picture export needs a thermal state".into(),
            ))
        }
    };
    let rhs = hamilton_rhs(cs)?;
    Ok(ThermoFieldState {
        grid: cs.grid,
        tau: cs.tau.clone(),
        y: cs.y.clone(),
        taudot: rhs.taudot,
        ydot: rhs.ydot,
        y_winding: cs.y_winding,
        constants: cs.constants,
        eos: thermal,
    })
}

/// Time derivatives of the canonical fields.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub taudot: Vec<f64>,
    pub ydot: Vec<f64>,
    pub pi0dot: Vec<f64>,
    pub pi1dot: Vec<f64>,
}

/// Hamilton equations: `zdot = dH/dpi` in explicit form and
/// `pidot = -d_x Theta^1` with the analytic flux.  In Dirichlet mode the
/// boundary rates of the potentials follow the pinned trajectory.
pub fn hamilton_rhs(cs: &CanonicalState) -> Result<Rhs> {
    let obs = recover_observables(cs)?;
    hamilton_rhs_with(cs, &obs)
}

fn hamilton_rhs_with(cs: &CanonicalState, obs: &Observables) -> Result<Rhs> {
    let n = cs.grid.n;
    let m = cs.constants.molar_mass;
    let beta = cs.constants.beta;
    let mut taudot = vec![0.0; n];
    let mut ydot = vec![0.0; n];
    let mut theta1_tau = vec![0.0; n];
    let mut theta1_y = vec![0.0; n];
    for i in 0..n {
        let v = obs.velocity[i];
        taudot[i] = obs.temperature[i] / beta - v * obs.tau_x[i];
        ydot[i] = -v * obs.y_x[i];
        theta1_tau[i] = cs.pi0[i] * v;
        theta1_y[i] =
            cs.pi1[i] * v - (obs.free_energy[i] + obs.pressure[i] / obs.rho[i] - 0.5 * m * v * v);
    }
    let mut pi0dot = cs.grid.deriv(&theta1_tau, 0.0);
    let mut pi1dot = cs.grid.deriv(&theta1_y, 0.0);
    for v in pi0dot.iter_mut().chain(pi1dot.iter_mut()) {
        *v = -*v;
    }
    if let Some(pin) = &cs.pinned {
        taudot[0] = pin.temperature_left / beta;
        taudot[n - 1] = pin.temperature_right / beta;
        ydot[0] = 0.0;
        ydot[n - 1] = 0.0;
    }
    Ok(Rhs {
        taudot,
        ydot,
        pi0dot,
        pi1dot,
    })
}

/// Hamiltonian density with its variational derivatives, evaluated through
/// `dH/d(fields)` directly; an independent code path from [`hamilton_rhs`].
#[derive(Debug, Clone)]
pub struct HamiltonianDensityEval {
    pub h: Vec<f64>,
    /// `dH/dz^alpha` per node for alpha = (tau, y).
    pub dh_dz: [Vec<f64>; 2],
    /// `dH/dpi_alpha` per node; carries no spatial-derivative contribution.
    pub dh_dpi: [Vec<f64>; 2],
}

pub fn density_eval(cs: &CanonicalState) -> Result<HamiltonianDensityEval> {
    let obs = recover_observables(cs)?;
    let n = cs.grid.n;
    let m = cs.constants.molar_mass;
    let beta = cs.constants.beta;
    let mut dh_dtaux = vec![0.0; n];
    let mut dh_dyx = vec![0.0; n];
    let mut dh_dpi = [vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let rho = obs.rho[i];
        let kin = cs.pi0[i] * obs.tau_x[i] + cs.pi1[i] * obs.y_x[i];
        dh_dtaux[i] = kin * cs.pi0[i] / (m * rho);
        dh_dyx[i] = kin * cs.pi1[i] / (m * rho) - 0.5 * kin * kin / (m * rho * rho)
            + obs.free_energy[i]
            + obs.pressure[i] / rho;
        dh_dpi[0][i] = kin * obs.tau_x[i] / (m * rho) + obs.temperature[i] / beta;
        dh_dpi[1][i] = kin * obs.y_x[i] / (m * rho);
    }
    // Variational derivative: dH/dz = -d_x(dH/dz_x), no bulk term.
    let mut dh_dz = [cs.grid.deriv(&dh_dtaux, 0.0), cs.grid.deriv(&dh_dyx, 0.0)];
    for plane in dh_dz.iter_mut() {
        for v in plane.iter_mut() {
            *v = -*v;
        }
    }
    Ok(HamiltonianDensityEval {
        h: obs.hdensity,
        dh_dz,
        dh_dpi,
    })
}

/// Which canonical field a node perturbation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSelector {
    Tau,
    Y,
    Pi0,
    Pi1,
}

/// Brute-force variational derivative: perturb one node by `eps`, difference
/// the total Hamiltonian, divide by the node's quadrature weight.
pub fn functional_derivative_fd(
    cs: &CanonicalState,
    which: FieldSelector,
    node: usize,
    eps: f64,
) -> Result<f64> {
    let mut plus = cs.clone();
    let mut minus = cs.clone();
    {
        let (p, m) = match which {
            FieldSelector::Tau => (&mut plus.tau, &mut minus.tau),
            FieldSelector::Y => (&mut plus.y, &mut minus.y),
            FieldSelector::Pi0 => (&mut plus.pi0, &mut minus.pi0),
            FieldSelector::Pi1 => (&mut plus.pi1, &mut minus.pi1),
        };
        p[node] += eps;
        m[node] -= eps;
    }
    let hp = total_hamiltonian(&plus)?;
    let hm = total_hamiltonian(&minus)?;
    Ok((hp - hm) / (2.0 * eps * cs.grid.weight(node)))
}

/// Total Hamiltonian over the domain.
pub fn total_hamiltonian(cs: &CanonicalState) -> Result<f64> {
    let obs = recover_observables(cs)?;
    Ok(cs.grid.integrate(&obs.hdensity))
}

/// Total Hamiltonian over the node range `[lo, hi]` (trapezoid).
pub fn total_hamiltonian_range(cs: &CanonicalState, lo: usize, hi: usize) -> Result<f64> {
    let obs = recover_observables(cs)?;
    Ok(cs.grid.integrate_range(&obs.hdensity, lo, hi))
}

/// Total mass, entropy and kinetic momentum.
pub fn conserved_totals(cs: &CanonicalState) -> Result<(f64, f64, f64)> {
    let obs = recover_observables(cs)?;
    let m = cs.constants.molar_mass;
    let mass = cs.grid.integrate(&obs.rho);
    let entropy: Vec<f64> = (0..cs.grid.n)
        .map(|i| obs.rho[i] * obs.entropy[i])
        .collect();
    let momentum: Vec<f64> = (0..cs.grid.n)
        .map(|i| obs.rho[i] * m * obs.velocity[i])
        .collect();
    Ok((
        mass,
        cs.grid.integrate(&entropy),
        cs.grid.integrate(&momentum),
    ))
}

/// Boundary-adapted Hamiltonian `F_D = H_D - [Theta^perp_alpha z^alpha]` for
/// the flux-controlled problem; equals `H_D` on periodic domains.  This is a
/// diagnostic only, no dynamics is generated from it.
pub fn neumann_hamiltonian(cs: &CanonicalState) -> Result<f64> {
    let h_d = total_hamiltonian(cs)?;
    if cs.grid.boundary == Boundary::Periodic {
        return Ok(h_d);
    }
    let obs = recover_observables(cs)?;
    let m = cs.constants.molar_mass;
    let theta1 = |i: usize| -> (f64, f64) {
        let v = obs.velocity[i];
        (
            cs.pi0[i] * v,
            cs.pi1[i] * v - (obs.free_energy[i] + obs.pressure[i] / obs.rho[i] - 0.5 * m * v * v),
        )
    };
    let n = cs.grid.n;
    let (t0_l, t1_l) = theta1(0);
    let (t0_r, t1_r) = theta1(n - 1);
    let boundary_sum =
        (t0_r * cs.tau[n - 1] + t1_r * cs.y[n - 1]) - (t0_l * cs.tau[0] + t1_l * cs.y[0]);
    Ok(h_d - boundary_sum)
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    ImplicitMidpoint,
}

fn apply_rhs(cs: &CanonicalState, rhs: &Rhs, dt: f64) -> CanonicalState {
    let mut out = cs.clone();
    for i in 0..cs.grid.n {
        out.tau[i] += dt * rhs.taudot[i];
        out.y[i] += dt * rhs.ydot[i];
        out.pi0[i] += dt * rhs.pi0dot[i];
        out.pi1[i] += dt * rhs.pi1dot[i];
    }
    out.time += dt;
    out
}

fn rhs_diff_norm(a: &Rhs, b: &Rhs) -> f64 {
    let pairs = a
        .taudot
        .iter()
        .zip(&b.taudot)
        .chain(a.ydot.iter().zip(&b.ydot))
        .chain(a.pi0dot.iter().zip(&b.pi0dot))
        .chain(a.pi1dot.iter().zip(&b.pi1dot));
    pairs.fold(0.0f64, |acc, (&x, &y)| acc.max((x - y).abs()))
}

/// Largest signal speed on the state, doubled as a stability margin.
fn guard_speed(cs: &CanonicalState, obs: &Observables) -> Result<f64> {
    let m = cs.constants.molar_mass;
    let mut cmax = 0.0f64;
    for i in 0..cs.grid.n {
        let c2 = cs.eos.dp_drho(obs.rho[i], obs.entropy[i])? / m;
        cmax = cmax.max(c2.max(0.0).sqrt() + obs.velocity[i].abs());
    }
    Ok(2.0 * cmax)
}

/// Advances one step of size `dt` (`dt = 0` is the identity).  The step is
/// refused when `|dt|` exceeds the stability guard `h / (2 c_max)`.
pub fn step(cs: &CanonicalState, dt: f64, scheme: Scheme) -> Result<CanonicalState> {
    if dt == 0.0 {
        return Ok(cs.clone());
    }
    let obs = recover_observables(cs)?;
    let cmax = guard_speed(cs, &obs)?;
    if cmax > 0.0 && dt.abs() > cs.grid.h / (2.0 * cmax) {
        return Err(FieldflowError::InvalidInput(format!(
            "step size {} exceeds the stability guard {:.3e}",
            dt,
            cs.grid.h / (2.0 * cmax)
        )));
    }
    let mut next = match scheme {
        Scheme::Rk4 => {
            let k1 = hamilton_rhs_with(cs, &obs)?;
            let k2 = hamilton_rhs(&apply_rhs(cs, &k1, 0.5 * dt))?;
            let k3 = hamilton_rhs(&apply_rhs(cs, &k2, 0.5 * dt))?;
            let k4 = hamilton_rhs(&apply_rhs(cs, &k3, dt))?;
            let mut out = cs.clone();
            for i in 0..cs.grid.n {
                out.tau[i] += dt / 6.0
                    * (k1.taudot[i] + 2.0 * k2.taudot[i] + 2.0 * k3.taudot[i] + k4.taudot[i]);
                out.y[i] +=
                    dt / 6.0 * (k1.ydot[i] + 2.0 * k2.ydot[i] + 2.0 * k3.ydot[i] + k4.ydot[i]);
                out.pi0[i] += dt / 6.0
                    * (k1.pi0dot[i] + 2.0 * k2.pi0dot[i] + 2.0 * k3.pi0dot[i] + k4.pi0dot[i]);
                out.pi1[i] += dt / 6.0
                    * (k1.pi1dot[i] + 2.0 * k2.pi1dot[i] + 2.0 * k3.pi1dot[i] + k4.pi1dot[i]);
            }
            out.time += dt;
            out
        }
        Scheme::ImplicitMidpoint => {
            // Convergence is judged on the state increment `dt * stage`:
            // the stage rates themselves sit on a derivative-amplified
            // roundoff floor that the increment does not see.
            let state_scale = 1.0
                + cs.tau
                    .iter()
                    .chain(&cs.y)
                    .chain(&cs.pi0)
                    .chain(&cs.pi1)
                    .fold(0.0f64, |a, &v| a.max(v.abs()));
            let mut stage = hamilton_rhs_with(cs, &obs)?;
            let mut converged = false;
            for _ in 0..50 {
                let mid = apply_rhs(cs, &stage, 0.5 * dt);
                let refreshed = hamilton_rhs(&mid)?;
                let delta = rhs_diff_norm(&refreshed, &stage);
                stage = refreshed;
                if delta * dt.abs() <= 1e-12 * state_scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(FieldflowError::Solver(
                    "implicit midpoint stage did not converge in 50 iterations".into(),
                ));
            }
            apply_rhs(cs, &stage, dt)
        }
    };
    if let Some(pin) = next.pinned {
        let n = next.grid.n;
        let (tau_l, tau_r) = pin.tau_at(next.time, next.constants.beta);
        next.tau[0] = tau_l;
        next.tau[n - 1] = tau_r;
        next.y[0] = pin.y_left;
        next.y[n - 1] = pin.y_right;
    }
    recover_observables(&next)?; // reject states that left the domain
    Ok(next)
}

/// Probes the rest-frame reduction of the canonical generating relation to
/// the fundamental differential identity
/// `d(rho e) = T d(rho s) + (e - T s + p/rho) d(rho)`.
///
/// The two probe directions are the entropy density (through `pi0`) and the
/// density (through the label gradient at fixed `pi0`).
pub fn rest_frame_reduction(cs: &CanonicalState, probe: f64, tol: f64) -> Result<DiagnosticReport> {
    let obs = recover_observables(cs)?;
    let vmax = obs.velocity.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if vmax > 1e-10 {
        return Err(FieldflowError::InvalidInput(format!(
            "rest-frame reduction needs v = 0, found |v| up to {vmax}"
        )));
    }
    if !cs.eos.is_thermal() {
        return Err(FieldflowError::InvalidInput(
            "rest-frame reduction probes the thermal fundamental identity".into(),
        ));
    }
    let beta = cs.constants.beta;
    let mut worst_sigma = 0.0f64;
    let mut worst_rho = 0.0f64;
    for i in 0..cs.grid.n {
        let rho = obs.rho[i];
        let sigma = cs.pi0[i] / beta; // entropy density rho s
        let u_of = |rho_p: f64, sigma_p: f64| -> Result<f64> {
            let s = sigma_p / rho_p;
            let pt = cs.eos.point(rho_p, s)?;
            Ok(rho_p * pt.energy)
        };
        // d(rho e)/d(rho s) at fixed rho should be T.
        let du_dsigma = (u_of(rho, sigma + probe)? - u_of(rho, sigma - probe)?) / (2.0 * probe);
        worst_sigma = worst_sigma
            .max((du_dsigma - obs.temperature[i]).abs() / obs.temperature[i].abs().max(1.0));
        // d(rho e)/d(rho) at fixed rho s should be the molar free enthalpy.
        let du_drho = (u_of(rho + probe, sigma)? - u_of(rho - probe, sigma)?) / (2.0 * probe);
        let mu = obs.energy[i] - obs.temperature[i] * obs.entropy[i] + obs.pressure[i] / rho;
        worst_rho = worst_rho.max((du_drho - mu).abs() / mu.abs().max(1.0));
    }
    let mut report = DiagnosticReport::new("rest-frame reduction to the fundamental identity");
    report.push(CheckLine::at_most(
        "entropy-density probe vs T",
        worst_sigma,
        tol,
    ));
    report.push(CheckLine::at_most(
        "density probe vs free enthalpy",
        worst_rho,
        tol,
    ));
    Ok(report)
}

/// Compares the assembled momentum equation against its literal expanded
/// reading `pidot_1 = d_x[rho x^1_1 (f + pV - M v^2/2 - v pi_1)]` and the
/// bracket-corrected reading `d_x[rho x^1_1 (f + pV - M v^2/2) - v pi_1]`.
/// In one spatial dimension `rho x^1_1 = 1`, so all three coincide up to
/// roundoff; the report records the actual deviations.
pub fn explicit_momentum_rate_audit(cs: &CanonicalState) -> Result<DiagnosticReport> {
    let obs = recover_observables(cs)?;
    let rhs = hamilton_rhs(cs)?;
    let n = cs.grid.n;
    let m = cs.constants.molar_mass;
    let mut literal = vec![0.0; n];
    let mut corrected = vec![0.0; n];
    for i in 0..n {
        let v = obs.velocity[i];
        let core = obs.free_energy[i] + obs.pressure[i] / obs.rho[i] - 0.5 * m * v * v;
        // rho x^1_1 = 1 on a 1D grid.
        literal[i] = core - v * cs.pi1[i];
        corrected[i] = core - v * cs.pi1[i];
    }
    let d_lit = cs.grid.deriv(&literal, 0.0);
    let d_cor = cs.grid.deriv(&corrected, 0.0);
    let mut worst_lit = 0.0f64;
    let mut worst_cor = 0.0f64;
    for i in 0..n {
        worst_lit = worst_lit.max((d_lit[i] - rhs.pi1dot[i]).abs());
        worst_cor = worst_cor.max((d_cor[i] - rhs.pi1dot[i]).abs());
    }
    let mut report = DiagnosticReport::new("explicit momentum-rate readings vs generating flux");
    report.push(CheckLine::at_most(
        "literal bracket reading",
        worst_lit,
        1e-10,
    ));
    report.push(CheckLine::at_most(
        "separated bracket reading",
        worst_cor,
        1e-10,
    ));
    Ok(report)
}
