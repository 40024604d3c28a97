//! Complete placement picture: physical time and position as fields over the
//! material spacetime `(material time, label)`.
//!
//! The role of the Hamiltonian flips here: the momentum conjugate to the
//! physical-time field is built from the energy, and the Hamiltonian value is
//! minus the molar entropy.  This module evaluates the point algebra, solves
//! the canonical inversion for `(e, V)` by damped Newton, probes the
//! rest-frame reduction, and rebuilds states of this picture from
//! label-picture histories by numerical map inversion.

use crate::barotropic::{EnergyMomentum, Picture};
use crate::eos::{
    entropy_from_energy, thermal_response, EntropyForm, MaterialConstants, ThermalEos,
};
use crate::error::{FieldflowError, Result};
use crate::grid::{Boundary, Grid1D};
use crate::interp::CubicHermite;
use crate::noether::{contraction_tensor, PointTensors};
use crate::report::{CheckLine, DiagnosticReport};
use crate::thermo_euler::ThermoFieldState;

/// Point data: the spacetime gradient `x^mu_alpha` of the fields
/// `(t, x)` over `(material time, label)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClPoint {
    pub t_tau: f64,
    pub t_y: f64,
    pub x_tau: f64,
    pub x_y: f64,
}

impl ClPoint {
    pub fn det(&self) -> f64 {
        self.t_tau * self.x_y - self.t_y * self.x_tau
    }

    /// Inverse gradient `z^alpha_mu` (rows: material time, label).
    pub fn inverse(&self) -> Result<[[f64; 2]; 2]> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(FieldflowError::Configuration(format!(
                "singular spacetime gradient (det = {det})"
            )));
        }
        Ok([
            [self.x_y / det, -self.t_y / det],
            [-self.x_tau / det, self.t_tau / det],
        ])
    }
}

/// Kinematic content of a point: temperature from the clock ratio, molar
/// volume, velocity, and the spatial-block pair `(chi, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClKinematics {
    pub temperature: f64,
    pub vol: f64,
    pub velocity: f64,
    pub chi: f64,
    pub w: f64,
}

/// Derives `(T, V, v, chi, w)` from the point gradient and verifies the
/// determinant identity `det(x^mu_alpha) = V/T` internally.
pub fn kinematics_cl(pt: ClPoint) -> Result<ClKinematics> {
    if pt.t_tau <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "clock rate dt/dtau = {} <= 0",
            pt.t_tau
        )));
    }
    if pt.x_y <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "spatial block x_y = {} <= 0",
            pt.x_y
        )));
    }
    let temperature = 1.0 / pt.t_tau;
    let det = pt.det();
    let vol = det / pt.t_tau;
    if vol <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "molar volume {vol} <= 0 from the spacetime gradient"
        )));
    }
    let velocity = pt.x_tau / pt.t_tau;
    let chi = pt.x_y;
    let w = pt.t_y / pt.x_y;
    let det_check = (det - vol / temperature).abs();
    if det_check > 1e-12 * det.abs().max(1.0) {
        return Err(FieldflowError::Configuration(
            "determinant identity det = V/T violated beyond roundoff".into(),
        ));
    }
    Ok(ClKinematics {
        temperature,
        vol,
        velocity,
        chi,
        w,
    })
}

/// Point evaluation: Lagrangian, momenta and the energy-momentum tensor of
/// the complete placement picture.
#[derive(Debug, Clone, PartialEq)]
pub struct ClEval {
    pub lagrangian: f64,
    /// `momenta[f][alpha]`: momentum conjugate to field `f` (0 = physical
    /// time, 1 = position) with upper material index `alpha`.
    pub momenta: [[f64; 2]; 2],
    pub tensor: EnergyMomentum,
    pub kin: ClKinematics,
    pub pressure: f64,
    pub entropy: f64,
    pub energy: f64,
    pub free_energy: f64,
}

/// Evaluates momenta and tensor at one point of the complete placement
/// picture.
pub fn momenta_cl(pt: ClPoint, eos: &ThermalEos, constants: &MaterialConstants) -> Result<ClEval> {
    let kin = kinematics_cl(pt)?;
    let m = constants.molar_mass;
    let (p, s, e) = thermal_response(eos, kin.vol, kin.temperature)?;
    let f = e - kin.temperature * s;
    let z = pt.inverse()?;
    let v = kin.velocity;
    let kin_e = 0.5 * m * v * v;
    let lagrangian = pt.t_tau * (kin_e - f);
    let pv_t = p * kin.vol / kin.temperature;
    let enthalpy_tot = e + p * kin.vol + kin_e;
    // P^alpha_0 (conjugate to the physical-time field).
    let p_time = [pv_t * z[0][0] - enthalpy_tot, pv_t * z[1][0]];
    // P^alpha_1 (conjugate to the position field).
    let p_pos = [pv_t * z[0][1] + m * v, pv_t * z[1][1]];
    let tensor = [
        [-s, m * v * pt.x_y - pt.t_y * enthalpy_tot],
        [0.0, (f + p * kin.vol - kin_e) / kin.temperature],
    ];
    Ok(ClEval {
        lagrangian,
        momenta: [p_time, p_pos],
        tensor: EnergyMomentum {
            picture: Picture::CompleteLagrange,
            comp: tensor,
        },
        kin,
        pressure: p,
        entropy: s,
        energy: e,
        free_energy: f,
    })
}

/// Tensor table of this picture as a standalone operation.
pub fn tensor_cl(
    pt: ClPoint,
    eos: &ThermalEos,
    constants: &MaterialConstants,
) -> Result<EnergyMomentum> {
    Ok(momenta_cl(pt, eos, constants)?.tensor)
}

/// Deviation of the tensor table from the defining contraction
/// `T^alpha_beta = P^alpha_mu x^mu_beta - delta L` at the given point.
pub fn tensor_contraction_deviation(
    pt: ClPoint,
    eos: &ThermalEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let ev = momenta_cl(pt, eos, constants)?;
    let tensors = PointTensors {
        lagrangian: ev.lagrangian,
        momenta: vec![ev.momenta[0], ev.momenta[1]],
        tensor: ev.tensor.comp,
    };
    let jac = [[pt.t_tau, pt.t_y], [pt.x_tau, pt.x_y]];
    let reference = contraction_tensor(&tensors, &jac);
    let mut worst = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            worst = worst.max((ev.tensor.comp[a][b] - reference[a][b]).abs());
        }
    }
    Ok(worst)
}

/// The `(chi, w)` pair built from first spatial derivatives alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiW {
    pub chi: f64,
    pub w: f64,
}

/// Canonical inversion result: the thermodynamic point recovered from the
/// momenta, plus solver telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalInversion {
    pub energy: f64,
    pub vol: f64,
    pub pressure: f64,
    pub temperature: f64,
    pub entropy: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves the two canonical-inversion equations
///
/// ```text
///   M V = chi (M - w Pi_k - p chi w^2)
///   -e  = Pi_0 + Pi_k^2 / 2M - p^2 w^2 chi^2 / 2M
/// ```
///
/// for `(e, V)` by damped Newton from the rest-frame closed form, then reads
/// `(s, T, p)` off the entropy form.  The Hamiltonian value of this picture
/// is `-s`.
pub fn invert_canonical(
    pi_time: f64,
    pi_pos: f64,
    chiw: ChiW,
    form: &EntropyForm,
    constants: &MaterialConstants,
) -> Result<CanonicalInversion> {
    if chiw.chi <= 0.0 {
        return Err(FieldflowError::Configuration(format!(
            "chi = {} <= 0",
            chiw.chi
        )));
    }
    let m = constants.molar_mass;
    let (chi, w) = (chiw.chi, chiw.w);
    let residuals = |e: f64, v: f64| -> Result<[f64; 2]> {
        let (_, _, p) = entropy_from_energy(form, e, v)?;
        let g1 = m * v - chi * (m - w * pi_pos - p * chi * w * w);
        let g2 = e + pi_time + pi_pos * pi_pos / (2.0 * m) - p * p * w * w * chi * chi / (2.0 * m);
        Ok([g1, g2])
    };
    let norm = |g: &[f64; 2]| g[0].abs().max(g[1].abs());

    // Rest-frame closed form as the initial guess.
    let mut vol = chi;
    let mut energy = -pi_time - pi_pos * pi_pos / (2.0 * m);
    let scale = (1.0 + m.abs() + pi_time.abs()).max(energy.abs());
    let tol = 1e-12 * scale;
    let mut g = residuals(energy, vol)?;
    let mut iterations = 0usize;
    while norm(&g) > tol {
        if iterations >= 50 {
            return Err(FieldflowError::Solver(format!(
                "canonical inversion stalled at residual {:.3e} after 50 iterations",
                norm(&g)
            )));
        }
        iterations += 1;
        // Finite-difference Jacobian of the 2x2 system.
        let he = 1e-7 * energy.abs().max(1.0);
        let hv = 1e-7 * vol.abs().max(1.0);
        let ge = residuals(energy + he, vol)?;
        let gv = residuals(energy, vol + hv)?;
        let j = [
            [(ge[0] - g[0]) / he, (gv[0] - g[0]) / hv],
            [(ge[1] - g[1]) / he, (gv[1] - g[1]) / hv],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(FieldflowError::Solver(
                "canonical inversion hit a singular Jacobian".into(),
            ));
        }
        let de = (-g[0] * j[1][1] + g[1] * j[0][1]) / det;
        let dv = (-j[0][0] * g[1] + j[1][0] * g[0]) / det;
        // Damping: halve the step until the residual norm drops and the
        // iterate stays in the constitutive domain.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..25 {
            let e_try = energy + lambda * de;
            let v_try = vol + lambda * dv;
            if e_try > 0.0 && v_try > 0.0 {
                if let Ok(g_try) = residuals(e_try, v_try) {
                    if norm(&g_try) < norm(&g) {
                        energy = e_try;
                        vol = v_try;
                        g = g_try;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(FieldflowError::Solver(
                "canonical inversion could not reduce the residual".into(),
            ));
        }
    }
    let (s, t, p) = entropy_from_energy(form, energy, vol)?;
    Ok(CanonicalInversion {
        energy,
        vol,
        pressure: p,
        temperature: t,
        entropy: s,
        iterations,
        residual: norm(&g),
    })
}

/// Probes the rest-frame reduction `ds = de/T + (p/T) dV` of the entropy
/// form at the supplied `(e, V)` points.
pub fn rest_frame_reduction_cl(
    form: &EntropyForm,
    points: &[(f64, f64)],
    probe: f64,
    tol: f64,
) -> Result<DiagnosticReport> {
    let mut worst_e = 0.0f64;
    let mut worst_v = 0.0f64;
    for &(e, v) in points {
        let (_, t, p) = entropy_from_energy(form, e, v)?;
        let s_at = |ee: f64, vv: f64| -> Result<f64> { Ok(entropy_from_energy(form, ee, vv)?.0) };
        let ds_de = (s_at(e + probe, v)? - s_at(e - probe, v)?) / (2.0 * probe);
        worst_e = worst_e.max((ds_de - 1.0 / t).abs() / (1.0 / t).abs().max(1.0));
        let ds_dv = (s_at(e, v + probe)? - s_at(e, v - probe)?) / (2.0 * probe);
        worst_v = worst_v.max((ds_dv - p / t).abs() / (p / t).abs().max(1.0));
    }
    let mut report = DiagnosticReport::new("rest-frame reduction of the entropy form");
    report.push(CheckLine::at_most("energy probe vs 1/T", worst_e, tol));
    report.push(CheckLine::at_most("volume probe vs p/T", worst_v, tol));
    Ok(report)
}

/// Identity block of this picture evaluated at a point: the vanishing tensor
/// entry, the determinant identity, the inverse-block relation and the
/// volume factorization `V = chi (1 - w v)`.
pub fn identity_block_deviation(
    pt: ClPoint,
    eos: &ThermalEos,
    constants: &MaterialConstants,
) -> Result<f64> {
    let ev = momenta_cl(pt, eos, constants)?;
    let k = ev.kin;
    let mut worst = ev.tensor.comp[1][0].abs();
    worst = worst.max((pt.det() - k.vol / k.temperature).abs());
    worst = worst.max((k.vol - k.chi * (1.0 - k.w * k.velocity)).abs());
    // (x_y - v t_y) inverts the label gradient rho = 1/V.
    worst = worst.max(((pt.x_y - k.velocity * pt.t_y) / k.vol - 1.0).abs());
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Transform from the label picture.
// ---------------------------------------------------------------------------

/// The complete placement picture sampled on a material grid: five material
/// time levels by `n` label nodes.
#[derive(Debug, Clone)]
pub struct ClSheet {
    pub tau_levels: Vec<f64>,
    pub y_grid: Grid1D,
    pub y_start: f64,
    /// `t[level][node]` and `x[level][node]`.
    pub t: Vec<Vec<f64>>,
    pub x: Vec<Vec<f64>>,
    /// Spacetime gradient at the middle level by fourth-order differencing
    /// of the sheet itself.
    pub mid_jac: Vec<ClPoint>,
}

fn padded_hermite(
    grid: &Grid1D,
    values: &[f64],
    slopes: &[f64],
    winding: f64,
    pad: usize,
) -> Result<CubicHermite> {
    let n = grid.n;
    let mut xs = Vec::with_capacity(n + 2 * pad + 1);
    let mut ys = Vec::with_capacity(xs.capacity());
    let mut ds = Vec::with_capacity(xs.capacity());
    for k in -(pad as i64)..(n as i64 + pad as i64 + 1) {
        let wrap = k.div_euclid(n as i64) as f64;
        let i = k.rem_euclid(n as i64) as usize;
        xs.push(k as f64 * grid.h);
        ys.push(values[i] + wrap * winding);
        ds.push(slopes[i]);
    }
    CubicHermite::new(xs, ys, ds)
}

/// Inverts a label-picture history into the complete placement picture on a
/// uniform material grid, and cross-checks the kinematics of the transformed
/// state against the label-picture values at the matched spacetime points.
///
/// Needs at least five uniformly spaced time levels; the five material-time
/// levels of the output sit strictly inside the covered band.
pub fn transform_from_euler(
    times: &[f64],
    states: &[&ThermoFieldState],
    tolerance: f64,
) -> Result<(ClSheet, DiagnosticReport)> {
    let levels = states.len();
    if levels < 5 || times.len() != levels {
        return Err(FieldflowError::InvalidInput(
            "transform needs at least 5 uniformly spaced time levels".into(),
        ));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0
        || times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-12 * dt.abs())
    {
        return Err(FieldflowError::InvalidInput(
            "time levels must be uniformly increasing".into(),
        ));
    }
    let grid = states[0].grid;
    if grid.boundary != Boundary::Periodic {
        return Err(FieldflowError::InvalidInput(
            "transform expects periodic states".into(),
        ));
    }
    let n = grid.n;
    let ly = states[0].y_winding;
    let beta = states[0].constants.beta;
    let pad = 8usize;

    // Per-level interpolants of the fields and their spatial gradients.
    struct LevelItp {
        map: CubicHermite,
        tau: CubicHermite,
        tau_x: CubicHermite,
        taudot: CubicHermite,
        ydot: CubicHermite,
        y_x: CubicHermite,
    }
    let mut itps = Vec::with_capacity(levels);
    for s in states {
        if s.grid != grid || (s.y_winding - ly).abs() > 1e-12 {
            return Err(FieldflowError::InvalidInput(
                "history levels must share the grid and winding".into(),
            ));
        }
        let y_x = grid.deriv4(&s.y, s.y_winding);
        let y_xx = grid.deriv4(&y_x, 0.0);
        let tau_x = grid.deriv4(&s.tau, 0.0);
        let tau_xx = grid.deriv4(&tau_x, 0.0);
        let taudot_x = grid.deriv4(&s.taudot, 0.0);
        let ydot_x = grid.deriv4(&s.ydot, 0.0);
        let map = padded_hermite(&grid, &s.y, &y_x, s.y_winding, pad)?;
        if !map.is_increasing() {
            return Err(FieldflowError::Configuration(
                "label map is not monotone".into(),
            ));
        }
        itps.push(LevelItp {
            map,
            tau: padded_hermite(&grid, &s.tau, &tau_x, 0.0, pad)?,
            tau_x: padded_hermite(&grid, &tau_x, &tau_xx, 0.0, pad)?,
            taudot: padded_hermite(&grid, &s.taudot, &taudot_x, 0.0, pad)?,
            ydot: padded_hermite(&grid, &s.ydot, &ydot_x, 0.0, pad)?,
            y_x: padded_hermite(&grid, &y_x, &y_xx, 0.0, pad)?,
        });
    }

    // Material grid over one label period.
    let y_grid = Grid1D::new(n, ly, Boundary::Periodic)?;
    let y_start = states[levels / 2].y[0];

    // Trajectory of each material node through the stored levels.
    #[derive(Clone)]
    struct NodeTrack {
        x: Vec<f64>,
        v: Vec<f64>,
        tau: Vec<f64>,
        temp_over_beta: Vec<f64>,
    }
    let mut tracks = Vec::with_capacity(n);
    for j in 0..n {
        let target = y_start + y_grid.node(j);
        let mut track = NodeTrack {
            x: Vec::with_capacity(levels),
            v: Vec::with_capacity(levels),
            tau: Vec::with_capacity(levels),
            temp_over_beta: Vec::with_capacity(levels),
        };
        for itp in &itps {
            let xs = itp.map.invert(target)?;
            let yx = itp.y_x.eval(xs);
            let v = -itp.ydot.eval(xs) / yx;
            let taux = itp.tau_x.eval(xs);
            let taud = itp.taudot.eval(xs);
            let temp = beta * (taud + v * taux);
            if !(temp > 0.0) {
                return Err(FieldflowError::Domain("transformed state went cold".into()));
            }
            track.x.push(xs);
            track.v.push(v);
            track.tau.push(itp.tau.eval(xs));
            track.temp_over_beta.push(temp / beta);
        }
        tracks.push(track);
    }

    // Material-time band covered by every node, away from the edges.
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for track in &tracks {
        lo = lo.max(track.tau[1]);
        hi = hi.min(track.tau[levels - 2]);
    }
    if !(hi > lo) {
        return Err(FieldflowError::InvalidInput(
            "history is too short to bracket a material-time band".into(),
        ));
    }
    let margin = 0.05 * (hi - lo);
    let tau_levels: Vec<f64> = (0..5)
        .map(|m| lo + margin + (hi - lo - 2.0 * margin) * m as f64 / 4.0)
        .collect();
    let dtau = tau_levels[1] - tau_levels[0];

    // Invert the material-time parameterization per node, per target level.
    let mut sheet_t = vec![vec![0.0; n]; 5];
    let mut sheet_x = vec![vec![0.0; n]; 5];
    for (j, track) in tracks.iter().enumerate() {
        let clock = CubicHermite::new(
            times.to_vec(),
            track.tau.clone(),
            track.temp_over_beta.clone(),
        )?;
        let path = CubicHermite::new(times.to_vec(), track.x.clone(), track.v.clone())?;
        for (m, &tau_target) in tau_levels.iter().enumerate() {
            let tstar = clock.invert(tau_target)?;
            sheet_t[m][j] = tstar;
            sheet_x[m][j] = path.eval(tstar);
        }
    }

    // Route B: differentiate the sheet itself (4th order in both material
    // directions) at the middle level.
    let mid = 2usize;
    let dtau_coeff = |arr: &Vec<Vec<f64>>, j: usize| -> f64 {
        (arr[0][j] - 8.0 * arr[1][j] + 8.0 * arr[3][j] - arr[4][j]) / (12.0 * dtau)
    };
    let t_y = y_grid.deriv4(&sheet_t[mid], 0.0);
    let x_y = y_grid.deriv4(&sheet_x[mid], grid.length());
    let mut mid_jac = Vec::with_capacity(n);
    for j in 0..n {
        mid_jac.push(ClPoint {
            t_tau: dtau_coeff(&sheet_t, j),
            t_y: t_y[j],
            x_tau: dtau_coeff(&sheet_x, j),
            x_y: x_y[j],
        });
    }

    // Cross-check: kinematics of the transformed sheet against the
    // label-picture values interpolated at the matched spacetime points.
    let mut worst_t = 0.0f64;
    let mut worst_v = 0.0f64;
    let mut worst_vol = 0.0f64;
    let mut worst_identity = 0.0f64;
    for j in 0..n {
        let kin = kinematics_cl(mid_jac[j])?;
        let tstar = sheet_t[mid][j];
        let track = &tracks[j];
        // Reference values along the node track, interpolated in time with
        // difference-estimated slopes.
        let path_v =
            CubicHermite::new(times.to_vec(), track.v.clone(), fd_slopes(times, &track.v))?;
        let path_temp = CubicHermite::new(
            times.to_vec(),
            track.temp_over_beta.iter().map(|&q| q * beta).collect(),
            fd_slopes(
                times,
                &track
                    .temp_over_beta
                    .iter()
                    .map(|&q| q * beta)
                    .collect::<Vec<_>>(),
            ),
        )?;
        let v_ref = path_v.eval(tstar);
        let temp_ref = path_temp.eval(tstar);
        let vol_ref = {
            // V = 1/rho with rho taken from the level interpolants in time.
            let rho_track: Vec<f64> = (0..levels).map(|l| itps[l].y_x.eval(track.x[l])).collect();
            let itp = CubicHermite::new(
                times.to_vec(),
                rho_track.clone(),
                fd_slopes(times, &rho_track),
            )?;
            1.0 / itp.eval(tstar)
        };
        worst_t = worst_t.max((kin.temperature - temp_ref).abs());
        worst_v = worst_v.max((kin.velocity - v_ref).abs());
        worst_vol = worst_vol.max((kin.vol - vol_ref).abs());
        worst_identity =
            worst_identity.max((kin.vol - kin.chi * (1.0 - kin.w * kin.velocity)).abs());
    }
    let mut report = DiagnosticReport::new("complete placement transform cross-check");
    report.push(CheckLine::at_most(
        "temperature mismatch",
        worst_t,
        tolerance,
    ));
    report.push(CheckLine::at_most("velocity mismatch", worst_v, tolerance));
    report.push(CheckLine::at_most(
        "molar volume mismatch",
        worst_vol,
        tolerance,
    ));
    report.push(CheckLine::at_most(
        "volume factorization on the sheet",
        worst_identity,
        tolerance,
    ));
    Ok((
        ClSheet {
            tau_levels,
            y_grid,
            y_start,
            t: sheet_t,
            x: sheet_x,
            mid_jac,
        },
        report,
    ))
}

/// Second-order slope estimates for non-uniform Hermite data.
fn fd_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        if i == 0 {
            out[i] = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        } else if i == n - 1 {
            out[i] = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        } else {
            let hl = xs[i] - xs[i - 1];
            let hr = xs[i + 1] - xs[i];
            out[i] = (hl * hl * ys[i + 1] - hr * hr * ys[i - 1] + (hr * hr - hl * hl) * ys[i])
                / (hl * hr * (hl + hr));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gas() -> ThermalEos {
        ThermalEos::ideal_gas(1.0, 1.5, 1.0, 1.0).unwrap()
    }

    fn form() -> EntropyForm {
        EntropyForm::ideal_gas(1.0, 1.5, 1.0, 1.0).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> ClPoint {
        let t = 0.5 + 1.5 * rng.gen::<f64>();
        let v: f64 = 0.6 * (rng.gen::<f64>() - 0.5);
        let w: f64 = 0.4 * (rng.gen::<f64>() - 0.5);
        let vol = 0.6 + 1.2 * rng.gen::<f64>();
        let chi = vol / (1.0 - w * v);
        ClPoint {
            t_tau: 1.0 / t,
            t_y: w * chi,
            x_tau: v / t,
            x_y: chi,
        }
    }

    #[test]
    fn kinematics_examples() {
        // Identity map: T = V = 1, v = 0.
        let k = kinematics_cl(ClPoint {
            t_tau: 1.0,
            t_y: 0.0,
            x_tau: 0.0,
            x_y: 1.0,
        })
        .unwrap();
        assert_eq!(
            (k.temperature, k.vol, k.velocity, k.chi, k.w),
            (1.0, 1.0, 0.0, 1.0, 0.0)
        );

        // Slower clock t = 2 tau: T = 1/2.
        let k = kinematics_cl(ClPoint {
            t_tau: 2.0,
            t_y: 0.0,
            x_tau: 0.0,
            x_y: 1.0,
        })
        .unwrap();
        assert!((k.temperature - 0.5).abs() < 1e-15);

        // Linear drift x = y + 0.1 tau with t = tau: v = 0.1, chi = 1, and
        // t has no label dependence so w vanishes.
        let k = kinematics_cl(ClPoint {
            t_tau: 1.0,
            t_y: 0.0,
            x_tau: 0.1,
            x_y: 1.0,
        })
        .unwrap();
        assert!((k.velocity - 0.1).abs() < 1e-15);
        assert!((k.chi - 1.0).abs() < 1e-15);
        assert_eq!(k.w, 0.0);

        assert!(kinematics_cl(ClPoint {
            t_tau: -1.0,
            t_y: 0.0,
            x_tau: 0.0,
            x_y: 1.0
        })
        .is_err());
    }

    #[test]
    fn momenta_at_the_rest_reference_state() {
        let c = MaterialConstants::default();
        let ev = momenta_cl(
            ClPoint {
                t_tau: 1.0,
                t_y: 0.0,
                x_tau: 0.0,
                x_y: 1.0,
            },
            &gas(),
            &c,
        )
        .unwrap();
        // P^0_0 = pV - (e + pV) = -e = -1.5 at the ideal gas reference.
        assert!((ev.momenta[0][0] + 1.5).abs() < 1e-14);
        // P^0_1 = 0 at rest with no label-time mixing.
        assert!(ev.momenta[1][0].abs() < 1e-14);
        // Entropy vanishes at the reference state, so T^0_0 = 0.
        assert!(ev.tensor.comp[0][0].abs() < 1e-14);
    }

    #[test]
    fn entropy_entry_of_the_tensor() {
        let c = MaterialConstants::default();
        // Raise the temperature at V = 1 so that s = c_v ln T = 0.6.
        let t = (0.6f64 / 1.5).exp();
        let ev = momenta_cl(
            ClPoint {
                t_tau: 1.0 / t,
                t_y: 0.0,
                x_tau: 0.0,
                x_y: 1.0,
            },
            &gas(),
            &c,
        )
        .unwrap();
        assert!((ev.tensor.comp[0][0] + 0.6).abs() < 1e-12);
        assert!(ev.tensor.comp[1][0].abs() < 1e-15);
    }

    #[test]
    fn tensor_matches_contraction_and_identity_block() {
        let c = MaterialConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let pt = random_point(&mut rng);
            let dev = tensor_contraction_deviation(pt, &gas(), &c).unwrap();
            assert!(dev <= 1e-12, "contraction deviation {dev}");
            let idv = identity_block_deviation(pt, &gas(), &c).unwrap();
            assert!(idv <= 1e-12, "identity block deviation {idv}");
        }
    }

    #[test]
    fn rest_frame_inversion_is_closed_form() {
        let c = MaterialConstants::default();
        let inv = invert_canonical(-1.5, 0.0, ChiW { chi: 1.0, w: 0.0 }, &form(), &c).unwrap();
        assert!((inv.vol - 1.0).abs() < 1e-12);
        assert!((inv.energy - 1.5).abs() < 1e-12);
        assert_eq!(inv.iterations, 0);
    }

    #[test]
    fn forward_map_round_trip() {
        let c = MaterialConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let pt = random_point(&mut rng);
            let ev = momenta_cl(pt, &gas(), &c).unwrap();
            let chiw = ChiW {
                chi: ev.kin.chi,
                w: ev.kin.w,
            };
            let inv =
                invert_canonical(ev.momenta[0][0], ev.momenta[1][0], chiw, &form(), &c).unwrap();
            assert!(
                (inv.energy - ev.energy).abs() <= 1e-10 * ev.energy.abs().max(1.0),
                "energy {} vs {}",
                inv.energy,
                ev.energy
            );
            assert!(
                (inv.vol - ev.kin.vol).abs() <= 1e-10 * ev.kin.vol.abs().max(1.0),
                "volume {} vs {}",
                inv.vol,
                ev.kin.vol
            );
            assert!(inv.iterations <= 10, "took {} iterations", inv.iterations);
            assert!(inv.residual <= 1e-12 * (1.0 + c.molar_mass + ev.momenta[0][0].abs()));
        }
    }

    #[test]
    fn small_w_converges_quickly() {
        let c = MaterialConstants::default();
        let pt = ClPoint {
            t_tau: 1.0,
            t_y: 0.01,
            x_tau: 0.05,
            x_y: 1.0,
        };
        let ev = momenta_cl(pt, &gas(), &c).unwrap();
        let inv = invert_canonical(
            ev.momenta[0][0],
            ev.momenta[1][0],
            ChiW {
                chi: ev.kin.chi,
                w: ev.kin.w,
            },
            &form(),
            &c,
        )
        .unwrap();
        assert!(inv.iterations <= 5, "took {} iterations", inv.iterations);
    }

    #[test]
    fn rest_frame_probe_report() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| (0.8 + 0.05 * i as f64, 0.7 + 0.04 * i as f64))
            .collect();
        let report = rest_frame_reduction_cl(&form(), &pts, 1e-5, 1e-6).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn duality_of_the_two_time_momenta() {
        // On one physical state, the energy-like momentum of this picture
        // and the entropy-like canonical momentum of the label picture obey
        // their defining relations simultaneously.
        let c = MaterialConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let pt = random_point(&mut rng);
            let ev = momenta_cl(pt, &gas(), &c).unwrap();
            let z = pt.inverse().unwrap();
            let m = c.molar_mass;
            let enthalpy_tot =
                ev.energy + ev.pressure * ev.kin.vol + 0.5 * m * ev.kin.velocity * ev.kin.velocity;
            let lhs = ev.momenta[0][0] + enthalpy_tot;
            let rhs = ev.pressure * ev.kin.vol / ev.kin.temperature * z[0][0];
            assert!((lhs - rhs).abs() <= 1e-12);
            // Label-picture momentum conjugate to the material time.
            let rho = 1.0 / ev.kin.vol;
            let pi0 = c.beta * rho * ev.entropy;
            assert!((pi0 - c.beta * rho * ev.entropy).abs() <= 1e-15);
        }
    }

    fn linear_history(
        grid: Grid1D,
        u: f64,
        t0_temp: f64,
        dt: f64,
        levels: usize,
    ) -> (Vec<f64>, Vec<ThermoFieldState>) {
        let c = MaterialConstants::default();
        let eos = gas();
        let mut times = Vec::new();
        let mut states = Vec::new();
        for l in 0..levels {
            let t = l as f64 * dt;
            times.push(t);
            let y: Vec<f64> = grid.nodes().iter().map(|&x| x - u * t).collect();
            let tau: Vec<f64> = vec![t0_temp * t; grid.n];
            states.push(ThermoFieldState {
                grid,
                tau,
                y,
                taudot: vec![t0_temp; grid.n],
                ydot: vec![-u; grid.n],
                y_winding: grid.length(),
                constants: c,
                eos: eos.clone(),
            });
        }
        (times, states)
    }

    #[test]
    fn transform_identity_and_translation_are_exact() {
        let grid = Grid1D::new(64, 2.0 * std::f64::consts::PI, Boundary::Periodic).unwrap();
        // Identity configuration: y = x, tau = t.
        let (times, states) = linear_history(grid, 0.0, 1.0, 0.05, 7);
        let refs: Vec<&ThermoFieldState> = states.iter().collect();
        let (sheet, report) = transform_from_euler(&times, &refs, 1e-13).unwrap();
        assert!(report.passed(), "{report}");
        for j in 0..8 {
            let k = kinematics_cl(sheet.mid_jac[j]).unwrap();
            assert!((k.temperature - 1.0).abs() < 1e-13);
            assert!(k.velocity.abs() < 1e-13);
        }

        // Uniform translation with a uniform clock: linear inversion, exact.
        let (times, states) = linear_history(grid, 0.2, 1.3, 0.05, 7);
        let refs: Vec<&ThermoFieldState> = states.iter().collect();
        let (sheet, report) = transform_from_euler(&times, &refs, 1e-12).unwrap();
        assert!(report.passed(), "{report}");
        let k = kinematics_cl(sheet.mid_jac[3]).unwrap();
        assert!((k.velocity - 0.2).abs() < 1e-12);
        assert!((k.temperature - 1.3).abs() < 1e-12);
    }

    #[test]
    fn transform_smooth_wave() {
        use crate::manufactured::sample_on_grid;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (tau_f, y_f) = crate::thermo_euler::manufactured_potentials(&mut rng, 0.015);
        let n = 512;
        let grid = Grid1D::new(n, y_f.lengths[1], Boundary::Periodic).unwrap();
        let c = MaterialConstants::default();
        let eos = gas();
        let dt = 0.02;
        let mut times = Vec::new();
        let mut states = Vec::new();
        for l in 0..9 {
            let t = 0.5 + l as f64 * dt;
            times.push(t);
            let (tau, taudot) = sample_on_grid(&tau_f, &grid, t);
            let (y, ydot) = sample_on_grid(&y_f, &grid, t);
            states.push(ThermoFieldState {
                grid,
                tau,
                y,
                taudot,
                ydot,
                y_winding: y_f.winding(1),
                constants: c,
                eos: eos.clone(),
            });
        }
        let refs: Vec<&ThermoFieldState> = states.iter().collect();
        let (sheet, report) = transform_from_euler(&times, &refs, 1e-6).unwrap();
        assert!(report.passed(), "{report}");
        // The identity block holds on the re-differenced sheet too.
        for j in 0..n {
            let dev = identity_block_deviation(sheet.mid_jac[j], &gas(), &c);
            // The sheet Jacobian is itself FD-accurate, so the block holds
            // to the same tolerance as the kinematic cross-check.
            if let Ok(d) = dev {
                assert!(d <= 1e-6, "identity block {d} at node {j}");
            }
        }
    }
}
