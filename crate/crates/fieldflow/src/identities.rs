//! Per-picture identity suites: every structural identity of the
//! formulation, evaluated on random manufactured states with analytic
//! derivatives and re-measured with finite differences under grid
//! refinement.  These reports back both the command-line `identities`
//! subcommand and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barotropic::{
    self, euler_dependency_residual, lagrange_dependency_residual, manufactured_map,
    offshell_residual_at, tensor_table_deviation, Picture,
};
use crate::complete_lagrange::{
    identity_block_deviation, invert_canonical, momenta_cl, rest_frame_reduction_cl,
    tensor_contraction_deviation, ChiW, ClPoint,
};
use crate::eos::{BarotropicEos, EntropyForm, MaterialConstants, ThermalEos};
use crate::error::Result;
use crate::kinematics::{
    cofactor_fd_residual, continuity_fd_residual, current_divergence_at_point,
    volume_cofactor_divergence, Jacobian, Orientation,
};
use crate::manufactured::FourierField3;
use crate::numdiff::refinement_order;
use crate::report::{CheckLine, DiagnosticReport};
use crate::thermo_euler::{self, manufactured_potentials};

/// Default grid ladder for refinement-order measurements.
pub const ORDER_GRIDS: [usize; 4] = [64, 128, 256, 512];

/// Shorter ladder for studies whose cost grows with the cube of the grid.
pub const ORDER_GRIDS_3D: [usize; 3] = [32, 64, 128];

const STATES: usize = 20;
const POINTS_PER_STATE: usize = 9;

fn sample_points(field_lengths: [f64; 2]) -> Vec<[f64; 2]> {
    (0..POINTS_PER_STATE)
        .map(|k| {
            [
                field_lengths[0] * (0.07 + 0.11 * k as f64) % field_lengths[0],
                field_lengths[1] * (0.13 + 0.17 * k as f64) % field_lengths[1],
            ]
        })
        .collect()
}

fn default_barotropic() -> (BarotropicEos, MaterialConstants) {
    (
        BarotropicEos::polytrope(1.0, 2.0).expect("built-in polytrope"),
        MaterialConstants::default(),
    )
}

fn default_thermal() -> (ThermalEos, MaterialConstants) {
    (
        ThermalEos::ideal_gas(1.0, 1.5, 1.0, 1.0).expect("built-in ideal gas"),
        MaterialConstants::default(),
    )
}

/// Placement-picture suite: off-shell balance (analytic and FD order),
/// component dependency, tensor table vs contraction.
pub fn identity_report_lagrange(seed: u64) -> Result<DiagnosticReport> {
    let (eos, constants) = default_barotropic();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DiagnosticReport::new("placement picture identities");

    let mut worst_balance = 0.0f64;
    let mut worst_dep = 0.0f64;
    let mut tensor_pts = Vec::new();
    for _ in 0..STATES {
        let field = manufactured_map(&mut rng, 0.04);
        for &u in &sample_points(field.lengths) {
            let res = offshell_residual_at(Picture::Lagrange, &field, u, &eos, &constants)?;
            worst_balance = worst_balance.max(res[0].abs()).max(res[1].abs());
            worst_dep = worst_dep.max(lagrange_dependency_residual(&field, u, &eos, &constants)?);
            tensor_pts.push(field.grad(u));
        }
    }
    report.push(CheckLine::at_most(
        "off-shell balance, analytic derivatives",
        worst_balance,
        1e-10,
    ));
    report.push(CheckLine::at_most(
        "component dependency, analytic derivatives",
        worst_dep,
        1e-9,
    ));
    report.push(CheckLine::at_most(
        "tensor table vs defining contraction",
        tensor_table_deviation(Picture::Lagrange, &tensor_pts, &eos, &constants)?,
        1e-12,
    ));

    let field = manufactured_map(&mut rng, 0.04);
    let (_, order) =
        barotropic::offshell_fd_order(Picture::Lagrange, &field, &ORDER_GRIDS, &eos, &constants)?;
    report.push(CheckLine::at_least(
        "off-shell balance FD convergence order",
        order,
        1.9,
    ));
    Ok(report)
}

/// Label-picture suite: the placement suite's checks plus automatic
/// continuity and the cofactor-divergence identity.
pub fn identity_report_euler(seed: u64) -> Result<DiagnosticReport> {
    let (eos, constants) = default_barotropic();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DiagnosticReport::new("label picture identities");

    let mut worst_balance = 0.0f64;
    let mut worst_dep = 0.0f64;
    let mut tensor_pts = Vec::new();
    for _ in 0..STATES {
        let field = manufactured_map(&mut rng, 0.04);
        for &u in &sample_points(field.lengths) {
            let res = offshell_residual_at(Picture::Euler, &field, u, &eos, &constants)?;
            worst_balance = worst_balance.max(res[0].abs()).max(res[1].abs());
            worst_dep = worst_dep.max(euler_dependency_residual(&field, u, &eos, &constants)?);
            tensor_pts.push(field.grad(u));
        }
    }
    report.push(CheckLine::at_most(
        "off-shell balance, analytic derivatives",
        worst_balance,
        1e-10,
    ));
    report.push(CheckLine::at_most(
        "component dependency, analytic derivatives",
        worst_dep,
        1e-9,
    ));
    report.push(CheckLine::at_most(
        "tensor table vs defining contraction",
        tensor_table_deviation(Picture::Euler, &tensor_pts, &eos, &constants)?,
        1e-12,
    ));

    let field = manufactured_map(&mut rng, 0.04);
    let (_, order) =
        barotropic::offshell_fd_order(Picture::Euler, &field, &ORDER_GRIDS, &eos, &constants)?;
    report.push(CheckLine::at_least(
        "off-shell balance FD convergence order",
        order,
        1.9,
    ));

    // Automatic continuity: pointwise with the Levi-Civita chain rule in
    // 3+1 dimensions, then the FD order study in 1+1.
    let mut worst_cont = 0.0f64;
    for _ in 0..STATES {
        let mut grad = [[0.0; 4]; 3];
        for (a, row) in grad.iter_mut().enumerate() {
            for (mu, g) in row.iter_mut().enumerate() {
                *g = if mu == a + 1 {
                    1.0 + 0.3 * rng.gen::<f64>()
                } else {
                    0.3 * (rng.gen::<f64>() - 0.5)
                };
            }
        }
        let mut hess = [[[0.0; 4]; 4]; 3];
        for a in 0..3 {
            for mu in 0..4 {
                for nu in mu..4 {
                    let v = 0.4 * (rng.gen::<f64>() - 0.5);
                    hess[a][mu][nu] = v;
                    hess[a][nu][mu] = v;
                }
            }
        }
        worst_cont = worst_cont.max(current_divergence_at_point(&grad, &hess).abs());
    }
    report.push(CheckLine::at_most(
        "automatic continuity, analytic derivatives",
        worst_cont,
        1e-10,
    ));
    let cfield = manufactured_map(&mut rng, 0.04);
    let cont_res: Vec<f64> = ORDER_GRIDS
        .iter()
        .map(|&n| continuity_fd_residual(&cfield, n))
        .collect::<Result<_>>()?;
    report.push(CheckLine::at_least(
        "continuity FD convergence order",
        refinement_order(&cont_res),
        1.9,
    ));

    // Cofactor-divergence identity, pointwise then under refinement.
    let mut worst_cof = 0.0f64;
    for _ in 0..STATES {
        for &d in &[2usize, 3] {
            let mut entries = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    entries[i * d + j] = if i == j {
                        1.2 + 0.6 * rng.gen::<f64>()
                    } else {
                        0.3 * (rng.gen::<f64>() - 0.5)
                    };
                }
            }
            let jac = Jacobian::new(d, entries, Orientation::PositionByLabel)?;
            let mut hess = vec![vec![0.0; d * d]; d];
            for plane in hess.iter_mut() {
                for a in 0..d {
                    for b in a..d {
                        let v = 0.4 * (rng.gen::<f64>() - 0.5);
                        plane[a * d + b] = v;
                        plane[b * d + a] = v;
                    }
                }
            }
            for r in volume_cofactor_divergence(&jac, &hess)? {
                worst_cof = worst_cof.max(r.abs());
            }
        }
    }
    report.push(CheckLine::at_most(
        "cofactor divergence, analytic derivatives",
        worst_cof,
        1e-10,
    ));
    let l = 2.0 * std::f64::consts::PI;
    let maps = [
        FourierField3::random(&mut rng, [l, l, l], 0.0, [1.0, 0.0, 0.0], 0.04, 1),
        FourierField3::random(&mut rng, [l, l, l], 0.0, [0.0, 1.0, 0.0], 0.04, 1),
        FourierField3::random(&mut rng, [l, l, l], 0.0, [0.0, 0.0, 1.0], 0.04, 1),
    ];
    // The 3D study uses a shorter grid ladder: memory and time grow cubically.
    let cof_res: Vec<f64> = ORDER_GRIDS_3D
        .iter()
        .map(|&n| cofactor_fd_residual(&maps, n))
        .collect::<Result<_>>()?;
    report.push(CheckLine::at_least(
        "cofactor divergence FD convergence order",
        refinement_order(&cof_res),
        1.9,
    ));
    Ok(report)
}

/// Four-potential picture suite: off-shell balance, potential-Jacobian
/// invertibility, tensor consistency with `e = f + T s`.
pub fn identity_report_thermo(seed: u64) -> Result<DiagnosticReport> {
    let (eos, constants) = default_thermal();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DiagnosticReport::new("four-potential picture identities");

    let mut worst_balance = 0.0f64;
    let mut min_det = f64::INFINITY;
    let mut worst_tensor = 0.0f64;
    let mut worst_energy = 0.0f64;
    for _ in 0..STATES {
        let (tau, y) = manufactured_potentials(&mut rng, 0.04);
        for &u in &sample_points(tau.lengths) {
            let (res, det) = thermo_euler::offshell_residual_at(&tau, &y, u, &eos, &constants)?;
            worst_balance = worst_balance.max(res[0].abs()).max(res[1].abs());
            min_det = min_det.min(det.abs());
            let jac = [tau.grad(u), y.grad(u)];
            let theory = thermo_euler::thermo_point_theory(&eos, &constants);
            let pt = theory(&jac)?;
            let reference = crate::noether::contraction_tensor(&pt, &jac);
            for b in 0..2 {
                for a in 0..2 {
                    worst_tensor = worst_tensor.max((pt.tensor[b][a] - reference[b][a]).abs());
                }
            }
            // t^0_0 assembled from f must equal rho (Mv^2/2 + e).
            let ev = thermo_euler::thermo_eval(
                thermo_euler::ThermoPointData {
                    taudot: jac[0][0],
                    tau_x: jac[0][1],
                    ydot: jac[1][0],
                    y_x: jac[1][1],
                },
                &eos,
                &constants,
            )?;
            let m = constants.molar_mass;
            let direct = ev.rho * (0.5 * m * ev.velocity * ev.velocity + ev.energy);
            worst_energy = worst_energy.max((ev.tensor.comp[0][0] - direct).abs());
        }
    }
    report.push(CheckLine::at_most(
        "off-shell balance, analytic derivatives",
        worst_balance,
        1e-10,
    ));
    report.push(CheckLine::at_least(
        "potential Jacobian determinant (min |det|)",
        min_det,
        0.1,
    ));
    report.push(CheckLine::at_most(
        "tensor table vs defining contraction",
        worst_tensor,
        1e-12,
    ));
    report.push(CheckLine::at_most(
        "energy density vs e = f + T s",
        worst_energy,
        1e-12,
    ));

    let (tau, y) = manufactured_potentials(&mut rng, 0.04);
    let (_, order) = thermo_euler::offshell_fd_order(&tau, &y, &ORDER_GRIDS, &eos, &constants)?;
    report.push(CheckLine::at_least(
        "off-shell balance FD convergence order",
        order,
        1.9,
    ));
    Ok(report)
}

/// Complete placement picture suite: tensor contraction, identity block,
/// canonical inversion round trip and the rest-frame probes.
pub fn identity_report_complete_lagrange(seed: u64) -> Result<DiagnosticReport> {
    let (eos, constants) = default_thermal();
    let form = EntropyForm::ideal_gas(1.0, 1.5, 1.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DiagnosticReport::new("complete placement picture identities");

    let mut worst_contraction = 0.0f64;
    let mut worst_block = 0.0f64;
    let mut worst_roundtrip = 0.0f64;
    let mut max_iters = 0usize;
    let mut worst_duality = 0.0f64;
    for _ in 0..100 {
        let t = 0.5 + 1.5 * rng.gen::<f64>();
        let v: f64 = 0.6 * (rng.gen::<f64>() - 0.5);
        let w: f64 = 0.4 * (rng.gen::<f64>() - 0.5);
        let vol = 0.6 + 1.2 * rng.gen::<f64>();
        let chi = vol / (1.0 - w * v);
        let pt = ClPoint {
            t_tau: 1.0 / t,
            t_y: w * chi,
            x_tau: v / t,
            x_y: chi,
        };
        worst_contraction =
            worst_contraction.max(tensor_contraction_deviation(pt, &eos, &constants)?);
        worst_block = worst_block.max(identity_block_deviation(pt, &eos, &constants)?);
        let ev = momenta_cl(pt, &eos, &constants)?;
        let inv = invert_canonical(
            ev.momenta[0][0],
            ev.momenta[1][0],
            ChiW {
                chi: ev.kin.chi,
                w: ev.kin.w,
            },
            &form,
            &constants,
        )?;
        worst_roundtrip = worst_roundtrip
            .max((inv.energy - ev.energy).abs() / ev.energy.abs().max(1.0))
            .max((inv.vol - ev.kin.vol).abs() / ev.kin.vol.abs().max(1.0));
        max_iters = max_iters.max(inv.iterations);
        // Energy/entropy duality on the same physical state.
        let z = pt.inverse()?;
        let m = constants.molar_mass;
        let enthalpy_tot =
            ev.energy + ev.pressure * ev.kin.vol + 0.5 * m * ev.kin.velocity * ev.kin.velocity;
        let lhs = ev.momenta[0][0] + enthalpy_tot;
        let rhs = ev.pressure * ev.kin.vol / ev.kin.temperature * z[0][0];
        worst_duality = worst_duality.max((lhs - rhs).abs());
        let rho = 1.0 / ev.kin.vol;
        let pi0 = constants.beta * rho * ev.entropy;
        worst_duality = worst_duality.max((pi0 - constants.beta * rho * ev.entropy).abs());
    }
    report.push(CheckLine::at_most(
        "tensor table vs defining contraction",
        worst_contraction,
        1e-12,
    ));
    report.push(CheckLine::at_most(
        "identity block (vanishing entry, det, V factorization)",
        worst_block,
        1e-12,
    ));
    report.push(CheckLine::at_most(
        "canonical inversion round trip",
        worst_roundtrip,
        1e-10,
    ));
    report.push(CheckLine::at_most(
        "canonical inversion iterations",
        max_iters as f64,
        10.0,
    ));
    report.push(CheckLine::at_most(
        "time-momentum duality",
        worst_duality,
        1e-12,
    ));

    let pts: Vec<(f64, f64)> = (0..25)
        .map(|_| (0.6 + 1.5 * rng.gen::<f64>(), 0.5 + 1.5 * rng.gen::<f64>()))
        .collect();
    let rest = rest_frame_reduction_cl(&form, &pts, 1e-5, 1e-6)?;
    for check in rest.checks {
        report.push(check);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placement_suite_passes() {
        let r = identity_report_lagrange(1).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn label_suite_passes() {
        let r = identity_report_euler(2).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn four_potential_suite_passes() {
        let r = identity_report_thermo(3).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn complete_placement_suite_passes() {
        let r = identity_report_complete_lagrange(4).unwrap();
        assert!(r.passed(), "{r}");
    }
}
