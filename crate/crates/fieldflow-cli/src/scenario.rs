//! Scenario execution: initial-state construction, the time loop, CSV
//! diagnostics and JSON snapshots.

use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fieldflow::barotropic::{euler_balance_residual_fd, euler_field_residual, EulerFieldState};
use fieldflow::eos::{BarotropicEos, FluidEos, MaterialConstants};
use fieldflow::error::FieldflowError;
use fieldflow::grid::{Boundary, Grid1D, TimeStencil};
use fieldflow::hamiltonian::{
    conserved_totals, hamilton_rhs, neumann_hamiltonian, step, total_hamiltonian, CanonicalState,
    PinnedBoundary, Scheme,
};
use fieldflow::thermo_euler::{balance_residual_fd, entropy_residual, thermo_field_residual};

use crate::config::{EosConfig, InitialProfile, ScenarioConfig, SchemeConfig};
use crate::snapshot::SnapshotDto;

/// Where a run put its artifacts and how it ended.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub snapshot_path: PathBuf,
    pub exit: i32,
    pub message: Option<String>,
}

pub fn fluid_eos(cfg: &EosConfig) -> Result<FluidEos, FieldflowError> {
    match cfg {
        EosConfig::Polytrope { k, gamma } => FluidEos::polytrope(*k, *gamma),
        EosConfig::IdealGas { r, c_v, v0, t0 } | EosConfig::EntropyTable { r, c_v, v0, t0 } => {
            FluidEos::ideal_gas(*r, *c_v, *v0, *t0)
        }
    }
}

fn entropy_of_temperature(eos: &FluidEos, rho: f64, t: f64) -> Result<f64, FieldflowError> {
    match eos {
        FluidEos::Thermal { thermal, .. } => {
            let (_, s, _) = fieldflow::eos::thermal_response(thermal, 1.0 / rho, t)?;
            Ok(s)
        }
        FluidEos::Barotropic(_) => Ok(0.0),
    }
}

/// Builds the initial canonical state of a scenario.
pub fn build_state(cfg: &ScenarioConfig) -> Result<CanonicalState, FieldflowError> {
    let grid = Grid1D::new(cfg.n, cfg.length, cfg.boundary)?;
    let constants = MaterialConstants::new(cfg.molar_mass, cfg.beta)?;
    let eos = fluid_eos(&cfg.eos)?;
    let n = cfg.n;
    let beta = constants.beta;
    let m = constants.molar_mass;
    let mut tau = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut pi0 = vec![0.0; n];
    let mut pi1 = vec![0.0; n];
    let mut winding = 0.0;
    let mut pinned = None;
    match &cfg.initial {
        InitialProfile::Rest { rho0, s0 } => {
            for i in 0..n {
                y[i] = rho0 * grid.node(i);
                pi0[i] = if eos.is_thermal() {
                    beta * rho0 * s0
                } else {
                    0.0
                };
            }
            winding = rho0 * grid.length();
        }
        InitialProfile::SoundWave {
            rho0,
            s0,
            amplitude,
            wavenumber,
        } => {
            let k = 2.0 * std::f64::consts::PI * *wavenumber as f64 / grid.length();
            let cs2 = eos.dp_drho(*rho0, *s0)? / m;
            let cspeed = cs2.max(0.0).sqrt();
            for i in 0..n {
                let x = grid.node(i);
                // Label field = exact integral of rho0 (1 + a sin kx).
                y[i] = rho0 * (x + amplitude / k * (1.0 - (k * x).cos()));
                let rho = rho0 * (1.0 + amplitude * (k * x).sin());
                let v = cspeed * amplitude * (k * x).sin();
                pi0[i] = if eos.is_thermal() {
                    beta * rho * s0
                } else {
                    0.0
                };
                pi1[i] = -m * v;
            }
            winding = rho0 * grid.length();
        }
        InitialProfile::ThermalBath {
            rho0,
            t_left,
            t_right,
        } => {
            for i in 0..n {
                let x = grid.node(i);
                let frac = x / grid.length();
                let t_here = t_left + (t_right - t_left) * frac;
                let s = entropy_of_temperature(&eos, *rho0, t_here)?;
                y[i] = rho0 * x;
                pi0[i] = beta * rho0 * s;
            }
            winding = 0.0;
            pinned = Some(PinnedBoundary {
                temperature_left: *t_left,
                temperature_right: *t_right,
                y_left: y[0],
                y_right: y[n - 1],
                tau_left0: 0.0,
                tau_right0: 0.0,
            });
        }
        InitialProfile::Custom { rho, v, s } => {
            if rho.len() != n || v.len() != n || s.len() != n {
                return Err(FieldflowError::InvalidInput(
                    "custom profile arrays must match the grid".into(),
                ));
            }
            // Label field by trapezoid accumulation of the density.
            let mut acc = 0.0;
            for i in 0..n {
                y[i] = acc;
                if i + 1 < n {
                    acc += 0.5 * (rho[i] + rho[i + 1]) * grid.h;
                }
                pi0[i] = if eos.is_thermal() {
                    beta * rho[i] * s[i]
                } else {
                    0.0
                };
                pi1[i] = -m * v[i];
            }
            if cfg.boundary == Boundary::Periodic {
                winding = acc + 0.5 * (rho[n - 1] + rho[0]) * grid.h;
            }
        }
    }
    if let Some(pin) = &pinned {
        tau[0] = pin.tau_left0;
        tau[n - 1] = pin.tau_right0;
    }
    CanonicalState::new(grid, tau, y, pi0, pi1, winding, constants, eos, pinned)
}

const CSV_HEADER: &str = "t,norm_el_residual,norm_noether,norm_dVy,energy_total,momentum_total,mass_total,entropy_total,norm_entropy_residual,min_T,H_D,F_D";

struct DiagRow {
    t: f64,
    el: f64,
    noether: f64,
    dvy: f64,
    energy: f64,
    momentum: f64,
    mass: f64,
    entropy_tot: f64,
    entropy_res: f64,
    min_t: f64,
    h_d: f64,
    f_d: f64,
}

impl DiagRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.el,
            self.noether,
            self.dvy,
            self.energy,
            self.momentum,
            self.mass,
            self.entropy_tot,
            self.entropy_res,
            self.min_t,
            self.h_d,
            self.f_d
        )
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

/// Diagnostics at the target level of a three-state window.
fn diagnostics(
    window: [&CanonicalState; 3],
    dt: f64,
    stencil: TimeStencil,
) -> Result<DiagRow, FieldflowError> {
    let target = match stencil {
        TimeStencil::Central => window[1],
        TimeStencil::Forward => window[0],
        TimeStencil::Backward => window[2],
    };
    let obs = target.recover_observables()?;
    let (el, noether, entropy_res) = if target.eos.is_thermal() {
        let fields: Vec<_> = window
            .iter()
            .map(|s| fieldflow::hamiltonian::from_canonical(s))
            .collect::<Result<_, _>>()?;
        let refs: Vec<&fieldflow::thermo_euler::ThermoFieldState> = fields.iter().collect();
        let el = max_abs(&thermo_field_residual(&refs, dt, stencil)?);
        let noe = balance_residual_fd(&refs, dt, stencil)?;
        let er = entropy_residual(&refs, dt, stencil)?;
        (el, noe, er.divergence_form)
    } else {
        let eos = match &target.eos {
            FluidEos::Barotropic(b) => b.clone(),
            _ => unreachable!(),
        };
        let fields: Vec<EulerFieldState> = window
            .iter()
            .map(|s| -> Result<EulerFieldState, FieldflowError> {
                let rhs = hamilton_rhs(s)?;
                Ok(EulerFieldState {
                    grid: s.grid,
                    y: s.y.clone(),
                    ydot: rhs.ydot,
                    y_winding: s.y_winding,
                    constants: s.constants,
                    eos: eos.clone(),
                })
            })
            .collect::<Result<_, _>>()?;
        let refs: Vec<&EulerFieldState> = fields.iter().collect();
        let el = max_abs(&euler_field_residual(&refs, dt, stencil)?);
        let noe = euler_balance_residual_fd(&refs, dt, stencil)?;
        (el, noe, 0.0)
    };
    // Cofactor-divergence column: d(V y^1_1)/dy over the label coordinate.
    let cof: Vec<f64> = (0..target.grid.n)
        .map(|i| (1.0 / obs.rho[i]) * obs.y_x[i])
        .collect();
    let dcof = target.grid.deriv(&cof, 0.0);
    let dvy = (0..target.grid.n)
        .map(|i| (dcof[i] / obs.y_x[i]).abs())
        .fold(0.0f64, f64::max);
    let (mass, entropy_tot, momentum) = conserved_totals(target)?;
    let h_d = total_hamiltonian(target)?;
    let f_d = neumann_hamiltonian(target)?;
    let min_t = obs.temperature.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    Ok(DiagRow {
        t: target.time,
        el,
        noether,
        dvy,
        energy: h_d,
        momentum,
        mass,
        entropy_tot,
        entropy_res,
        min_t,
        h_d,
        f_d,
    })
}

/// Runs a scenario end to end.  On a mid-run invariant violation the CSV and
/// the last good snapshot are still flushed and the exit status is 2.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> std::io::Result<RunOutput> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("timeseries.csv");
    let snapshot_path = out_dir.join("final_state.json");
    let mut csv = fs::File::create(&csv_path)?;
    writeln!(csv, "{CSV_HEADER}")?;
    csv.flush()?;
    let eos_dto = SnapshotDto::from_eos_config(&cfg.eos);

    let scheme = match cfg.scheme {
        SchemeConfig::Rk4 => Scheme::Rk4,
        SchemeConfig::ImplicitMidpoint => Scheme::ImplicitMidpoint,
    };

    let state = match build_state(cfg) {
        Ok(s) => s,
        Err(e) => {
            // Dump the raw profile so the failure is inspectable.
            if let Ok(raw) = build_raw_dto(cfg) {
                let _ = raw.write_atomic(&snapshot_path);
            }
            return Ok(RunOutput {
                csv_path,
                snapshot_path,
                exit: 2,
                message: Some(e.to_string()),
            });
        }
    };

    let mut window: VecDeque<(usize, CanonicalState)> = VecDeque::new();
    window.push_back((0, state));
    let snap = cfg.snapshot_every;
    let wants_row = |i: usize| i % snap == 0 || i == cfg.steps;

    let emit = |win: &VecDeque<(usize, CanonicalState)>,
                target: usize,
                csv: &mut fs::File|
     -> std::io::Result<Result<(), FieldflowError>> {
        let idx_of = |step: usize| win.iter().position(|(s, _)| *s == step);
        let (stencil, triple) = if target == 0 {
            (TimeStencil::Forward, [0usize, 1, 2])
        } else if target == cfg.steps {
            let base = target - 2;
            (TimeStencil::Backward, [base, base + 1, base + 2])
        } else {
            (TimeStencil::Central, [target - 1, target, target + 1])
        };
        let states: Option<Vec<&CanonicalState>> = triple
            .iter()
            .map(|s| idx_of(*s).map(|i| &win[i].1))
            .collect();
        let Some(states) = states else {
            return Ok(Ok(()));
        };
        match diagnostics([states[0], states[1], states[2]], cfg.dt, stencil) {
            Ok(row) => {
                writeln!(csv, "{}", row.to_csv())?;
                csv.flush()?;
                let st = match stencil {
                    TimeStencil::Central => states[1],
                    TimeStencil::Forward => states[0],
                    TimeStencil::Backward => states[2],
                };
                let _ = SnapshotDto::from_state(st, eos_dto.clone()).write_atomic(&snapshot_path);
                Ok(Ok(()))
            }
            Err(e) => Ok(Err(e)),
        }
    };

    let mut failure: Option<String> = None;
    if cfg.steps >= 2 {
        'run: for i in 0..cfg.steps {
            let last = window.back().unwrap().1.clone();
            match step(&last, cfg.dt, scheme) {
                Ok(next) => {
                    window.push_back((i + 1, next));
                    if window.len() > 3 {
                        window.pop_front();
                    }
                    // A row for step s becomes computable once s+1 exists
                    // (or for s = 0 once step 2 exists).
                    let ready = if i + 1 >= 2 { i + 1 - 1 } else { 0 };
                    for target in [0usize, ready, cfg.steps] {
                        let computable = match target {
                            0 => i + 1 == 2,
                            t if t == cfg.steps => i + 1 == cfg.steps,
                            t => wants_row(t) && i + 1 == t + 1,
                        };
                        if computable {
                            match emit(&window, target, &mut csv)? {
                                Ok(()) => {}
                                Err(e) => {
                                    failure = Some(e.to_string());
                                    break 'run;
                                }
                            }
                        }
                    }
                }
                Err(e) => {
                    failure = Some(e.to_string());
                    break 'run;
                }
            }
        }
    } else {
        failure = Some("runs need at least 2 steps for the diagnostic stencils".to_string());
    }

    if let Some(msg) = failure {
        if let Some((_, last)) = window.back() {
            let _ = SnapshotDto::from_state(last, eos_dto).write_atomic(&snapshot_path);
        }
        return Ok(RunOutput {
            csv_path,
            snapshot_path,
            exit: 2,
            message: Some(msg),
        });
    }
    Ok(RunOutput {
        csv_path,
        snapshot_path,
        exit: 0,
        message: None,
    })
}

/// Raw (unvalidated) snapshot of the configured initial profile.
fn build_raw_dto(cfg: &ScenarioConfig) -> Result<SnapshotDto, FieldflowError> {
    let grid = Grid1D::new(cfg.n, cfg.length, cfg.boundary)?;
    let n = cfg.n;
    let m = cfg.molar_mass;
    let beta = cfg.beta;
    let mut y = vec![0.0; n];
    let mut pi0 = vec![0.0; n];
    let mut pi1 = vec![0.0; n];
    let winding;
    match &cfg.initial {
        InitialProfile::SoundWave {
            rho0,
            s0,
            amplitude,
            wavenumber,
        } => {
            let k = 2.0 * std::f64::consts::PI * *wavenumber as f64 / grid.length();
            for i in 0..n {
                let x = grid.node(i);
                y[i] = rho0 * (x + amplitude / k * (1.0 - (k * x).cos()));
                let rho = rho0 * (1.0 + amplitude * (k * x).sin());
                pi0[i] = beta * rho * s0;
                pi1[i] = -m * amplitude * (k * x).sin();
            }
            winding = rho0 * grid.length();
        }
        _ => {
            for i in 0..n {
                y[i] = grid.node(i);
            }
            winding = grid.length();
        }
    }
    Ok(SnapshotDto {
        time: 0.0,
        n,
        length: cfg.length,
        boundary: match cfg.boundary {
            Boundary::Periodic => "periodic".into(),
            Boundary::Dirichlet => "dirichlet".into(),
        },
        eos: SnapshotDto::from_eos_config(&cfg.eos),
        molar_mass: m,
        beta,
        tau: vec![0.0; n],
        y,
        pi0,
        pi1,
        y_winding: winding,
        pinned: None,
    })
}

/// Convenience for tests: barotropic EOS extraction.
pub fn barotropic_of(state: &CanonicalState) -> Option<&BarotropicEos> {
    match &state.eos {
        FluidEos::Barotropic(b) => Some(b),
        _ => None,
    }
}
