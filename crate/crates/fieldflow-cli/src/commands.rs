//! Subcommand implementations behind the `fieldflow` binary.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use fieldflow::eos::FluidEos;
use fieldflow::grid::{Boundary, Grid1D};
use fieldflow::hamiltonian::CanonicalState;
use fieldflow::identities;
use fieldflow::microkinetic;
use fieldflow::poisson::reduced_bracket_audit;
use fieldflow::report::DiagnosticReport;

use crate::config::parse_config;
use crate::scenario::{fluid_eos, run_scenario};

pub const USAGE: &str = "\
fieldflow - potential-based fluid thermo-hydrodynamics laboratory

USAGE:
    fieldflow simulate --config <path> [--out <dir>]
    fieldflow identities --picture <lagrange|euler|thermo|complete-lagrange> [--seed <n>] [--out <path>]
    fieldflow brackets [--n <nodes>] [--seed <n>] [--out <path>]
    fieldflow micro --T <temp> --m <mass> --c <light speed> --N <particles> --seed <n>
    fieldflow eos-check [--config <path>]

Exit codes: 0 success, 1 usage or configuration error, 2 invariant violation
(diagnostics are still flushed).  The environment variable FIELDFLOW_SEED
overrides any configured seed.";

fn flag_value(args: &[String], flag: &str) -> Option<String> {
    args.iter()
        .position(|a| a == flag)
        .and_then(|i| args.get(i + 1))
        .cloned()
}

fn env_seed(fallback: u64) -> u64 {
    std::env::var("FIELDFLOW_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(fallback)
}

fn write_or_print(out: Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
            f.flush()
        }
        None => {
            print!("{text}");
            std::io::stdout().flush()
        }
    }
}

pub fn dispatch(args: &[String]) -> i32 {
    match args.first().map(String::as_str) {
        Some("simulate") => cmd_simulate(&args[1..]),
        Some("identities") => cmd_identities(&args[1..]),
        Some("brackets") => cmd_brackets(&args[1..]),
        Some("micro") => cmd_micro(&args[1..]),
        Some("eos-check") => cmd_eos_check(&args[1..]),
        _ => {
            eprintln!("{USAGE}");
            1
        }
    }
}

fn cmd_simulate(args: &[String]) -> i32 {
    let Some(config_path) = flag_value(args, "--config") else {
        eprintln!("simulate needs --config <path>\n{USAGE}");
        return 1;
    };
    let text = match fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {config_path}: {e}");
            return 1;
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("configuration errors:");
            for e in errors {
                eprintln!("  - {e}");
            }
            return 1;
        }
    };
    cfg.seed = env_seed(cfg.seed);
    let out_dir = flag_value(args, "--out").unwrap_or_else(|| "out".to_string());
    match run_scenario(&cfg, std::path::Path::new(&out_dir)) {
        Ok(output) => {
            if let Some(msg) = &output.message {
                eprintln!("{msg}");
            }
            eprintln!(
                "wrote {} and {}",
                output.csv_path.display(),
                output.snapshot_path.display()
            );
            output.exit
        }
        Err(e) => {
            eprintln!("i/o failure: {e}");
            2
        }
    }
}

fn report_to_csv(picture: &str, report: &DiagnosticReport) -> String {
    let mut out = String::from("picture,check,value,threshold,pass\n");
    for c in &report.checks {
        out.push_str(&format!(
            "{picture},{},{:e},{:e},{}\n",
            c.name.replace(',', ";"),
            c.value,
            c.threshold,
            if c.pass() { "pass" } else { "FAIL" }
        ));
    }
    out
}

fn cmd_identities(args: &[String]) -> i32 {
    let Some(picture) = flag_value(args, "--picture") else {
        eprintln!("identities needs --picture\n{USAGE}");
        return 1;
    };
    let seed = env_seed(
        flag_value(args, "--seed")
            .and_then(|v| v.parse().ok())
            .unwrap_or(1),
    );
    let report = match picture.as_str() {
        "lagrange" => identities::identity_report_lagrange(seed),
        "euler" => identities::identity_report_euler(seed),
        "thermo" => identities::identity_report_thermo(seed),
        "complete-lagrange" => identities::identity_report_complete_lagrange(seed),
        other => {
            eprintln!("unknown picture `{other}`\n{USAGE}");
            return 1;
        }
    };
    match report {
        Ok(r) => {
            let csv = report_to_csv(&picture, &r);
            let out = flag_value(args, "--out").map(PathBuf::from);
            if write_or_print(out, &csv).is_err() {
                return 2;
            }
            if r.passed() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}

/// Standard smooth state used by the bracket audit.
fn audit_state(n: usize) -> Result<CanonicalState, fieldflow::FieldflowError> {
    let grid = Grid1D::new(n, 2.0 * std::f64::consts::PI, Boundary::Periodic)?;
    let c = fieldflow::eos::MaterialConstants::default();
    let eos = FluidEos::ideal_gas(1.0, 1.5, 1.0, 1.0)?;
    let mut y = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    let mut pi0 = Vec::with_capacity(n);
    let mut pi1 = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.node(i);
        y.push(x + 0.02 * (1.0 - x.cos()));
        tau.push(0.04 * (2.0 * x).sin());
        let rho = 1.0 + 0.02 * x.sin();
        pi0.push(rho * (0.3 + 0.1 * x.cos()));
        pi1.push(-0.03 * x.sin());
    }
    CanonicalState::new(grid, tau, y, pi0, pi1, grid.length(), c, eos, None)
}

fn cmd_brackets(args: &[String]) -> i32 {
    let n: usize = flag_value(args, "--n")
        .and_then(|v| v.parse().ok())
        .unwrap_or(128);
    let _seed = env_seed(
        flag_value(args, "--seed")
            .and_then(|v| v.parse().ok())
            .unwrap_or(1),
    );
    let state = match audit_state(n) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let phi: Vec<f64> = (0..n)
        .map(|i| (3.0 * ((state.grid.node(i) - 2.0).cos() - 1.0)).exp())
        .collect();
    let psi: Vec<f64> = (0..n)
        .map(|i| (3.0 * ((state.grid.node(i) - 4.0).cos() - 1.0)).exp())
        .collect();
    match reduced_bracket_audit(&state, &phi, &psi) {
        Ok(rows) => {
            let mut csv = String::from("pair,canonical_value,claimed_value,abs_diff,rel_diff\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{:e},{:e},{:e},{:e}\n",
                    r.pair.replace(',', ";"),
                    r.canonical,
                    r.claimed,
                    r.abs_diff(),
                    r.rel_diff()
                ));
            }
            let out = flag_value(args, "--out").map(PathBuf::from);
            if write_or_print(out, &csv).is_err() {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}

fn cmd_micro(args: &[String]) -> i32 {
    let parse = |flag: &str, default: f64| -> f64 {
        flag_value(args, flag)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    };
    let t = parse("--T", 1.0);
    let m = parse("--m", 1.0);
    let c = parse("--c", 10.0);
    let n: usize = flag_value(args, "--N")
        .and_then(|v| v.parse().ok())
        .unwrap_or(100_000);
    let seed = env_seed(
        flag_value(args, "--seed")
            .and_then(|v| v.parse().ok())
            .unwrap_or(0),
    );
    match microkinetic::run_thermometer(t, m, n, seed, c, 1.0) {
        Ok(r) => {
            println!(
                "{},{:e},{:e},{:e},{:e}",
                r.t_in, r.rate, r.t_hat, r.rel_err, r.lifetime_factor
            );
            0
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}

fn cmd_eos_check(args: &[String]) -> i32 {
    let eos = match flag_value(args, "--config") {
        Some(path) => {
            let text = match fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {path}: {e}");
                    return 1;
                }
            };
            match parse_config(&text) {
                Ok(cfg) => match fluid_eos(&cfg.eos) {
                    Ok(e) => e,
                    Err(e) => {
                        eprintln!("{e}");
                        return 1;
                    }
                },
                Err(errors) => {
                    for e in errors {
                        eprintln!("  - {e}");
                    }
                    return 1;
                }
            }
        }
        None => FluidEos::ideal_gas(1.0, 1.5, 1.0, 1.0).expect("default gas"),
    };
    let mut samples = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            samples.push((0.5 + 0.15 * i as f64, -0.4 + 0.1 * j as f64));
        }
    }
    match fieldflow::eos::audit_fundamental(&eos, &samples) {
        Ok(report) => {
            print!("{report}");
            if report.passed() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}
