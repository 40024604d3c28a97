//! Plain-text scenario configuration: `[section]` headers and `key = value`
//! lines, `#` comments.  Validation collects every error instead of stopping
//! at the first one.

use std::collections::BTreeMap;

use fieldflow::grid::Boundary;

/// Equation-of-state selection.
#[derive(Debug, Clone, PartialEq)]
pub enum EosConfig {
    Polytrope {
        k: f64,
        gamma: f64,
    },
    IdealGas {
        r: f64,
        c_v: f64,
        v0: f64,
        t0: f64,
    },
    /// Ideal-gas entropy form driven through `(e, V)`; same parameters.
    EntropyTable {
        r: f64,
        c_v: f64,
        v0: f64,
        t0: f64,
    },
}

/// Initial profile of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    Rest {
        rho0: f64,
        s0: f64,
    },
    SoundWave {
        rho0: f64,
        s0: f64,
        amplitude: f64,
        wavenumber: u32,
    },
    ThermalBath {
        rho0: f64,
        t_left: f64,
        t_right: f64,
    },
    Custom {
        rho: Vec<f64>,
        v: Vec<f64>,
        s: Vec<f64>,
    },
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeConfig {
    Rk4,
    ImplicitMidpoint,
}

/// Fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub length: f64,
    pub boundary: Boundary,
    pub eos: EosConfig,
    pub molar_mass: f64,
    pub beta: f64,
    pub initial: InitialProfile,
    pub dt: f64,
    pub steps: usize,
    pub scheme: SchemeConfig,
    pub snapshot_every: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 128,
            length: 2.0 * std::f64::consts::PI,
            boundary: Boundary::Periodic,
            eos: EosConfig::IdealGas {
                r: 1.0,
                c_v: 1.5,
                v0: 1.0,
                t0: 1.0,
            },
            molar_mass: 1.0,
            beta: 1.0,
            initial: InitialProfile::Rest { rho0: 1.0, s0: 0.0 },
            dt: 1e-3,
            steps: 100,
            scheme: SchemeConfig::ImplicitMidpoint,
            snapshot_every: 10,
            seed: 0,
        }
    }
}

type Entry = (String, usize); // value, line number

#[derive(Debug, Default)]
struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("grid", &["n", "length", "boundary"]),
    ("eos", &["kind", "k", "gamma", "r", "c_v", "v0", "t0"]),
    ("material", &["m", "beta"]),
    (
        "initial",
        &[
            "profile",
            "rho0",
            "s0",
            "amplitude",
            "wavenumber",
            "t_left",
            "t_right",
            "rho",
            "v",
            "s",
        ],
    ),
    (
        "run",
        &[
            "dt",
            "steps",
            "scheme",
            "snapshot_every",
            "seed",
            "boundary",
        ],
    ),
];

fn tokenize(text: &str, errors: &mut Vec<String>) -> RawConfig {
    let mut raw = RawConfig::default();
    let mut section: Option<String> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !KNOWN_KEYS.iter().any(|(s, _)| *s == name) {
                errors.push(format!("line {lineno}: unknown section [{name}]"));
                section = None;
                continue;
            }
            raw.sections.entry(name.clone()).or_default();
            section = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!(
                "line {lineno}: expected `key = value`, got `{line}`"
            ));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let Some(sec) = &section else {
            errors.push(format!("line {lineno}: key `{key}` outside any section"));
            continue;
        };
        let known = KNOWN_KEYS
            .iter()
            .find(|(s, _)| s == sec)
            .map(|(_, keys)| keys.contains(&key.as_str()))
            .unwrap_or(false);
        if !known {
            errors.push(format!("line {lineno}: unknown key `{sec}.{key}`"));
            continue;
        }
        let entries = raw.sections.entry(sec.clone()).or_default();
        if let Some((_, first_line)) = entries.get(&key) {
            errors.push(format!(
                "duplicate key `{sec}.{key}` at lines {first_line} and {lineno}"
            ));
            continue;
        }
        entries.insert(key, (value, lineno));
    }
    raw
}

struct Reader<'a> {
    raw: &'a RawConfig,
    errors: &'a mut Vec<String>,
}

impl<'a> Reader<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a str> {
        self.raw
            .sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|(v, _)| v.as_str())
    }

    fn f64_or(&mut self, section: &str, key: &str, default: f64) -> f64 {
        match self.get(section, key) {
            None => default,
            Some(text) => match text.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    self.errors
                        .push(format!("`{section}.{key}` = {text} is not a finite number"));
                    default
                }
            },
        }
    }

    fn usize_or(&mut self, section: &str, key: &str, default: usize) -> usize {
        match self.get(section, key) {
            None => default,
            Some(text) => match text.parse::<usize>() {
                Ok(v) => v,
                _ => {
                    self.errors.push(format!(
                        "`{section}.{key}` = {text} is not a non-negative integer"
                    ));
                    default
                }
            },
        }
    }

    fn list_or(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let text = self.get(section, key)?;
        let mut out = Vec::new();
        for part in text.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    self.errors.push(format!(
                        "`{section}.{key}` contains a non-numeric entry `{}`",
                        part.trim()
                    ));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn range(
        &mut self,
        ok: bool,
        section: &str,
        key: &str,
        value: impl std::fmt::Display,
        bound: &str,
    ) {
        if !ok {
            self.errors.push(format!(
                "`{section}.{key}` = {value} out of range: must be {bound}"
            ));
        }
    }
}

/// Parses and fully validates a scenario; on failure returns every problem
/// found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<String>> {
    let mut errors = Vec::new();
    let raw = tokenize(text, &mut errors);
    let mut cfg = ScenarioConfig::default();
    {
        let mut r = Reader {
            raw: &raw,
            errors: &mut errors,
        };

        cfg.n = r.usize_or("grid", "n", cfg.n);
        r.range(cfg.n >= 8, "grid", "n", cfg.n, ">= 8");
        cfg.length = r.f64_or("grid", "length", cfg.length);
        r.range(cfg.length > 0.0, "grid", "length", cfg.length, "> 0");
        match r.get("grid", "boundary") {
            None => {}
            Some("periodic") => cfg.boundary = Boundary::Periodic,
            Some("dirichlet") => cfg.boundary = Boundary::Dirichlet,
            Some(other) => r.errors.push(format!(
                "`grid.boundary` = {other}: expected periodic or dirichlet"
            )),
        }
        if let Some(rb) = r.get("run", "boundary") {
            let want = match rb {
                "periodic" => Some(Boundary::Periodic),
                "dirichlet" => Some(Boundary::Dirichlet),
                other => {
                    r.errors.push(format!(
                        "`run.boundary` = {other}: expected periodic or dirichlet"
                    ));
                    None
                }
            };
            if let Some(want) = want {
                if r.get("grid", "boundary").is_some() && want != cfg.boundary {
                    r.errors
                        .push("`run.boundary` contradicts `grid.boundary`".to_string());
                } else {
                    cfg.boundary = want;
                }
            }
        }

        let kind = r.get("eos", "kind").unwrap_or("ideal_gas").to_string();
        match kind.as_str() {
            "polytrope" => {
                let k = r.f64_or("eos", "k", 1.0);
                let gamma = r.f64_or("eos", "gamma", 2.0);
                r.range(k > 0.0, "eos", "k", k, "> 0");
                r.range(gamma > 1.0, "eos", "gamma", gamma, "> 1");
                cfg.eos = EosConfig::Polytrope { k, gamma };
            }
            "ideal_gas" | "entropy_table" => {
                let rr = r.f64_or("eos", "r", 1.0);
                let c_v = r.f64_or("eos", "c_v", 1.5);
                let v0 = r.f64_or("eos", "v0", 1.0);
                let t0 = r.f64_or("eos", "t0", 1.0);
                r.range(rr > 0.0, "eos", "r", rr, "> 0");
                r.range(c_v > 0.0, "eos", "c_v", c_v, "> 0");
                r.range(v0 > 0.0, "eos", "v0", v0, "> 0");
                r.range(t0 > 0.0, "eos", "t0", t0, "> 0");
                cfg.eos = if kind == "ideal_gas" {
                    EosConfig::IdealGas { r: rr, c_v, v0, t0 }
                } else {
                    EosConfig::EntropyTable { r: rr, c_v, v0, t0 }
                };
            }
            other => r.errors.push(format!(
                "`eos.kind` = {other}: expected polytrope, ideal_gas or entropy_table"
            )),
        }

        cfg.molar_mass = r.f64_or("material", "m", cfg.molar_mass);
        r.range(cfg.molar_mass > 0.0, "material", "m", cfg.molar_mass, "> 0");
        cfg.beta = r.f64_or("material", "beta", cfg.beta);
        r.range(cfg.beta > 0.0, "material", "beta", cfg.beta, "> 0");

        let profile = r.get("initial", "profile").unwrap_or("rest").to_string();
        let rho0 = r.f64_or("initial", "rho0", 1.0);
        r.range(rho0 > 0.0, "initial", "rho0", rho0, "> 0");
        let s0 = r.f64_or("initial", "s0", 0.0);
        match profile.as_str() {
            "rest" => cfg.initial = InitialProfile::Rest { rho0, s0 },
            "sound_wave" => {
                let amplitude = r.f64_or("initial", "amplitude", 1e-3);
                r.range(amplitude >= 0.0, "initial", "amplitude", amplitude, ">= 0");
                let wavenumber = r.usize_or("initial", "wavenumber", 1);
                r.range(wavenumber >= 1, "initial", "wavenumber", wavenumber, ">= 1");
                cfg.initial = InitialProfile::SoundWave {
                    rho0,
                    s0,
                    amplitude,
                    wavenumber: wavenumber as u32,
                };
            }
            "thermal_bath" => {
                let t_left = r.f64_or("initial", "t_left", 1.0);
                let t_right = r.f64_or("initial", "t_right", 1.0);
                r.range(t_left > 0.0, "initial", "t_left", t_left, "> 0");
                r.range(t_right > 0.0, "initial", "t_right", t_right, "> 0");
                cfg.initial = InitialProfile::ThermalBath {
                    rho0,
                    t_left,
                    t_right,
                };
            }
            "custom" => {
                let rho = r.list_or("initial", "rho").unwrap_or_default();
                let v = r.list_or("initial", "v").unwrap_or_default();
                let s = r.list_or("initial", "s").unwrap_or_default();
                cfg.initial = InitialProfile::Custom { rho, v, s };
            }
            other => r.errors.push(format!(
                "`initial.profile` = {other}: expected rest, sound_wave, thermal_bath or custom"
            )),
        }

        cfg.dt = r.f64_or("run", "dt", cfg.dt);
        r.range(cfg.dt > 0.0, "run", "dt", cfg.dt, "> 0");
        cfg.steps = r.usize_or("run", "steps", cfg.steps);
        r.range(cfg.steps >= 1, "run", "steps", cfg.steps, ">= 1");
        match r.get("run", "scheme") {
            None => {}
            Some("rk4") => cfg.scheme = SchemeConfig::Rk4,
            Some("implicit_midpoint") => cfg.scheme = SchemeConfig::ImplicitMidpoint,
            Some(other) => r.errors.push(format!(
                "`run.scheme` = {other}: expected rk4 or implicit_midpoint"
            )),
        }
        cfg.snapshot_every = r.usize_or("run", "snapshot_every", cfg.snapshot_every);
        r.range(
            cfg.snapshot_every >= 1,
            "run",
            "snapshot_every",
            cfg.snapshot_every,
            ">= 1",
        );
        cfg.seed = r.usize_or("run", "seed", cfg.seed as usize) as u64;

        // Cross-field checks.
        if let InitialProfile::Custom { rho, v, s } = &cfg.initial {
            for (name, list) in [("rho", rho), ("v", v), ("s", s)] {
                if list.len() != cfg.n {
                    r.errors.push(format!(
                        "`initial.{name}` has {} entries but the grid has {}",
                        list.len(),
                        cfg.n
                    ));
                }
            }
            if rho.iter().any(|&x| x <= 0.0) {
                r.errors
                    .push("`initial.rho` must be positive everywhere".to_string());
            }
        }
        if matches!(cfg.initial, InitialProfile::ThermalBath { .. })
            && cfg.boundary != Boundary::Dirichlet
        {
            r.errors
                .push("thermal_bath profiles need `grid.boundary = dirichlet`".to_string());
        }
        if matches!(cfg.initial, InitialProfile::SoundWave { .. })
            && cfg.boundary != Boundary::Periodic
        {
            r.errors
                .push("sound_wave profiles need `grid.boundary = periodic`".to_string());
        }
        if matches!(cfg.eos, EosConfig::Polytrope { .. }) {
            let bad_entropy = match &cfg.initial {
                InitialProfile::Rest { s0, .. } | InitialProfile::SoundWave { s0, .. } => {
                    *s0 != 0.0
                }
                InitialProfile::ThermalBath { .. } => true,
                InitialProfile::Custom { s, .. } => s.iter().any(|&x| x != 0.0),
            };
            if bad_entropy {
                r.errors.push(
                    "barotropic runs freeze the entropy: set s0 = 0 and avoid thermal_bath"
                        .to_string(),
                );
            }
        }
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_rest_scenario_gets_defaults() {
        let cfg = parse_config("[initial]\nprofile = rest\n").unwrap();
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.boundary, Boundary::Periodic);
        assert_eq!(cfg.scheme, SchemeConfig::ImplicitMidpoint);
        assert!(matches!(cfg.initial, InitialProfile::Rest { .. }));

        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.steps, 100);
    }

    #[test]
    fn gamma_range_error_names_key_and_bound() {
        let err = parse_config("[eos]\nkind = polytrope\ngamma = 0.5\n").unwrap_err();
        assert!(
            err.iter()
                .any(|e| e.contains("eos.gamma") && e.contains("> 1")),
            "{err:?}"
        );
    }

    #[test]
    fn duplicate_key_lists_both_lines() {
        let err = parse_config("[run]\ndt = 1e-3\ndt = 2e-3\n").unwrap_err();
        assert!(
            err.iter().any(|e| e.contains("duplicate key `run.dt`")
                && e.contains("2")
                && e.contains("3")),
            "{err:?}"
        );
    }

    #[test]
    fn all_errors_are_collected() {
        let err = parse_config(
            "[grid]\nn = 4\n[eos]\nkind = polytrope\ngamma = 0.5\nk = -1\n[run]\ndt = -1\n",
        )
        .unwrap_err();
        assert!(err.len() >= 4, "{err:?}");
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let err = parse_config("[grid]\nzz = 1\n[nope]\na = 2\n").unwrap_err();
        assert!(err.iter().any(|e| e.contains("unknown key `grid.zz`")));
        assert!(err.iter().any(|e| e.contains("unknown section [nope]")));
    }

    #[test]
    fn boundary_contradiction_is_flagged() {
        let err =
            parse_config("[grid]\nboundary = periodic\n[run]\nboundary = dirichlet\n").unwrap_err();
        assert!(err.iter().any(|e| e.contains("contradicts")), "{err:?}");
    }

    #[test]
    fn custom_profile_length_check() {
        let text =
            "[grid]\nn = 8\n[initial]\nprofile = custom\nrho = 1,1,1\nv = 0,0,0\ns = 0,0,0\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.iter().any(|e| e.contains("initial.rho")), "{err:?}");
    }
}
