//! Monte Carlo particle model for the proper-time reading of temperature.
//!
//! Molecules at temperature `T` move chaotically; their proper time lags the
//! coordinate time by the mean special-relativistic factor.  For speeds well
//! below `c` the mean lag rate is `3kT / (2 m c^2)`, so `beta = 2 m c^2 / 3k`
//! turns the lag rate back into a temperature.
//!
//! Sampling is Maxwell-Boltzmann: three independent normal velocity
//! components with variance `kT/m`, drawn from a seeded ChaCha8 stream
//! (deterministic bit-for-bit for a fixed seed).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{FieldflowError, Result};

/// A drawn ensemble of molecular speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub speeds: Vec<f64>,
    pub mass: f64,
    pub light_speed: f64,
    pub boltzmann: f64,
    pub seed: u64,
}

/// Fraction of the light speed beyond which the low-velocity expansion is no
/// longer trusted.
const VALIDITY_FRACTION: f64 = 0.3;

/// Draws `n` Maxwell-Boltzmann speeds at temperature `t`.
///
/// Errors when the rms speed reaches 0.3 c (the nonrelativistic expansion
/// behind the thermometer breaks down there).  Individual draws beyond the
/// light speed are rejected and redrawn; at valid temperatures this is
/// astronomically rare but keeps every stored speed physical.
pub fn sample_ensemble(
    t: f64,
    mass: f64,
    n: usize,
    seed: u64,
    light_speed: f64,
    boltzmann: f64,
) -> Result<Ensemble> {
    if t < 0.0 || !t.is_finite() {
        return Err(FieldflowError::Domain(format!(
            "temperature must be non-negative, got {t}"
        )));
    }
    if n == 0 {
        return Err(FieldflowError::InvalidInput(
            "need at least one particle".into(),
        ));
    }
    if mass <= 0.0 || light_speed <= 0.0 || boltzmann <= 0.0 {
        return Err(FieldflowError::Domain(
            "mass, light speed and the Boltzmann constant must be positive".into(),
        ));
    }
    let v_rms = (3.0 * boltzmann * t / mass).sqrt();
    if v_rms >= VALIDITY_FRACTION * light_speed {
        return Err(FieldflowError::Domain(format!(
            "rms speed {v_rms:.3} reaches {VALIDITY_FRACTION} c; the low-velocity model does not apply"
        )));
    }
    let sigma = (boltzmann * t / mass).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut speeds = Vec::with_capacity(n);
    while speeds.len() < n {
        let vx: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let vy: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let vz: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let speed = (vx * vx + vy * vy + vz * vz).sqrt();
        if speed < light_speed {
            speeds.push(speed);
        }
    }
    Ok(Ensemble {
        speeds,
        mass,
        light_speed,
        boltzmann,
        seed,
    })
}

impl Ensemble {
    /// Sample mean of the molecular kinetic energy.
    pub fn mean_kinetic_energy(&self) -> f64 {
        let m = self.mass;
        self.speeds.iter().map(|&v| 0.5 * m * v * v).sum::<f64>() / self.speeds.len() as f64
    }
}

/// Mean proper-time lag rate `<1 - sqrt(1 - v^2/c^2)>` of the ensemble.
pub fn retardation_rate(ens: &Ensemble) -> f64 {
    let c2 = ens.light_speed * ens.light_speed;
    ens.speeds
        .iter()
        .map(|&v| 1.0 - (1.0 - v * v / c2).sqrt())
        .sum::<f64>()
        / ens.speeds.len() as f64
}

/// The thermometer constant `beta = 2 m c^2 / 3k`.
pub fn thermometer_beta(mass: f64, light_speed: f64, boltzmann: f64) -> f64 {
    2.0 * mass * light_speed * light_speed / (3.0 * boltzmann)
}

/// Reads a temperature off a proper-time lag rate: `T_hat = beta * rate`.
pub fn recover_temperature(rate: f64, mass: f64, light_speed: f64, boltzmann: f64) -> Result<f64> {
    if rate < 0.0 {
        return Err(FieldflowError::Domain(format!(
            "lag rate must be non-negative, got {rate}"
        )));
    }
    Ok(thermometer_beta(mass, light_speed, boltzmann) * rate)
}

/// Mean lifetime lengthening factor `<1/sqrt(1 - v^2/c^2)>` of a decaying
/// tracer carried by the molecules.
pub fn radium_lifetime_factor(ens: &Ensemble) -> f64 {
    let c2 = ens.light_speed * ens.light_speed;
    ens.speeds
        .iter()
        .map(|&v| 1.0 / (1.0 - v * v / c2).sqrt())
        .sum::<f64>()
        / ens.speeds.len() as f64
}

/// One full thermometer run: sample, lag rate, recovered temperature and
/// lifetime factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermometerReading {
    pub t_in: f64,
    pub rate: f64,
    pub t_hat: f64,
    pub rel_err: f64,
    pub lifetime_factor: f64,
}

pub fn run_thermometer(
    t: f64,
    mass: f64,
    n: usize,
    seed: u64,
    light_speed: f64,
    boltzmann: f64,
) -> Result<ThermometerReading> {
    let ens = sample_ensemble(t, mass, n, seed, light_speed, boltzmann)?;
    let rate = retardation_rate(&ens);
    let t_hat = recover_temperature(rate, mass, light_speed, boltzmann)?;
    let rel_err = if t > 0.0 { (t_hat - t) / t } else { 0.0 };
    Ok(ThermometerReading {
        t_in: t,
        rate,
        t_hat,
        rel_err,
        lifetime_factor: radium_lifetime_factor(&ens),
    })
}
