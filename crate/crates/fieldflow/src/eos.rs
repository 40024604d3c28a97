//! Constitutive relations of the fluid in three thermodynamic forms.
//!
//! A fluid can be specified barotropically through its molar internal energy
//! `e(V)`, thermally through the Helmholtz free energy `f(V, T)`, or through
//! the entropy form `s(e, V)`.  Built-ins are a polytrope and an ideal gas;
//! custom fluids are accepted as value-plus-derivative callables (derivatives
//! are mandatory, there is no automatic differentiation here).
//!
//! Everything is nondimensional: the gas constant, the reference volume and
//! the reference temperature are all 1 by default.

use std::sync::Arc;

use crate::error::{FieldflowError, Result};
use crate::numdiff;
use crate::report::{CheckLine, DiagnosticReport};

/// Shared closure type for custom constitutive callables.
pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(FieldflowError::Domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Material parameters that are not part of the equation of state.
///
/// `h` is the material volume density; the crate works in unimodular material
/// coordinates, so it is pinned to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConstants {
    pub molar_mass: f64,
    pub beta: f64,
    pub h: f64,
}

impl MaterialConstants {
    pub fn new(molar_mass: f64, beta: f64) -> Result<Self> {
        require_positive("molar mass", molar_mass)?;
        require_positive("beta", beta)?;
        Ok(Self {
            molar_mass,
            beta,
            h: 1.0,
        })
    }
}

impl Default for MaterialConstants {
    fn default() -> Self {
        Self {
            molar_mass: 1.0,
            beta: 1.0,
            h: 1.0,
        }
    }
}

/// Polytropic internal energy `e(V) = K / ((gamma - 1) V^(gamma-1))`,
/// giving the pressure law `p(V) = K V^(-gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polytrope {
    pub k: f64,
    pub gamma: f64,
}

impl Polytrope {
    pub fn new(k: f64, gamma: f64) -> Result<Self> {
        require_positive("polytrope pressure scale K", k)?;
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(FieldflowError::Domain(format!(
                "polytrope exponent gamma must exceed 1, got {gamma}"
            )));
        }
        Ok(Self { k, gamma })
    }

    pub fn energy(&self, v: f64) -> f64 {
        self.k / ((self.gamma - 1.0) * v.powf(self.gamma - 1.0))
    }

    pub fn pressure(&self, v: f64) -> f64 {
        self.k * v.powf(-self.gamma)
    }
}

/// Ideal gas with constant molar heat capacity:
/// `f(V, T) = -R T ln(V/V0) - c_V T (ln(T/T0) - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGas {
    pub r: f64,
    pub c_v: f64,
    pub v0: f64,
    pub t0: f64,
}

impl IdealGas {
    pub fn new(r: f64, c_v: f64, v0: f64, t0: f64) -> Result<Self> {
        require_positive("gas constant R", r)?;
        require_positive("heat capacity c_V", c_v)?;
        require_positive("reference volume V0", v0)?;
        require_positive("reference temperature T0", t0)?;
        Ok(Self { r, c_v, v0, t0 })
    }

    pub fn helmholtz(&self, v: f64, t: f64) -> f64 {
        -self.r * t * (v / self.v0).ln() - self.c_v * t * ((t / self.t0).ln() - 1.0)
    }

    pub fn entropy(&self, v: f64, t: f64) -> f64 {
        self.r * (v / self.v0).ln() + self.c_v * (t / self.t0).ln()
    }

    pub fn pressure(&self, v: f64, t: f64) -> f64 {
        self.r * t / v
    }

    pub fn energy(&self, t: f64) -> f64 {
        self.c_v * t
    }

    /// Temperature on the isentrope `s` at molar volume `V`.
    pub fn temperature_from_entropy(&self, v: f64, s: f64) -> f64 {
        self.t0 * ((s - self.r * (v / self.v0).ln()) / self.c_v).exp()
    }
}

/// Barotropic fluid: internal energy as a function of molar volume alone.
#[derive(Clone)]
pub enum BarotropicEos {
    Polytrope(Polytrope),
    /// Custom fluid given by `e(V)` and its derivative `de/dV`.
    Custom {
        energy: Fn1,
        energy_deriv: Fn1,
    },
}

impl std::fmt::Debug for BarotropicEos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BarotropicEos::Polytrope(p) => write!(f, "BarotropicEos::Polytrope({p:?})"),
            BarotropicEos::Custom { .. } => write!(f, "BarotropicEos::Custom"),
        }
    }
}

impl BarotropicEos {
    pub fn polytrope(k: f64, gamma: f64) -> Result<Self> {
        Ok(Self::Polytrope(Polytrope::new(k, gamma)?))
    }

    pub fn energy(&self, v: f64) -> Result<f64> {
        require_positive("molar volume V", v)?;
        Ok(match self {
            BarotropicEos::Polytrope(p) => p.energy(v),
            BarotropicEos::Custom { energy, .. } => energy(v),
        })
    }
}

/// Pressure `p = -de/dV` of a barotropic fluid, analytic for the built-in
/// polytrope and taken from the supplied derivative for custom fluids.
pub fn barotropic_pressure(eos: &BarotropicEos, v: f64) -> Result<f64> {
    require_positive("molar volume V", v)?;
    Ok(match eos {
        BarotropicEos::Polytrope(p) => p.pressure(v),
        BarotropicEos::Custom { energy_deriv, .. } => -energy_deriv(v),
    })
}

/// Thermal fluid: Helmholtz free energy as a function of (V, T).
#[derive(Clone)]
pub enum ThermalEos {
    IdealGas(IdealGas),
    /// Custom fluid given by `f(V, T)` and both partial derivatives.
    Custom {
        helmholtz: Fn2,
        df_dv: Fn2,
        df_dt: Fn2,
    },
}

impl std::fmt::Debug for ThermalEos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThermalEos::IdealGas(g) => write!(f, "ThermalEos::IdealGas({g:?})"),
            ThermalEos::Custom { .. } => write!(f, "ThermalEos::Custom"),
        }
    }
}

impl ThermalEos {
    pub fn ideal_gas(r: f64, c_v: f64, v0: f64, t0: f64) -> Result<Self> {
        Ok(Self::IdealGas(IdealGas::new(r, c_v, v0, t0)?))
    }

    pub fn helmholtz(&self, v: f64, t: f64) -> Result<f64> {
        require_positive("molar volume V", v)?;
        require_positive("temperature T", t)?;
        Ok(match self {
            ThermalEos::IdealGas(g) => g.helmholtz(v, t),
            ThermalEos::Custom { helmholtz, .. } => helmholtz(v, t),
        })
    }
}

/// Full thermal response at (V, T): pressure `p = -df/dV`, molar entropy
/// `s = -df/dT` and internal energy `e = f + T s`.
pub fn thermal_response(eos: &ThermalEos, v: f64, t: f64) -> Result<(f64, f64, f64)> {
    require_positive("molar volume V", v)?;
    require_positive("temperature T", t)?;
    Ok(match eos {
        ThermalEos::IdealGas(g) => (g.pressure(v, t), g.entropy(v, t), g.energy(t)),
        ThermalEos::Custom {
            helmholtz,
            df_dv,
            df_dt,
        } => {
            let f = helmholtz(v, t);
            let p = -df_dv(v, t);
            let s = -df_dt(v, t);
            (p, s, f + t * s)
        }
    })
}

/// Entropy form: molar entropy as a function of (e, V) with the response
/// functions `ds/de = 1/T` and `ds/dV = p/T`.
#[derive(Clone)]
pub enum EntropyForm {
    IdealGas(IdealGas),
    /// Custom form given by `s(e, V)` and both partial derivatives.
    Custom {
        entropy: Fn2,
        ds_de: Fn2,
        ds_dv: Fn2,
    },
}

impl std::fmt::Debug for EntropyForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EntropyForm::IdealGas(g) => write!(f, "EntropyForm::IdealGas({g:?})"),
            EntropyForm::Custom { .. } => write!(f, "EntropyForm::Custom"),
        }
    }
}

impl EntropyForm {
    pub fn ideal_gas(r: f64, c_v: f64, v0: f64, t0: f64) -> Result<Self> {
        Ok(Self::IdealGas(IdealGas::new(r, c_v, v0, t0)?))
    }

    fn entropy_value(&self, e: f64, v: f64) -> Result<f64> {
        require_positive("molar volume V", v)?;
        match self {
            EntropyForm::IdealGas(g) => {
                require_positive("internal energy e", e)?;
                Ok(g.r * (v / g.v0).ln() + g.c_v * (e / (g.c_v * g.t0)).ln())
            }
            EntropyForm::Custom { entropy, .. } => Ok(entropy(e, v)),
        }
    }

    /// Partial derivatives `(ds/de, ds/dV) = (1/T, p/T)`.
    pub fn partials(&self, e: f64, v: f64) -> Result<(f64, f64)> {
        require_positive("molar volume V", v)?;
        match self {
            EntropyForm::IdealGas(g) => {
                require_positive("internal energy e", e)?;
                Ok((g.c_v / e, g.r / v))
            }
            EntropyForm::Custom { ds_de, ds_dv, .. } => Ok((ds_de(e, v), ds_dv(e, v))),
        }
    }
}

/// Evaluates the entropy form at (e, V) and converts the response functions
/// into `(s, T, p)` with `T = (ds/de)^-1` and `p = (ds/dV) T`.
pub fn entropy_from_energy(form: &EntropyForm, e: f64, v: f64) -> Result<(f64, f64, f64)> {
    let s = form.entropy_value(e, v)?;
    let (ds_de, ds_dv) = form.partials(e, v)?;
    if !(ds_de > 0.0) {
        return Err(FieldflowError::Domain(format!(
            "entropy form has non-positive ds/de = {ds_de} at (e={e}, V={v})"
        )));
    }
    let t = 1.0 / ds_de;
    Ok((s, t, ds_dv * t))
}

/// Local thermodynamic state of one fluid element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub rho: f64,
    pub vol: f64,
    pub temperature: f64,
    pub pressure: f64,
    pub entropy: f64,
    pub energy: f64,
    pub free_energy: f64,
}

/// Equation of state as consumed by the dynamics: everything needed at a
/// point once density and molar entropy are known.
#[derive(Debug, Clone)]
pub enum FluidEos {
    Barotropic(BarotropicEos),
    Thermal {
        thermal: ThermalEos,
        entropy: EntropyForm,
    },
}

impl FluidEos {
    pub fn ideal_gas(r: f64, c_v: f64, v0: f64, t0: f64) -> Result<Self> {
        Ok(Self::Thermal {
            thermal: ThermalEos::ideal_gas(r, c_v, v0, t0)?,
            entropy: EntropyForm::ideal_gas(r, c_v, v0, t0)?,
        })
    }

    pub fn polytrope(k: f64, gamma: f64) -> Result<Self> {
        Ok(Self::Barotropic(BarotropicEos::polytrope(k, gamma)?))
    }

    pub fn is_thermal(&self) -> bool {
        matches!(self, FluidEos::Thermal { .. })
    }

    /// Full point state at density `rho` on the isentrope `s`.
    ///
    /// Barotropic fluids ignore `s` and report `T = 0`, `f = e`.
    pub fn point(&self, rho: f64, s: f64) -> Result<ThermoPoint> {
        require_positive("density rho", rho)?;
        let v = 1.0 / rho;
        match self {
            FluidEos::Barotropic(b) => {
                let e = b.energy(v)?;
                let p = barotropic_pressure(b, v)?;
                Ok(ThermoPoint {
                    rho,
                    vol: v,
                    temperature: 0.0,
                    pressure: p,
                    entropy: 0.0,
                    energy: e,
                    free_energy: e,
                })
            }
            FluidEos::Thermal { entropy, .. } => {
                let e = energy_from_entropy_form(entropy, s, v)?;
                let (s_check, t, p) = entropy_from_energy(entropy, e, v)?;
                if !(t > 0.0) {
                    return Err(FieldflowError::Domain(format!(
                        "non-positive temperature T = {t} at (rho={rho}, s={s})"
                    )));
                }
                Ok(ThermoPoint {
                    rho,
                    vol: v,
                    temperature: t,
                    pressure: p,
                    entropy: s_check,
                    energy: e,
                    free_energy: e - t * s_check,
                })
            }
        }
    }

    /// Isentropic compressibility response `(dp/drho)|_s`; the squared sound
    /// speed is this divided by the molar mass.
    pub fn dp_drho(&self, rho: f64, s: f64) -> Result<f64> {
        require_positive("density rho", rho)?;
        match self {
            FluidEos::Barotropic(BarotropicEos::Polytrope(p)) => {
                Ok(p.gamma * p.k * rho.powf(p.gamma - 1.0))
            }
            FluidEos::Thermal {
                entropy: EntropyForm::IdealGas(g),
                ..
            } => {
                let t = self.point(rho, s)?.temperature;
                Ok((1.0 + g.r / g.c_v) * g.r * t)
            }
            _ => {
                // Custom fluids: difference the pressure along the isentrope.
                let h = numdiff::step_for(rho, 1e-6);
                let pp = self.point(rho + h, s)?.pressure;
                let pm = self.point(rho - h, s)?.pressure;
                Ok((pp - pm) / (2.0 * h))
            }
        }
    }
}

/// Inverts `s(e, V) = s` for the molar energy at fixed volume.  Closed form
/// for the ideal gas, Newton on `ds/de` otherwise.
fn energy_from_entropy_form(form: &EntropyForm, s: f64, v: f64) -> Result<f64> {
    match form {
        EntropyForm::IdealGas(g) => {
            require_positive("molar volume V", v)?;
            Ok(g.c_v * g.t0 * ((s - g.r * (v / g.v0).ln()) / g.c_v).exp())
        }
        EntropyForm::Custom { .. } => {
            let mut e = 1.0;
            for _ in 0..50 {
                let val = form.entropy_value(e, v)?;
                let (ds_de, _) = form.partials(e, v)?;
                if !(ds_de > 0.0) {
                    return Err(FieldflowError::Domain(
                        "entropy form lost positive ds/de during inversion".into(),
                    ));
                }
                let step = (s - val) / ds_de;
                let mut next = e + step;
                // Keep the iterate inside the positive-energy domain.
                while next <= 0.0 {
                    next = 0.5 * (e + next.max(0.0));
                }
                if (next - e).abs() <= 1e-14 * e.abs().max(1.0) {
                    return Ok(next);
                }
                e = next;
            }
            Err(FieldflowError::Solver(
                "entropy inversion did not converge in 50 iterations".into(),
            ))
        }
    }
}

/// Audits the fundamental differential relation on a sample grid of
/// `(rho, s)` states: for thermal fluids the probes check
/// `de = (p/rho^2) drho + T ds`, for barotropic fluids `de = -p dV`.
///
/// An empty sample grid yields an empty (vacuously passing) report.
pub fn audit_fundamental(eos: &FluidEos, samples: &[(f64, f64)]) -> Result<DiagnosticReport> {
    let mut report = DiagnosticReport::new("fundamental equation audit");
    if samples.is_empty() {
        return Ok(report);
    }
    let tol = 1e-7;
    match eos {
        FluidEos::Barotropic(b) => {
            let mut worst = 0.0f64;
            for &(rho, _) in samples {
                require_positive("density rho", rho)?;
                let v = 1.0 / rho;
                let h = numdiff::step_for(v, 1e-6);
                let de_dv = (b.energy(v + h)? - b.energy(v - h)?) / (2.0 * h);
                let p = barotropic_pressure(b, v)?;
                let res = (de_dv + p).abs() / p.abs().max(1.0);
                worst = worst.max(res);
            }
            report.push(CheckLine::at_most("de + p dV residual", worst, tol));
        }
        FluidEos::Thermal { .. } => {
            let mut worst_rho = 0.0f64;
            let mut worst_s = 0.0f64;
            for &(rho, s) in samples {
                let pt = eos.point(rho, s)?;
                let hr = numdiff::step_for(rho, 1e-6);
                let de_drho =
                    (eos.point(rho + hr, s)?.energy - eos.point(rho - hr, s)?.energy) / (2.0 * hr);
                let expect_rho = pt.pressure / (rho * rho);
                worst_rho = worst_rho.max((de_drho - expect_rho).abs() / expect_rho.abs().max(1.0));

                let hs = 1e-6;
                let de_ds =
                    (eos.point(rho, s + hs)?.energy - eos.point(rho, s - hs)?.energy) / (2.0 * hs);
                worst_s =
                    worst_s.max((de_ds - pt.temperature).abs() / pt.temperature.abs().max(1.0));
            }
            report.push(CheckLine::at_most(
                "de/drho - p/rho^2 residual",
                worst_rho,
                tol,
            ));
            report.push(CheckLine::at_most("de/ds - T residual", worst_s, tol));
        }
    }
    Ok(report)
}
