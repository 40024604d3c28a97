//! JSON snapshots of the canonical state, written atomically so the last
//! flushed file is always parseable.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use fieldflow::eos::{FluidEos, MaterialConstants};
use fieldflow::grid::{Boundary, Grid1D};
use fieldflow::hamiltonian::{CanonicalState, PinnedBoundary};

use crate::config::EosConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum EosDto {
    Polytrope { k: f64, gamma: f64 },
    IdealGas { r: f64, c_v: f64, v0: f64, t0: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PinnedDto {
    pub temperature_left: f64,
    pub temperature_right: f64,
    pub y_left: f64,
    pub y_right: f64,
    pub tau_left0: f64,
    pub tau_right0: f64,
}

/// Serializable image of a run state.  Field arrays are stored raw, so even
/// a state that violates run invariants can be dumped for post-mortems.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SnapshotDto {
    pub time: f64,
    pub n: usize,
    pub length: f64,
    pub boundary: String,
    pub eos: EosDto,
    pub molar_mass: f64,
    pub beta: f64,
    pub tau: Vec<f64>,
    pub y: Vec<f64>,
    pub pi0: Vec<f64>,
    pub pi1: Vec<f64>,
    pub y_winding: f64,
    pub pinned: Option<PinnedDto>,
}

impl SnapshotDto {
    pub fn from_eos_config(cfg: &EosConfig) -> EosDto {
        match cfg {
            EosConfig::Polytrope { k, gamma } => EosDto::Polytrope {
                k: *k,
                gamma: *gamma,
            },
            EosConfig::IdealGas { r, c_v, v0, t0 } | EosConfig::EntropyTable { r, c_v, v0, t0 } => {
                EosDto::IdealGas {
                    r: *r,
                    c_v: *c_v,
                    v0: *v0,
                    t0: *t0,
                }
            }
        }
    }

    pub fn from_state(cs: &CanonicalState, eos: EosDto) -> Self {
        Self {
            time: cs.time,
            n: cs.grid.n,
            length: cs.grid.length(),
            boundary: match cs.grid.boundary {
                Boundary::Periodic => "periodic".to_string(),
                Boundary::Dirichlet => "dirichlet".to_string(),
            },
            eos,
            molar_mass: cs.constants.molar_mass,
            beta: cs.constants.beta,
            tau: cs.tau.clone(),
            y: cs.y.clone(),
            pi0: cs.pi0.clone(),
            pi1: cs.pi1.clone(),
            y_winding: cs.y_winding,
            pinned: cs.pinned.map(|p| PinnedDto {
                temperature_left: p.temperature_left,
                temperature_right: p.temperature_right,
                y_left: p.y_left,
                y_right: p.y_right,
                tau_left0: p.tau_left0,
                tau_right0: p.tau_right0,
            }),
        }
    }

    /// Rebuilds a live state; fails if the stored fields violate the state
    /// invariants.
    pub fn into_state(self) -> Result<CanonicalState, String> {
        let boundary = match self.boundary.as_str() {
            "periodic" => Boundary::Periodic,
            "dirichlet" => Boundary::Dirichlet,
            other => return Err(format!("unknown boundary `{other}`")),
        };
        let grid = Grid1D::new(self.n, self.length, boundary).map_err(|e| e.to_string())?;
        let eos = match self.eos {
            EosDto::Polytrope { k, gamma } => {
                FluidEos::polytrope(k, gamma).map_err(|e| e.to_string())?
            }
            EosDto::IdealGas { r, c_v, v0, t0 } => {
                FluidEos::ideal_gas(r, c_v, v0, t0).map_err(|e| e.to_string())?
            }
        };
        let constants =
            MaterialConstants::new(self.molar_mass, self.beta).map_err(|e| e.to_string())?;
        let pinned = self.pinned.map(|p| PinnedBoundary {
            temperature_left: p.temperature_left,
            temperature_right: p.temperature_right,
            y_left: p.y_left,
            y_right: p.y_right,
            tau_left0: p.tau_left0,
            tau_right0: p.tau_right0,
        });
        let mut state = CanonicalState::new(
            grid,
            self.tau,
            self.y,
            self.pi0,
            self.pi1,
            self.y_winding,
            constants,
            eos,
            pinned,
        )
        .map_err(|e| e.to_string())?;
        state.time = self.time;
        Ok(state)
    }

    /// Atomic write: serialize to a sibling temp file, then rename.
    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("snapshot serialization");
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(json.as_bytes())?;
            f.flush()?;
        }
        fs::rename(&tmp, path)
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    }
}
