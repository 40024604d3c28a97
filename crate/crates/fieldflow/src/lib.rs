//! A numerical laboratory for potential-based perfect-fluid
//! thermo-hydrodynamics.
//!
//! The fluid is described by field potentials rather than primitive
//! variables: particle labels over physical space (or placements over the
//! material space) carry the mass content, and a material-time potential
//! carries the thermal content through its substantial rate.  Continuity is
//! then automatic, the Euler equations arise as Euler-Lagrange equations of
//! first-order variational principles, and the canonical structure is the
//! plain Dirac-delta one.
//!
//! The crate implements the four pictures of that formulation in one space
//! dimension plus time (point-wise determinant and current algebra goes up
//! to three dimensions), a symplectic canonical integrator, Poisson brackets
//! of grid functionals, a Monte Carlo model of the material time, and the
//! diagnostic machinery that checks the structural identities of the
//! formulation: energy-momentum balance off shell, automatic conservation
//! laws, picture-transformation tables, Legendre consistency of the
//! equation-of-state forms, and rest-frame reductions to the fundamental
//! thermodynamic identity.

pub mod barotropic;
pub mod complete_lagrange;
pub mod eos;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod identities;
pub mod interp;
pub mod kinematics;
pub mod manufactured;
pub mod microkinetic;
pub mod noether;
pub mod numdiff;
pub mod poisson;
pub mod report;
pub mod thermo_euler;

pub use error::{FieldflowError, Result};
