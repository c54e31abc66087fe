//! Numerical laboratory for the one-dimensional compressible Euler equations
//! with frictional damping, posed as a physical-vacuum free boundary problem.
//!
//! The crate is organised bottom-up:
//!
//! - [`gas`]: pressure-law constants and the Barenblatt self-similar reference flow.
//! - [`ansatz`]: the scalar correction ODE whose solution turns the Barenblatt
//!   Lagrangian map into an exact solution of the damped dynamics, plus numerical
//!   checks of its growth, sign and decay properties.
//! - [`solver`]: a finite-difference evolution of the Lagrangian problem on the
//!   fixed reference interval with the degenerate weight `rho_bar_0`.
//! - [`diagnostics`]: weighted energies, weighted sup-norms, Hardy and elliptic
//!   ratio checks, log-log rate fits and the asymptotic-rate report.
//! - [`harness`]: configuration parsing, scenario orchestration, sweeps and
//!   on-disk artifacts (CSV and JSON).
//!
//! [`quadrature`] and [`ode`] hold the numerical primitives the modules above share.

pub mod ansatz;
pub mod diagnostics;
pub mod error;
pub mod gas;
pub mod harness;
pub mod ode;
pub mod quadrature;
pub mod solver;
pub mod tolerances;

pub use error::{Error, Result};
pub use gas::GasParameters;
