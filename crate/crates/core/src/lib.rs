//! Energetically balanced quasi-Newton implicit integrator for the compressible Euler
//! equations in a vertical column, with the lowest-order compatible finite element
//! spaces in the vertical.
//!
//! The crate is organised bottom-up:
//!
//! * [`mimetic`]: grid, coefficient spaces, mass matrices and incidence operators.
//! * [`thermo`]: equation of state, energies and time-averaged variational derivatives.
//! * [`integrator`]: residuals, approximate Jacobian, Schur reduction and the Newton loop.
//! * [`hevi`]: TRAP(2,3,2) horizontally explicit, vertically implicit stepping.
//! * [`diagnostics`]: per-step conservation ledger and CSV output.
//! * [`experiment`]: configuration, initial conditions and preset runs.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod hevi;
pub mod integrator;
pub mod mimetic;
pub mod thermo;

pub use error::{ErrorCode, Result, SolverError};
pub use integrator::{ColumnState, NewtonConfig, NewtonReport, Scheme};
pub use mimetic::{FieldQ, FieldTheta, FieldU, OperatorSet, VerticalGrid};
pub use thermo::GasConstants;
