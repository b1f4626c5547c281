//! Quasi-Newton implicit vertical solve of one column.
//!
//! Each Newton iteration evaluates the residuals of the time-discrete column system,
//! assembles an approximate block Jacobian at the time-centred state, reduces it to a
//! Helmholtz problem for the `Θ` update and back-substitutes the other three updates.

mod jacobian;
mod newton;
mod residual;
mod schur;
mod state;

pub use jacobian::{assemble_jacobian, JacobianBlocks};
pub use newton::{chain_rule_residual, crank_nicolson_solve, newton_solve, ColumnStep};
pub use residual::{residuals, CentredOperators, ResidualSet, StepAverages};
pub use schur::{helmholtz_operator, monolithic_solve, schur_solve, Update};
pub use state::ColumnState;

use crate::error::{Result, SolverError};
use crate::mimetic::{FieldQ, FieldU};
use crate::thermo::TimeAveraging;

/// Time integrator used for the implicit column solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Energetically balanced: variational derivatives integrated exactly in time.
    #[default]
    Balanced,
    /// Crank–Nicolson: the same system with the cross terms removed.
    CrankNicolson,
}

impl Scheme {
    pub(crate) fn averaging(self) -> TimeAveraging {
        match self {
            Scheme::Balanced => TimeAveraging::Exact,
            Scheme::CrankNicolson => TimeAveraging::Midpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub dt: f64,
    /// Threshold on every active relative update norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub include_w_in_criteria: bool,
    pub scheme: Scheme,
    /// Freezes the density weighting of the mass flux at time level `n` and drops the
    /// kinetic part of the Bernoulli potential, leaving a constant-coefficient system.
    pub linearised: bool,
    /// Returns the last iterate instead of failing when `max_iterations` is reached.
    pub accept_unconverged: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            dt: 1.0,
            tolerance: 1e-8,
            max_iterations: 40,
            include_w_in_criteria: true,
            scheme: Scheme::Balanced,
            linearised: false,
            accept_unconverged: false,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(SolverError::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return Err(SolverError::InvalidArgument(format!(
                "dt must be non-negative, got {}",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Relative update norms `|δx| / |x^{k+1}|` of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateNorms {
    pub w: f64,
    pub rho: f64,
    pub rho_theta: f64,
    pub exner: f64,
}

impl UpdateNorms {
    pub fn max_active(&self, include_w: bool) -> f64 {
        let rest = self.rho.max(self.rho_theta).max(self.exner);
        if include_w {
            rest.max(self.w)
        } else {
            rest
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NewtonReport {
    pub iterations: usize,
    pub converged: bool,
    /// One entry per iteration.
    pub update_norms: Vec<UpdateNorms>,
}

impl NewtonReport {
    pub fn final_norms(&self) -> UpdateNorms {
        self.update_norms.last().copied().unwrap_or_default()
    }
}

/// Explicit tendencies held fixed during an implicit solve, as load vectors (already
/// multiplied by the relevant mass matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnForcing {
    pub w: FieldU,
    pub rho: FieldQ,
    pub rho_theta: FieldQ,
}

impl ColumnForcing {
    pub fn zeros(n_levels: usize) -> Self {
        Self {
            w: FieldU::zeros(n_levels.saturating_sub(1)),
            rho: FieldQ::zeros(n_levels),
            rho_theta: FieldQ::zeros(n_levels),
        }
    }
}
