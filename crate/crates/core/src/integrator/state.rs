use crate::error::{Result, SolverError};
use crate::mimetic::{FieldQ, FieldU, VerticalGrid};

/// Prognostic quadruple of one column at a time level or Newton iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnState {
    /// Vertical velocity on interior interfaces [m s⁻¹].
    pub w: FieldU,
    /// Density [kg m⁻³].
    pub rho: FieldQ,
    /// Density-weighted potential temperature `Θ = ρθ` [K kg m⁻³].
    pub rho_theta: FieldQ,
    /// Exner pressure, including `c_p` [J kg⁻¹ K⁻¹].
    pub exner: FieldQ,
}

impl ColumnState {
    pub fn n_levels(&self) -> usize {
        self.rho.len()
    }

    /// Checks dof counts against the grid and positivity of `ρ`, `Θ` and `Π`.
    pub fn validate(&self, grid: &VerticalGrid) -> Result<()> {
        let n = grid.n_levels();
        if self.rho.len() != n
            || self.rho_theta.len() != n
            || self.exner.len() != n
            || self.w.len() != grid.n_u()
        {
            return Err(SolverError::InvalidArgument(format!(
                "column state sizes (w {}, rho {}, Theta {}, Pi {}) do not match a {n}-level grid",
                self.w.len(),
                self.rho.len(),
                self.rho_theta.len(),
                self.exner.len()
            )));
        }
        self.check_physical()
    }

    pub fn check_physical(&self) -> Result<()> {
        let checks: [(&'static str, &[f64]); 3] = [
            ("density must be positive", &self.rho),
            (
                "density-weighted potential temperature must be positive",
                &self.rho_theta,
            ),
            ("Exner pressure must be positive", &self.exner),
        ];
        for (what, field) in checks {
            if let Some(i) = field.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(SolverError::nonphysical(what, i));
            }
        }
        if let Some(i) = self.w.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::nonphysical(
                "vertical velocity must be finite",
                i,
            ));
        }
        Ok(())
    }

    /// Field-wise `½(self + other)`.
    pub fn midpoint(&self, other: &ColumnState) -> ColumnState {
        let avg = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| 0.5 * (x + y))
                .collect::<Vec<_>>()
        };
        ColumnState {
            w: avg(&self.w, &other.w).into(),
            rho: avg(&self.rho, &other.rho).into(),
            rho_theta: avg(&self.rho_theta, &other.rho_theta).into(),
            exner: avg(&self.exner, &other.exner).into(),
        }
    }
}
