use crate::error::{Result, SolverError};
use crate::integrator::ColumnState;
use crate::mimetic::{assemble_weighted_s, FieldQ, FieldU, OperatorSet};
use crate::thermo::{diagnose_exner, diagnose_theta, GasConstants};

/// Warm bubble perturbation `θ' = A(1 + cos(πr/r0))` for `r ≤ r0`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleShape {
    pub amplitude: f64,
    pub radius: f64,
    pub centre_z: f64,
    pub centre_x: f64,
}

impl Default for BubbleShape {
    fn default() -> Self {
        Self {
            amplitude: 0.25,
            radius: 250.0,
            centre_z: 350.0,
            centre_x: 0.0,
        }
    }
}

impl BubbleShape {
    pub fn perturbation(&self, r: f64) -> f64 {
        if r <= self.radius {
            self.amplitude * (1.0 + (std::f64::consts::PI * r / self.radius).cos())
        } else {
            0.0
        }
    }

    /// Perturbation at height `z` in a column with no horizontal variation.
    pub fn at_height(&self, z: f64) -> f64 {
        self.perturbation((z - self.centre_z).abs())
    }

    pub fn at(&self, x: f64, z: f64) -> f64 {
        self.perturbation((x - self.centre_x).hypot(z - self.centre_z))
    }

    pub fn validate(&self, z_top: f64) -> Result<()> {
        let ok = self.radius > 0.0
            && self.amplitude.is_finite()
            && self.centre_z >= 0.0
            && self.centre_z <= z_top;
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidArgument(format!(
                "bubble (centre {}, radius {}) does not fit a column of height {z_top}",
                self.centre_z, self.radius
            )))
        }
    }
}

/// Closed-form hydrostatic Exner pressure `Π = c_p - g z / θ0` for constant `θ0`.
pub fn hydrostatic_exner(z: f64, theta0: f64, consts: &GasConstants) -> f64 {
    consts.cp() * (1.0 - consts.g() * z / (consts.cp() * theta0))
}

const ADJUSTMENT_SWEEPS: usize = 50;

/// Column at rest with `θ ≡ θ0`, balanced against the discrete vertical pressure gradient.
///
/// Starts from the closed-form Exner profile at cell midpoints and then repeatedly
/// re-integrates `Eᵀ Π = -MU Ŝ⁻¹ Eᵀ g z` upward from the surface cell, so that the momentum
/// residual of a resting column vanishes to roundoff.
pub fn init_hydrostatic_column(
    ops: &OperatorSet,
    theta0: f64,
    consts: &GasConstants,
) -> Result<ColumnState> {
    if !(theta0 > 0.0 && theta0.is_finite()) {
        return Err(SolverError::InvalidArgument(format!(
            "theta0 must be positive, got {theta0}"
        )));
    }
    let z_top = ops.grid().z_top();
    if z_top >= consts.cp() * theta0 / consts.g() {
        return Err(SolverError::InvalidArgument(format!(
            "z_top {z_top} m reaches the top of a theta0 = {theta0} K atmosphere"
        )));
    }
    let exner: Vec<f64> = ops
        .z_mid()
        .iter()
        .map(|&z| hydrostatic_exner(z, theta0, consts))
        .collect();
    let theta_cells = vec![theta0; ops.n_levels()];
    balance_column(ops, FieldQ(exner), &theta_cells, consts)
}

/// Builds `(Θ, ρ)` from `Π` and cell values of `θ`, then adjusts `Π` until the resting
/// column is discretely hydrostatic.
fn balance_column(
    ops: &OperatorSet,
    mut exner: FieldQ,
    theta_cells: &[f64],
    consts: &GasConstants,
) -> Result<ColumnState> {
    let g = consts.g();
    let grad_geo = ops.divergence_adjoint(&ops.z_mid().iter().map(|z| g * z).collect::<Vec<_>>());
    let mut state = state_from_exner(&exner, theta_cells, ops.n_u(), consts)?;
    for _ in 0..ADJUSTMENT_SWEEPS {
        let theta = diagnose_theta(&state.rho_theta, &state.rho, ops)?;
        let s = assemble_weighted_s(ops.grid(), &theta)?;
        let s_inv_grad = s.factor_tridiagonal()?.solve(&grad_geo);
        let jumps = ops.mass_u().mul_vec(&s_inv_grad);
        // (Eᵀ Π)_j = Π_j - Π_{j+1}.
        let mut next = exner.clone();
        for (j, jump) in jumps.iter().enumerate() {
            next[j + 1] = next[j] + jump;
        }
        if let Some(i) = next.iter().position(|&p| !(p > 0.0)) {
            return Err(SolverError::nonphysical(
                "Exner pressure must be positive",
                i,
            ));
        }
        let change = next
            .iter()
            .zip(exner.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / b));
        exner = next;
        state = state_from_exner(&exner, theta_cells, ops.n_u(), consts)?;
        if change == 0.0 {
            break;
        }
    }
    Ok(state)
}

fn state_from_exner(
    exner: &FieldQ,
    theta_cells: &[f64],
    n_u: usize,
    consts: &GasConstants,
) -> Result<ColumnState> {
    let rho_theta: Vec<f64> = exner.iter().map(|&p| consts.rho_theta_of(p)).collect();
    let rho: Vec<f64> = rho_theta
        .iter()
        .zip(theta_cells)
        .map(|(t, th)| t / th)
        .collect();
    let rho_theta = FieldQ(rho_theta);
    let state = ColumnState {
        w: FieldU::zeros(n_u),
        exner: diagnose_exner(&rho_theta, consts)?,
        rho: FieldQ(rho),
        rho_theta,
    };
    state.check_physical()?;
    Ok(state)
}

/// Imposes `θ = θ_base + θ'` on a resting base column, keeping `Π` (hence `Θ`) and
/// recomputing the density as `ρ = Θ / θ`.
pub fn perturb_theta(base: &ColumnState, perturbation: &[f64]) -> Result<ColumnState> {
    let mut state = base.clone();
    for (i, dtheta) in perturbation.iter().enumerate() {
        let theta = base.rho_theta[i] / base.rho[i] + dtheta;
        if !(theta > 0.0) {
            return Err(SolverError::nonphysical(
                "potential temperature must be positive",
                i,
            ));
        }
        state.rho[i] = base.rho_theta[i] / theta;
    }
    Ok(state)
}

/// Vertical-only warm bubble: hydrostatic base of temperature `θ0` with the perturbation
/// evaluated at the cell midpoints.
pub fn init_bubble_column(
    ops: &OperatorSet,
    theta0: f64,
    bubble: &BubbleShape,
    consts: &GasConstants,
) -> Result<ColumnState> {
    bubble.validate(ops.grid().z_top())?;
    let base = init_hydrostatic_column(ops, theta0, consts)?;
    let dtheta: Vec<f64> = ops.z_mid().iter().map(|&z| bubble.at_height(z)).collect();
    perturb_theta(&base, &dtheta)
}
