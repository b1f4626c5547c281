use crate::error::{Result, SolverError};
use crate::mimetic::{assemble_weighted_s, BandMatrix, FieldQ, FieldTheta, FieldU, OperatorSet};
use crate::thermo::{diagnose_theta, variational_averages, GasConstants, VariationalAverages};

use super::{ColumnForcing, ColumnState, NewtonConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub w: FieldU,
    pub rho: FieldQ,
    pub rho_theta: FieldQ,
    pub exner: FieldQ,
}

impl ResidualSet {
    pub fn max_abs(&self) -> f64 {
        [&self.w.0, &self.rho.0, &self.rho_theta.0, &self.exner.0]
            .into_iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Operators evaluated at the field average of time level `n` and the iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct CentredOperators {
    pub rho: FieldQ,
    pub rho_theta: FieldQ,
    pub theta: FieldTheta,
    /// `Ŝ`, the `θ̂`-weighted `U⊥` mass.
    pub s: BandMatrix,
}

impl CentredOperators {
    pub fn new(state_n: &ColumnState, state_k: &ColumnState, ops: &OperatorSet) -> Result<Self> {
        let mid = state_n.midpoint(state_k);
        let theta = diagnose_theta(&mid.rho_theta, &mid.rho, ops)?;
        let s = assemble_weighted_s(ops.grid(), &theta)?;
        Ok(Self {
            rho: mid.rho,
            rho_theta: mid.rho_theta,
            theta,
            s,
        })
    }
}

/// Quantities of a step that the energy diagnostics reuse.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAverages {
    pub averages: VariationalAverages,
    pub centred: CentredOperators,
}

/// Residuals of the time-discrete column system at iterate `state_k`:
///
/// * `F_u = MU(wᵏ - wⁿ) - Δt(Eᵀ Φ̄ + Ŝ MU⁻¹ Eᵀ Π̄ + f_w)`
/// * `F_ρ = MQ(ρᵏ - ρⁿ) + Δt(E Ū - f_ρ)`
/// * `F_Θ = MQ(Θᵏ - Θⁿ) + Δt(E MU⁻¹ Ŝ Ū - f_Θ)`
/// * `F_Π = MQ(ln Πᵏ - (R/c_v) ln Θᵏ - ln c_p - (R/c_v) ln(R/p0))`
///
/// `E` is the incidence matrix, which with cell-indicator `Q` bases already carries the
/// `MQ` weighting of the weak divergence.
pub fn residuals(
    state_n: &ColumnState,
    state_k: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    config: &NewtonConfig,
    forcing: Option<&ColumnForcing>,
) -> Result<(ResidualSet, StepAverages)> {
    let dt = config.dt;
    let centred = CentredOperators::new(state_n, state_k, ops)?;
    let averages = if config.linearised {
        let frozen = ColumnState {
            rho: state_n.rho.clone(),
            ..state_k.clone()
        };
        variational_averages(
            state_n,
            &frozen,
            ops,
            consts,
            config.scheme.averaging(),
            false,
        )?
    } else {
        variational_averages(
            state_n,
            state_k,
            ops,
            consts,
            config.scheme.averaging(),
            true,
        )?
    };

    let mass_u = ops.mass_u();
    let dw: Vec<f64> = state_k
        .w
        .iter()
        .zip(state_n.w.iter())
        .map(|(a, b)| a - b)
        .collect();
    let grad_phi = ops.divergence_adjoint(&averages.bernoulli);
    let pressure = centred
        .s
        .mul_vec(&ops.solve_mass_u(&ops.divergence_adjoint(&averages.exner)));
    let mut f_w: Vec<f64> = mass_u
        .mul_vec(&dw)
        .iter()
        .zip(&grad_phi)
        .zip(&pressure)
        .map(|((m, g), p)| m - dt * (g + p))
        .collect();

    let div_u = ops.divergence(&averages.mass_flux);
    let theta_flux = ops.solve_mass_u(&centred.s.mul_vec(&averages.mass_flux));
    let div_f = ops.divergence(&theta_flux);
    let mq = ops.mass_q();
    let mut f_rho: Vec<f64> = (0..mq.len())
        .map(|i| mq[i] * (state_k.rho[i] - state_n.rho[i]) + dt * div_u[i])
        .collect();
    let mut f_theta: Vec<f64> = (0..mq.len())
        .map(|i| mq[i] * (state_k.rho_theta[i] - state_n.rho_theta[i]) + dt * div_f[i])
        .collect();

    if let Some(f) = forcing {
        for (r, l) in f_w.iter_mut().zip(f.w.iter()) {
            *r -= dt * l;
        }
        for (r, l) in f_rho.iter_mut().zip(f.rho.iter()) {
            *r -= dt * l;
        }
        for (r, l) in f_theta.iter_mut().zip(f.rho_theta.iter()) {
            *r -= dt * l;
        }
    }

    let kappa = consts.kappa_v();
    let offset = consts.cp().ln() + kappa * (consts.r() / consts.p0()).ln();
    let mut f_pi = Vec::with_capacity(mq.len());
    for i in 0..mq.len() {
        let (pi, big_theta) = (state_k.exner[i], state_k.rho_theta[i]);
        if !(pi > 0.0) {
            return Err(SolverError::nonphysical(
                "Exner pressure must be positive",
                i,
            ));
        }
        if !(big_theta > 0.0) {
            return Err(SolverError::nonphysical(
                "density-weighted potential temperature must be positive",
                i,
            ));
        }
        f_pi.push(mq[i] * (pi.ln() - kappa * big_theta.ln() - offset));
    }

    Ok((
        ResidualSet {
            w: FieldU(f_w),
            rho: FieldQ(f_rho),
            rho_theta: FieldQ(f_theta),
            exner: FieldQ(f_pi),
        },
        StepAverages { averages, centred },
    ))
}
