use crate::error::{Result, SolverError};
use crate::mimetic::OperatorSet;
use crate::thermo::{power_exchanges, GasConstants, PowerExchanges};

use super::jacobian::assemble_from_averages;
use super::{
    residuals, schur_solve, ColumnForcing, ColumnState, NewtonConfig, NewtonReport, Scheme,
    StepAverages, UpdateNorms,
};

/// A converged (or accepted) implicit column step.
#[derive(Debug, Clone)]
pub struct ColumnStep {
    pub state: ColumnState,
    pub report: NewtonReport,
    /// Variational averages and centred operators at the returned state.
    pub averages: StepAverages,
    pub power: PowerExchanges,
    /// Energy change implied by the averaged variational derivatives; zero for an exactly
    /// solved unforced step.
    pub chain_rule: f64,
}

fn relative(delta: &[f64], x: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let xn = norm(x);
    if xn < 1e-300 {
        0.0
    } else {
        norm(delta) / xn
    }
}

fn add_in_place(x: &mut [f64], dx: &[f64]) {
    x.iter_mut().zip(dx).for_each(|(a, b)| *a += b);
}

/// Advances one column by `config.dt` with unit-step quasi-Newton iterations started from
/// `state_n`, using the scheme selected in `config`.
pub fn newton_solve(
    state_n: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    config: &NewtonConfig,
    forcing: Option<&ColumnForcing>,
) -> Result<ColumnStep> {
    config.validate()?;
    state_n.validate(ops.grid())?;
    let mut state = state_n.clone();
    let mut report = NewtonReport::default();

    for _ in 0..config.max_iterations {
        let (res, step) = residuals(state_n, &state, ops, consts, config, forcing)?;
        let blocks = assemble_from_averages(
            state_n,
            &state,
            ops,
            consts,
            config.dt,
            &step.centred,
            &step.averages,
        )?;
        let update = schur_solve(&blocks, &res)?;
        add_in_place(&mut state.w, &update.w);
        add_in_place(&mut state.rho, &update.rho);
        add_in_place(&mut state.rho_theta, &update.rho_theta);
        add_in_place(&mut state.exner, &update.exner);
        state.check_physical()?;

        let norms = UpdateNorms {
            w: relative(&update.w, &state.w),
            rho: relative(&update.rho, &state.rho),
            rho_theta: relative(&update.rho_theta, &state.rho_theta),
            exner: relative(&update.exner, &state.exner),
        };
        report.iterations += 1;
        report.update_norms.push(norms);
        if norms.max_active(config.include_w_in_criteria) <= config.tolerance {
            report.converged = true;
            break;
        }
    }

    if !report.converged && !config.accept_unconverged {
        return Err(SolverError::NonConvergence {
            column: None,
            report: Box::new(report),
        });
    }

    let (_, averages) = residuals(state_n, &state, ops, consts, config, forcing)?;
    let power = power_exchanges(&averages.averages, &averages.centred.s, ops, consts);
    let chain_rule = chain_rule_residual(state_n, &state, &averages, ops);
    Ok(ColumnStep {
        state,
        report,
        averages,
        power,
        chain_rule,
    })
}

/// [`newton_solve`] with the Crank–Nicolson averages, whatever `config.scheme` says.
pub fn crank_nicolson_solve(
    state_n: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    config: &NewtonConfig,
    forcing: Option<&ColumnForcing>,
) -> Result<ColumnStep> {
    let cn = NewtonConfig {
        scheme: Scheme::CrankNicolson,
        ..config.clone()
    };
    newton_solve(state_n, ops, consts, &cn, forcing)
}

/// `Ūᵀ MU Δw + Φ̄ᵀ MQ Δρ + Π̄ᵀ MQ ΔΘ`: the discrete chain rule applied across the step.
pub fn chain_rule_residual(
    state_n: &ColumnState,
    state_np1: &ColumnState,
    averages: &StepAverages,
    ops: &OperatorSet,
) -> f64 {
    let avg = &averages.averages;
    let dw: Vec<f64> = state_np1
        .w
        .iter()
        .zip(state_n.w.iter())
        .map(|(a, b)| a - b)
        .collect();
    let mu_dw = ops.mass_u().mul_vec(&dw);
    let kinetic: f64 = avg.mass_flux.iter().zip(&mu_dw).map(|(a, b)| a * b).sum();
    let mq = ops.mass_q();
    let cells: f64 = (0..mq.len())
        .map(|i| {
            mq[i]
                * (avg.bernoulli[i] * (state_np1.rho[i] - state_n.rho[i])
                    + avg.exner[i] * (state_np1.rho_theta[i] - state_n.rho_theta[i]))
        })
        .sum();
    kinetic + cells
}
