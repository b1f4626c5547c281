//! Time-averaged variational derivatives: exact path integrals against midpoint averages,
//! and the energy change each implies across a step.

use balanced_column::experiment::{
    column_operators, init_bubble_column, Experiment, ExperimentConfig,
};
use balanced_column::integrator::{chain_rule_residual, newton_solve};
use balanced_column::thermo::{
    averaged_variational_derivatives, energy_change, midpoint_variational_derivatives,
};

fn main() -> balanced_column::Result<()> {
    let config = ExperimentConfig::preset(Experiment::BubbleColumn);
    let ops = column_operators(&config)?;
    let consts = config.constants()?;
    let mut state = init_bubble_column(&ops, config.theta0, &config.bubble, &consts)?;
    let newton = balanced_column::NewtonConfig {
        tolerance: 1e-13,
        ..config.newton()
    };
    for _ in 0..50 {
        state = newton_solve(&state, &ops, &consts, &newton, None)?.state;
    }

    let step = newton_solve(&state, &ops, &consts, &newton, None)?;
    let next = &step.state;
    let exact = averaged_variational_derivatives(&state, next, &ops, &consts)?;
    let midpoint = midpoint_variational_derivatives(&state, next, &ops, &consts)?;
    let diff = exact
        .mass_flux
        .iter()
        .zip(midpoint.mass_flux.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("max mass-flux difference, exact vs midpoint: {diff:.3e} kg m^-2 s^-1");

    let dh = energy_change(&state, next, ops.grid(), &consts);
    let chain = chain_rule_residual(&state, next, &step.averages, &ops);
    println!("energy change across the step:  {dh:+.4e} J");
    println!("chain-rule residual of the step: {chain:+.4e} J");
    println!(
        "power exchanges: dK/dt {:+.4e}  dP/dt {:+.4e}  dI/dt {:+.4e}  (sum {:+.1e})",
        step.power.dk_dt,
        step.power.dp_dt,
        step.power.di_dt,
        step.power.sum()
    );
    Ok(())
}
