//! One Newton update computed through the Θ Helmholtz equation and through a dense LU of
//! the full block system.

use balanced_column::experiment::{
    column_operators, init_bubble_column, Experiment, ExperimentConfig,
};
use balanced_column::integrator::{
    assemble_jacobian, helmholtz_operator, monolithic_solve, residuals, schur_solve,
};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

fn main() -> balanced_column::Result<()> {
    let config = ExperimentConfig {
        n_levels: 30,
        z_top: 1500.0,
        ..ExperimentConfig::preset(Experiment::BubbleColumn)
    };
    let ops = column_operators(&config)?;
    let consts = config.constants()?;
    let newton = config.newton();
    let state = init_bubble_column(&ops, config.theta0, &config.bubble, &consts)?;

    let blocks = assemble_jacobian(&state, &state, &ops, &consts, newton.dt)?;
    let (res, _) = residuals(&state, &state, &ops, &consts, &newton, None)?;
    let helmholtz = helmholtz_operator(&blocks)?;
    println!(
        "full system {0}x{0}, Helmholtz operator {1}x{1}",
        blocks.to_dense().nrows(),
        helmholtz.nrows()
    );

    let reduced = schur_solve(&blocks, &res)?;
    let full = monolithic_solve(&blocks, &res)?;
    println!(
        "max |dw| difference     {:.3e}",
        max_diff(&reduced.w, &full.w)
    );
    println!(
        "max |drho| difference   {:.3e}",
        max_diff(&reduced.rho, &full.rho)
    );
    println!(
        "max |dTheta| difference {:.3e}",
        max_diff(&reduced.rho_theta, &full.rho_theta)
    );
    println!(
        "max |dPi| difference    {:.3e}",
        max_diff(&reduced.exner, &full.exner)
    );
    Ok(())
}
