//! A discretely hydrostatic column at rest stays at rest under both integrators.

use balanced_column::experiment::init_hydrostatic_column;
use balanced_column::integrator::newton_solve;
use balanced_column::mimetic::{build_grid, Stretching};
use balanced_column::{GasConstants, NewtonConfig, OperatorSet, Scheme};

fn main() -> balanced_column::Result<()> {
    let consts = GasConstants::default();
    let ops = OperatorSet::new(build_grid(150, 1500.0, &Stretching::Uniform)?)?;
    let initial = init_hydrostatic_column(&ops, 300.0, &consts)?;

    for scheme in [Scheme::Balanced, Scheme::CrankNicolson] {
        let config = NewtonConfig {
            scheme,
            include_w_in_criteria: false,
            ..Default::default()
        };
        let mut state = initial.clone();
        let mut w_max = 0.0f64;
        let mut iterations = 0;
        for _ in 0..100 {
            let step = newton_solve(&state, &ops, &consts, &config, None)?;
            iterations += step.report.iterations;
            state = step.state;
            w_max = state.w.iter().fold(w_max, |m, w| m.max(w.abs()));
        }
        println!(
            "{scheme:?}: max |w| over 100 s = {w_max:.3e} m/s, {iterations} Newton iterations"
        );
    }
    Ok(())
}
