//! Vertical-only warm bubble: energy exchanges and the per-step ledger written as CSV.

use balanced_column::diagnostics::RunLedger;
use balanced_column::experiment::{
    column_operators, init_bubble_column, run_column, Experiment, ExperimentConfig,
};

fn main() -> balanced_column::Result<()> {
    let config = ExperimentConfig {
        n_steps: 100,
        ..ExperimentConfig::preset(Experiment::BubbleColumn)
    };
    let ops = column_operators(&config)?;
    let consts = config.constants()?;
    let initial = init_bubble_column(&ops, config.theta0, &config.bubble, &consts)?;

    let mut ledger = RunLedger::new(config.to_pairs());
    run_column(
        &initial,
        &ops,
        &consts,
        &config.newton(),
        config.n_steps,
        &mut ledger,
    )?;

    for row in ledger.rows.iter().step_by(20) {
        let b = &row.budget;
        println!(
            "t = {:5.0} s  K = {:.4e}  P - P0 = {:+.4e}  I - I0 = {:+.4e}  dH/H0 = {:+.2e}  iters = {}",
            b.time,
            b.kinetic,
            b.potential - ledger.rows[0].budget.potential,
            b.internal - ledger.rows[0].budget.internal,
            row.h_rel_err,
            row.newton_iters
        );
    }
    let path = std::env::temp_dir().join("bubble_column.csv");
    ledger.emit_csv(&path)?;
    println!("ledger written to {}", path.display());
    Ok(())
}
