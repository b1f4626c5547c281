//! The energetically balanced averages against the Crank–Nicolson midpoint averages on the
//! same bubble column.

use balanced_column::experiment::{run_experiment, Experiment, ExperimentConfig};

fn main() -> balanced_column::Result<()> {
    for tolerance in [1e-8, 1e-14] {
        let config = ExperimentConfig {
            tolerance,
            ..ExperimentConfig::preset(Experiment::CnCompare)
        };
        let out = run_experiment(&config)?;
        for named in &out.ledgers {
            let last = named.ledger.last().expect("ledger has rows");
            println!(
                "tol {tolerance:.0e} {:>15}: H - H0 = {:+.4e} J, |dH|/H0 = {:.3e}, mean iters {:.2}",
                named.label,
                last.h_change,
                last.h_rel_err.abs(),
                named.ledger.mean_iterations()
            );
        }
    }
    Ok(())
}
