//! Energy drift and Newton effort as the solver tolerance tightens.

use balanced_column::experiment::{run_experiment, Experiment, ExperimentConfig};

fn main() -> balanced_column::Result<()> {
    let config = ExperimentConfig {
        n_steps: 100,
        ..ExperimentConfig::preset(Experiment::ToleranceSweep)
    };
    let out = run_experiment(&config)?;
    println!(
        "{:>10} {:>12} {:>12} {:>10}",
        "tolerance", "|dH|/H0", "|dm|/m0", "mean iters"
    );
    for (tol, named) in config.sweep_tolerances.iter().zip(&out.ledgers) {
        let last = named.ledger.last().expect("ledger has rows");
        println!(
            "{tol:>10.0e} {:>12.3e} {:>12.3e} {:>10.2}",
            last.h_rel_err.abs(),
            last.mass_rel_err.abs(),
            named.ledger.mean_iterations()
        );
    }
    Ok(())
}
