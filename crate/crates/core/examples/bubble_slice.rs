//! Warm bubble on a periodic x-z slice advanced with the HEVI TRAP(2,3,2) scheme.

use balanced_column::experiment::{run_experiment, Experiment, ExperimentConfig};

fn main() -> balanced_column::Result<()> {
    let config = ExperimentConfig {
        n_steps: 500,
        ..ExperimentConfig::preset(Experiment::BubbleSlice)
    };
    let out = run_experiment(&config)?;
    for (time, height) in out.bubble_track.iter().step_by(50) {
        println!("t = {time:6.1} s  theta-max height = {height:7.1} m");
    }
    let ledger = &out.ledgers[0].ledger;
    let last = ledger.last().expect("ledger has rows");
    println!(
        "mass drift {:.2e}, energy drift {:.2e}, mean Newton iterations {:.2}",
        last.mass_rel_err,
        last.h_rel_err,
        ledger.mean_iterations()
    );
    Ok(())
}
