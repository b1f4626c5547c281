use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use balanced_column::experiment::{
    run_experiment_partial, Experiment, ExperimentConfig, RunOutput,
};
use balanced_column::{Scheme, SolverError};

#[derive(Parser)]
#[command(version, about = "Energetically balanced implicit column integrator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Resting, discretely hydrostatic column.
    HydrostaticColumn(Preset),
    /// Vertical-only warm bubble.
    BubbleColumn(Preset),
    /// Warm bubble on a periodic x-z slice.
    BubbleSlice(Preset),
    /// Vertical-only bubble across a range of solver tolerances.
    ToleranceSweep(Preset),
    /// Vertical-only bubble with both integrators.
    CnCompare(Preset),
}

#[derive(Args)]
struct Preset {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Balanced,
    Cn,
}

#[derive(Args)]
struct Common {
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    integrator: Option<IntegratorArg>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    exclude_w_from_convergence: bool,
    /// Keep the last Newton iterate when the tolerance is not reached.
    #[arg(long)]
    accept_unconverged: bool,
    /// Worker threads for the per-column solves (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

fn build_config(command: Command) -> Result<(ExperimentConfig, Common), SolverError> {
    let (experiment, file, common) = match command {
        Command::Run { config, common } => (None, Some(config), common),
        Command::HydrostaticColumn(p) => (Some(Experiment::HydrostaticColumn), p.config, p.common),
        Command::BubbleColumn(p) => (Some(Experiment::BubbleColumn), p.config, p.common),
        Command::BubbleSlice(p) => (Some(Experiment::BubbleSlice), p.config, p.common),
        Command::ToleranceSweep(p) => (Some(Experiment::ToleranceSweep), p.config, p.common),
        Command::CnCompare(p) => (Some(Experiment::CnCompare), p.config, p.common),
    };
    let mut config = match (&file, experiment) {
        (Some(path), Some(e)) => {
            let cfg = ExperimentConfig::from_file(path, e)?;
            if cfg.experiment != e {
                return Err(SolverError::Config(format!(
                    "{} names experiment '{}', not '{e}'",
                    path.display(),
                    cfg.experiment
                )));
            }
            cfg
        }
        (Some(path), None) => ExperimentConfig::from_file(path, Experiment::BubbleColumn)?,
        (None, Some(e)) => ExperimentConfig::preset(e),
        (None, None) => unreachable!("run requires --config"),
    };
    for o in &common.overrides {
        config.apply_override(o)?;
    }
    if let Some(i) = common.integrator {
        config.integrator = match i {
            IntegratorArg::Balanced => Scheme::Balanced,
            IntegratorArg::Cn => Scheme::CrankNicolson,
        };
    }
    if let Some(t) = common.tolerance {
        config.tolerance = t;
    }
    if common.exclude_w_from_convergence {
        config.include_w_in_criteria = false;
    }
    if common.accept_unconverged {
        config.accept_unconverged = true;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok((config, common))
}

fn report(output: &RunOutput) {
    for l in &output.ledgers {
        if let Some(row) = l.ledger.last() {
            println!(
                "{}: steps {} mass_rel_err {:.3e} H_rel_err {:.3e} mean_newton_iters {:.2}",
                l.label,
                row.budget.step,
                row.mass_rel_err,
                row.h_rel_err,
                l.ledger.mean_iterations()
            );
        }
    }
}

fn write(output: &RunOutput, config: &ExperimentConfig) -> Result<(), SolverError> {
    if let Some(path) = &config.output {
        for p in output.write_csv(path)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn fail(e: &SolverError) -> ExitCode {
    eprintln!("error [{}]: {e}", e.code().as_str());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, common) = match build_config(cli.command) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return fail(&SolverError::Config(format!("thread pool: {e}")));
        }
    }
    match run_experiment_partial(&config) {
        Ok(output) => {
            report(&output);
            match write(&output, &config) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Err(failure) => {
            report(&failure.partial);
            if let Err(e) = write(&failure.partial, &config) {
                eprintln!("error [{}]: {e}", e.code().as_str());
            }
            fail(&failure.error)
        }
    }
}
