use std::path::{Path, PathBuf};

use crate::diagnostics::RunLedger;
use crate::error::{Result, SolverError};
use crate::hevi::{trap232_step, HeviConfig, SliceDynamics, SliceState};
use crate::integrator::{newton_solve, ColumnState, NewtonConfig, Scheme};
use crate::mimetic::{build_grid, OperatorSet, Stretching};
use crate::thermo::{energy_change, EnergyBudget, GasConstants, PowerExchanges};

use super::config::{scheme_name, Experiment, ExperimentConfig};
use super::init::{init_bubble_column, init_hydrostatic_column, perturb_theta, BubbleShape};

/// A ledger with the label that distinguishes it within a run.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedLedger {
    pub label: String,
    pub ledger: RunLedger,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub ledgers: Vec<NamedLedger>,
    /// `(time, height)` of the potential temperature maximum, slice runs only.
    pub bubble_track: Vec<(f64, f64)>,
}

impl RunOutput {
    pub fn ledger(&self, label: &str) -> Option<&RunLedger> {
        self.ledgers
            .iter()
            .find(|l| l.label == label)
            .map(|l| &l.ledger)
    }

    /// Writes one CSV per ledger: `path` itself for a single ledger, otherwise
    /// `<stem>_<label>.csv` next to it. Returns the paths written.
    pub fn write_csv(&self, path: &Path) -> Result<Vec<PathBuf>> {
        if let [single] = self.ledgers.as_slice() {
            single.ledger.emit_csv(path)?;
            return Ok(vec![path.to_path_buf()]);
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let mut written = Vec::new();
        for l in &self.ledgers {
            let p = path.with_file_name(format!("{stem}_{}.csv", l.label));
            l.ledger.emit_csv(&p)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Failure of a run, with whatever was recorded before it.
#[derive(Debug)]
pub struct RunFailure {
    pub error: SolverError,
    pub partial: RunOutput,
}

pub fn column_operators(config: &ExperimentConfig) -> Result<OperatorSet> {
    OperatorSet::new(build_grid(
        config.n_levels,
        config.z_top,
        &Stretching::Uniform,
    )?)
}

fn metadata(config: &ExperimentConfig, label: &str) -> Vec<(String, String)> {
    let mut m = config.to_pairs();
    m.push(("label".into(), label.into()));
    m
}

fn column_budget(
    state: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    time: f64,
    power: PowerExchanges,
) -> EnergyBudget {
    EnergyBudget {
        time,
        ..EnergyBudget::of_state(state, ops, consts).with_powers(power)
    }
}

/// Steps one column with the implicit solver alone, recording every step.
pub fn run_column(
    initial: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    newton: &NewtonConfig,
    n_steps: usize,
    ledger: &mut RunLedger,
) -> Result<ColumnState> {
    let mut state = initial.clone();
    ledger.record_step(
        column_budget(&state, ops, consts, 0.0, PowerExchanges::default()),
        &[],
    );
    for step in 1..=n_steps {
        let out = newton_solve(&state, ops, consts, newton, None)?;
        let time = step as f64 * newton.dt;
        ledger.record_step_with_change(
            column_budget(&out.state, ops, consts, time, out.power),
            std::slice::from_ref(&out.report),
            energy_change(&state, &out.state, ops.grid(), consts),
        );
        state = out.state;
    }
    Ok(state)
}

/// Bubble on a periodic slice of `n_columns` columns, centred on `bubble.centre_x`.
pub fn init_bubble_slice(
    ops: &OperatorSet,
    n_columns: usize,
    dx: f64,
    theta0: f64,
    bubble: &BubbleShape,
    consts: &GasConstants,
) -> Result<SliceState> {
    bubble.validate(ops.grid().z_top())?;
    let base = init_hydrostatic_column(ops, theta0, consts)?;
    let z = ops.z_mid();
    let columns = (0..n_columns)
        .map(|c| {
            let x = (c as f64 + 0.5) * dx;
            let dtheta: Vec<f64> = z.iter().map(|&zk| bubble.at(x, zk)).collect();
            perturb_theta(&base, &dtheta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SliceState {
        columns,
        u_par: vec![vec![0.0; ops.n_levels()]; n_columns],
        dx,
    })
}

/// Column budgets summed per unit slice depth, plus the horizontal kinetic energy.
pub fn slice_budget(
    state: &SliceState,
    ops: &OperatorSet,
    consts: &GasConstants,
    powers: &[PowerExchanges],
) -> EnergyBudget {
    let n = state.n_columns();
    let mut total = EnergyBudget::default();
    for (c, col) in state.columns.iter().enumerate() {
        let power = powers.get(c).copied().unwrap_or_default();
        let mut b = EnergyBudget::of_state(col, ops, consts).with_powers(power);
        let next = &state.columns[(c + 1) % n];
        let horizontal: f64 = (0..ops.n_levels())
            .map(|k| {
                0.25 * (col.rho[k] + next.rho[k]) * state.u_par[c][k].powi(2) * ops.mass_q()[k]
            })
            .sum();
        b.kinetic += horizontal;
        for v in [
            &mut b.mass,
            &mut b.kinetic,
            &mut b.potential,
            &mut b.internal,
            &mut b.dk_dt,
            &mut b.dp_dt,
            &mut b.di_dt,
        ] {
            *v *= state.dx;
        }
        total.accumulate(&b);
    }
    total
}

/// Height of the potential temperature maximum of the slice, refined by a parabola
/// through the maximal cell and its vertical neighbours.
pub fn theta_max_height(state: &SliceState, ops: &OperatorSet) -> f64 {
    let z = ops.z_mid();
    let n = z.len();
    let (mut best, mut col, mut lev) = (f64::NEG_INFINITY, 0, 0);
    for (c, s) in state.columns.iter().enumerate() {
        for k in 0..n {
            let theta = s.rho_theta[k] / s.rho[k];
            if theta > best {
                (best, col, lev) = (theta, c, k);
            }
        }
    }
    if lev == 0 || lev + 1 == n {
        return z[lev];
    }
    let s = &state.columns[col];
    let f = |k: usize| s.rho_theta[k] / s.rho[k];
    let (a, b, c) = (f(lev - 1), f(lev), f(lev + 1));
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return z[lev];
    }
    let h = 0.5 * (z[lev + 1] - z[lev - 1]);
    z[lev] + 0.5 * h * (a - c) / curvature
}

fn run_slice(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let ops = column_operators(config)?;
    let consts = config.constants()?;
    let mut state = init_bubble_slice(
        &ops,
        config.n_columns,
        config.dx,
        config.theta0,
        &config.bubble_shape(),
        &consts,
    )?;
    let hevi = HeviConfig {
        newton: config.newton(),
        rayleigh: config.rayleigh,
    };
    let dynamics = SliceDynamics {
        viscosity_factor: config.viscosity_factor,
    };
    let label = config.experiment.to_string();
    out.ledgers.push(NamedLedger {
        label: label.clone(),
        ledger: RunLedger::new(metadata(config, &label)),
    });
    let ledger_index = out.ledgers.len() - 1;
    out.ledgers[ledger_index]
        .ledger
        .record_step(slice_budget(&state, &ops, &consts, &[]), &[]);
    out.bubble_track.push((0.0, theta_max_height(&state, &ops)));
    for step in 1..=config.n_steps {
        let (next, stats) = trap232_step(&state, &ops, &consts, &hevi, &dynamics)?;
        let time = step as f64 * config.dt;
        let powers: Vec<PowerExchanges> = stats.columns.iter().map(|c| c.power).collect();
        let reports: Vec<_> = stats.columns.iter().map(|c| c.report.clone()).collect();
        let budget = EnergyBudget {
            time,
            ..slice_budget(&next, &ops, &consts, &powers)
        };
        out.ledgers[ledger_index]
            .ledger
            .record_step(budget, &reports);
        out.bubble_track.push((time, theta_max_height(&next, &ops)));
        state = next;
    }
    Ok(())
}

fn run_column_case(
    config: &ExperimentConfig,
    newton: &NewtonConfig,
    label: String,
    out: &mut RunOutput,
) -> Result<()> {
    let ops = column_operators(config)?;
    let consts = config.constants()?;
    let initial = match config.experiment {
        Experiment::HydrostaticColumn => init_hydrostatic_column(&ops, config.theta0, &consts)?,
        _ => init_bubble_column(&ops, config.theta0, &config.bubble, &consts)?,
    };
    out.ledgers.push(NamedLedger {
        ledger: RunLedger::new(metadata(config, &label)),
        label,
    });
    let ledger = &mut out.ledgers.last_mut().expect("just pushed").ledger;
    run_column(&initial, &ops, &consts, newton, config.n_steps, ledger)?;
    Ok(())
}

/// Runs a preset and keeps whatever was recorded if it fails part way.
pub fn run_experiment_partial(
    config: &ExperimentConfig,
) -> std::result::Result<RunOutput, RunFailure> {
    let mut out = RunOutput::default();
    let result = config.validate().and_then(|_| match config.experiment {
        Experiment::HydrostaticColumn | Experiment::BubbleColumn => {
            let label = config.experiment.to_string();
            run_column_case(config, &config.newton(), label, &mut out)
        }
        Experiment::ToleranceSweep => config.sweep_tolerances.iter().try_for_each(|&tol| {
            let newton = NewtonConfig {
                tolerance: tol,
                ..config.newton()
            };
            run_column_case(config, &newton, format!("tol{tol:e}"), &mut out)
        }),
        Experiment::CnCompare => [Scheme::Balanced, Scheme::CrankNicolson]
            .into_iter()
            .try_for_each(|scheme| {
                let newton = NewtonConfig {
                    scheme,
                    ..config.newton()
                };
                run_column_case(config, &newton, scheme_name(scheme).to_string(), &mut out)
            }),
        Experiment::BubbleSlice => run_slice(config, &mut out),
    });
    match result {
        Ok(()) => Ok(out),
        Err(error) => Err(RunFailure {
            error,
            partial: out,
        }),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    run_experiment_partial(config).map_err(|f| f.error)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            n_levels: 12,
            z_top: 1200.0,
            n_steps: 3,
            n_columns: 4,
            dx: 200.0,
            ..ExperimentConfig::preset(experiment)
        }
    }

    #[test]
    fn every_preset_runs_small() {
        for e in Experiment::ALL {
            let out = run_experiment(&small(e)).unwrap();
            assert!(!out.ledgers.is_empty());
            for l in &out.ledgers {
                assert_eq!(l.ledger.rows.len(), 4, "{e}");
            }
        }
    }

    #[test]
    fn sweep_and_compare_are_labelled() {
        let out = run_experiment(&small(Experiment::CnCompare)).unwrap();
        assert!(out.ledger("balanced").is_some() && out.ledger("crank-nicolson").is_some());
        let sweep = run_experiment(&small(Experiment::ToleranceSweep)).unwrap();
        assert_eq!(sweep.ledgers.len(), 5);
        assert_eq!(sweep.ledgers[0].label, "tol1e-6");
    }

    #[test]
    fn failure_keeps_partial_ledger() {
        let cfg = ExperimentConfig {
            max_iterations: 1,
            tolerance: 1e-15,
            ..small(Experiment::BubbleColumn)
        };
        let failure = run_experiment_partial(&cfg).unwrap_err();
        assert_eq!(failure.error.exit_code(), 3);
        assert_eq!(failure.partial.ledgers[0].ledger.rows.len(), 1);
    }

    #[test]
    fn slice_bubble_is_centred() {
        let cfg = small(Experiment::BubbleSlice);
        let ops = column_operators(&cfg).unwrap();
        let s = init_bubble_slice(
            &ops,
            4,
            200.0,
            300.0,
            &cfg.bubble_shape(),
            &GasConstants::default(),
        )
        .unwrap();
        let theta = |c: usize, k: usize| s.columns[c].rho_theta[k] / s.columns[c].rho[k];
        assert_eq!(theta(1, 3), theta(2, 3));
        assert!(theta(1, 3) > theta(0, 3));
    }
}
