//! Per-step conservation ledger and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, SolverError};
use crate::integrator::{NewtonReport, UpdateNorms};
use crate::thermo::EnergyBudget;

pub const CSV_HEADER: [&str; 17] = [
    "step",
    "time_s",
    "mass",
    "mass_rel_err",
    "K",
    "P",
    "I",
    "H",
    "H_rel_err",
    "dK_dt",
    "dP_dt",
    "dI_dt",
    "newton_iters",
    "max_update_w",
    "max_update_rho",
    "max_update_Theta",
    "max_update_Pi",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub budget: EnergyBudget,
    /// `(mass - mass₀) / mass₀`.
    pub mass_rel_err: f64,
    /// `H - H₀`, accumulated from per-step increments when they are supplied.
    pub h_change: f64,
    /// `(H - H₀) / |H₀|`.
    pub h_rel_err: f64,
    /// Largest iteration count over the columns solved in this step.
    pub newton_iters: usize,
    /// Largest final relative update of each variable over the columns.
    pub max_update: UpdateNorms,
}

/// Time series of budgets, starting with the initial state at step 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLedger {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<LedgerRow>,
}

impl RunLedger {
    pub fn new(metadata: Vec<(String, String)>) -> Self {
        Self {
            metadata,
            rows: Vec::new(),
        }
    }

    /// Appends a row; the step index is the row position and `H - H₀` is taken from the
    /// totals.
    pub fn record_step(&mut self, budget: EnergyBudget, reports: &[NewtonReport]) {
        let h_change = self
            .rows
            .first()
            .map_or(0.0, |f| budget.total - f.budget.total);
        self.push_row(budget, reports, h_change);
    }

    /// Appends a row whose `H - H₀` is the previous one plus `delta_h`, the energy change of
    /// this step evaluated without cancellation.
    pub fn record_step_with_change(
        &mut self,
        budget: EnergyBudget,
        reports: &[NewtonReport],
        delta_h: f64,
    ) {
        let h_change = self.rows.last().map_or(0.0, |r| r.h_change + delta_h);
        self.push_row(budget, reports, h_change);
    }

    fn push_row(&mut self, mut budget: EnergyBudget, reports: &[NewtonReport], h_change: f64) {
        budget.step = self.rows.len();
        let (mass_rel_err, h_rel_err) = match self.rows.first() {
            None => (0.0, 0.0),
            Some(first) => {
                let b0 = &first.budget;
                ((budget.mass - b0.mass) / b0.mass, h_change / b0.total.abs())
            }
        };
        let mut max_update = UpdateNorms::default();
        for r in reports {
            let f = r.final_norms();
            max_update.w = max_update.w.max(f.w);
            max_update.rho = max_update.rho.max(f.rho);
            max_update.rho_theta = max_update.rho_theta.max(f.rho_theta);
            max_update.exner = max_update.exner.max(f.exner);
        }
        self.rows.push(LedgerRow {
            budget,
            mass_rel_err,
            h_change,
            h_rel_err,
            newton_iters: reports.iter().map(|r| r.iterations).max().unwrap_or(0),
            max_update,
        });
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    /// Mean Newton iteration count over the stepped rows (row 0 is the initial state).
    pub fn mean_iterations(&self) -> f64 {
        let stepped = &self.rows[1.min(self.rows.len())..];
        if stepped.is_empty() {
            return 0.0;
        }
        stepped.iter().map(|r| r.newton_iters as f64).sum::<f64>() / stepped.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            let b = &row.budget;
            let reals = [
                b.time,
                b.mass,
                row.mass_rel_err,
                b.kinetic,
                b.potential,
                b.internal,
                b.total,
                row.h_rel_err,
                b.dk_dt,
                b.dp_dt,
                b.di_dt,
            ];
            let _ = write!(out, "{}", b.step);
            for v in reals {
                let _ = write!(out, ",{v:.16e}");
            }
            let _ = write!(out, ",{}", row.newton_iters);
            let u = &row.max_update;
            for v in [u.w, u.rho, u.rho_theta, u.exner] {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn emit_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|source| SolverError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(time: f64, k: f64, p: f64, i: f64, mass: f64) -> EnergyBudget {
        EnergyBudget {
            time,
            mass,
            kinetic: k,
            potential: p,
            internal: i,
            total: k + p + i,
            ..EnergyBudget::default()
        }
    }

    #[test]
    fn first_row_has_zero_drift() {
        let mut l = RunLedger::default();
        l.record_step(budget(0.0, 1.0, 2.0, 3.0, 4.0), &[]);
        assert_eq!(l.rows[0].h_rel_err, 0.0);
        assert_eq!(l.rows[0].mass_rel_err, 0.0);
    }

    #[test]
    fn constant_budgets_have_zero_drift() {
        let mut l = RunLedger::default();
        for s in 0..4 {
            l.record_step(budget(s as f64, 1.0, 2.0, 3.0, 4.0), &[]);
        }
        assert!(l
            .rows
            .iter()
            .all(|r| r.h_rel_err == 0.0 && r.mass_rel_err == 0.0));
        assert_eq!(
            l.rows.iter().map(|r| r.budget.step).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn drift_normalisation() {
        let mut l = RunLedger::default();
        l.record_step(budget(0.0, 0.0, 10.0, -20.0, 2.0), &[]);
        l.record_step(budget(1.0, 1.0, 10.0, -20.0, 3.0), &[]);
        assert_eq!(l.rows[1].h_rel_err, 0.1);
        assert_eq!(l.rows[1].mass_rel_err, 0.5);
    }

    #[test]
    fn increments_accumulate() {
        let mut l = RunLedger::default();
        l.record_step_with_change(budget(0.0, 1.0, 10.0, -20.0, 2.0), &[], 99.0);
        l.record_step_with_change(budget(1.0, 1.0, 10.0, -20.0, 2.0), &[], 0.25);
        l.record_step_with_change(budget(2.0, 1.0, 10.0, -20.0, 2.0), &[], 0.5);
        assert_eq!(l.rows[0].h_change, 0.0);
        assert_eq!(l.rows[2].h_change, 0.75);
        assert_eq!(l.rows[2].h_rel_err, 0.75 / 9.0);
    }

    #[test]
    fn empty_ledger_is_header_only() {
        let csv = RunLedger::default().to_csv();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn iteration_summary_takes_worst_column() {
        let mut l = RunLedger::default();
        let reports = [
            NewtonReport {
                iterations: 2,
                converged: true,
                update_norms: vec![UpdateNorms {
                    w: 1e-3,
                    rho: 1e-9,
                    rho_theta: 0.0,
                    exner: 0.0,
                }],
            },
            NewtonReport {
                iterations: 4,
                converged: true,
                update_norms: vec![UpdateNorms {
                    w: 1e-5,
                    rho: 1e-7,
                    rho_theta: 0.0,
                    exner: 0.0,
                }],
            },
        ];
        l.record_step(budget(0.0, 1.0, 1.0, 1.0, 1.0), &reports);
        assert_eq!(l.rows[0].newton_iters, 4);
        assert_eq!(l.rows[0].max_update.w, 1e-3);
        assert_eq!(l.rows[0].max_update.rho, 1e-7);
    }
}
