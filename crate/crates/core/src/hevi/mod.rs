//! TRAP(2,3,2) horizontally explicit, vertically implicit time stepping over a row of
//! columns.
//!
//! Each step runs an explicit horizontal predictor followed by two implicit vertical
//! solves from time level `n`, each forced by the average of two horizontal tendency
//! evaluations.

mod slice;

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

pub use slice::{
    biharmonic_stabiliser, biharmonic_viscosity, slice_horizontal_tendencies, SliceDynamics,
};

use crate::error::{Result, SolverError};
use crate::integrator::{newton_solve, ColumnForcing, ColumnState, ColumnStep, NewtonConfig};
use crate::mimetic::{FieldQ, FieldU, OperatorSet};
use crate::thermo::{diagnose_exner, GasConstants};

/// Columns on a periodic line sharing one vertical grid, with the horizontal velocity
/// staggered half a column to the right of each column (`u_par[c]` sits between columns
/// `c` and `c + 1`) at cell-centre heights.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceState {
    pub columns: Vec<ColumnState>,
    pub u_par: Vec<Vec<f64>>,
    pub dx: f64,
}

impl SliceState {
    /// A single column with no horizontal velocity.
    pub fn single_column(column: ColumnState) -> Self {
        let n = column.n_levels();
        Self {
            columns: vec![column],
            u_par: vec![vec![0.0; n]],
            dx: 1.0,
        }
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn validate(&self, ops: &OperatorSet) -> Result<()> {
        if self.columns.is_empty() || self.u_par.len() != self.columns.len() {
            return Err(SolverError::InvalidArgument(
                "slice needs one horizontal velocity profile per column".into(),
            ));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(SolverError::InvalidArgument(format!(
                "dx must be positive, got {}",
                self.dx
            )));
        }
        for (c, (col, u)) in self.columns.iter().zip(&self.u_par).enumerate() {
            col.validate(ops.grid()).map_err(|e| e.in_column(c))?;
            if u.len() != ops.n_levels() {
                return Err(SolverError::InvalidArgument(format!(
                    "horizontal velocity of column {c} has {} levels",
                    u.len()
                )));
            }
        }
        Ok(())
    }
}

/// Explicit horizontal tendencies of a slice; all zero in column mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalTendency {
    pub du_par: Vec<Vec<f64>>,
    pub d_rho: Vec<FieldQ>,
    pub d_rho_theta: Vec<FieldQ>,
    /// Horizontal coupling of the vertical momentum equation, as `U⊥` load vectors.
    pub w_coupling: Vec<FieldU>,
}

impl HorizontalTendency {
    pub fn zeros(n_columns: usize, n_levels: usize) -> Self {
        Self {
            du_par: vec![vec![0.0; n_levels]; n_columns],
            d_rho: vec![FieldQ::zeros(n_levels); n_columns],
            d_rho_theta: vec![FieldQ::zeros(n_levels); n_columns],
            w_coupling: vec![FieldU::zeros(n_levels.saturating_sub(1)); n_columns],
        }
    }

    /// `½(a + b)`.
    fn average(a: &Self, b: &Self) -> Self {
        let mean = |x: &[f64], y: &[f64]| {
            x.iter()
                .zip(y)
                .map(|(p, q)| 0.5 * (p + q))
                .collect::<Vec<_>>()
        };
        Self {
            du_par: a
                .du_par
                .iter()
                .zip(&b.du_par)
                .map(|(x, y)| mean(x, y))
                .collect(),
            d_rho: a
                .d_rho
                .iter()
                .zip(&b.d_rho)
                .map(|(x, y)| FieldQ(mean(x, y)))
                .collect(),
            d_rho_theta: a
                .d_rho_theta
                .iter()
                .zip(&b.d_rho_theta)
                .map(|(x, y)| FieldQ(mean(x, y)))
                .collect(),
            w_coupling: a
                .w_coupling
                .iter()
                .zip(&b.w_coupling)
                .map(|(x, y)| FieldU(mean(x, y)))
                .collect(),
        }
    }

    fn column_forcing(&self, c: usize, ops: &OperatorSet) -> ColumnForcing {
        ColumnForcing {
            w: self.w_coupling[c].clone(),
            rho: FieldQ(ops.apply_mass_q(&self.d_rho[c])),
            rho_theta: FieldQ(ops.apply_mass_q(&self.d_rho_theta[c])),
        }
    }
}

/// Source of the explicit horizontal tendencies.
pub trait TendencyProvider: Sync {
    fn tendencies(&self, state: &SliceState, ops: &OperatorSet) -> Result<HorizontalTendency>;
}

/// Vertical-only dynamics: every horizontal tendency vanishes.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroTendency;

impl TendencyProvider for ZeroTendency {
    fn tendencies(&self, state: &SliceState, ops: &OperatorSet) -> Result<HorizontalTendency> {
        Ok(HorizontalTendency::zeros(state.n_columns(), ops.n_levels()))
    }
}

/// Counts calls to an inner provider.
#[derive(Debug, Default)]
pub struct CountingProvider<P> {
    pub inner: P,
    calls: AtomicUsize,
}

impl<P> CountingProvider<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<P: TendencyProvider> TendencyProvider for CountingProvider<P> {
    fn tendencies(&self, state: &SliceState, ops: &OperatorSet) -> Result<HorizontalTendency> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.tendencies(state, ops)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeviConfig {
    pub newton: NewtonConfig,
    /// Relaxes `w` on the top three interior interfaces after every step.
    pub rayleigh: bool,
}

/// Per-step instrumentation.
#[derive(Debug, Clone)]
pub struct StepStats {
    pub tendency_evaluations: usize,
    pub implicit_solves: usize,
    /// Final implicit stage of every column.
    pub columns: Vec<ColumnStep>,
}

/// Implicit relaxation of the top three interior `w` dofs with rates `4/Δt, 2/Δt, 1/Δt`
/// from the top down.
pub fn rayleigh_damping(w: &FieldU, dt: f64) -> FieldU {
    let mut out = w.clone();
    let n = out.len();
    for (depth, rate) in [4.0, 2.0, 1.0].iter().enumerate().take(n) {
        let r = if dt > 0.0 { rate / dt } else { 0.0 };
        out[n - 1 - depth] /= 1.0 + dt * r;
    }
    out
}

fn add_scaled(x: &[f64], y: &[f64], a: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(p, q)| p + a * q).collect()
}

fn implicit_stage(
    state_n: &SliceState,
    forcing: &HorizontalTendency,
    ops: &OperatorSet,
    consts: &GasConstants,
    newton: &NewtonConfig,
) -> Result<Vec<ColumnStep>> {
    state_n
        .columns
        .par_iter()
        .enumerate()
        .map(|(c, col)| {
            let f = forcing.column_forcing(c, ops);
            newton_solve(col, ops, consts, newton, Some(&f)).map_err(|e| e.in_column(c))
        })
        .collect()
}

/// One TRAP(2,3,2) step:
///
/// 1. `a¹ = aⁿ + Δt H(aⁿ)` for the horizontal velocity, `ρ` and `Θ`;
/// 2. `a²`: implicit vertical solve from `aⁿ` forced by `½(H(aⁿ) + H(a¹))`;
/// 3. `aⁿ⁺¹`: implicit vertical solve from `aⁿ` forced by `½(H(aⁿ) + H(a²))`.
///
/// The horizontal velocity is advanced explicitly with the same averaged tendencies.
pub fn trap232_step(
    state: &SliceState,
    ops: &OperatorSet,
    consts: &GasConstants,
    config: &HeviConfig,
    provider: &dyn TendencyProvider,
) -> Result<(SliceState, StepStats)> {
    state.validate(ops)?;
    let dt = config.newton.dt;

    let h_n = provider.tendencies(state, ops)?;
    let mut stage1 = state.clone();
    for c in 0..state.n_columns() {
        let col = &mut stage1.columns[c];
        col.rho = FieldQ(add_scaled(&state.columns[c].rho, &h_n.d_rho[c], dt));
        col.rho_theta = FieldQ(add_scaled(
            &state.columns[c].rho_theta,
            &h_n.d_rho_theta[c],
            dt,
        ));
        col.check_physical().map_err(|e| e.in_column(c))?;
        col.exner = diagnose_exner(&col.rho_theta, consts).map_err(|e| e.in_column(c))?;
        stage1.u_par[c] = add_scaled(&state.u_par[c], &h_n.du_par[c], dt);
    }

    let h_1 = provider.tendencies(&stage1, ops)?;
    let avg_1 = HorizontalTendency::average(&h_n, &h_1);
    let solved_2 = implicit_stage(state, &avg_1, ops, consts, &config.newton)?;
    let stage2 = SliceState {
        columns: solved_2.into_iter().map(|s| s.state).collect(),
        u_par: (0..state.n_columns())
            .map(|c| add_scaled(&state.u_par[c], &avg_1.du_par[c], dt))
            .collect(),
        dx: state.dx,
    };

    let h_2 = provider.tendencies(&stage2, ops)?;
    let avg_2 = HorizontalTendency::average(&h_n, &h_2);
    let solved_3 = implicit_stage(state, &avg_2, ops, consts, &config.newton)?;
    let mut next = SliceState {
        columns: solved_3.iter().map(|s| s.state.clone()).collect(),
        u_par: (0..state.n_columns())
            .map(|c| add_scaled(&state.u_par[c], &avg_2.du_par[c], dt))
            .collect(),
        dx: state.dx,
    };
    if config.rayleigh {
        for col in &mut next.columns {
            col.w = rayleigh_damping(&col.w, dt);
        }
    }

    Ok((
        next,
        StepStats {
            tendency_evaluations: 3,
            implicit_solves: 2,
            columns: solved_3,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rayleigh_factors() {
        let w = FieldU(vec![1.0; 5]);
        let d = rayleigh_damping(&w, 2.0);
        assert_eq!(d.0, vec![1.0, 1.0, 0.5, 1.0 / 3.0, 0.2]);
    }

    #[test]
    fn rayleigh_short_column() {
        let d = rayleigh_damping(&FieldU(vec![10.0]), 1.0);
        assert_eq!(d.0, vec![2.0]);
    }

    #[test]
    fn average_of_equal_tendencies_is_identity() {
        let mut a = HorizontalTendency::zeros(2, 3);
        a.d_rho[1][2] = 4.0;
        a.w_coupling[0][1] = -1.5;
        let m = HorizontalTendency::average(&a, &a);
        assert_eq!(m, a);
    }
}
