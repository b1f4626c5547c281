//! Second-order centred horizontal discretisation on a uniform periodic line of columns.

use crate::error::Result;
use crate::mimetic::{FieldQ, FieldU, OperatorSet};

use super::{HorizontalTendency, SliceState, TendencyProvider};

/// `0.072 Δx^{3.2}` scaled by `factor`.
pub fn biharmonic_viscosity(dx: f64, factor: f64) -> f64 {
    factor * 0.072 * dx.powf(3.2)
}

/// `-ν ∂⁴f/∂x⁴` on a periodic line with the five-point stencil.
pub fn biharmonic_stabiliser(field: &[f64], dx: f64, nu: f64) -> Vec<f64> {
    let n = field.len() as isize;
    let at = |i: isize| field[i.rem_euclid(n) as usize];
    let dx4 = dx.powi(4);
    (0..n)
        .map(|i| {
            let d4 = at(i - 2) - 4.0 * at(i - 1) + 6.0 * at(i) - 4.0 * at(i + 1) + at(i + 2);
            -nu * d4 / dx4
        })
        .collect()
}

/// Explicit horizontal dynamics of a periodic slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceDynamics {
    /// Multiplier on the biharmonic coefficient; zero disables the stabilisation.
    pub viscosity_factor: f64,
}

impl Default for SliceDynamics {
    fn default() -> Self {
        Self {
            viscosity_factor: 1.0,
        }
    }
}

impl TendencyProvider for SliceDynamics {
    fn tendencies(&self, state: &SliceState, ops: &OperatorSet) -> Result<HorizontalTendency> {
        let mut h = slice_horizontal_tendencies(state, ops);
        if self.viscosity_factor != 0.0 {
            let nu = biharmonic_viscosity(state.dx, self.viscosity_factor);
            let n_cols = state.n_columns();
            for k in 0..ops.n_levels() {
                let u: Vec<f64> = (0..n_cols).map(|c| state.u_par[c][k]).collect();
                let t: Vec<f64> = (0..n_cols).map(|c| state.columns[c].rho_theta[k]).collect();
                let du = biharmonic_stabiliser(&u, state.dx, nu);
                let dt = biharmonic_stabiliser(&t, state.dx, nu);
                for c in 0..n_cols {
                    h.du_par[c][k] += du[c];
                    h.d_rho_theta[c][k] += dt[c];
                }
            }
        }
        Ok(h)
    }
}

/// Centred flux-form transport of `ρ` and `Θ` by the horizontal velocity, the horizontal
/// momentum tendency `-θ ∂xΠ - ∂x(½u²) - w ∂z u`, and the horizontal advection of `w`,
/// `-u ∂x w`, as a `U⊥` load for the vertical momentum residual.
pub fn slice_horizontal_tendencies(state: &SliceState, ops: &OperatorSet) -> HorizontalTendency {
    let n_cols = state.n_columns();
    let n = ops.n_levels();
    let dx = state.dx;
    let next = |c: usize| (c + 1) % n_cols;
    let prev = |c: usize| (c + n_cols - 1) % n_cols;
    let mut out = HorizontalTendency::zeros(n_cols, n);

    let theta: Vec<Vec<f64>> = state
        .columns
        .iter()
        .map(|col| {
            col.rho_theta
                .iter()
                .zip(col.rho.iter())
                .map(|(t, r)| t / r)
                .collect()
        })
        .collect();

    // Face fluxes between column c and c + 1.
    let mut mass_flux = vec![vec![0.0; n]; n_cols];
    let mut heat_flux = vec![vec![0.0; n]; n_cols];
    for c in 0..n_cols {
        let (a, b) = (&state.columns[c], &state.columns[next(c)]);
        for k in 0..n {
            let f = 0.5 * (a.rho[k] + b.rho[k]) * state.u_par[c][k];
            mass_flux[c][k] = f;
            heat_flux[c][k] = 0.5 * (theta[c][k] + theta[next(c)][k]) * f;
        }
    }
    for c in 0..n_cols {
        for k in 0..n {
            out.d_rho[c][k] = -(mass_flux[c][k] - mass_flux[prev(c)][k]) / dx;
            out.d_rho_theta[c][k] = -(heat_flux[c][k] - heat_flux[prev(c)][k]) / dx;
        }
    }

    let z = ops.z_mid();
    let kinetic: Vec<Vec<f64>> = (0..n_cols)
        .map(|c| {
            (0..n)
                .map(|k| 0.25 * (state.u_par[prev(c)][k].powi(2) + state.u_par[c][k].powi(2)))
                .collect()
        })
        .collect();
    for c in 0..n_cols {
        let (a, b) = (&state.columns[c], &state.columns[next(c)]);
        let u = &state.u_par[c];
        for k in 0..n {
            let theta_face = 0.5 * (theta[c][k] + theta[next(c)][k]);
            let pressure = theta_face * (b.exner[k] - a.exner[k]) / dx;
            let bernoulli = (kinetic[next(c)][k] - kinetic[c][k]) / dx;
            let w_face = 0.25
                * (a.w.at_interface(k)
                    + a.w.at_interface(k + 1)
                    + b.w.at_interface(k)
                    + b.w.at_interface(k + 1));
            let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
            let du_dz = if hi > lo {
                (u[hi] - u[lo]) / (z[hi] - z[lo])
            } else {
                0.0
            };
            out.du_par[c][k] = -pressure - bernoulli - w_face * du_dz;
        }
    }

    for c in 0..n_cols {
        let (left, right) = (&state.columns[prev(c)].w, &state.columns[next(c)].w);
        let tendency: Vec<f64> = (0..ops.n_u())
            .map(|j| {
                let u_bar = 0.25
                    * (state.u_par[prev(c)][j]
                        + state.u_par[c][j]
                        + state.u_par[prev(c)][j + 1]
                        + state.u_par[c][j + 1]);
                -u_bar * (right[j] - left[j]) / (2.0 * dx)
            })
            .collect();
        out.w_coupling[c] = FieldU(ops.mass_u().mul_vec(&tendency));
    }
    debug_assert!(out.d_rho.iter().all(|f: &FieldQ| f.len() == n));
    out
}
