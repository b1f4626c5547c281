//! Dry-air thermodynamics, energy functionals and their time-averaged variational
//! derivatives.

use crate::error::{Result, SolverError};
use crate::integrator::ColumnState;
use crate::mimetic::{
    assemble_weighted_n, assemble_weighted_n_full, assemble_weighted_t, BandMatrix, FieldQ,
    FieldTheta, FieldU, OperatorSet, VerticalGrid,
};

/// Gas and planetary constants. `R = c_p - c_v` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants {
    r: f64,
    cp: f64,
    cv: f64,
    p0: f64,
    g: f64,
}

impl Default for GasConstants {
    fn default() -> Self {
        Self {
            r: 287.0,
            cp: 1004.5,
            cv: 717.5,
            p0: 1.0e5,
            g: 9.80616,
        }
    }
}

impl GasConstants {
    pub fn new(cp: f64, cv: f64, p0: f64, g: f64) -> Result<Self> {
        let all_positive = [cp, cv, p0, g].iter().all(|v| *v > 0.0 && v.is_finite());
        if !all_positive || cp <= cv {
            return Err(SolverError::InvalidArgument(format!(
                "gas constants must be positive with cp > cv (cp {cp}, cv {cv}, p0 {p0}, g {g})"
            )));
        }
        Ok(Self {
            r: cp - cv,
            cp,
            cv,
            p0,
            g,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn cp(&self) -> f64 {
        self.cp
    }

    pub fn cv(&self) -> f64 {
        self.cv
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `R / c_v`, the exponent of the equation of state in `Θ`.
    pub fn kappa_v(&self) -> f64 {
        self.r / self.cv
    }

    /// `Π(Θ) = c_p (RΘ/p0)^{R/c_v}` for one value.
    pub fn exner_of(&self, rho_theta: f64) -> f64 {
        self.cp * (self.r * rho_theta / self.p0).powf(self.kappa_v())
    }

    /// Inverse of [`exner_of`](Self::exner_of).
    pub fn rho_theta_of(&self, exner: f64) -> f64 {
        self.p0 / self.r * (exner / self.cp).powf(self.cv / self.r)
    }

    /// Internal energy density `c_v (R/p0)^{R/c_v} Θ^{c_p/c_v}`.
    pub fn internal_energy_density(&self, rho_theta: f64) -> f64 {
        self.cv * (self.r / self.p0).powf(self.kappa_v()) * rho_theta.powf(self.cp / self.cv)
    }
}

/// Energies and power exchanges of one recorded step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBudget {
    pub step: usize,
    pub time: f64,
    /// Column mass per unit area [kg m⁻²].
    pub mass: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub internal: f64,
    /// Always `kinetic + potential + internal`.
    pub total: f64,
    pub dk_dt: f64,
    pub dp_dt: f64,
    pub di_dt: f64,
}

impl EnergyBudget {
    /// Energies of `state`, with zero power exchanges.
    pub fn of_state(state: &ColumnState, ops: &OperatorSet, consts: &GasConstants) -> Self {
        let grid = ops.grid();
        let kinetic = energy_kinetic(&state.w, &state.rho, grid);
        let potential = energy_potential(&state.rho, grid, consts);
        let internal = energy_internal(&state.rho_theta, grid, consts);
        Self {
            mass: column_mass(&state.rho, grid),
            kinetic,
            potential,
            internal,
            total: kinetic + potential + internal,
            ..Self::default()
        }
    }

    pub fn with_powers(mut self, p: PowerExchanges) -> Self {
        self.dk_dt = p.dk_dt;
        self.dp_dt = p.dp_dt;
        self.di_dt = p.di_dt;
        self
    }

    /// Sums column budgets in the order given.
    pub fn accumulate(&mut self, other: &EnergyBudget) {
        self.mass += other.mass;
        self.kinetic += other.kinetic;
        self.potential += other.potential;
        self.internal += other.internal;
        self.total = self.kinetic + self.potential + self.internal;
        self.dk_dt += other.dk_dt;
        self.dp_dt += other.dp_dt;
        self.di_dt += other.di_dt;
    }
}

/// Pointwise Exner pressure from `Θ`. The `Q` mass matrix is diagonal, so the discrete
/// projection of the equation of state is exact cell by cell.
pub fn diagnose_exner(rho_theta: &FieldQ, consts: &GasConstants) -> Result<FieldQ> {
    rho_theta
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if t > 0.0 && t.is_finite() {
                Ok(consts.exner_of(t))
            } else {
                Err(SolverError::nonphysical(
                    "density-weighted potential temperature must be positive",
                    i,
                ))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(FieldQ)
}

/// Potential temperature on all interfaces: the density-weighted projection of `Θ/ρ`
/// into the boundary-inclusive linear space, `N_full(ρ) θ = L Θ`.
pub fn diagnose_theta(rho_theta: &FieldQ, rho: &FieldQ, ops: &OperatorSet) -> Result<FieldTheta> {
    if let Some(i) = rho.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(SolverError::nonphysical("density must be positive", i));
    }
    let n_full = assemble_weighted_n_full(ops.grid(), rho)?;
    let rhs = ops.l_uq().mul_vec(rho_theta);
    let lu = n_full
        .factor_tridiagonal()
        .map_err(|_| SolverError::nonphysical("singular density-weighted mass", 0))?;
    Ok(FieldTheta(lu.solve(&rhs)))
}

/// `½ wᵀ N(ρ) w`.
pub fn energy_kinetic(w: &FieldU, rho: &FieldQ, grid: &VerticalGrid) -> f64 {
    // Cell by cell: ρ_i ∫ ½ w² over the cell.
    grid.dz()
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let (a, b) = (w.at_interface(i), w.at_interface(i + 1));
            rho[i] * 0.5 * h * (a * a + a * b + b * b) / 3.0
        })
        .sum()
}

/// `g Σ ρ_i z̄_i dz_i` with `z̄` the cell midpoints.
pub fn energy_potential(rho: &FieldQ, grid: &VerticalGrid, consts: &GasConstants) -> f64 {
    let z = grid.z_mid();
    consts.g()
        * rho
            .iter()
            .zip(&z)
            .zip(grid.dz())
            .map(|((r, z), h)| r * z * h)
            .sum::<f64>()
}

pub fn energy_internal(rho_theta: &FieldQ, grid: &VerticalGrid, consts: &GasConstants) -> f64 {
    rho_theta
        .iter()
        .zip(grid.dz())
        .map(|(&t, h)| consts.internal_energy_density(t) * h)
        .sum()
}

/// `H(to) - H(from)` without cancellation against the size of `H`: the potential part uses
/// `Δρ` directly and the internal part `Θ^γ` differences via `expm1`/`ln_1p`.
pub fn energy_change(
    from: &ColumnState,
    to: &ColumnState,
    grid: &VerticalGrid,
    consts: &GasConstants,
) -> f64 {
    let dk = energy_kinetic(&to.w, &to.rho, grid) - energy_kinetic(&from.w, &from.rho, grid);
    let gamma = consts.cp() / consts.cv();
    let z = grid.z_mid();
    let (mut dp, mut di) = (0.0, 0.0);
    for (i, &h) in grid.dz().iter().enumerate() {
        dp += consts.g() * (to.rho[i] - from.rho[i]) * z[i] * h;
        let (a, b) = (from.rho_theta[i], to.rho_theta[i]);
        let ratio = (gamma * ((b - a) / a).ln_1p()).exp_m1();
        di += consts.internal_energy_density(a) * ratio * h;
    }
    dk + dp + di
}

pub fn column_mass(rho: &FieldQ, grid: &VerticalGrid) -> f64 {
    rho.iter().zip(grid.dz()).map(|(r, h)| r * h).sum()
}

/// How the variational derivatives are averaged between time level `n` and iterate `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeAveraging {
    /// Exact integrals along the linear path in time (energy-conserving).
    #[default]
    Exact,
    /// Plain endpoint average without the `n`–`k` cross terms (Crank–Nicolson).
    Midpoint,
}

/// Time-averaged variational derivatives `(Ū, Φ̄, Π̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalAverages {
    /// Mass flux on `U⊥`.
    pub mass_flux: FieldU,
    /// Bernoulli potential `½w² + gz` on `Q`.
    pub bernoulli: FieldQ,
    /// Exner pressure on `Q`.
    pub exner: FieldQ,
}

/// Exact time integrals of the variational derivatives along
/// `x(s) = (1-s) x^n + s x^k`, `s ∈ [0, 1]`:
///
/// * `MU Ū = ⅓N(ρⁿ)wⁿ + ⅙N(ρⁿ)wᵏ + ⅙N(ρᵏ)wⁿ + ⅓N(ρᵏ)wᵏ`
/// * `MQ Φ̄ = ⅓T(wⁿ)wⁿ + ⅓T(wᵏ)wⁿ + ⅓T(wᵏ)wᵏ + g MQ z`
/// * `Π̄ = ½(Πⁿ + Πᵏ)`
pub fn averaged_variational_derivatives(
    state_n: &ColumnState,
    state_k: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
) -> Result<VariationalAverages> {
    variational_averages(state_n, state_k, ops, consts, TimeAveraging::Exact, true)
}

/// Crank–Nicolson counterpart of [`averaged_variational_derivatives`].
pub fn midpoint_variational_derivatives(
    state_n: &ColumnState,
    state_k: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
) -> Result<VariationalAverages> {
    variational_averages(state_n, state_k, ops, consts, TimeAveraging::Midpoint, true)
}

/// Shared implementation; `kinetic = false` drops the `½w²` part of `Φ̄`.
pub(crate) fn variational_averages(
    state_n: &ColumnState,
    state_k: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    averaging: TimeAveraging,
    kinetic: bool,
) -> Result<VariationalAverages> {
    let grid = ops.grid();
    let n_rho_n = assemble_weighted_n(grid, &state_n.rho)?;
    let n_rho_k = assemble_weighted_n(grid, &state_k.rho)?;
    let (same, cross) = match averaging {
        TimeAveraging::Exact => (1.0 / 3.0, 1.0 / 6.0),
        TimeAveraging::Midpoint => (0.5, 0.0),
    };
    let nn_wn = n_rho_n.mul_vec(&state_n.w);
    let nk_wk = n_rho_k.mul_vec(&state_k.w);
    let mut flux_load: Vec<f64> = nn_wn
        .iter()
        .zip(&nk_wk)
        .map(|(a, b)| same * (a + b))
        .collect();
    if cross != 0.0 {
        let nn_wk = n_rho_n.mul_vec(&state_k.w);
        let nk_wn = n_rho_k.mul_vec(&state_n.w);
        for ((f, a), b) in flux_load.iter_mut().zip(&nn_wk).zip(&nk_wn) {
            *f += cross * (a + b);
        }
    }
    let mass_flux = FieldU(ops.solve_mass_u(&flux_load));

    let g = consts.g();
    let mut bernoulli: Vec<f64> = ops.z_mid().iter().map(|z| g * z).collect();
    if kinetic {
        let t_n = assemble_weighted_t(grid, &state_n.w)?;
        let t_k = assemble_weighted_t(grid, &state_k.w)?;
        let tn_wn = t_n.mul_vec(&state_n.w);
        let tk_wk = t_k.mul_vec(&state_k.w);
        let load: Vec<f64> = match averaging {
            TimeAveraging::Exact => {
                let tk_wn = t_k.mul_vec(&state_n.w);
                (0..tn_wn.len())
                    .map(|i| (tn_wn[i] + tk_wn[i] + tk_wk[i]) / 3.0)
                    .collect()
            }
            TimeAveraging::Midpoint => (0..tn_wn.len())
                .map(|i| 0.5 * (tn_wn[i] + tk_wk[i]))
                .collect(),
        };
        for ((b, l), m) in bernoulli.iter_mut().zip(&load).zip(ops.mass_q()) {
            *b += l / m;
        }
    }

    let exner = state_n
        .exner
        .iter()
        .zip(state_k.exner.iter())
        .map(|(a, b)| 0.5 * (a + b))
        .collect::<Vec<_>>();

    Ok(VariationalAverages {
        mass_flux,
        bernoulli: FieldQ(bernoulli),
        exner: FieldQ(exner),
    })
}

/// Rates of change of kinetic, potential and internal energy implied by the averaged
/// variational derivatives and the time-centred `Ŝ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerExchanges {
    pub dk_dt: f64,
    pub dp_dt: f64,
    pub di_dt: f64,
}

impl PowerExchanges {
    pub fn sum(&self) -> f64 {
        self.dk_dt + self.dp_dt + self.di_dt
    }
}

/// * `dK/dt = g Ūᵀ Eᵀ z + Ūᵀ Ŝ MU⁻¹ Eᵀ Π̄`
/// * `dP/dt = -g zᵀ E Ū`
/// * `dI/dt = -Π̄ᵀ E MU⁻¹ Ŝ Ū`
///
/// The terms cancel pairwise by transposition for any inputs.
pub fn power_exchanges(
    avg: &VariationalAverages,
    s_hat: &BandMatrix,
    ops: &OperatorSet,
    consts: &GasConstants,
) -> PowerExchanges {
    let g = consts.g();
    let z = ops.z_mid();
    let u = &avg.mass_flux;
    let div_u = ops.divergence(u);
    // Ŝ Ū, then MU⁻¹ Ŝ Ū: the potential temperature flux.
    let theta_flux = ops.solve_mass_u(&s_hat.mul_vec(u));
    let div_f = ops.divergence(&theta_flux);

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let kin_grav = g * dot(&div_u, z);
    let kin_press = dot(&div_f, &avg.exner);
    PowerExchanges {
        dk_dt: kin_grav + kin_press,
        dp_dt: -g * dot(z, &div_u),
        di_dt: -dot(&avg.exner, &div_f),
    }
}
