//! Lowest-order compatible function spaces on a single vertical column.
//!
//! Three coefficient spaces live on a [`VerticalGrid`] with `n` cells:
//!
//! * `Q`: piecewise constants, one value per cell (`n` dofs). Density, `Θ = ρθ`, Exner
//!   pressure and the geopotential projections live here. The basis is the cell indicator,
//!   so coefficients are point values and the `Q` mass matrix is `diag(dz)`.
//! * `U⊥`: continuous piecewise-linear hats on the interior interfaces (`n - 1` dofs).
//!   The boundary interfaces carry the homogeneous Dirichlet condition on `w` and have no dof.
//! * the boundary-inclusive piecewise-linear space (`n + 1` dofs), used for the diagnostic
//!   potential temperature `θ`.
//!
//! With indicator `Q` bases the weak divergence pairing `⟨ε^Q_i, ∂_z ε^U_j⟩` is exactly the
//! topological incidence matrix, so [`build_incidence`] doubles as the divergence operator in
//! weak form and its transpose as the (negated) weak gradient.
//!
//! All element integrals are closed-form polynomial integrals of degree three or less.

mod band;

use std::ops::{Deref, DerefMut};

pub use band::{BandMatrix, TridiagonalLu};

use crate::error::{Result, SolverError};

macro_rules! coefficient_field {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn filled(len: usize, v: f64) -> Self {
                Self(vec![v; len])
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}

coefficient_field!(
    /// Cell-wise constant coefficients (`n` values).
    FieldQ
);
coefficient_field!(
    /// Interior-interface hat coefficients (`n - 1` values); boundary values are zero.
    FieldU
);
coefficient_field!(
    /// Hat coefficients on every interface, boundaries included (`n + 1` values).
    FieldTheta
);

impl FieldU {
    /// Value of the piecewise-linear function at interface `k` (`0..=n`), zero on the ends.
    pub fn at_interface(&self, k: usize) -> f64 {
        if k == 0 || k > self.len() {
            0.0
        } else {
            self[k - 1]
        }
    }
}

/// How cell thicknesses are distributed over the column.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Stretching {
    #[default]
    Uniform,
    /// Relative thickness of each cell; rescaled so the thicknesses sum to `z_top`.
    Weights(Vec<f64>),
}

/// One column of `n_levels` cells between `z = 0` and `z_top`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalGrid {
    z_interfaces: Vec<f64>,
    dz: Vec<f64>,
}

impl VerticalGrid {
    /// Builds a grid from strictly increasing interface heights.
    pub fn from_interfaces(z_interfaces: Vec<f64>) -> Result<Self> {
        if z_interfaces.len() < 2 {
            return Err(SolverError::InvalidArgument(
                "a column needs at least two interfaces".into(),
            ));
        }
        if z_interfaces.iter().any(|z| !z.is_finite()) {
            return Err(SolverError::InvalidArgument(
                "interface heights must be finite".into(),
            ));
        }
        let dz: Vec<f64> = z_interfaces.windows(2).map(|w| w[1] - w[0]).collect();
        if dz.iter().any(|&d| d <= 0.0) {
            return Err(SolverError::InvalidArgument(
                "interface heights must be strictly increasing".into(),
            ));
        }
        Ok(Self { z_interfaces, dz })
    }

    pub fn n_levels(&self) -> usize {
        self.dz.len()
    }

    /// Dof count of the Dirichlet-restricted velocity space.
    pub fn n_u(&self) -> usize {
        self.dz.len() - 1
    }

    pub fn z_interfaces(&self) -> &[f64] {
        &self.z_interfaces
    }

    pub fn dz(&self) -> &[f64] {
        &self.dz
    }

    pub fn z_top(&self) -> f64 {
        *self.z_interfaces.last().unwrap()
    }

    pub fn z_bottom(&self) -> f64 {
        self.z_interfaces[0]
    }

    /// Cell midpoints, which are also the `Q`-space L² projection of `z`.
    pub fn z_mid(&self) -> Vec<f64> {
        self.z_interfaces
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// Interior interface heights, the nodes of the `U⊥` hats.
    pub fn z_interior(&self) -> &[f64] {
        &self.z_interfaces[1..self.z_interfaces.len() - 1]
    }

    /// Interior dofs touching cell `i` as `[bottom, top]`.
    pub(crate) fn cell_dofs(&self, i: usize) -> [Option<usize>; 2] {
        let n = self.n_levels();
        [(i >= 1).then(|| i - 1), (i + 1 < n).then_some(i)]
    }
}

/// Builds a column with `n_levels` cells topped at `z_top`.
pub fn build_grid(n_levels: usize, z_top: f64, stretching: &Stretching) -> Result<VerticalGrid> {
    if n_levels == 0 {
        return Err(SolverError::InvalidArgument(
            "n_levels must be positive".into(),
        ));
    }
    if !(z_top > 0.0 && z_top.is_finite()) {
        return Err(SolverError::InvalidArgument(format!(
            "z_top must be positive, got {z_top}"
        )));
    }
    let weights = match stretching {
        Stretching::Uniform => vec![1.0; n_levels],
        Stretching::Weights(w) => {
            if w.len() != n_levels || w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(SolverError::InvalidArgument(
                    "stretching weights must be positive, one per level".into(),
                ));
            }
            w.clone()
        }
    };
    let total: f64 = weights.iter().sum();
    let mut z = Vec::with_capacity(n_levels + 1);
    z.push(0.0);
    let mut acc = 0.0;
    for w in &weights[..n_levels - 1] {
        acc += w;
        z.push(z_top * acc / total);
    }
    z.push(z_top);
    if matches!(stretching, Stretching::Uniform) {
        // Exact multiples keep dz bit-identical across cells.
        let h = z_top / n_levels as f64;
        for (k, zk) in z.iter_mut().enumerate().take(n_levels).skip(1) {
            *zk = k as f64 * h;
        }
        let grid = VerticalGrid::from_interfaces(z)?;
        return Ok(VerticalGrid {
            dz: vec![h; n_levels],
            ..grid
        });
    }
    VerticalGrid::from_interfaces(z)
}

/// Topological divergence incidence (`n × (n-1)`): cell `i` gets `+1` at its top interior
/// interface and `-1` at its bottom one.
pub fn build_incidence(grid: &VerticalGrid) -> BandMatrix {
    let n = grid.n_levels();
    let mut e = BandMatrix::zeros(n, grid.n_u(), -1, 2);
    for i in 0..n {
        let [bot, top] = grid.cell_dofs(i);
        if let Some(j) = bot {
            e.set(i, j, -1.0);
        }
        if let Some(j) = top {
            e.set(i, j, 1.0);
        }
    }
    e
}

/// Diagonal of the `Q` mass matrix.
pub fn assemble_mass_q(grid: &VerticalGrid) -> Vec<f64> {
    grid.dz.clone()
}

/// Accumulates `∫_cell w(z) b_a b_c` over the interior hats, for a per-cell weight that
/// is linear with end values `(w_bot, w_top)`.
fn assemble_hat_mass(grid: &VerticalGrid, weight: impl Fn(usize) -> (f64, f64)) -> BandMatrix {
    let mut m = BandMatrix::tridiagonal(grid.n_u());
    for (i, &h) in grid.dz.iter().enumerate() {
        let (wb, wt) = weight(i);
        let local = [
            [h * (wb / 4.0 + wt / 12.0), h * (wb + wt) / 12.0],
            [h * (wb + wt) / 12.0, h * (wb / 12.0 + wt / 4.0)],
        ];
        let dofs = grid.cell_dofs(i);
        for (a, da) in dofs.iter().enumerate() {
            for (c, dc) in dofs.iter().enumerate() {
                if let (Some(r), Some(col)) = (da, dc) {
                    m.add(*r, *col, local[a][c]);
                }
            }
        }
    }
    m
}

/// `U⊥` mass matrix; tridiagonal with `2dz/3` on the diagonal and `dz/6` off it for
/// uniform cells.
pub fn assemble_mass_u(grid: &VerticalGrid) -> BandMatrix {
    assemble_hat_mass(grid, |_| (1.0, 1.0))
}

fn check_len(len: usize, expected: usize, what: &str) -> Result<()> {
    if len != expected {
        return Err(SolverError::InvalidArgument(format!(
            "{what} has {len} coefficients, grid expects {expected}"
        )));
    }
    Ok(())
}

/// Density-weighted `U⊥` mass `⟨ρ ε^U_i, ε^U_j⟩`.
pub fn assemble_weighted_n(grid: &VerticalGrid, rho: &FieldQ) -> Result<BandMatrix> {
    check_len(rho.len(), grid.n_levels(), "density")?;
    Ok(assemble_hat_mass(grid, |i| (rho[i], rho[i])))
}

/// Density-weighted mass on the boundary-inclusive linear space (`(n+1) × (n+1)`).
pub fn assemble_weighted_n_full(grid: &VerticalGrid, rho: &FieldQ) -> Result<BandMatrix> {
    check_len(rho.len(), grid.n_levels(), "density")?;
    let n = grid.n_levels();
    let mut m = BandMatrix::tridiagonal(n + 1);
    for (i, &h) in grid.dz.iter().enumerate() {
        let r = rho[i] * h;
        m.add(i, i, r / 3.0);
        m.add(i + 1, i + 1, r / 3.0);
        m.add(i, i + 1, r / 6.0);
        m.add(i + 1, i, r / 6.0);
    }
    Ok(m)
}

/// Potential-temperature-weighted `U⊥` mass `⟨θ ε^U_i, ε^U_j⟩` with `θ` piecewise linear.
pub fn assemble_weighted_s(grid: &VerticalGrid, theta: &FieldTheta) -> Result<BandMatrix> {
    check_len(theta.len(), grid.n_levels() + 1, "potential temperature")?;
    Ok(assemble_hat_mass(grid, |i| (theta[i], theta[i + 1])))
}

/// `T(w)`, the `n × (n-1)` matrix with entries `∫_cell i ½ w ε^U_j`; `T(w) w` is the
/// cell-integrated specific kinetic energy.
pub fn assemble_weighted_t(grid: &VerticalGrid, w: &FieldU) -> Result<BandMatrix> {
    check_len(w.len(), grid.n_u(), "velocity")?;
    let n = grid.n_levels();
    let mut t = BandMatrix::zeros(n, grid.n_u(), -1, 2);
    for (i, &h) in grid.dz.iter().enumerate() {
        let wb = w.at_interface(i);
        let wt = w.at_interface(i + 1);
        let [bot, top] = grid.cell_dofs(i);
        if let Some(j) = bot {
            t.set(i, j, 0.5 * h * (wb / 3.0 + wt / 6.0));
        }
        if let Some(j) = top {
            t.set(i, j, 0.5 * h * (wb / 6.0 + wt / 3.0));
        }
    }
    Ok(t)
}

/// `L`, the `(n+1) × n` pairing of the boundary-inclusive hats with the cell indicators.
pub fn assemble_l_uq(grid: &VerticalGrid) -> BandMatrix {
    let n = grid.n_levels();
    let mut l = BandMatrix::zeros(n + 1, n, -1, 2);
    for (i, &h) in grid.dz.iter().enumerate() {
        l.set(i, i, 0.5 * h);
        l.set(i + 1, i, 0.5 * h);
    }
    l
}

/// Grid-only operators of one column, with the `U⊥` mass matrix pre-factorised.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    grid: VerticalGrid,
    mass_q: Vec<f64>,
    mass_u: BandMatrix,
    mass_u_lu: TridiagonalLu,
    incidence: BandMatrix,
    l_uq: BandMatrix,
    z_mid: Vec<f64>,
}

impl OperatorSet {
    pub fn new(grid: VerticalGrid) -> Result<Self> {
        let mass_u = assemble_mass_u(&grid);
        let mass_u_lu = mass_u.factor_tridiagonal()?;
        Ok(Self {
            mass_q: assemble_mass_q(&grid),
            incidence: build_incidence(&grid),
            l_uq: assemble_l_uq(&grid),
            z_mid: grid.z_mid(),
            mass_u,
            mass_u_lu,
            grid,
        })
    }

    pub fn grid(&self) -> &VerticalGrid {
        &self.grid
    }

    pub fn n_levels(&self) -> usize {
        self.grid.n_levels()
    }

    pub fn n_u(&self) -> usize {
        self.grid.n_u()
    }

    pub fn mass_q(&self) -> &[f64] {
        &self.mass_q
    }

    pub fn mass_u(&self) -> &BandMatrix {
        &self.mass_u
    }

    pub fn mass_u_lu(&self) -> &TridiagonalLu {
        &self.mass_u_lu
    }

    pub fn incidence(&self) -> &BandMatrix {
        &self.incidence
    }

    pub fn l_uq(&self) -> &BandMatrix {
        &self.l_uq
    }

    pub fn z_mid(&self) -> &[f64] {
        &self.z_mid
    }

    /// `MQ x`, elementwise since `MQ` is diagonal.
    pub fn apply_mass_q(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mass_q).map(|(a, m)| a * m).collect()
    }

    pub fn solve_mass_q(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mass_q).map(|(a, m)| a / m).collect()
    }

    pub fn solve_mass_u(&self, x: &[f64]) -> Vec<f64> {
        self.mass_u_lu.solve(x)
    }

    /// Weak divergence of a `U⊥` field as a `Q` load vector.
    pub fn divergence(&self, x: &[f64]) -> Vec<f64> {
        self.incidence.mul_vec(x)
    }

    /// `Eᵀ q`: minus the weak vertical derivative of a `Q` field, as a `U⊥` load vector.
    pub fn divergence_adjoint(&self, q: &[f64]) -> Vec<f64> {
        self.incidence.tr_mul_vec(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, z_top: f64) -> VerticalGrid {
        build_grid(n, z_top, &Stretching::Uniform).unwrap()
    }

    #[test]
    fn uniform_grid_thicknesses() {
        assert_eq!(uniform(3, 300.0).dz(), &[100.0, 100.0, 100.0]);
        let g = uniform(150, 1500.0);
        assert!(g.dz().iter().all(|&d| d == 10.0));
        assert_eq!(g.z_top(), 1500.0);
    }

    #[test]
    fn single_cell_has_no_velocity_dofs() {
        let g = uniform(1, 50.0);
        assert_eq!(g.n_u(), 0);
        let e = build_incidence(&g);
        assert_eq!(e.shape(), (1, 0));
        assert_eq!(assemble_mass_u(&g).shape(), (0, 0));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_grid(0, 10.0, &Stretching::Uniform).is_err());
        assert!(build_grid(3, 0.0, &Stretching::Uniform).is_err());
        assert!(build_grid(3, -1.0, &Stretching::Uniform).is_err());
        assert!(build_grid(2, 1.0, &Stretching::Weights(vec![1.0])).is_err());
        assert!(VerticalGrid::from_interfaces(vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn stretched_grid_sums_to_top() {
        let g = build_grid(3, 60.0, &Stretching::Weights(vec![1.0, 2.0, 3.0])).unwrap();
        assert!((g.dz()[0] - 10.0).abs() < 1e-12);
        assert!((g.dz()[2] - 30.0).abs() < 1e-12);
        assert_eq!(g.z_top(), 60.0);
    }

    #[test]
    fn three_cell_incidence() {
        let e = build_incidence(&uniform(3, 3.0)).to_dense();
        let expect = nalgebra::DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -1.0, 1.0, 0.0, -1.0]);
        assert_eq!(e, expect);
    }

    #[test]
    fn q_mass_is_cell_measure() {
        let g = VerticalGrid::from_interfaces(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        assert_eq!(assemble_mass_q(&g), vec![1.0, 2.0, 3.0]);
        let ones_form: f64 = assemble_mass_q(&g).iter().sum();
        assert_eq!(ones_form, g.z_top());
    }

    #[test]
    fn u_mass_unit_cells() {
        let m = assemble_mass_u(&uniform(3, 3.0)).to_dense();
        let expect =
            nalgebra::DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]);
        assert!((m - expect).abs().max() < 1e-15);
    }

    #[test]
    fn u_mass_two_uneven_cells() {
        let g = VerticalGrid::from_interfaces(vec![0.0, 0.7, 2.0]).unwrap();
        let m = assemble_mass_u(&g);
        assert!((m.get(0, 0) - (0.7 + 1.3) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn density_weighted_two_cells() {
        let g = uniform(2, 2.0);
        let n = assemble_weighted_n(&g, &FieldQ(vec![2.0, 4.0])).unwrap();
        assert!((n.get(0, 0) - 2.0).abs() < 1e-15);
        let unit = assemble_weighted_n(&g, &FieldQ(vec![1.0, 1.0])).unwrap();
        assert_eq!(unit, assemble_mass_u(&g));
    }

    #[test]
    fn constant_theta_scales_mass() {
        let g = uniform(4, 4.0);
        let s = assemble_weighted_s(&g, &FieldTheta::filled(5, 3.0)).unwrap();
        let m = assemble_mass_u(&g).scale(3.0);
        assert!((s.to_dense() - m.to_dense()).abs().max() < 1e-14);
    }

    #[test]
    fn l_uq_two_unit_cells() {
        let l = assemble_l_uq(&uniform(2, 2.0)).to_dense();
        let expect = nalgebra::DMatrix::from_row_slice(3, 2, &[0.5, 0.0, 0.5, 0.5, 0.0, 0.5]);
        assert_eq!(l, expect);
    }

    #[test]
    fn zero_velocity_gives_zero_t() {
        let g = uniform(4, 4.0);
        let t = assemble_weighted_t(&g, &FieldU::zeros(3)).unwrap();
        assert_eq!(t.to_dense().abs().max(), 0.0);
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let g = uniform(4, 4.0);
        assert!(assemble_weighted_n(&g, &FieldQ::zeros(3)).is_err());
        assert!(assemble_weighted_s(&g, &FieldTheta::zeros(4)).is_err());
        assert!(assemble_weighted_t(&g, &FieldU::zeros(4)).is_err());
    }
}
