//! Independent quadrature and dense-algebra oracles shared by the integration tests.
#![allow(dead_code)]

use balanced_column::mimetic::{build_grid, Stretching};
use balanced_column::{ColumnState, FieldQ, FieldU, GasConstants, OperatorSet, VerticalGrid};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three-point Gauss–Legendre rule on `[0, 1]`: exact for polynomials of degree five.
pub fn gauss3() -> [(f64, f64); 3] {
    let a = 0.5 * (0.6f64).sqrt();
    [
        (0.5 - a, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + a, 5.0 / 18.0),
    ]
}

/// Five-point Gauss–Legendre rule on `[0, 1]`: exact for polynomials of degree nine.
pub fn gauss5() -> [(f64, f64); 5] {
    let s = (10.0f64 / 7.0).sqrt();
    let x1 = (5.0 - 2.0 * s).sqrt() / 3.0;
    let x2 = (5.0 + 2.0 * s).sqrt() / 3.0;
    let w0 = 128.0 / 225.0;
    let w1 = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
    let w2 = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
    [(-x2, w2), (-x1, w1), (0.0, w0), (x1, w1), (x2, w2)].map(|(x, w)| (0.5 * (1.0 + x), 0.5 * w))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_ops(n: usize, z_top: f64) -> OperatorSet {
    OperatorSet::new(build_grid(n, z_top, &Stretching::Uniform).unwrap()).unwrap()
}

/// A randomly stretched grid of `n` cells.
pub fn random_ops(rng: &mut ChaCha8Rng, n: usize) -> OperatorSet {
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let z_top = rng.random_range(200.0..2000.0);
    OperatorSet::new(build_grid(n, z_top, &Stretching::Weights(weights)).unwrap()).unwrap()
}

/// Scalar equation of state, written out independently of the library.
pub fn exner_scalar(rho_theta: f64, c: &GasConstants) -> f64 {
    let r = c.cp() - c.cv();
    c.cp() * (r * rho_theta / c.p0()).powf(r / c.cv())
}

/// A physically valid random column with Exner pressure in balance with `Θ`.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, c: &GasConstants) -> ColumnState {
    let rho: Vec<f64> = (0..n).map(|_| rng.random_range(0.8..1.3)).collect();
    let rho_theta: Vec<f64> = rho
        .iter()
        .map(|r| r * rng.random_range(280.0..320.0))
        .collect();
    let exner = rho_theta.iter().map(|&t| exner_scalar(t, c)).collect();
    ColumnState {
        w: FieldU((1..n).map(|_| rng.random_range(-5.0..5.0)).collect()),
        rho: FieldQ(rho),
        rho_theta: FieldQ(rho_theta),
        exner: FieldQ(exner),
    }
}

/// `base` with every field nudged by a relative amount of order `scale`.
pub fn nearby_state(
    rng: &mut ChaCha8Rng,
    base: &ColumnState,
    scale: f64,
    c: &GasConstants,
) -> ColumnState {
    let mut jitter = |v: f64| v * (1.0 + scale * rng.random_range(-1.0..1.0));
    let rho: Vec<f64> = base.rho.iter().map(|&v| jitter(v)).collect();
    let rho_theta: Vec<f64> = base.rho_theta.iter().map(|&v| jitter(v)).collect();
    let w: Vec<f64> = base
        .w
        .iter()
        .map(|&v| v + 10.0 * scale * rng.random_range(-1.0..1.0))
        .collect();
    let exner = rho_theta.iter().map(|&t| exner_scalar(t, c)).collect();
    ColumnState {
        w: FieldU(w),
        rho: FieldQ(rho),
        rho_theta: FieldQ(rho_theta),
        exner: FieldQ(exner),
    }
}

/// The linear path `(1 - s) a + s b` in every coefficient.
pub fn lerp_state(a: &ColumnState, b: &ColumnState, s: f64) -> ColumnState {
    let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(y)
            .map(|(p, q)| (1.0 - s) * p + s * q)
            .collect()
    };
    ColumnState {
        w: FieldU(mix(&a.w, &b.w)),
        rho: FieldQ(mix(&a.rho, &b.rho)),
        rho_theta: FieldQ(mix(&a.rho_theta, &b.rho_theta)),
        exner: FieldQ(mix(&a.exner, &b.exner)),
    }
}

/// Value at local coordinate `xi ∈ [0, 1]` of cell `i` of the piecewise-linear function
/// with interface values `at(k)`.
pub fn linear_in_cell(at: impl Fn(usize) -> f64, i: usize, xi: f64) -> f64 {
    (1.0 - xi) * at(i) + xi * at(i + 1)
}

/// Value at local `xi` of hat `k` (interface index, boundaries included) restricted to cell `i`.
pub fn hat(k: usize, i: usize, xi: f64) -> f64 {
    if k == i {
        1.0 - xi
    } else if k == i + 1 {
        xi
    } else {
        0.0
    }
}

/// `∫ f` over cell `i` with the five-point rule, `f` given in local coordinates.
pub fn cell_integral(grid: &VerticalGrid, i: usize, f: impl Fn(f64) -> f64) -> f64 {
    grid.dz()[i] * gauss5().iter().map(|&(x, w)| w * f(x)).sum::<f64>()
}

/// `⟨weight φ_a, φ_b⟩` over interface hats; `full` includes the boundary hats.
pub fn weighted_hat_mass(
    grid: &VerticalGrid,
    full: bool,
    weight: impl Fn(usize, f64) -> f64,
) -> DMatrix<f64> {
    let n = grid.n_levels();
    let (offset, size) = if full { (0, n + 1) } else { (1, n - 1) };
    let mut m = DMatrix::zeros(size, size);
    for a in 0..size {
        for b in 0..size {
            let (ka, kb) = (a + offset, b + offset);
            m[(a, b)] = (0..n)
                .map(|i| {
                    cell_integral(grid, i, |xi| {
                        weight(i, xi) * hat(ka, i, xi) * hat(kb, i, xi)
                    })
                })
                .sum();
        }
    }
    m
}

/// `w` on the boundary-inclusive interfaces.
pub fn interface_values(w: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend_from_slice(w);
    v.push(0.0);
    v
}

pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    a.clone()
        .full_piv_lu()
        .solve(&DVector::from_column_slice(b))
        .expect("oracle matrix is nonsingular")
        .as_slice()
        .to_vec()
}

/// `max|a - b| / max|b|`, with an absolute floor for vanishing references.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

pub fn matrix_rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    rel_err(a.as_slice(), b.as_slice())
}

/// Time-quadrature oracle of the averaged variational derivatives: three-point Gauss in `s`
/// along the linear path, five-point Gauss per cell in `z`, and a dense `U⊥` mass solve.
pub fn averaged_derivatives_oracle(
    a: &ColumnState,
    b: &ColumnState,
    grid: &VerticalGrid,
    c: &GasConstants,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.n_levels();
    let mut flux_load = vec![0.0; n - 1];
    let mut bernoulli = vec![0.0; n];
    let mut exner = vec![0.0; n];
    for (s, ws) in gauss3() {
        let x = lerp_state(a, b, s);
        let wv = interface_values(&x.w);
        for i in 0..n {
            let w_at = |xi: f64| linear_in_cell(|k| wv[k], i, xi);
            for (j, load) in flux_load.iter_mut().enumerate() {
                *load += ws * cell_integral(grid, i, |xi| x.rho[i] * w_at(xi) * hat(j + 1, i, xi));
            }
            bernoulli[i] += ws * cell_integral(grid, i, |xi| 0.5 * w_at(xi).powi(2)) / grid.dz()[i];
            exner[i] += ws * x.exner[i];
        }
    }
    let mass = weighted_hat_mass(grid, false, |_, _| 1.0);
    let flux = dense_solve(&mass, &flux_load);
    let z = grid.z_mid();
    for (p, zi) in bernoulli.iter_mut().zip(&z) {
        *p += c.g() * zi;
    }
    (flux, bernoulli, exner)
}

/// Dense `(4n - 1)`-square block system assembled directly from the blocks, ordered
/// `(w, ρ, Θ, Π)`.
pub fn dense_block_system(b: &balanced_column::integrator::JacobianBlocks) -> DMatrix<f64> {
    let n = b.m_rho.len();
    let nu = n - 1;
    let size = nu + 3 * n;
    let mut a = DMatrix::zeros(size, size);
    let (w0, r0, t0, p0) = (0, nu, nu + n, nu + 2 * n);
    for i in 0..nu {
        for j in 0..nu {
            a[(w0 + i, w0 + j)] = b.mu.get(i, j);
        }
        for j in 0..n {
            a[(w0 + i, t0 + j)] = b.g_theta[(i, j)];
            a[(w0 + i, p0 + j)] = b.g_pi[(i, j)];
        }
    }
    for i in 0..n {
        for j in 0..nu {
            a[(r0 + i, w0 + j)] = b.d_rho[(i, j)];
            a[(t0 + i, w0 + j)] = b.d_theta[(i, j)];
        }
        for j in 0..n {
            a[(t0 + i, r0 + j)] = b.q_theta_rho[(i, j)];
        }
        a[(r0 + i, r0 + i)] = b.m_rho[i];
        a[(t0 + i, t0 + i)] = b.m_theta[i];
        a[(p0 + i, t0 + i)] = b.c_theta[i];
        a[(p0 + i, p0 + i)] = b.c_pi[i];
    }
    a
}

/// Largest per-variable relative difference between the Schur-reduced update and a fully
/// pivoted LU solve of the unreduced system, for a random iterate on `n` cells.
pub fn schur_discrepancy(seed: u64, n: usize) -> f64 {
    use balanced_column::integrator::{assemble_jacobian, residuals, schur_solve};
    let c = GasConstants::default();
    let mut r = rng(seed);
    let ops = random_ops(&mut r, n);
    let a = random_state(&mut r, n, &c);
    let k = nearby_state(&mut r, &a, 1e-3, &c);
    let config = balanced_column::NewtonConfig {
        dt: r.random_range(0.2..5.0),
        ..Default::default()
    };
    let blocks = assemble_jacobian(&a, &k, &ops, &c, config.dt).unwrap();
    let (res, _) = residuals(&a, &k, &ops, &c, &config, None).unwrap();
    let rhs: Vec<f64> = res
        .w
        .iter()
        .chain(res.rho.iter())
        .chain(res.rho_theta.iter())
        .chain(res.exner.iter())
        .map(|v| -v)
        .collect();
    let x = dense_solve(&dense_block_system(&blocks), &rhs);
    let u = schur_solve(&blocks, &res).unwrap();
    let nu = n - 1;
    let parts = [
        (&u.w[..], &x[..nu]),
        (&u.rho[..], &x[nu..nu + n]),
        (&u.rho_theta[..], &x[nu + n..nu + 2 * n]),
        (&u.exner[..], &x[nu + 2 * n..]),
    ];
    parts.iter().map(|(s, m)| rel_err(s, m)).fold(0.0, f64::max)
}
