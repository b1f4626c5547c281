mod common;

use balanced_column::mimetic::{
    assemble_l_uq, assemble_mass_u, assemble_weighted_n, assemble_weighted_s, assemble_weighted_t,
};
use balanced_column::thermo::{
    averaged_variational_derivatives, diagnose_exner, diagnose_theta, energy_kinetic,
    power_exchanges, VariationalAverages,
};
use balanced_column::{FieldQ, FieldTheta, FieldU, GasConstants};
use common::*;
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn hat_masses_match_quadrature() {
    let mut r = rng(11);
    for trial in 0..40 {
        let n = 2 + trial % 7;
        let ops = random_ops(&mut r, n);
        let grid = ops.grid();
        let rho = FieldQ((0..n).map(|_| r.random_range(0.1..2.0)).collect());
        let theta = FieldTheta((0..=n).map(|_| r.random_range(250.0..350.0)).collect());

        let mu = weighted_hat_mass(grid, false, |_, _| 1.0);
        assert!(matrix_rel_err(&assemble_mass_u(grid).to_dense(), &mu) < 1e-13);

        let nr = weighted_hat_mass(grid, false, |i, _| rho[i]);
        assert!(matrix_rel_err(&assemble_weighted_n(grid, &rho).unwrap().to_dense(), &nr) < 1e-13);

        let st = weighted_hat_mass(grid, false, |i, xi| linear_in_cell(|k| theta[k], i, xi));
        let s = assemble_weighted_s(grid, &theta).unwrap().to_dense();
        assert!(matrix_rel_err(&s, &st) < 1e-13);
    }
}

#[test]
fn theta_weighted_mass_four_cells() {
    let mut r = rng(12);
    let ops = random_ops(&mut r, 4);
    let theta = FieldTheta((0..5).map(|_| r.random_range(-2.0..2.0)).collect());
    let oracle = weighted_hat_mass(ops.grid(), false, |i, xi| {
        linear_in_cell(|k| theta[k], i, xi)
    });
    let s = assemble_weighted_s(ops.grid(), &theta).unwrap().to_dense();
    assert!(matrix_rel_err(&s, &oracle) < 1e-14);
}

#[test]
fn density_weighted_mass_is_positive_semidefinite() {
    let mut r = rng(13);
    for n in 2..=8 {
        let ops = random_ops(&mut r, n);
        let mut rho = FieldQ((0..n).map(|_| r.random_range(0.0..1.5)).collect());
        rho[0] = 0.0;
        let nr = assemble_weighted_n(ops.grid(), &rho).unwrap();
        let oracle = weighted_hat_mass(ops.grid(), false, |i, _| rho[i]);
        for _ in 0..20 {
            let w: Vec<f64> = (1..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let form: f64 = w.iter().zip(nr.mul_vec(&w)).map(|(a, b)| a * b).sum();
            let v = nalgebra::DVector::from_column_slice(&w);
            let reference = v.dot(&(&oracle * &v));
            assert!(form >= -1e-14 * reference.abs().max(1.0));
            assert!((form - reference).abs() <= 1e-13 * reference.abs().max(1e-300));
        }
    }
}

#[test]
fn kinetic_tensor_matches_quadrature() {
    let mut r = rng(14);
    for n in 2..=8 {
        let ops = random_ops(&mut r, n);
        let grid = ops.grid();
        let w = FieldU((1..n).map(|_| r.random_range(-3.0..3.0)).collect());
        let wv = interface_values(&w);
        let t = assemble_weighted_t(grid, &w).unwrap().to_dense();
        let mut oracle = DMatrix::zeros(n, n - 1);
        for i in 0..n {
            for j in 0..n - 1 {
                oracle[(i, j)] = cell_integral(grid, i, |xi| {
                    0.5 * linear_in_cell(|k| wv[k], i, xi) * hat(j + 1, i, xi)
                });
            }
        }
        assert!(matrix_rel_err(&t, &oracle) < 1e-13);

        let total: f64 = assemble_weighted_t(grid, &w)
            .unwrap()
            .mul_vec(&w)
            .iter()
            .sum();
        let exact: f64 = (0..n)
            .map(|i| cell_integral(grid, i, |xi| 0.5 * linear_in_cell(|k| wv[k], i, xi).powi(2)))
            .sum();
        assert!((total - exact).abs() <= 1e-13 * exact);

        let rho = FieldQ(vec![1.0; n]);
        assert!((energy_kinetic(&w, &rho, grid) - exact).abs() <= 1e-13 * exact);
    }
}

#[test]
fn hat_indicator_pairing_matches_quadrature() {
    let mut r = rng(15);
    let ops = random_ops(&mut r, 6);
    let grid = ops.grid();
    let l = assemble_l_uq(grid).to_dense();
    for k in 0..=6 {
        for i in 0..6 {
            let exact = cell_integral(grid, i, |xi| hat(k, i, xi));
            assert!((l[(k, i)] - exact).abs() < 1e-13 * grid.dz()[i]);
        }
    }
}

#[test]
fn unit_density_theta_is_l2_projection() {
    let mut r = rng(16);
    for n in 1..=8 {
        let ops = random_ops(&mut r, n);
        let grid = ops.grid();
        let rho = FieldQ(vec![1.0; n]);
        let rho_theta = FieldQ((0..n).map(|_| r.random_range(250.0..350.0)).collect());
        let mass = weighted_hat_mass(grid, true, |_, _| 1.0);
        let rhs: Vec<f64> = (0..=n)
            .map(|k| {
                (0..n)
                    .map(|i| cell_integral(grid, i, |xi| rho_theta[i] * hat(k, i, xi)))
                    .sum()
            })
            .collect();
        let oracle = dense_solve(&mass, &rhs);
        let theta = diagnose_theta(&rho_theta, &rho, &ops).unwrap();
        assert!(rel_err(&theta, &oracle) < 1e-13);
    }
}

#[test]
fn theta_is_mass_weighted_consistent() {
    let mut r = rng(17);
    for n in 1..=8 {
        let ops = random_ops(&mut r, n);
        let grid = ops.grid();
        let rho = FieldQ((0..n).map(|_| r.random_range(0.5..1.5)).collect());
        let rho_theta = FieldQ(
            rho.iter()
                .map(|v| v * r.random_range(250.0..350.0))
                .collect(),
        );
        let theta = diagnose_theta(&rho_theta, &rho, &ops).unwrap();
        for _ in 0..5 {
            let psi: Vec<f64> = (0..=n).map(|_| r.random_range(-1.0..1.0)).collect();
            let lhs: f64 = (0..n)
                .map(|i| {
                    cell_integral(grid, i, |xi| {
                        rho[i]
                            * linear_in_cell(|k| theta[k], i, xi)
                            * linear_in_cell(|k| psi[k], i, xi)
                    })
                })
                .sum();
            let rhs: f64 = (0..n)
                .map(|i| {
                    cell_integral(grid, i, |xi| {
                        rho_theta[i] * linear_in_cell(|k| psi[k], i, xi)
                    })
                })
                .sum();
            let scale: f64 = (0..n).map(|i| rho_theta[i] * grid.dz()[i]).sum();
            assert!((lhs - rhs).abs() <= 1e-13 * scale, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn exner_scalar_oracle_at_reference_density() {
    let c = GasConstants::default();
    let rho0 = 1.2;
    let pi = diagnose_exner(&FieldQ(vec![300.0 * rho0]), &c).unwrap();
    let expect = 1004.5 * (287.0 * 300.0 * rho0 / 1.0e5f64).powf(287.0 / 717.5);
    assert!((pi[0] - expect).abs() / expect < 1e-14);
}

#[test]
fn exner_is_monotone() {
    let c = GasConstants::default();
    let mut r = rng(18);
    let mut values: Vec<f64> = (0..200).map(|_| r.random_range(1.0..1e3)).collect();
    values.sort_by(f64::total_cmp);
    let pi = diagnose_exner(&FieldQ(values.clone()), &c).unwrap();
    for (k, p) in pi.windows(2).enumerate() {
        if values[k + 1] > values[k] {
            assert!(p[1] > p[0]);
        }
    }
}

#[test]
fn averages_match_time_quadrature_four_cells() {
    let c = GasConstants::default();
    let mut r = rng(19);
    for _ in 0..10 {
        let ops = random_ops(&mut r, 4);
        let a = random_state(&mut r, 4, &c);
        let b = random_state(&mut r, 4, &c);
        let avg = averaged_variational_derivatives(&a, &b, &ops, &c).unwrap();
        let (flux, bernoulli, exner) = averaged_derivatives_oracle(&a, &b, ops.grid(), &c);
        assert!(
            rel_err(&avg.mass_flux, &flux) < 1e-14,
            "{}",
            rel_err(&avg.mass_flux, &flux)
        );
        assert!(rel_err(&avg.bernoulli, &bernoulli) < 1e-14);
        assert!(rel_err(&avg.exner, &exner) < 1e-14);
    }
}

#[test]
fn power_exchanges_cancel_for_arbitrary_inputs() {
    let c = GasConstants::default();
    let mut r = rng(20);
    for n in 2..=8 {
        let ops = random_ops(&mut r, n);
        let theta = FieldTheta((0..=n).map(|_| r.random_range(250.0..350.0)).collect());
        let s = assemble_weighted_s(ops.grid(), &theta).unwrap();
        let avg = VariationalAverages {
            mass_flux: FieldU((1..n).map(|_| r.random_range(-10.0..10.0)).collect()),
            bernoulli: FieldQ((0..n).map(|_| r.random_range(0.0..1e4)).collect()),
            exner: FieldQ((0..n).map(|_| r.random_range(900.0..1100.0)).collect()),
        };
        let p = power_exchanges(&avg, &s, &ops, &c);
        let scale = p.dk_dt.abs().max(p.dp_dt.abs()).max(p.di_dt.abs());
        assert!(p.sum().abs() <= 1e-12 * scale, "{p:?}");
    }
}
