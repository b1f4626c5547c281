use nalgebra::DMatrix;

use crate::error::{Result, SolverError};
use crate::mimetic::{assemble_weighted_n, assemble_weighted_t, BandMatrix, FieldU, OperatorSet};
use crate::thermo::{GasConstants, VariationalAverages};

use super::residual::CentredOperators;
use super::ColumnState;

/// Approximate Jacobian of the residuals in block form, ordered `(w, ρ, Θ, Π)`:
///
/// ```text
/// | Mu    0     G_Θ   G_Π |
/// | D_ρ   M_ρ   0     0   |
/// | D_Θ   Q_Θρ  M_Θ   0   |
/// | 0     0     C_Θ   C_Π |
/// ```
///
/// Diagonal blocks are stored as their diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    pub mu: BandMatrix,
    pub g_theta: DMatrix<f64>,
    pub g_pi: DMatrix<f64>,
    pub d_rho: DMatrix<f64>,
    pub m_rho: Vec<f64>,
    pub d_theta: DMatrix<f64>,
    pub q_theta_rho: DMatrix<f64>,
    pub m_theta: Vec<f64>,
    pub c_theta: Vec<f64>,
    pub c_pi: Vec<f64>,
}

impl JacobianBlocks {
    pub fn n_levels(&self) -> usize {
        self.m_rho.len()
    }

    /// The full `(4n - 1)`-square matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n_levels();
        let nu = n - 1;
        let size = nu + 3 * n;
        let (r0, r1, r2, r3) = (0, nu, nu + n, nu + 2 * n);
        let mut a = DMatrix::zeros(size, size);
        a.view_mut((r0, r0), (nu, nu))
            .copy_from(&self.mu.to_dense());
        a.view_mut((r0, r2), (nu, n)).copy_from(&self.g_theta);
        a.view_mut((r0, r3), (nu, n)).copy_from(&self.g_pi);
        a.view_mut((r1, r0), (n, nu)).copy_from(&self.d_rho);
        a.view_mut((r2, r0), (n, nu)).copy_from(&self.d_theta);
        a.view_mut((r2, r1), (n, n)).copy_from(&self.q_theta_rho);
        for i in 0..n {
            a[(r1 + i, r1 + i)] = self.m_rho[i];
            a[(r2 + i, r2 + i)] = self.m_theta[i];
            a[(r3 + i, r2 + i)] = self.c_theta[i];
            a[(r3 + i, r3 + i)] = self.c_pi[i];
        }
        a
    }
}

/// Assembles the approximate Jacobian at iterate `state_k`, with hatted operators taken
/// at the field average of `state_n` and `state_k`.
pub fn assemble_jacobian(
    state_n: &ColumnState,
    state_k: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    dt: f64,
) -> Result<JacobianBlocks> {
    let centred = CentredOperators::new(state_n, state_k, ops)?;
    let exner_bar: Vec<f64> = state_n
        .exner
        .iter()
        .zip(state_k.exner.iter())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    assemble_centred(state_n, state_k, ops, consts, dt, &centred, &exner_bar)
}

pub(crate) fn assemble_from_averages(
    state_n: &ColumnState,
    state_k: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    dt: f64,
    centred: &CentredOperators,
    averages: &VariationalAverages,
) -> Result<JacobianBlocks> {
    assemble_centred(state_n, state_k, ops, consts, dt, centred, &averages.exner)
}

fn assemble_centred(
    state_n: &ColumnState,
    state_k: &ColumnState,
    ops: &OperatorSet,
    consts: &GasConstants,
    dt: f64,
    centred: &CentredOperators,
    exner_bar: &[f64],
) -> Result<JacobianBlocks> {
    let grid = ops.grid();
    let n = grid.n_levels();
    let half = 0.5 * dt;
    let mq = ops.mass_q();
    let e = ops.incidence();
    let mu_lu = ops.mass_u_lu();

    // MU⁻¹ Eᵀ, shared by G_Π and Q_Θρ.
    let minv_et = mu_lu.solve_dense(&e.transpose().to_dense());

    // Pressure gradient P̂ = MU⁻¹ Eᵀ Π̄; ⟨ε^Q_i, ε^U_j P̂⟩ = 2 T(P̂)ᵀ.
    let p_hat = FieldU(ops.solve_mass_u(&ops.divergence_adjoint(exner_bar)));
    let inv_rho: Vec<f64> = centred.rho.iter().map(|r| 1.0 / r).collect();
    let g_theta = assemble_weighted_t(grid, &p_hat)?
        .transpose()
        .scale(-dt)
        .scale_cols(&inv_rho)
        .to_dense();

    let g_pi = centred.s.mul_dense(&minv_et) * (-half);

    let n_hat = assemble_weighted_n(grid, &centred.rho)?;
    let d_rho = e.mul_dense(&mu_lu.solve_dense(&n_hat.to_dense())) * half;

    let d_theta = e.scale_rows(&centred.rho_theta).scale(half).to_dense();

    let u_hat = state_n.midpoint(state_k).w;
    let theta_cells: Vec<f64> = centred
        .theta
        .windows(2)
        .map(|t| 0.5 * (t[0] + t[1]))
        .collect();
    let mut q_theta_rho = assemble_weighted_t(grid, &u_hat)?
        .scale(-dt)
        .mul_dense(&minv_et);
    for (j, t) in theta_cells.iter().enumerate() {
        q_theta_rho.column_mut(j).scale_mut(*t);
    }

    let kappa = consts.kappa_v();
    let mut c_theta = Vec::with_capacity(n);
    let mut c_pi = Vec::with_capacity(n);
    for i in 0..n {
        let (t, p) = (state_k.rho_theta[i], state_k.exner[i]);
        if !(t > 0.0 && p > 0.0) {
            return Err(SolverError::nonphysical(
                "singular weighted mass in equation-of-state block",
                i,
            ));
        }
        c_theta.push(-kappa * mq[i] / t);
        c_pi.push(mq[i] / p);
    }

    Ok(JacobianBlocks {
        mu: ops.mass_u().clone(),
        g_theta,
        g_pi,
        d_rho,
        m_rho: mq.to_vec(),
        d_theta,
        q_theta_rho,
        m_theta: mq.to_vec(),
        c_theta,
        c_pi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimetic::{build_grid, FieldQ, Stretching};
    use crate::thermo::diagnose_exner;

    fn state(n: usize, consts: &GasConstants) -> ColumnState {
        let rho = FieldQ((0..n).map(|i| 1.1 - 0.02 * i as f64).collect());
        let rho_theta = FieldQ(
            rho.iter()
                .enumerate()
                .map(|(i, r)| r * (300.0 + i as f64))
                .collect(),
        );
        ColumnState {
            w: FieldU((0..n - 1).map(|j| 0.1 * j as f64).collect()),
            exner: diagnose_exner(&rho_theta, consts).unwrap(),
            rho,
            rho_theta,
        }
    }

    fn ops(n: usize) -> OperatorSet {
        OperatorSet::new(build_grid(n, 50.0 * n as f64, &Stretching::Uniform).unwrap()).unwrap()
    }

    #[test]
    fn zero_step_kills_coupling_blocks() {
        let c = GasConstants::default();
        let s = state(5, &c);
        let j = assemble_jacobian(&s, &s, &ops(5), &c, 0.0).unwrap();
        for m in [&j.g_theta, &j.g_pi, &j.d_rho, &j.d_theta, &j.q_theta_rho] {
            assert_eq!(m.abs().max(), 0.0);
        }
    }

    #[test]
    fn unit_exner_gives_q_mass() {
        let c = GasConstants::default();
        let mut s = state(4, &c);
        s.exner = FieldQ::filled(4, 1.0);
        let o = ops(4);
        let j = assemble_jacobian(&s, &s, &o, &c, 1.0).unwrap();
        assert_eq!(j.c_pi, o.mass_q());
    }

    #[test]
    fn c_theta_strictly_negative() {
        let c = GasConstants::default();
        let s = state(6, &c);
        let j = assemble_jacobian(&s, &s, &ops(6), &c, 2.0).unwrap();
        assert!(j.c_theta.iter().all(|&v| v < 0.0));
        assert!(j.c_pi.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn block_shapes() {
        let c = GasConstants::default();
        let s = state(5, &c);
        let j = assemble_jacobian(&s, &s, &ops(5), &c, 1.0).unwrap();
        assert_eq!(j.g_theta.shape(), (4, 5));
        assert_eq!(j.g_pi.shape(), (4, 5));
        assert_eq!(j.d_rho.shape(), (5, 4));
        assert_eq!(j.q_theta_rho.shape(), (5, 5));
        assert_eq!(j.to_dense().shape(), (19, 19));
    }
}
