use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolverError};
use crate::mimetic::{FieldQ, FieldU};

use super::{JacobianBlocks, ResidualSet};

/// Newton update `(δw, δρ, δΘ, δΠ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub w: FieldU,
    pub rho: FieldQ,
    pub rho_theta: FieldQ,
    pub exner: FieldQ,
}

fn breakdown() -> SolverError {
    SolverError::SolverBreakdown {
        stage: "Helmholtz solve",
        column: None,
    }
}

/// `D̃ = D_Θ - Q_Θρ M_ρ⁻¹ D_ρ` and `G̃ = G_Θ - G_Π C_Π⁻¹ C_Θ`.
fn corrected_blocks(b: &JacobianBlocks) -> (DMatrix<f64>, DMatrix<f64>) {
    let inv_m_rho: Vec<f64> = b.m_rho.iter().map(|m| 1.0 / m).collect();
    let mut q_scaled = b.q_theta_rho.clone();
    for (j, s) in inv_m_rho.iter().enumerate() {
        q_scaled.column_mut(j).scale_mut(*s);
    }
    let d_tilde = &b.d_theta - q_scaled * &b.d_rho;
    let mut g_pi_scaled = b.g_pi.clone();
    for (j, (ct, cp)) in b.c_theta.iter().zip(&b.c_pi).enumerate() {
        g_pi_scaled.column_mut(j).scale_mut(ct / cp);
    }
    let g_tilde = &b.g_theta - g_pi_scaled;
    (d_tilde, g_tilde)
}

/// `M_Θ - D̃ Mu⁻¹ G̃`, the operator of the reduced equation for `δΘ`.
pub fn helmholtz_operator(blocks: &JacobianBlocks) -> Result<DMatrix<f64>> {
    let mu_lu = blocks.mu.factor_tridiagonal()?;
    let (d_tilde, g_tilde) = corrected_blocks(blocks);
    let mut h = -(d_tilde * mu_lu.solve_dense(&g_tilde));
    for (i, m) in blocks.m_theta.iter().enumerate() {
        h[(i, i)] += m;
    }
    Ok(h)
}

/// Solves the block system by eliminating `δρ` and `δΠ`, then `δw`, leaving a dense
/// Helmholtz equation for `δΘ`, and back-substituting.
pub fn schur_solve(blocks: &JacobianBlocks, res: &ResidualSet) -> Result<Update> {
    let n = blocks.n_levels();
    let mu_lu = blocks.mu.factor_tridiagonal()?;
    let (d_tilde, g_tilde) = corrected_blocks(blocks);

    let f_u = DVector::from_column_slice(&res.w);
    let f_rho = DVector::from_column_slice(&res.rho);
    let f_theta = DVector::from_column_slice(&res.rho_theta);
    let f_pi = DVector::from_column_slice(&res.exner);

    let f_rho_scaled = DVector::from_iterator(n, (0..n).map(|i| f_rho[i] / blocks.m_rho[i]));
    let f_theta_tilde = &f_theta - &blocks.q_theta_rho * f_rho_scaled;
    let f_pi_scaled = DVector::from_iterator(n, (0..n).map(|i| f_pi[i] / blocks.c_pi[i]));
    let f_u_tilde = &f_u - &blocks.g_pi * f_pi_scaled;

    let mut h = -(&d_tilde * mu_lu.solve_dense(&g_tilde));
    for (i, m) in blocks.m_theta.iter().enumerate() {
        h[(i, i)] += m;
    }
    let minv_fu = DVector::from_vec(mu_lu.solve(f_u_tilde.as_slice()));
    let rhs = -(f_theta_tilde - &d_tilde * minv_fu);
    let d_theta = h.lu().solve(&rhs).ok_or_else(breakdown)?;
    if d_theta.iter().any(|v| !v.is_finite()) {
        return Err(breakdown());
    }

    let d_pi = DVector::from_iterator(
        n,
        (0..n).map(|i| -(f_pi[i] + blocks.c_theta[i] * d_theta[i]) / blocks.c_pi[i]),
    );
    let w_rhs = -(f_u + &blocks.g_theta * &d_theta + &blocks.g_pi * &d_pi);
    let d_w = DVector::from_vec(mu_lu.solve(w_rhs.as_slice()));
    let dr_dw = &blocks.d_rho * &d_w;
    let d_rho: Vec<f64> = (0..n)
        .map(|i| -(f_rho[i] + dr_dw[i]) / blocks.m_rho[i])
        .collect();

    Ok(Update {
        w: FieldU(d_w.as_slice().to_vec()),
        rho: FieldQ(d_rho),
        rho_theta: FieldQ(d_theta.as_slice().to_vec()),
        exner: FieldQ(d_pi.as_slice().to_vec()),
    })
}

/// Reference solve of the unreduced block system with a fully pivoted dense LU.
pub fn monolithic_solve(blocks: &JacobianBlocks, res: &ResidualSet) -> Result<Update> {
    let n = blocks.n_levels();
    let nu = n - 1;
    let a = blocks.to_dense();
    let b = DVector::from_iterator(
        a.nrows(),
        res.w
            .iter()
            .chain(res.rho.iter())
            .chain(res.rho_theta.iter())
            .chain(res.exner.iter())
            .map(|v| -v),
    );
    let x = a
        .full_piv_lu()
        .solve(&b)
        .ok_or(SolverError::SolverBreakdown {
            stage: "monolithic solve",
            column: None,
        })?;
    let x = x.as_slice();
    Ok(Update {
        w: FieldU(x[..nu].to_vec()),
        rho: FieldQ(x[nu..nu + n].to_vec()),
        rho_theta: FieldQ(x[nu + n..nu + 2 * n].to_vec()),
        exner: FieldQ(x[nu + 2 * n..].to_vec()),
    })
}
