//! Supplying horizontal tendencies to the HEVI driver: a uniform low-level heating applied
//! through the Θ tendency of every column.

use balanced_column::experiment::init_hydrostatic_column;
use balanced_column::hevi::{
    trap232_step, CountingProvider, HeviConfig, HorizontalTendency, SliceState, TendencyProvider,
};
use balanced_column::mimetic::{build_grid, Stretching};
use balanced_column::thermo::column_mass;
use balanced_column::{GasConstants, NewtonConfig, OperatorSet};

struct LowLevelHeating {
    rate: f64,
    depth: f64,
}

impl TendencyProvider for LowLevelHeating {
    fn tendencies(
        &self,
        state: &SliceState,
        ops: &OperatorSet,
    ) -> balanced_column::Result<HorizontalTendency> {
        let mut h = HorizontalTendency::zeros(state.n_columns(), ops.n_levels());
        for (col, d_theta) in state.columns.iter().zip(h.d_rho_theta.iter_mut()) {
            for (k, z) in ops.z_mid().iter().enumerate() {
                if *z < self.depth {
                    d_theta[k] = self.rate * col.rho[k];
                }
            }
        }
        Ok(h)
    }
}

fn main() -> balanced_column::Result<()> {
    let consts = GasConstants::default();
    let ops = OperatorSet::new(build_grid(60, 1500.0, &Stretching::Uniform)?)?;
    let column = init_hydrostatic_column(&ops, 300.0, &consts)?;
    let mut slice = SliceState {
        columns: vec![column; 2],
        u_par: vec![vec![0.0; 60]; 2],
        dx: 100.0,
    };
    let config = HeviConfig {
        newton: NewtonConfig {
            include_w_in_criteria: false,
            ..Default::default()
        },
        rayleigh: true,
    };
    let provider = CountingProvider::new(LowLevelHeating {
        rate: 0.01,
        depth: 200.0,
    });
    let m0 = column_mass(&slice.columns[0].rho, ops.grid());
    for _ in 0..60 {
        slice = trap232_step(&slice, &ops, &consts, &config, &provider)?.0;
    }
    let col = &slice.columns[0];
    let w_max = col.w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    println!(
        "after 60 s: max |w| = {w_max:.3e} m/s, theta at the ground = {:.3} K",
        col.rho_theta[0] / col.rho[0]
    );
    println!(
        "column mass drift {:.2e}, tendency evaluations {}",
        column_mass(&col.rho, ops.grid()) / m0 - 1.0,
        provider.calls()
    );
    Ok(())
}
