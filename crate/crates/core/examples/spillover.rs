//! Simultaneous extremes of two columns sharing a volatility, compared to
//! two independent columns.

use evsce::distributions::{NoiseModel, VolatilityModel};
use evsce::market::{joint_exceedance, renormalise, spillover_pairs, ReturnsPanel, Stage};
use evsce::simulator::{generate_evm, EVMConfig};
use nalgebra::DMatrix;

fn panel(x: DMatrix<f64>) -> evsce::Result<ReturnsPanel> {
    renormalise(&ReturnsPanel::from_matrix(x, Stage::Raw)?)
}

fn main() -> evsce::Result<()> {
    let t = 10_000;
    let vol = VolatilityModel::student(3.0)?;
    let shared = generate_evm(&EVMConfig::new(t, 2, vol, NoiseModel::Gaussian, 1)?)?.x;
    let a = generate_evm(&EVMConfig::new(t, 1, vol, NoiseModel::Gaussian, 2)?)?.x;
    let b = generate_evm(&EVMConfig::new(t, 1, vol, NoiseModel::Gaussian, 3)?)?.x;
    let independent = DMatrix::from_fn(t, 2, |i, j| if j == 0 { a[(i, 0)] } else { b[(i, 0)] });

    for (name, x) in [("shared volatility", shared), ("independent", independent)] {
        let pairs = spillover_pairs(&panel(x)?, "s0", "s1")?;
        print!("{name:>18}:");
        for thr in [2.0, 3.0, 5.0] {
            print!("  P(both > {thr}) = {:.5}", joint_exceedance(&pairs, thr));
        }
        println!();
    }
    Ok(())
}
