//! Returns panel pipeline on synthetic data: renormalise, clear the market
//! mode, split into blocks and look at the block spectra.

use evsce::distributions::{NoiseModel, VolatilityModel};
use evsce::linalg::symmetric_eigenvalues;
use evsce::market::{clear_market_mode_detailed, renormalise, row_volatility, split_blocks, ReturnsPanel, Stage};
use evsce::simulator::{generate_evm, EVMConfig};
use nalgebra::DMatrix;

fn main() -> evsce::Result<()> {
    let (t, s) = (2000, 100);
    let config = EVMConfig::new(t, s, VolatilityModel::student(3.0)?, NoiseModel::Gaussian, 11)?;
    let sample = generate_evm(&config)?;
    let sigma = sample.sigma.clone().unwrap_or_default();
    // A common factor riding on the same volatility.
    let factor: Vec<f64> = (0..t)
        .map(|i| ((i * 7919 % 1000) as f64 / 500.0 - 1.0) * sigma[i])
        .collect();
    let raw = DMatrix::from_fn(t, s, |i, j| 0.01 * (sample.x[(i, j)] + 0.8 * factor[i]));

    let panel = renormalise(&ReturnsPanel::from_matrix(raw, Stage::Raw)?)?;
    let clearing = clear_market_mode_detailed(&panel)?;
    println!(
        "market mode eigenvalue {:.3} after {} iterations",
        clearing.mode.eigenvalue, clearing.mode.iterations
    );

    for (b, block) in split_blocks(&clearing.cleared, 4)?.iter().enumerate() {
        let block = renormalise(block)?;
        let ev = symmetric_eigenvalues(&block.gram())?;
        println!("block {b}: eigenvalues {:.3} .. {:.3}", ev[0], ev[ev.len() - 1]);
    }

    let vol = row_volatility(&clearing.cleared)?;
    let loudest = (0..t).max_by(|&a, &b| vol[a].total_cmp(&vol[b])).unwrap();
    println!(
        "noisiest row {loudest}: estimated {:.3}, |sigma| {:.3}",
        vol[loudest],
        sigma[loudest].abs()
    );
    Ok(())
}
