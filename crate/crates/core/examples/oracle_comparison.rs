//! Closed form against the quartic-root and Stieltjes-inversion oracles,
//! plus the inversion at a heavier-tailed volatility (ν = 5) with no
//! closed form.

use evsce::distributions::VolatilityModel;
use evsce::spectral::{density_curve, density_curve_with, linear_grid, AspectRatio, DensityMethod};

fn main() -> evsce::Result<()> {
    let y = AspectRatio::new(2.0)?;
    let grid = linear_grid(0.02, 10.0, 120);
    let closed = density_curve(y, &grid, DensityMethod::ClosedForm)?;
    for method in [DensityMethod::QuarticOracle, DensityMethod::StieltjesInversion] {
        let other = density_curve(y, &grid, method)?;
        println!(
            "{:>20}: max |diff| = {:.3e}",
            method.name(),
            closed.max_abs_diff(&other).unwrap()
        );
    }

    let nu5 = density_curve_with(
        y,
        &grid,
        DensityMethod::StieltjesInversion,
        &VolatilityModel::student(5.0)?,
    )?;
    let mp = density_curve(y, &grid, DensityMethod::MarchenkoPastur)?;
    println!("\n     x   student(3)   student(5)   constant (MP)");
    for i in (0..grid.len()).step_by(12) {
        println!(
            "{:6.2} {:12.6} {:12.6} {:12.6}",
            grid[i], closed.rhos[i], nu5.rhos[i], mp.rhos[i]
        );
    }
    Ok(())
}
