//! Pooled spectrum of simulated EVMs against the limiting density.

use evsce::distributions::{NoiseModel, VolatilityModel};
use evsce::histogram::histogram;
use evsce::rng::DEFAULT_SEED;
use evsce::simulator::{batch_spectra, EVMConfig};
use evsce::spectral::{closed_form_density, AspectRatio};

fn main() -> evsce::Result<()> {
    let config = EVMConfig::new(
        1024,
        512,
        VolatilityModel::student(3.0)?,
        NoiseModel::Gaussian,
        DEFAULT_SEED,
    )?;
    let batch = batch_spectra(&config, 8)?;
    let hist = histogram(&batch.pooled.eigenvalues, 50, (0.0, 5.0))?;
    let y = AspectRatio::new(config.y_hat())?;
    let l1 = hist.l1_distance(|x| closed_form_density(x, y).unwrap_or(0.0))?;
    println!(
        "{} eigenvalues, {} above the window, L1 to the limit {l1:.4}",
        hist.total, hist.above
    );
    for (c, h) in hist.centers().iter().zip(&hist.heights).step_by(5) {
        println!("{c:5.2}  hist {h:.4}  limit {:.4}", closed_form_density(*c, y)?);
    }
    println!("largest eigenvalue per replica: {:.2?}", batch.maxima);
    Ok(())
}
