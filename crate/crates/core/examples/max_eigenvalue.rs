//! Largest eigenvalue, its diagonal proxy and the Fréchet band test.

use evsce::distributions::{NoiseModel, VolatilityModel};
use evsce::extremes::{frechet_band_test, max_eig_batch, offdiag_heuristic, solve_a_t, FrechetBand};
use evsce::rng::DEFAULT_SEED;
use evsce::simulator::EVMConfig;

fn main() -> evsce::Result<()> {
    let (t, s) = (256, 240);
    let a_t = solve_a_t(t as f64)?;
    println!(
        "a_T = {a_t:.6}, off-diagonal heuristic {:.4}",
        offdiag_heuristic(t, s, a_t)
    );

    let config = EVMConfig::new(t, s, VolatilityModel::student(3.0)?, NoiseModel::Gaussian, DEFAULT_SEED)?;
    let samples = max_eig_batch(&config, 100, a_t, true)?;
    for m in samples.iter().take(5) {
        println!(
            "rescaled {:.4}  diag proxy {:.4}  off-diagonal norm {:.4}",
            m.rescaled,
            m.diag_proxy,
            m.offdiag_norm.unwrap()
        );
    }
    let rescaled: Vec<f64> = samples.iter().map(|m| m.rescaled).collect();
    let report = frechet_band_test(&rescaled, FrechetBand::default())?;
    for d in &report.deciles {
        println!(
            "x {:.3}: ecdf {:.3} in [{:.3}, {:.3}] {}",
            d.x,
            d.ecdf,
            d.lower,
            d.upper,
            if d.pass { "ok" } else { "out" }
        );
    }
    println!("band test {}", if report.passed() { "passed" } else { "failed" });
    Ok(())
}
