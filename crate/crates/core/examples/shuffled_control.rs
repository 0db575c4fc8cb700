//! Shuffling entries breaks the row structure; the spectrum moves towards
//! Marchenko-Pastur.

use evsce::distributions::{NoiseModel, VolatilityModel};
use evsce::histogram::histogram;
use evsce::simulator::{batch_spectra_of, EVMConfig, Ensemble};
use evsce::spectral::mp_density;

fn main() -> evsce::Result<()> {
    let (t, s) = (1024, 512);
    let ratio = s as f64 / t as f64;
    for nu in [3.0, 5.0] {
        let config = EVMConfig::new(t, s, VolatilityModel::student(nu)?, NoiseModel::Gaussian, 7)?;
        for ensemble in [Ensemble::Evm, Ensemble::Shuffled] {
            let batch = batch_spectra_of(&config, 4, ensemble)?;
            let hist = histogram(&batch.pooled.eigenvalues, 100, (0.0, 4.0))?;
            let l1 = hist.l1_distance(|x| mp_density(x, ratio))?;
            println!(
                "nu = {nu}, {ensemble:?}: L1 to MP = {l1:.4}, max eigenvalue {:.2}",
                batch.pooled.max()
            );
        }
    }
    Ok(())
}
