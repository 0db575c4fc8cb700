//! Elliptic volatility matrices `X = ΣZ` and the spectra of `A = XᵀX/T`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{NoiseModel, VolatilityModel};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::rng::{replica_stream, shuffle_stream, stream_rng, StreamRng, SHUFFLE_STREAM};

/// Tiny negative eigenvalues above `−PSD_TOL·λmax` are rounding and get clamped.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EVMConfig {
    /// Rows (time).
    pub t: usize,
    /// Columns (stocks).
    pub s: usize,
    pub volatility: VolatilityModel,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl EVMConfig {
    pub fn new(t: usize, s: usize, volatility: VolatilityModel, noise: NoiseModel, seed: u64) -> Result<Self> {
        let config = EVMConfig {
            t,
            s,
            volatility,
            noise,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.s == 0 {
            return Err(Error::domain(format!(
                "matrix dimensions must be positive, got {}×{}",
                self.t, self.s
            )));
        }
        self.volatility.validate()
    }

    /// `T/S`.
    pub fn y_hat(&self) -> f64 {
        self.t as f64 / self.s as f64
    }
}

/// One draw of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EVMSample {
    /// `T×S`, row `t` equal to `sigma[t]` times a noise row.
    pub x: DMatrix<f64>,
    /// Realised volatilities; `None` once entries have been shuffled.
    pub sigma: Option<Vec<f64>>,
}

/// Eigenvalues of `XᵀX/T`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `(T, S)`.
    pub dims: (usize, usize),
    /// Divisor applied to the Gram matrix (`T`).
    pub normalization: f64,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

pub fn generate_evm(config: &EVMConfig) -> Result<EVMSample> {
    generate_on_stream(config, 0)
}

/// Like [`generate_evm`], drawing from substream `stream` of the seed.
pub fn generate_on_stream(config: &EVMConfig, stream: u64) -> Result<EVMSample> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, stream);
    let vol = config.volatility.sampler()?;
    let noise = config.noise.sampler();
    let mut sigma = vec![0.0; config.t];
    vol.fill(&mut rng, &mut sigma);
    let mut row = vec![0.0; config.s];
    let mut x = DMatrix::zeros(config.t, config.s);
    for (t, &sig) in sigma.iter().enumerate() {
        noise.fill(&mut rng, &mut row);
        for (s, &z) in row.iter().enumerate() {
            x[(t, s)] = sig * z;
        }
    }
    Ok(EVMSample { x, sigma: Some(sigma) })
}

/// Spectrum of `A = XᵀX/T`.
///
/// The smaller of `XᵀX` and `XXᵀ` is diagonalised and, when `T < S`, padded
/// with `S − T` zeros.
pub fn gram_spectrum(sample: &EVMSample) -> Result<Spectrum> {
    let x = &sample.x;
    let (t, s) = x.shape();
    if t == 0 || s == 0 {
        return Err(Error::domain("empty matrix"));
    }
    let gram = if s <= t { x.tr_mul(x) } else { x * x.transpose() } / t as f64;
    let mut eigenvalues = symmetric_eigenvalues(&gram)?;
    clamp_psd(&mut eigenvalues)?;
    if s > t {
        let mut padded = vec![0.0; s - t];
        padded.append(&mut eigenvalues);
        eigenvalues = padded;
    }
    Ok(Spectrum {
        eigenvalues,
        dims: (t, s),
        normalization: t as f64,
    })
}

fn clamp_psd(ev: &mut [f64]) -> Result<()> {
    let top = ev.last().copied().unwrap_or(0.0).max(0.0);
    let low = ev.first().copied().unwrap_or(0.0);
    if low < -PSD_TOL * top {
        return Err(Error::numerical(
            "gram_spectrum",
            format!("eigenvalue {low:e} is too negative for a Gram matrix with λmax = {top:e}"),
        ));
    }
    for v in ev.iter_mut().filter(|v| **v < 0.0) {
        *v = 0.0;
    }
    Ok(())
}

/// Uniform permutation of all `T·S` entries; the volatilities are dropped.
pub fn shuffle_entries(sample: &EVMSample, seed: u64) -> EVMSample {
    shuffle_with(sample, &mut stream_rng(seed, SHUFFLE_STREAM))
}

fn shuffle_with(sample: &EVMSample, rng: &mut StreamRng) -> EVMSample {
    let mut x = sample.x.clone();
    x.as_mut_slice().shuffle(rng);
    EVMSample { x, sigma: None }
}

/// Which ensemble a batch draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    #[default]
    Evm,
    /// Each replica's entries shuffled before diagonalisation.
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSpectra {
    /// All eigenvalues of all replicas, ascending.
    pub pooled: Spectrum,
    /// Largest eigenvalue of `A` per replica, in replica order.
    pub maxima: Vec<f64>,
}

pub fn batch_spectra(config: &EVMConfig, reps: usize) -> Result<BatchSpectra> {
    batch_spectra_of(config, reps, Ensemble::Evm)
}

/// Runs `reps` replicas in parallel. Replica `r` draws from its own
/// substream, so the output does not depend on scheduling.
pub fn batch_spectra_of(config: &EVMConfig, reps: usize, ensemble: Ensemble) -> Result<BatchSpectra> {
    if reps == 0 {
        return Err(Error::domain("at least one replica is required"));
    }
    config.validate()?;
    let spectra = (0..reps)
        .into_par_iter()
        .map(|r| {
            let run = || -> Result<Spectrum> {
                let mut sample = generate_on_stream(config, replica_stream(r))?;
                if ensemble == Ensemble::Shuffled {
                    sample = shuffle_with(&sample, &mut stream_rng(config.seed, shuffle_stream(r)));
                }
                gram_spectrum(&sample)
            };
            run().map_err(|e| Error::Replica {
                index: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let maxima = spectra.iter().map(Spectrum::max).collect();
    let mut eigenvalues: Vec<f64> = spectra.into_iter().flat_map(|s| s.eigenvalues).collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(BatchSpectra {
        pooled: Spectrum {
            eigenvalues,
            dims: (config.t, config.s),
            normalization: config.t as f64,
        },
        maxima,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn student(t: usize, s: usize, seed: u64) -> EVMConfig {
        EVMConfig::new(t, s, VolatilityModel::student(3.0).unwrap(), NoiseModel::Gaussian, seed).unwrap()
    }

    #[test]
    fn rows_are_scaled_noise() {
        let c = student(7, 5, 3);
        let a = generate_evm(&c).unwrap();
        let pure = EVMConfig {
            volatility: VolatilityModel::Constant { sigma0: 1.0 },
            ..c
        };
        // same stream: σ draws are consumed first, then the noise rows; so
        // regenerate the noise by hand
        let mut rng = stream_rng(c.seed, 0);
        let vol = c.volatility.sampler().unwrap();
        let mut sigma = vec![0.0; 7];
        vol.fill(&mut rng, &mut sigma);
        assert_eq!(a.sigma.as_deref(), Some(&sigma[..]));
        let noise = c.noise.sampler();
        for t in 0..7 {
            for s in 0..5 {
                assert_eq!(a.x[(t, s)], sigma[t] * noise.draw(&mut rng));
            }
        }
        assert_eq!(generate_evm(&c).unwrap(), a);
        let b = generate_evm(&pure).unwrap();
        assert!(b.sigma.unwrap().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn one_by_one() {
        let a = generate_evm(&student(1, 1, 9)).unwrap();
        let sp = gram_spectrum(&a).unwrap();
        assert_eq!(sp.eigenvalues, vec![a.x[(0, 0)].powi(2)]);
    }

    #[test]
    fn config_validation() {
        assert!(EVMConfig::new(0, 3, VolatilityModel::StandardNormal, NoiseModel::Gaussian, 1).is_err());
        assert!(EVMConfig::new(
            3,
            3,
            VolatilityModel::StudentRenormalised { nu: 2.0 },
            NoiseModel::Gaussian,
            1
        )
        .is_err());
        assert_eq!(student(512, 256, 0).y_hat(), 2.0);
    }

    #[test]
    fn trivial_spectra() {
        let zero = EVMSample {
            x: DMatrix::zeros(4, 3),
            sigma: None,
        };
        assert_eq!(gram_spectrum(&zero).unwrap().eigenvalues, vec![0.0; 3]);
        let ones = EVMSample {
            x: DMatrix::from_element(6, 4, 1.0),
            sigma: None,
        };
        let sp = gram_spectrum(&ones).unwrap();
        assert!((sp.max() - 4.0).abs() < 1e-12);
        assert!(sp.eigenvalues[..3].iter().all(|v| *v == 0.0));
        let wide = EVMSample {
            x: DMatrix::from_element(3, 5, 1.0),
            sigma: None,
        };
        let sp = gram_spectrum(&wide).unwrap();
        assert_eq!(sp.eigenvalues.len(), 5);
        assert!((sp.max() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn both_gram_matrices_share_the_nonzero_spectrum() {
        for &(t, s) in &[(32, 12), (12, 32), (20, 20), (6, 4)] {
            let a = generate_evm(&student(t, s, 5)).unwrap();
            let small = symmetric_eigenvalues(&(a.x.tr_mul(&a.x) / t as f64)).unwrap();
            let big = symmetric_eigenvalues(&(&a.x * a.x.transpose() / t as f64)).unwrap();
            let k = t.min(s);
            let top = small[small.len() - 1];
            for (u, v) in small.iter().rev().zip(big.iter().rev()).take(k) {
                assert!((u - v).abs() <= 1e-8 * top.max(1.0));
            }
            let sp = gram_spectrum(&a).unwrap();
            assert_eq!(sp.eigenvalues.len(), s);
            let trace = a.x.iter().map(|v| v * v).sum::<f64>() / t as f64;
            assert!((sp.sum() - trace).abs() <= 1e-10 * trace);
        }
    }

    #[test]
    fn shuffle_preserves_entries() {
        let a = generate_evm(&student(9, 4, 2)).unwrap();
        let b = shuffle_entries(&a, 77);
        assert!(b.sigma.is_none());
        assert_ne!(a.x, b.x);
        let mut u: Vec<f64> = a.x.iter().copied().collect();
        let mut v: Vec<f64> = b.x.iter().copied().collect();
        u.sort_by(f64::total_cmp);
        v.sort_by(f64::total_cmp);
        assert_eq!(u, v);
        let one = generate_evm(&student(1, 1, 2)).unwrap();
        assert_eq!(shuffle_entries(&one, 3).x, one.x);
    }

    #[test]
    fn batches_are_reproducible() {
        let c = student(40, 20, 8);
        let single = gram_spectrum(&generate_evm(&c).unwrap()).unwrap();
        let one = batch_spectra(&c, 1).unwrap();
        assert_eq!(one.pooled, single);
        let a = batch_spectra(&c, 6).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| batch_spectra(&c, 6)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pooled.eigenvalues.len(), 120);
        assert_eq!(a.maxima.len(), 6);
        assert!(a.maxima.iter().all(|m| a.pooled.eigenvalues.contains(m)));
        let sh = batch_spectra_of(&c, 2, Ensemble::Shuffled).unwrap();
        assert_ne!(sh.pooled, batch_spectra(&c, 2).unwrap().pooled);
    }

    #[test]
    fn row_norm_concentration() {
        // Z rows of length S = 10⁴: ‖z_t‖²/S ≈ 1 and |⟨z_i, z_j⟩| ≪ S^{3/4}
        let c = EVMConfig::new(
            100,
            10_000,
            VolatilityModel::Constant { sigma0: 1.0 },
            NoiseModel::Gaussian,
            4,
        )
        .unwrap();
        let z = generate_evm(&c).unwrap().x;
        let g = &z * z.transpose();
        let s = 10_000f64;
        let diag = (0..100).map(|i| (g[(i, i)] / s - 1.0).abs()).fold(0.0, f64::max);
        assert!(diag < 0.1, "{diag}");
        let mut off: f64 = 0.0;
        for i in 0..100 {
            for j in 0..i {
                off = off.max(g[(i, j)].abs());
            }
        }
        assert!(off / s.powf(0.75) < 0.5, "{}", off / s.powf(0.75));
    }
}
