//! Largest-eigenvalue statistics.
//!
//! The rescaled maximum `λmax(XᵀX)/(S·a_T)` converges to a Fréchet law with
//! shape `α/2`, where `a_T` solves `1 − H(a_T) = 1/T` for the law `H` of
//! `σ²`. Simulated spectra are those of `A = XᵀX/T`, so the bridge is
//! `λmax(XᵀX) = T·λmax(A)`.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{h3_tail, FrechetLaw, VolatilityModel};
use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, symmetric_eigenvalues, SYMMETRY_TOL};
use crate::rng::{replica_stream, stream_rng};
use crate::simulator::{generate_on_stream, gram_spectrum, EVMConfig, EVMSample, Spectrum};

/// Default ceiling on `T` for the dense `T×T` off-diagonal diagnostic.
pub const OFFDIAG_T_CAP: usize = 4096;

const ROOT_TOL: f64 = 1e-12;

/// `a_T` for unit-variance Student(3) volatility: the root of
/// `h3_tail(a) = 1/T`. Fractional `T` is accepted.
pub fn solve_a_t(t: f64) -> Result<f64> {
    solve_scale(|a| h3_tail(a).expect("positive argument"), t, 3.0)
}

/// Root of `tail(a) = 1/T` for a decreasing tail function of a law with
/// tail exponent `alpha` (used only to centre the initial bracket).
pub fn solve_scale<F: Fn(f64) -> f64>(tail: F, t: f64, alpha: f64) -> Result<f64> {
    if !(t.is_finite() && t > 1.0) {
        return Err(Error::domain(format!("a_T needs T > 1, got {t}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain("tail exponent must be positive"));
    }
    let target = 1.0 / t;
    let f = |a: f64| tail(a) - target;
    let centre = t.powf(2.0 / alpha);
    let (mut lo, mut hi) = (centre / 10.0, centre * 10.0);
    let mut widen = 0;
    while f(lo) < 0.0 {
        lo /= 10.0;
        widen += 1;
        if widen > 60 {
            return Err(Error::numerical("solve_a_T", "could not bracket the root from below"));
        }
    }
    while f(hi) > 0.0 {
        hi *= 10.0;
        widen += 1;
        if widen > 120 {
            return Err(Error::numerical("solve_a_T", "could not bracket the root from above"));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let residual = f(root).abs();
    if residual > ROOT_TOL {
        return Err(Error::NonConvergence {
            routine: "solve_a_T",
            iterations: 400,
            residual,
        });
    }
    Ok(root)
}

/// `λmax(XᵀX)/(S·a_T)` from the spectrum of `A = XᵀX/T`.
pub fn rescale_max_eig(spectrum: &Spectrum, a_t: f64) -> Result<f64> {
    if spectrum.eigenvalues.is_empty() {
        return Err(Error::domain("empty spectrum"));
    }
    let (t, s) = spectrum.dims;
    Ok(spectrum.max().max(0.0) * t as f64 / (s as f64 * a_t))
}

/// `max_t σ_t²‖z_t‖²/(S·a_T)`, i.e. the largest row norm `‖x_t‖²` rescaled.
pub fn diag_proxy(sample: &EVMSample, a_t: f64) -> f64 {
    let s = sample.x.ncols() as f64;
    let top = sample.x.row_iter().map(|r| r.norm_squared()).fold(0.0, f64::max);
    top / (s * a_t)
}

/// Lower-bound guess `(T/4)/(√S·a_T)` for the off-diagonal contribution.
pub fn offdiag_heuristic(t: usize, s: usize, a_t: f64) -> f64 {
    (t as f64 / 4.0) / ((s as f64).sqrt() * a_t)
}

/// Spectral norm of `XXᵀ` with its diagonal removed, over `S·a_T`.
pub fn offdiag_error(sample: &EVMSample, a_t: f64) -> Result<f64> {
    offdiag_error_capped(sample, a_t, OFFDIAG_T_CAP)
}

pub fn offdiag_error_capped(sample: &EVMSample, a_t: f64, cap: usize) -> Result<f64> {
    let (t, s) = sample.x.shape();
    if t > cap {
        return Err(Error::domain(format!(
            "off-diagonal diagnostic needs a dense {t}×{t} matrix; T exceeds the cap {cap}"
        )));
    }
    let mut h = &sample.x * sample.x.transpose();
    h.fill_diagonal(0.0);
    let ev = symmetric_eigenvalues(&h)?;
    Ok(spectral_norm_of_sorted(&ev) / (s as f64 * a_t))
}

fn spectral_norm_of_sorted(ev: &[f64]) -> f64 {
    match (ev.first(), ev.last()) {
        (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
        _ => 0.0,
    }
}

/// `(max|λ|, max_i Σ_j |M_ij|)` for a symmetric matrix; the first never
/// exceeds the second.
pub fn infinity_norm_bound_check(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    check_symmetric(m, SYMMETRY_TOL)?;
    let ev = symmetric_eigenvalues(m)?;
    let inf = m
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok((spectral_norm_of_sorted(&ev), inf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxEigSample {
    pub lambda_max: f64,
    /// `λmax(XᵀX)/(S·a_T)`.
    pub rescaled: f64,
    pub diag_proxy: f64,
    /// Rescaled off-diagonal norm; `None` when not computed.
    pub offdiag_norm: Option<f64>,
    pub dims: (usize, usize),
}

impl MaxEigSample {
    pub fn measure(sample: &EVMSample, a_t: f64, with_offdiag: bool) -> Result<Self> {
        let spectrum = gram_spectrum(sample)?;
        Ok(MaxEigSample {
            lambda_max: spectrum.max(),
            rescaled: rescale_max_eig(&spectrum, a_t)?,
            diag_proxy: diag_proxy(sample, a_t),
            offdiag_norm: if with_offdiag {
                Some(offdiag_error(sample, a_t)?)
            } else {
                None
            },
            dims: spectrum.dims,
        })
    }

    /// `|rescaled − diag_proxy| ≤ offdiag_norm` up to `slack`.
    pub fn satisfies_triangle(&self, slack: f64) -> Option<bool> {
        self.offdiag_norm
            .map(|o| (self.rescaled - self.diag_proxy).abs() <= o + slack)
    }
}

/// Per-replica maxima, drawing replica `r` from the same substream as
/// [`crate::simulator::batch_spectra`].
pub fn max_eig_batch(config: &EVMConfig, reps: usize, a_t: f64, with_offdiag: bool) -> Result<Vec<MaxEigSample>> {
    if reps == 0 {
        return Err(Error::domain("at least one replica is required"));
    }
    (0..reps)
        .into_par_iter()
        .map(|r| {
            generate_on_stream(config, replica_stream(r))
                .and_then(|s| MaxEigSample::measure(&s, a_t, with_offdiag))
                .map_err(|e| Error::Replica {
                    index: r,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// `max_t σ_t²/a_T` for `reps` independent volatility paths of length `T`.
pub fn volatility_maxima(vol: &VolatilityModel, t: usize, reps: usize, a_t: f64, seed: u64) -> Result<Vec<f64>> {
    if t == 0 || reps == 0 {
        return Err(Error::domain("need T ≥ 1 and at least one replica"));
    }
    let sampler = vol.sampler()?;
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, replica_stream(r));
            let mut top: f64 = 0.0;
            for _ in 0..t {
                let v = sampler.draw(&mut rng);
                top = top.max(v * v);
            }
            Ok(top / a_t)
        })
        .collect()
}

/// Band `F_ξ(x − lower_shift) ≤ F̂(x) ≤ F_ξ(x − upper_shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetBand {
    pub lower_shift: f64,
    pub upper_shift: f64,
    pub shape: f64,
}

impl Default for FrechetBand {
    /// The band observed for Student(3) at `T = 512`, `S = 485`.
    fn default() -> Self {
        FrechetBand {
            lower_shift: 0.64,
            upper_shift: 0.16,
            shape: 1.5,
        }
    }
}

impl FrechetBand {
    pub fn new(lower_shift: f64, upper_shift: f64, shape: f64) -> Result<Self> {
        if !(lower_shift > upper_shift && upper_shift >= 0.0) {
            return Err(Error::domain("band needs lower_shift > upper_shift ≥ 0"));
        }
        FrechetLaw::new(shape)?;
        Ok(FrechetBand {
            lower_shift,
            upper_shift,
            shape,
        })
    }

    pub fn lower(&self, x: f64) -> f64 {
        FrechetLaw { shape: self.shape }.cdf(x - self.lower_shift)
    }

    pub fn upper(&self, x: f64) -> f64 {
        FrechetLaw { shape: self.shape }.cdf(x - self.upper_shift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecileCheck {
    pub x: f64,
    pub ecdf: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub n: usize,
    pub deciles: Vec<DecileCheck>,
    /// Kolmogorov distance to the lower band edge.
    pub ks_lower: f64,
    pub ks_upper: f64,
}

impl BandReport {
    pub fn passed(&self) -> bool {
        self.deciles.iter().all(|d| d.pass)
    }
}

/// Minimum sample size for [`frechet_band_test`].
pub const BAND_MIN_SAMPLES: usize = 50;

/// Checks the empirical CDF at its own deciles against the band with the
/// KS 95% tolerance `1.36/√n`.
pub fn frechet_band_test(rescaled_maxima: &[f64], band: FrechetBand) -> Result<BandReport> {
    let n = rescaled_maxima.len();
    if n < BAND_MIN_SAMPLES {
        return Err(Error::domain(format!(
            "band test needs at least {BAND_MIN_SAMPLES} samples, got {n}"
        )));
    }
    if rescaled_maxima.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("band test samples must be finite"));
    }
    let mut sorted = rescaled_maxima.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tol = 1.36 / (n as f64).sqrt();
    let ecdf = |x: f64| sorted.partition_point(|&v| v <= x) as f64 / n as f64;
    let deciles = (1..=9)
        .map(|d| {
            let idx = ((d as f64 / 10.0) * n as f64).ceil() as usize - 1;
            let x = sorted[idx.min(n - 1)];
            let (lower, upper, e) = (band.lower(x), band.upper(x), ecdf(x));
            DecileCheck {
                x,
                ecdf: e,
                lower,
                upper,
                pass: lower - tol <= e && e <= upper + tol,
            }
        })
        .collect();
    Ok(BandReport {
        n,
        deciles,
        ks_lower: ks_statistic(&sorted, |x| band.lower(x)),
        ks_upper: ks_statistic(&sorted, |x| band.upper(x)),
    })
}

/// Two-sided Kolmogorov statistic of a sorted sample against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// 95% critical value of the one-sample KS test, `1.36/√n`.
pub fn ks_critical_95(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

/// Draws `n` values of `ξ + shift`; handy for exercising the band test.
pub fn shifted_frechet_sample<R: Rng>(shape: f64, shift: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let law = FrechetLaw::new(shape)?;
    Ok((0..n).map(|_| law.draw(rng) + shift).collect())
}
