//! Probability laws for volatilities and noise: the unit-variance Student
//! law, the law of its square, and the Fréchet limit of rescaled maxima.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Law of the per-row volatility `σ_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolatilityModel {
    /// Student(ν) divided by `√(ν/(ν−2))`, so that `E σ² = 1`.
    StudentRenormalised {
        nu: f64,
    },
    Constant {
        sigma0: f64,
    },
    StandardNormal,
}

impl VolatilityModel {
    pub fn student(nu: f64) -> Result<Self> {
        check_nu(nu)?;
        Ok(VolatilityModel::StudentRenormalised { nu })
    }

    pub fn constant(sigma0: f64) -> Result<Self> {
        if !(sigma0.is_finite() && sigma0 >= 0.0) {
            return Err(Error::domain(format!(
                "constant volatility must be finite and nonnegative, got {sigma0}"
            )));
        }
        Ok(VolatilityModel::Constant { sigma0 })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            VolatilityModel::StudentRenormalised { nu } => check_nu(nu),
            VolatilityModel::Constant { sigma0 } => Self::constant(sigma0).map(|_| ()),
            VolatilityModel::StandardNormal => Ok(()),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            VolatilityModel::Constant { sigma0 } => sigma0 * sigma0,
            _ => 1.0,
        }
    }

    /// Tail exponent of `σ`, if heavy-tailed.
    pub fn tail_exponent(&self) -> Option<f64> {
        match *self {
            VolatilityModel::StudentRenormalised { nu } => Some(nu),
            _ => None,
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            VolatilityModel::StudentRenormalised { nu } => Sampler::Student {
                chi2: ChiSquared::new(nu).map_err(|e| Error::domain(e.to_string()))?,
                nu,
                scale: ((nu - 2.0) / nu).sqrt(),
            },
            VolatilityModel::Constant { sigma0 } => Sampler::Constant(sigma0),
            VolatilityModel::StandardNormal => Sampler::Normal,
        })
    }
}

/// Law of the i.i.d. noise entries `Z_{t,s}`; all have mean 0, variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    Gaussian,
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    UniformRenormalised,
}

impl NoiseModel {
    pub fn sampler(&self) -> Sampler {
        match self {
            NoiseModel::Gaussian => Sampler::Normal,
            NoiseModel::Rademacher => Sampler::Rademacher,
            NoiseModel::UniformRenormalised => Sampler::Uniform(3f64.sqrt()),
        }
    }
}

/// Prepared sampler for one of the laws above.
#[derive(Debug, Clone)]
pub enum Sampler {
    Student { chi2: ChiSquared<f64>, nu: f64, scale: f64 },
    Constant(f64),
    Normal,
    Rademacher,
    Uniform(f64),
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Student { chi2, nu, scale } => {
                let z: f64 = rng.sample(StandardNormal);
                let v = chi2.sample(rng);
                scale * z / (v / nu).sqrt()
            }
            Sampler::Constant(c) => *c,
            Sampler::Normal => rng.sample(StandardNormal),
            Sampler::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Sampler::Uniform(h) => rng.gen_range(-*h..*h),
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out {
            *v = self.draw(rng);
        }
    }
}

/// Either kind of law, for [`sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    Volatility(VolatilityModel),
    Noise(NoiseModel),
}

impl From<VolatilityModel> for Law {
    fn from(v: VolatilityModel) -> Self {
        Law::Volatility(v)
    }
}

impl From<NoiseModel> for Law {
    fn from(n: NoiseModel) -> Self {
        Law::Noise(n)
    }
}

/// `count` draws from `law`, reproducible from `seed` (stream 0).
pub fn sample(law: impl Into<Law>, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let sampler = match law.into() {
        Law::Volatility(v) => v.sampler()?,
        Law::Noise(n) => n.sampler(),
    };
    let mut rng = stream_rng(seed, 0);
    let mut out = vec![0.0; count];
    sampler.fill(&mut rng, &mut out);
    Ok(out)
}

fn check_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Student degrees of freedom must exceed 2 for a unit-variance renormalisation, got {nu}"
        )))
    }
}

/// `Γ((ν+1)/2) / (√((ν−2)π) Γ(ν/2))`.
fn student_renorm_constant(nu: f64) -> f64 {
    (ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu)).exp() / ((nu - 2.0) * PI).sqrt()
}

/// Density of the unit-variance Student(ν) law.
pub fn student_renorm_pdf(nu: f64, t: f64) -> Result<f64> {
    check_nu(nu)?;
    if nu == 3.0 {
        // Exact constant 2/π; avoids the gamma round trip.
        return Ok(2.0 / PI / (1.0 + t * t).powi(2));
    }
    Ok(student_renorm_constant(nu) * (1.0 + t * t / (nu - 2.0)).powf(-0.5 * (nu + 1.0)))
}

/// Density `h_ν(τ)` of `σ²` for unit-variance Student(ν) `σ`.
pub fn h_nu_pdf(nu: f64, tau: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(tau > 0.0) {
        return Err(Error::domain(format!("h_nu is defined for tau > 0, got {tau}")));
    }
    if nu == 3.0 {
        return Ok(2.0 / PI / ((1.0 + tau).powi(2) * tau.sqrt()));
    }
    Ok(student_renorm_constant(nu) * (1.0 + tau / (nu - 2.0)).powf(-0.5 * (nu + 1.0)) / tau.sqrt())
}

/// `1 − H₃(τ) = (2/π)(arctan(1/√τ) − √τ/(1+τ))`, the tail of `σ²` for ν = 3.
pub fn h3_tail(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::domain(format!("h3_tail is defined for tau > 0, got {tau}")));
    }
    if tau.is_infinite() {
        return Ok(0.0);
    }
    let u = 1.0 / tau.sqrt();
    let bracket = if u < 0.1 {
        // arctan(u) − u/(1+u²) = Σ_{k≥1} (−1)^{k+1} 2k/(2k+1) u^{2k+1}; the direct
        // difference cancels catastrophically for large τ.
        let u2 = u * u;
        let mut term = u * u2;
        let mut sum = 0.0;
        for k in 1..=12 {
            let kf = k as f64;
            let c = 2.0 * kf / (2.0 * kf + 1.0);
            if k % 2 == 1 {
                sum += c * term;
            } else {
                sum -= c * term;
            }
            term *= u2;
        }
        sum
    } else {
        u.atan() - u / (1.0 + u * u)
    };
    Ok(2.0 / PI * bracket)
}

/// Fréchet law `P(ξ ≤ x) = exp(−x^{−shape})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetLaw {
    pub shape: f64,
}

impl FrechetLaw {
    pub fn new(shape: f64) -> Result<Self> {
        if shape.is_finite() && shape > 0.0 {
            Ok(FrechetLaw { shape })
        } else {
            Err(Error::domain(format!("Fréchet shape must be positive, got {shape}")))
        }
    }

    /// Limit law of the rescaled largest eigenvalue for volatility tail exponent `alpha`.
    pub fn for_tail_exponent(alpha: f64) -> Result<Self> {
        Self::new(alpha / 2.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        frechet_cdf(*self, x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let p = x.powf(-self.shape);
        self.shape * p / x * (-p).exp()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else if p >= 1.0 {
            f64::INFINITY
        } else {
            (-p.ln()).powf(-1.0 / self.shape)
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        self.quantile(u)
    }
}

pub fn frechet_cdf(law: FrechetLaw, x: f64) -> f64 {
    if x > 0.0 {
        (-x.powf(-law.shape)).exp()
    } else {
        0.0
    }
}
