//! Limiting spectral density of `A = XᵀX/T` as `T/S → y`.
//!
//! For unit-variance Student(3) volatilities the Stieltjes transform `s(z)`
//! of the limit solves
//!
//! ```text
//! 1/s + z = 1/(1 + √(s/y))²          (principal square root)
//! ```
//!
//! Squaring gives a quartic in `s`; for `x` inside the support it has exactly
//! one root in the upper half plane, and Ferrari's construction through the
//! resolvent cubic yields the density in closed form ([`closed_form_density`]).
//! Two independent routes check it: polishing the companion-matrix roots of
//! the quartic ([`quartic_root_oracle`]) and solving the general fixed-point
//! equation slightly above the real axis ([`stieltjes_inversion_density`]).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{h_nu_pdf, VolatilityModel};
use crate::error::{Error, Result};
use crate::precision::{Real, Wide};
use crate::quadrature::integrate_half_line;

/// Limit of `T/S`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AspectRatio(f64);

impl AspectRatio {
    pub fn new(y: f64) -> Result<Self> {
        if y.is_finite() && y > 0.0 {
            Ok(AspectRatio(y))
        } else {
            Err(Error::domain(format!(
                "aspect ratio must be positive and finite, got {y}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `G(x; y) = y³(x−1)³ + 3y²(x²+7x+1) + 3y(x−1) + 1`.
///
/// Positive exactly when the quartic has a complex-conjugate pair of roots,
/// i.e. strictly inside the support; zero at the spectral edge.
pub fn support_cubic(x: f64, y: AspectRatio) -> f64 {
    support_cubic_in(x, y.0)
}

fn support_cubic_in<R: Real>(x: R, y: R) -> R {
    let one = R::from_f64(1.0);
    let three = R::from_f64(3.0);
    let xm1 = x.clone() - one.clone();
    y.powi(3) * xm1.powi(3)
        + three.clone() * y.powi(2) * (x.clone() * x.clone() + R::from_f64(7.0) * x + one.clone())
        + three * y * xm1
        + one
}

/// Left edge `(∛y − 1)³ / y` of the continuous support.
pub fn spectral_edge(y: AspectRatio) -> f64 {
    let c = y.0.cbrt() - 1.0;
    c * c * c / y.0
}

/// Constant `c(y) = 2/(π√y)` with `ρ(x) ~ c(y)·x^{−5/2}` as `x → ∞`.
pub fn tail_asymptote(y: AspectRatio) -> f64 {
    2.0 / (PI * y.0.sqrt())
}

/// Quantities of the resolvent-cubic construction at one `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticIntermediates<R = f64> {
    pub q: R,
    pub w_star: R,
    pub a: R,
    pub b: R,
    pub c: R,
    pub r_plus: R,
    pub r_minus: R,
}

impl<R: Real> QuarticIntermediates<R> {
    /// Evaluates the construction; meaningful only where `G(x; y) > 0`.
    pub fn evaluate(x: f64, y: f64) -> Self {
        let x = R::from_f64(x);
        let y = R::from_f64(y);
        let n = |v: f64| R::from_f64(v);
        let one = n(1.0);
        let x2 = x.clone() * x.clone();
        let xm1 = x.clone() - one.clone();
        let xp1 = x.clone() + one.clone();

        let g = support_cubic_in(x.clone(), y.clone());
        let radical = x.clone() * x.sqrt() * (n(3.0) * g).sqrt();

        let q = y.powi(6) * xm1.powi(6)
            + n(6.0) * y.powi(5) * xm1.powi(3) * (x2.clone() + n(4.0) * x.clone() + one.clone())
            + n(3.0)
                * y.powi(4)
                * (n(5.0) * x.powi(4) + n(16.0) * x.powi(3) + n(30.0) * x2.clone() + n(16.0) * x.clone() + n(5.0))
            + n(3.0) * y.powi(2) * (n(5.0) * x2.clone() + n(2.0) * x.clone() + n(5.0))
            + n(4.0)
                * y.powi(3)
                * (n(6.0) * radical + n(5.0) * x.powi(3) + n(12.0) * x2.clone() - n(12.0) * x.clone() - n(5.0))
            + n(6.0) * y.clone() * xm1.clone()
            + one.clone();

        let a = -(y.powi(2) * (x2.clone() + n(10.0) * x.clone() + one.clone())
            + n(2.0) * y.clone() * xm1.clone()
            + one.clone())
            / (n(2.0) * x2.clone());
        let b = -(n(4.0) * y.powi(3) * xp1.clone()) / x2.clone();
        let c = (y.powi(4) * xp1.powi(2) * (x2.clone() - n(14.0) * x.clone() + one.clone())
            + n(4.0) * y.powi(3) * xm1.clone() * xp1.powi(2)
            + n(6.0) * y.powi(2) * xp1.powi(2)
            + n(4.0) * y.clone() * xm1.clone()
            + one.clone())
            / (n(16.0) * x2.powi(2));

        // Cardano on the resolvent cubic: w* = A/6 + (∛q + N/∛q)/(6x²).
        let numer = y.powi(4) * xm1.powi(4)
            + n(4.0) * y.powi(3) * (x.powi(3) + n(3.0) * x2.clone() - n(3.0) * x.clone() - one.clone())
            + n(6.0) * y.powi(2) * xp1.powi(2)
            + n(4.0) * y * xm1
            + one;
        let cq = q.cbrt();
        let w_star = a.clone() / n(6.0) + (cq.clone() + numer / cq) / (n(6.0) * x2);

        let r_plus = n(2.0) * w_star.clone() - a.clone();
        let r_minus = -(n(2.0) * w_star.clone()) - a.clone();
        QuarticIntermediates {
            q,
            w_star,
            a,
            b,
            c,
            r_plus,
            r_minus,
        }
    }

    /// `|P(w*)|` relative to the size of its terms, `P(w) = (2w − A)(w² − C) − B²/4`.
    pub fn resolvent_residual(&self) -> f64 {
        let w2 = self.w_star.clone() * self.w_star.clone();
        let lin = R::from_f64(2.0) * self.w_star.clone() - self.a.clone();
        let b2 = self.b.clone() * self.b.clone() / R::from_f64(4.0);
        let p = lin.clone() * (w2.clone() - self.c.clone()) - b2.clone();
        let scale = lin.abs() * (w2 + self.c.abs()) + b2;
        (p.abs() / scale).to_f64()
    }

    /// Argument of the outer square root, `−R⁻ − 2B/√R⁺`.
    pub fn density_radicand(&self) -> R {
        -self.r_minus.clone() - R::from_f64(2.0) * self.b.clone() / self.r_plus.sqrt()
    }

    fn radicand_scale(&self) -> f64 {
        let two = R::from_f64(2.0);
        (two.clone() * self.w_star.abs() + self.a.abs() + (two * self.b.clone() / self.r_plus.sqrt()).abs()).to_f64()
    }
}

/// Arithmetic used for a closed-form evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    Wide,
}

/// Closed-form density at one point with evaluation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormPoint {
    pub rho: f64,
    pub precision: Precision,
    /// The radicand came out slightly negative from rounding and was set to 0.
    pub clamped: bool,
}

/// Largest accepted relative residual of `w*` in the resolvent cubic.
pub const RESOLVENT_TOL: f64 = 1e-9;
/// Most negative radicand accepted (and clamped to zero).
pub const RADICAND_CLAMP: f64 = -1e-9;
/// Estimated relative rounding error of the radicand above which the
/// evaluation is repeated in [`Wide`] arithmetic.
const DOUBLE_RADICAND_RTOL: f64 = 1e-10;

/// Limiting density `ρ(x)` for Student(3) volatilities, `y > 1`.
pub fn closed_form_density(x: f64, y: AspectRatio) -> Result<f64> {
    closed_form_point(x, y).map(|p| p.rho)
}

pub fn closed_form_point(x: f64, y: AspectRatio) -> Result<ClosedFormPoint> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!(
            "closed-form density needs finite x > 0, got {x}"
        )));
    }
    if y.0 <= 1.0 {
        return Err(Error::domain(format!(
            "closed-form density is established for y > 1 only (got {}); use an oracle",
            y.0
        )));
    }
    if support_cubic(x, y) <= 0.0 {
        return Ok(ClosedFormPoint {
            rho: 0.0,
            precision: Precision::Double,
            clamped: false,
        });
    }

    let fast = QuarticIntermediates::<f64>::evaluate(x, y.0);
    let radicand = fast.density_radicand();
    let rounding = 64.0 * f64::EPSILON * fast.radicand_scale();
    let trustworthy = fast.resolvent_residual() <= RESOLVENT_TOL
        && fast.r_plus > 0.0
        && radicand.is_finite()
        && rounding <= DOUBLE_RADICAND_RTOL * radicand.abs();
    if trustworthy {
        return finish(radicand, Precision::Double);
    }

    let wide = QuarticIntermediates::<Wide>::evaluate(x, y.0);
    let residual = wide.resolvent_residual();
    if !(residual <= RESOLVENT_TOL) {
        return Err(Error::numerical(
            "closed_form_density",
            format!("resolvent cubic residual {residual:e} at x = {x}, y = {}", y.0),
        ));
    }
    if !(wide.r_plus > Wide::zero()) {
        return Err(Error::numerical(
            "closed_form_density",
            format!(
                "R+ = {:e} is not positive at x = {x}, y = {}",
                wide.r_plus.to_f64(),
                y.0
            ),
        ));
    }
    finish(wide.density_radicand().to_f64(), Precision::Wide)
}

fn finish(radicand: f64, precision: Precision) -> Result<ClosedFormPoint> {
    if radicand >= 0.0 {
        Ok(ClosedFormPoint {
            rho: radicand.sqrt() / (2.0 * PI),
            precision,
            clamped: false,
        })
    } else if radicand >= RADICAND_CLAMP {
        log::debug!("clamping radicand {radicand:e} to zero");
        Ok(ClosedFormPoint {
            rho: 0.0,
            precision,
            clamped: true,
        })
    } else {
        Err(Error::numerical(
            "closed_form_density",
            format!("negative radicand {radicand:e} inside the support"),
        ))
    }
}

/// A solution of the Stieltjes equation at `z` (with `Im z ≥ 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesPoint {
    pub z: Complex64,
    pub s: Complex64,
}

impl StieltjesPoint {
    /// Scaled residual of `1/s + z = 1/(1 + √(s/y))²`.
    pub fn residual(&self, y: AspectRatio) -> f64 {
        student3_residual(self.s, self.z, y.0)
    }
}

fn student3_residual(s: Complex64, z: Complex64, y: f64) -> f64 {
    let rhs = student3_resolvent(s / y);
    let lhs = s.inv() + z;
    (lhs - rhs).norm() / (s.inv().norm() + z.norm() + rhs.norm())
}

/// `∫ τ dH₃(τ)/(1 + τw) = 1/(1 + √w)²`.
fn student3_resolvent(w: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) + w.sqrt();
    (d * d).inv()
}

/// Coefficients (constant term first) of
/// `Q(s) = 4s(sz+1)²/y − (s − (s/y + 1)(sz + 1))²`.
pub fn quartic_coefficients(z: f64, y: f64) -> [f64; 5] {
    let a2 = -z / y;
    let a1 = 1.0 - 1.0 / y - z;
    let a0 = -1.0;
    [
        -a0 * a0,
        4.0 / y - 2.0 * a1 * a0,
        8.0 * z / y - a1 * a1 - 2.0 * a2 * a0,
        4.0 * z * z / y - 2.0 * a2 * a1,
        -a2 * a2,
    ]
}

fn horner(coeffs: &[f64], s: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * s + p;
        p = p * s + c;
    }
    (p, dp)
}

/// All complex roots of a real polynomial (constant term first) from the
/// eigenvalues of its companion matrix, each polished by Newton steps.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    let lead = *coeffs.last().unwrap_or(&0.0);
    if degree == 0 || lead == 0.0 {
        return Err(Error::domain(
            "polynomial must have degree ≥ 1 and a nonzero leading coefficient",
        ));
    }
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }
    let eig = companion
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("polynomial_roots", "Schur iteration did not converge"))?
        .complex_eigenvalues();
    let roots: Vec<Complex64> = eig
        .iter()
        .map(|&r| {
            let mut s = r;
            for _ in 0..3 {
                let (p, dp) = horner(coeffs, s);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !step.is_finite() {
                    break;
                }
                s -= step;
            }
            // keep the polish only if it helped
            if horner(coeffs, s).0.norm() <= horner(coeffs, r).0.norm() {
                s
            } else {
                r
            }
        })
        .collect();
    Ok(roots)
}

/// Largest accepted residual of the un-squared equation for a quartic root.
pub const SPURIOUS_ROOT_TOL: f64 = 1e-6;

/// Upper-half-plane root of the quartic that also solves the un-squared
/// equation at `z = x`, or `None` outside the support.
pub fn quartic_stieltjes_point(x: f64, y: AspectRatio) -> Result<Option<StieltjesPoint>> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("quartic oracle needs finite x > 0, got {x}")));
    }
    let z = Complex64::new(x, 0.0);
    let roots = polynomial_roots(&quartic_coefficients(x, y.0))?;
    let mut accepted = roots
        .into_iter()
        .filter(|s| s.im > 1e-12 * s.norm().max(1.0))
        .filter(|&s| student3_residual(s, z, y.0) <= SPURIOUS_ROOT_TOL);
    let first = accepted.next();
    if let Some(second) = accepted.next() {
        return Err(Error::numerical(
            "quartic_root_oracle",
            format!(
                "two upper-half-plane solutions {} and {} at x = {x}, y = {}",
                first.unwrap(),
                second,
                y.0
            ),
        ));
    }
    Ok(first.map(|s| StieltjesPoint { z, s }))
}

/// `Im s(x)/π` from the companion-matrix roots of the squared equation.
pub fn quartic_root_oracle(x: f64, y: AspectRatio) -> Result<f64> {
    Ok(quartic_stieltjes_point(x, y)?.map_or(0.0, |p| p.s.im / PI))
}

/// Stieltjes transform of the Marchenko–Pastur law with ratio `c` (unit
/// variance), branch with `Im m > 0` for `Im z > 0`.
pub fn mp_stieltjes(z: Complex64, ratio: f64) -> Complex64 {
    let c = ratio;
    let d = ((z - 1.0 - c) * (z - 1.0 - c) - 4.0 * c).sqrt();
    let m1 = (1.0 - c - z + d) / (2.0 * c * z);
    let m2 = (1.0 - c - z - d) / (2.0 * c * z);
    if m1.im >= m2.im {
        m1
    } else {
        m2
    }
}

/// Marchenko–Pastur density (continuous part) with ratio `c = S/T`.
///
/// Support `[(1−√c)², (1+√c)²]`; for `c > 1` an additional atom of mass
/// [`mp_point_mass`] sits at zero.
pub fn mp_density(x: f64, ratio: f64) -> f64 {
    if !(ratio > 0.0) {
        return 0.0;
    }
    let lo = (1.0 - ratio.sqrt()).powi(2);
    let hi = (1.0 + ratio.sqrt()).powi(2);
    if x <= lo || x >= hi || x <= 0.0 {
        return 0.0;
    }
    ((hi - x) * (x - lo)).sqrt() / (2.0 * PI * ratio * x)
}

pub fn mp_point_mass(ratio: f64) -> f64 {
    if ratio > 1.0 {
        1.0 - 1.0 / ratio
    } else {
        0.0
    }
}

/// Settings of the ε → 0⁺ inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionSettings {
    /// Geometric schedule, largest first.
    pub epsilons: Vec<f64>,
    pub damping: f64,
    pub max_iterations: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
    pub quadrature_rtol: f64,
}

impl Default for InversionSettings {
    fn default() -> Self {
        InversionSettings {
            epsilons: vec![1e-2, 1e-3, 1e-4],
            damping: 0.5,
            max_iterations: 10_000,
            step_tol: 1e-12,
            residual_tol: 1e-10,
            quadrature_rtol: 1e-10,
        }
    }
}

/// `∫ τ dH(τ)/(1 + τw)` for the law `H` of `σ²`.
pub fn resolvent_integral(vol: &VolatilityModel, w: Complex64, rtol: f64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    match *vol {
        VolatilityModel::StudentRenormalised { nu: 3.0 } => Ok(student3_resolvent(w)),
        VolatilityModel::StudentRenormalised { nu } => {
            let est = integrate_half_line(
                |tau| {
                    let h = h_nu_pdf(nu, tau).unwrap_or(0.0);
                    (one + w * tau).inv() * (tau * h)
                },
                1e-300,
                rtol,
            )?;
            Ok(est.value)
        }
        VolatilityModel::Constant { sigma0 } => {
            let t = sigma0 * sigma0;
            Ok((one + w * t).inv() * t)
        }
        VolatilityModel::StandardNormal => {
            // σ² ~ χ²₁
            let norm = 1.0 / (2.0 * PI).sqrt();
            let est = integrate_half_line(
                |tau| (one + w * tau).inv() * (tau.sqrt() * (-0.5 * tau).exp() * norm),
                1e-300,
                rtol,
            )?;
            Ok(est.value)
        }
    }
}

/// Solves `s = 1/(∫ τ dH/(1 + τs/y) − z)` by damped iteration from the
/// Marchenko–Pastur value; `z` must lie in the upper half plane.
pub fn solve_stieltjes(
    z: Complex64,
    y: AspectRatio,
    vol: &VolatilityModel,
    settings: &InversionSettings,
) -> Result<StieltjesPoint> {
    if !(z.im > 0.0) {
        return Err(Error::domain("fixed-point solve needs Im z > 0"));
    }
    let lambda = settings.damping;
    let residual_of = |s: Complex64| -> Result<f64> {
        let integral = resolvent_integral(vol, s / y.0, settings.quadrature_rtol)?;
        Ok((s.inv() + z - integral).norm() / (s.inv().norm() + z.norm() + integral.norm()))
    };
    let mut s = mp_stieltjes(z, 1.0 / y.0);
    let mut step = f64::INFINITY;
    for _ in 0..settings.max_iterations {
        let integral = resolvent_integral(vol, s / y.0, settings.quadrature_rtol)?;
        let mapped = (integral - z).inv();
        let next = s * (1.0 - lambda) + mapped * lambda;
        step = (next - s).norm();
        s = next;
        if step <= settings.step_tol * s.norm().max(1e-300) {
            let residual = residual_of(s)?;
            if residual <= settings.residual_tol {
                return Ok(StieltjesPoint { z, s });
            }
        }
    }
    Err(Error::NonConvergence {
        routine: "stieltjes fixed point",
        iterations: settings.max_iterations,
        residual: residual_of(s).unwrap_or(step),
    })
}

/// Density from `Im s(x + iε)/π` over the ε schedule, extrapolated to ε = 0
/// with a Richardson (Neville) tableau.
pub fn stieltjes_inversion_density(x: f64, y: AspectRatio, vol: &VolatilityModel) -> Result<f64> {
    stieltjes_inversion_with(x, y, vol, &InversionSettings::default())
}

pub fn stieltjes_inversion_with(
    x: f64,
    y: AspectRatio,
    vol: &VolatilityModel,
    settings: &InversionSettings,
) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("inversion needs finite x > 0, got {x}")));
    }
    vol.validate()?;
    if (vol.second_moment() - 1.0).abs() > 1e-12 {
        return Err(Error::domain(
            "inversion assumes a unit second moment of the volatility",
        ));
    }
    if settings.epsilons.is_empty() {
        return Err(Error::domain("empty epsilon schedule"));
    }
    let samples = settings
        .epsilons
        .iter()
        .map(|&eps| {
            let p = solve_stieltjes(Complex64::new(x, eps), y, vol, settings)?;
            Ok((eps, p.s.im / PI))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson_to_zero(&samples).max(0.0))
}

/// Polynomial extrapolation of `f(ε)` to `ε = 0` (Neville's scheme).
pub fn richardson_to_zero(samples: &[(f64, f64)]) -> f64 {
    let mut table: Vec<f64> = samples.iter().map(|p| p.1).collect();
    let n = table.len();
    for level in 1..n {
        for i in (level..n).rev() {
            let (e_hi, e_lo) = (samples[i - level].0, samples[i].0);
            table[i] = (e_hi * table[i] - e_lo * table[i - 1]) / (e_hi - e_lo);
        }
    }
    table[n - 1]
}

/// Evaluator behind a [`DensityCurve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    ClosedForm,
    StieltjesInversion,
    QuarticOracle,
    MarchenkoPastur,
}

impl DensityMethod {
    pub fn name(self) -> &'static str {
        match self {
            DensityMethod::ClosedForm => "closed_form",
            DensityMethod::StieltjesInversion => "stieltjes_inversion",
            DensityMethod::QuarticOracle => "quartic_oracle",
            DensityMethod::MarchenkoPastur => "marchenko_pastur",
        }
    }
}

/// Density values on a grid, with the method that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub y: AspectRatio,
    pub xs: Vec<f64>,
    pub rhos: Vec<f64>,
    pub method: DensityMethod,
}

impl DensityCurve {
    pub fn max_abs_diff(&self, other: &DensityCurve) -> Option<f64> {
        if self.xs != other.xs {
            return None;
        }
        Some(
            self.rhos
                .iter()
                .zip(&other.rhos)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Evaluates `method` on `grid` with Student(3) volatility.
pub fn density_curve(y: AspectRatio, grid: &[f64], method: DensityMethod) -> Result<DensityCurve> {
    density_curve_with(y, grid, method, &VolatilityModel::StudentRenormalised { nu: 3.0 })
}

/// Like [`density_curve`]; `vol` is used by the inversion method only.
/// Marchenko–Pastur curves use ratio `1/y`.
pub fn density_curve_with(
    y: AspectRatio,
    grid: &[f64],
    method: DensityMethod,
    vol: &VolatilityModel,
) -> Result<DensityCurve> {
    if grid.is_empty() {
        return Err(Error::domain("density grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("density grid must be strictly increasing"));
    }
    let rhos = grid
        .par_iter()
        .map(|&x| {
            let value = match method {
                DensityMethod::ClosedForm => {
                    if x <= 0.0 {
                        Ok(0.0)
                    } else {
                        closed_form_density(x, y)
                    }
                }
                DensityMethod::QuarticOracle => {
                    if x <= 0.0 {
                        Ok(0.0)
                    } else {
                        quartic_root_oracle(x, y)
                    }
                }
                DensityMethod::StieltjesInversion => {
                    if x <= 0.0 {
                        Ok(0.0)
                    } else {
                        stieltjes_inversion_density(x, y, vol)
                    }
                }
                DensityMethod::MarchenkoPastur => Ok(mp_density(x, 1.0 / y.value())),
            };
            value.map_err(|e| Error::AtPoint { x, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve {
        y,
        xs: grid.to_vec(),
        rhos,
        method,
    })
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
