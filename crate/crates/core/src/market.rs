//! Returns panels: log-returns, column renormalisation, market-mode
//! clearing, time blocks, row volatilities, tail fits and spillover pairs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CellError, Error, Result};
use crate::linalg::symmetric_eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Raw,
    Renormalised,
    Cleared,
}

/// `T×S` returns with labels. Rows are time intervals, columns are stocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    pub values: DMatrix<f64>,
    pub tickers: Vec<String>,
    pub timestamps: Vec<String>,
    pub stage: Stage,
}

impl ReturnsPanel {
    pub fn new(values: DMatrix<f64>, tickers: Vec<String>, timestamps: Vec<String>, stage: Stage) -> Result<Self> {
        if values.ncols() != tickers.len() || values.nrows() != timestamps.len() {
            return Err(Error::domain(format!(
                "panel is {}×{} but has {} timestamps and {} tickers",
                values.nrows(),
                values.ncols(),
                timestamps.len(),
                tickers.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (k % values.nrows(), k / values.nrows());
            return Err(Error::domain(format!(
                "non-finite value at row {r}, column {}",
                tickers[c]
            )));
        }
        Ok(ReturnsPanel {
            values,
            tickers,
            timestamps,
            stage,
        })
    }

    /// Unlabelled panel with tickers `s0, s1, …` and timestamps `0, 1, …`.
    pub fn from_matrix(values: DMatrix<f64>, stage: Stage) -> Result<Self> {
        let tickers = (0..values.ncols()).map(|s| format!("s{s}")).collect();
        let timestamps = (0..values.nrows()).map(|t| t.to_string()).collect();
        Self::new(values, tickers, timestamps, stage)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, ticker: &str) -> Result<usize> {
        self.tickers
            .iter()
            .position(|t| t == ticker)
            .ok_or_else(|| Error::domain(format!("unknown ticker {ticker}")))
    }

    /// `XᵀX/T`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.values.tr_mul(&self.values) / self.rows() as f64
    }
}

/// Log-returns `ln(close/open)`; a cell where either price is NaN counts as
/// missing and becomes 0.
pub fn log_returns(
    open: &DMatrix<f64>,
    close: &DMatrix<f64>,
    tickers: Vec<String>,
    timestamps: Vec<String>,
) -> Result<ReturnsPanel> {
    if open.shape() != close.shape() {
        return Err(Error::domain(format!(
            "open prices are {:?} but close prices are {:?}",
            open.shape(),
            close.shape()
        )));
    }
    let (t, s) = open.shape();
    let mut bad = Vec::new();
    let mut values = DMatrix::zeros(t, s);
    for c in 0..s {
        for r in 0..t {
            let (o, cl) = (open[(r, c)], close[(r, c)]);
            if o.is_nan() || cl.is_nan() {
                continue;
            }
            if !(o > 0.0 && cl > 0.0 && o.is_finite() && cl.is_finite()) {
                bad.push(CellError {
                    row: r,
                    column: c,
                    open: o,
                    close: cl,
                });
                continue;
            }
            values[(r, c)] = (cl / o).ln();
        }
    }
    if !bad.is_empty() {
        bad.sort_by_key(|e| (e.row, e.column));
        return Err(Error::InvalidPrices(bad));
    }
    ReturnsPanel::new(values, tickers, timestamps, Stage::Raw)
}

/// Mean and unbiased standard deviation of a column, centring twice so the
/// residual mean is at rounding level.
fn centre(col: &mut [f64]) -> f64 {
    let n = col.len() as f64;
    for _ in 0..2 {
        let mean = col.iter().sum::<f64>() / n;
        col.iter_mut().for_each(|v| *v -= mean);
    }
    (col.iter().map(|v| v * v).sum::<f64>() / (n - 1.0)).sqrt()
}

fn is_degenerate(std: f64, scale: f64) -> bool {
    !(std > 1e-13 * scale) || std == 0.0
}

/// Columns shifted to mean 0 and scaled to unbiased standard deviation 1.
pub fn renormalise(panel: &ReturnsPanel) -> Result<ReturnsPanel> {
    let t = panel.rows();
    if t < 2 {
        return Err(Error::domain("renormalisation needs at least two rows"));
    }
    let mut values = panel.values.clone();
    for (c, mut col) in values.column_iter_mut().enumerate() {
        let scale = col.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let slice = col.as_mut_slice();
        let std = centre(slice);
        if is_degenerate(std, scale) {
            return Err(Error::ZeroVariance {
                ticker: panel.tickers[c].clone(),
            });
        }
        slice.iter_mut().for_each(|v| *v /= std);
    }
    Ok(ReturnsPanel {
        values,
        tickers: panel.tickers.clone(),
        timestamps: panel.timestamps.clone(),
        stage: Stage::Renormalised,
    })
}

/// [`renormalise`] after dropping zero-variance columns, which are returned.
pub fn renormalise_dropping(panel: &ReturnsPanel) -> Result<(ReturnsPanel, Vec<String>)> {
    if panel.rows() < 2 {
        return Err(Error::domain("renormalisation needs at least two rows"));
    }
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (c, col) in panel.values.column_iter().enumerate() {
        let scale = col.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let mut copy: Vec<f64> = col.iter().copied().collect();
        if is_degenerate(centre(&mut copy), scale) {
            log::warn!("dropping constant column {}", panel.tickers[c]);
            dropped.push(panel.tickers[c].clone());
        } else {
            keep.push(c);
        }
    }
    if keep.is_empty() {
        return Err(Error::Input("every column has zero variance".into()));
    }
    let values = panel.values.select_columns(&keep);
    let tickers = keep.iter().map(|&c| panel.tickers[c].clone()).collect();
    let trimmed = ReturnsPanel::new(values, tickers, panel.timestamps.clone(), panel.stage)?;
    Ok((renormalise(&trimmed)?, dropped))
}

/// Top eigenpair of `XᵀX/T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketMode {
    /// Unit vector, sign fixed so that its entries sum to a nonnegative value.
    pub vector: DVector<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;
/// Relative gap below which the top eigenvector is considered ambiguous.
pub const MODE_GAP_TOL: f64 = 1e-10;

/// Top eigenvector of the Gram matrix by power iteration.
///
/// The start vector is the normalised column-sum vector of the Gram matrix
/// (column sums of a renormalised panel itself vanish). The iteration runs
/// on `G − μI` with `μ` halfway between the smallest and second-largest
/// eigenvalues, which leaves the eigenvector unchanged and speeds up
/// convergence.
pub fn market_mode(panel: &ReturnsPanel) -> Result<MarketMode> {
    let s = panel.cols();
    if s == 0 || panel.rows() == 0 {
        return Err(Error::domain("empty panel"));
    }
    let g = panel.gram();
    let ev = symmetric_eigenvalues(&g)?;
    let top = ev[s - 1];
    if s == 1 {
        return Ok(MarketMode {
            vector: DVector::from_element(1, 1.0),
            eigenvalue: top,
            iterations: 0,
        });
    }
    let second = ev[s - 2];
    if !(top > 0.0) || top - second <= MODE_GAP_TOL * top {
        return Err(Error::numerical(
            "market_mode",
            format!("top eigenvalue {top:e} is not separated from {second:e}; the market mode is ambiguous"),
        ));
    }
    let shift = 0.5 * (ev[0] + second);
    let ones = DVector::from_element(s, 1.0);
    let mut v = &g * &ones;
    if v.norm() <= f64::EPSILON * top * (s as f64) {
        v = ones;
    }
    v /= v.norm();
    for it in 1..=POWER_MAX_ITER {
        let mut next = &g * &v - &v * shift;
        let norm = next.norm();
        if norm == 0.0 {
            return Err(Error::numerical("market_mode", "power iteration collapsed to zero"));
        }
        next /= norm;
        if next.dot(&v) < 0.0 {
            next = -next;
        }
        let step = (&next - &v).norm();
        v = next;
        if step <= POWER_TOL {
            if v.sum() < 0.0 {
                v = -v;
            }
            let eigenvalue = v.dot(&(&g * &v));
            return Ok(MarketMode {
                vector: v,
                eigenvalue,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        routine: "market_mode power iteration",
        iterations: POWER_MAX_ITER,
        residual: (&g * &v - &v * v.dot(&(&g * &v))).norm(),
    })
}

/// Rows replaced by `y_t − ⟨y_t, v⟩v` for a unit vector `v`.
pub fn project_out(panel: &ReturnsPanel, v: &DVector<f64>) -> Result<ReturnsPanel> {
    if v.len() != panel.cols() {
        return Err(Error::domain("projection vector has the wrong length"));
    }
    let coeffs = &panel.values * v;
    let values = &panel.values - coeffs * v.transpose();
    ReturnsPanel::new(values, panel.tickers.clone(), panel.timestamps.clone(), Stage::Raw)
}

/// Intermediate results of [`clear_market_mode`].
#[derive(Debug, Clone, PartialEq)]
pub struct Clearing {
    pub mode: MarketMode,
    /// Projected panel before the second renormalisation.
    pub projected: ReturnsPanel,
    pub cleared: ReturnsPanel,
}

/// Removes the market mode from a renormalised panel and renormalises again.
pub fn clear_market_mode(panel: &ReturnsPanel) -> Result<ReturnsPanel> {
    clear_market_mode_detailed(panel).map(|c| c.cleared)
}

pub fn clear_market_mode_detailed(panel: &ReturnsPanel) -> Result<Clearing> {
    if panel.stage == Stage::Raw {
        return Err(Error::domain("clearing needs a renormalised panel"));
    }
    let mode = market_mode(panel)?;
    let projected = project_out(panel, &mode.vector)?;
    let mut cleared = renormalise(&projected)?;
    cleared.stage = Stage::Cleared;
    Ok(Clearing {
        mode,
        projected,
        cleared,
    })
}

/// `k` contiguous blocks of `⌊T/k⌋` rows; trailing rows are dropped.
pub fn split_blocks(panel: &ReturnsPanel, k: usize) -> Result<Vec<ReturnsPanel>> {
    let t = panel.rows();
    if k == 0 || k > t {
        return Err(Error::domain(format!("cannot split {t} rows into {k} blocks")));
    }
    let len = t / k;
    (0..k)
        .map(|b| {
            let rows = b * len..(b + 1) * len;
            ReturnsPanel::new(
                panel.values.rows(rows.start, len).into_owned(),
                panel.tickers.clone(),
                panel.timestamps[rows].to_vec(),
                if k == 1 { panel.stage } else { Stage::Raw },
            )
        })
        .collect()
}

/// Unbiased standard deviation of each row, an estimate of `|σ_t|`.
pub fn row_volatility(panel: &ReturnsPanel) -> Result<Vec<f64>> {
    let s = panel.cols();
    if s < 2 {
        return Err(Error::domain("row volatility needs at least two columns"));
    }
    Ok(panel
        .values
        .row_iter()
        .map(|r| {
            let mean = r.sum() / s as f64;
            (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s as f64 - 1.0)).sqrt()
        })
        .collect())
}

/// Quantiles of `ln|x|` over the nonzero entries, for box-whisker summaries.
pub fn log_abs_quantiles(values: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    let mut logs: Vec<f64> = values
        .iter()
        .filter(|v| **v != 0.0 && v.is_finite())
        .map(|v| v.abs().ln())
        .collect();
    if logs.is_empty() {
        return Err(Error::domain("no nonzero values"));
    }
    logs.sort_by(f64::total_cmp);
    probs
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("probability {p} outside [0, 1]")));
            }
            let pos = p * (logs.len() - 1) as f64;
            let (i, frac) = (pos.floor() as usize, pos.fract());
            let j = (i + 1).min(logs.len() - 1);
            Ok(logs[i] + frac * (logs[j] - logs[i]))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    Hill,
    LogLogRegression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent: f64,
    pub method: TailMethod,
    pub k_used: usize,
    pub stderr: f64,
}

/// Minimum number of values accepted by [`tail_exponent`].
pub const TAIL_MIN_VALUES: usize = 100;

/// Power-law tail exponent of the positive entries of `values`.
///
/// Hill uses the top `k` order statistics (default `⌈√n⌉`); the log-log
/// fit regresses `ln(1 − F̂)` on `ln x` over the top 5% with Hazen plotting
/// positions `(i − ½)/n`.
pub fn tail_exponent(values: &[f64], method: TailMethod, k: Option<usize>) -> Result<TailFit> {
    if values.len() < TAIL_MIN_VALUES {
        return Err(Error::domain(format!(
            "tail fit needs at least {TAIL_MIN_VALUES} values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("tail fit values contain NaN"));
    }
    let mut pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    let n = pos.len();
    match method {
        TailMethod::Hill => {
            let k = k.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize);
            if k == 0 || k >= n {
                return Err(Error::domain(format!(
                    "Hill needs 0 < k < {n} positive values, got k = {k}"
                )));
            }
            let threshold = pos[n - k - 1];
            let sum: f64 = pos[n - k..].iter().map(|x| (x / threshold).ln()).sum();
            if !(sum > 0.0) {
                return Err(Error::numerical("hill", "top order statistics are all equal"));
            }
            let exponent = k as f64 / sum;
            Ok(TailFit {
                exponent,
                method,
                k_used: k,
                stderr: exponent / (k as f64).sqrt(),
            })
        }
        TailMethod::LogLogRegression => {
            let m = k.unwrap_or_else(|| (0.05 * n as f64).ceil() as usize);
            if m < 3 || m >= n {
                return Err(Error::domain(format!("log-log fit needs 3 ≤ m < {n} points, got {m}")));
            }
            let pts: Vec<(f64, f64)> = (n - m..n)
                .map(|i| {
                    let survival = (n - i) as f64 - 0.5;
                    (pos[i].ln(), (survival / n as f64).ln())
                })
                .collect();
            let (slope, se) = least_squares_slope(&pts)?;
            Ok(TailFit {
                exponent: -slope,
                method,
                k_used: m,
                stderr: se,
            })
        }
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::numerical("log-log fit", "all abscissae coincide"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Ok((slope, (rss / (n - 2.0) / sxx).sqrt()))
}

/// Paired returns of two tickers.
pub fn spillover_pairs(panel: &ReturnsPanel, ticker_a: &str, ticker_b: &str) -> Result<Vec<(f64, f64)>> {
    let a = panel.column_index(ticker_a)?;
    let b = panel.column_index(ticker_b)?;
    Ok(panel
        .values
        .column(a)
        .iter()
        .zip(panel.values.column(b).iter())
        .map(|(x, y)| (*x, *y))
        .collect())
}

/// Fraction of pairs with both coordinates above `threshold` in absolute value.
pub fn joint_exceedance(pairs: &[(f64, f64)], threshold: f64) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs
        .iter()
        .filter(|(x, y)| x.abs() > threshold && y.abs() > threshold)
        .count() as f64
        / pairs.len() as f64
}

/// `n` points of the Pareto(α) law on `[1, ∞)` at the quantiles `(i − ½)/n`.
pub fn pareto_grid(alpha: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (1.0 - (i as f64 + 0.5) / n as f64).powf(-1.0 / alpha))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, VolatilityModel};
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_panel(t: usize, s: usize, seed: u64, market: f64) -> ReturnsPanel {
        let mut rng = stream_rng(seed, 0);
        let mut m = DMatrix::zeros(t, s);
        for r in 0..t {
            let common: f64 = rng.gen_range(-1.0..1.0);
            for c in 0..s {
                m[(r, c)] = market * common + rng.gen_range(-1.0..1.0) + 0.01 * c as f64;
            }
        }
        ReturnsPanel::from_matrix(m, Stage::Raw).unwrap()
    }

    fn assert_renormalised(p: &ReturnsPanel) {
        let t = p.rows() as f64;
        for col in p.values.column_iter() {
            let mean = col.sum() / t;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0)).sqrt();
            assert!(mean.abs() <= 1e-12, "{mean}");
            assert!((sd - 1.0).abs() <= 1e-12, "{sd}");
        }
    }

    #[test]
    fn log_return_cases() {
        let open = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, f64::NAN]);
        let mut close = open.clone();
        close[(0, 1)] = 2.0 * std::f64::consts::E;
        let p = log_returns(
            &open,
            &close,
            vec!["a".into(), "b".into()],
            vec!["t0".into(), "t1".into()],
        )
        .unwrap();
        assert_eq!(p.values[(0, 0)], 0.0);
        assert_relative_eq!(p.values[(0, 1)], 1.0, max_relative = 1e-15);
        assert_eq!(p.values[(1, 1)], 0.0);
        assert_eq!(p.stage, Stage::Raw);
        let mut bad = open.clone();
        bad[(1, 0)] = -1.0;
        bad[(0, 0)] = 0.0;
        match log_returns(
            &bad,
            &close,
            vec!["a".into(), "b".into()],
            vec!["t0".into(), "t1".into()],
        ) {
            Err(Error::InvalidPrices(cells)) => {
                assert_eq!(cells.len(), 2);
                assert_eq!((cells[0].row, cells[0].column), (0, 0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn price_round_trip() {
        let mut rng = stream_rng(2, 0);
        let r = DMatrix::from_fn(20, 3, |_, _| rng.gen_range(-0.05..0.05));
        let open = DMatrix::from_fn(20, 3, |i, j| 10.0 + i as f64 + j as f64);
        let close = open.zip_map(&r, |o, x| o * f64::exp(x));
        let p = log_returns(
            &open,
            &close,
            vec!["a".into(), "b".into(), "c".into()],
            (0..20).map(|i| i.to_string()).collect(),
        )
        .unwrap();
        for (a, b) in p.values.iter().zip(r.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn renormalise_two_points_and_idempotence() {
        let p = ReturnsPanel::from_matrix(DMatrix::from_column_slice(2, 1, &[1.0, 3.0]), Stage::Raw).unwrap();
        let r = renormalise(&p).unwrap();
        assert_relative_eq!(r.values[(0, 0)], -1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r.values[(1, 0)], 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        let big = renormalise(&random_panel(200, 7, 1, 0.5)).unwrap();
        assert_renormalised(&big);
        let again = renormalise(&big).unwrap();
        assert!((&again.values - &big.values).amax() <= 1e-12);
    }

    #[test]
    fn zero_variance_columns() {
        let mut p = random_panel(50, 3, 4, 0.0);
        p.values.column_mut(1).fill(0.1);
        match renormalise(&p) {
            Err(Error::ZeroVariance { ticker }) => assert_eq!(ticker, "s1"),
            other => panic!("{other:?}"),
        }
        let (r, dropped) = renormalise_dropping(&p).unwrap();
        assert_eq!(dropped, vec!["s1".to_string()]);
        assert_eq!(r.tickers, vec!["s0".to_string(), "s2".to_string()]);
        assert_renormalised(&r);
    }

    #[test]
    fn clearing_preserves_the_rest_of_the_spectrum() {
        let p = renormalise(&random_panel(120, 10, 9, 1.5)).unwrap();
        let before = symmetric_eigenvalues(&p.gram()).unwrap();
        let c = clear_market_mode_detailed(&p).unwrap();
        let coeffs = &c.projected.values * &c.mode.vector;
        assert!(coeffs.amax() <= 1e-10);
        let after = symmetric_eigenvalues(&c.projected.gram()).unwrap();
        // the top eigenvalue is replaced by 0, everything else matches
        assert!(after[0].abs() <= 1e-10);
        for (a, b) in after[1..].iter().zip(&before[..9]) {
            assert!((a - b).abs() <= 1e-8);
        }
        assert_relative_eq!(c.mode.eigenvalue, before[9], max_relative = 1e-10);
        assert!(c.mode.vector.sum() >= 0.0);
        assert_renormalised(&c.cleared);
        assert_eq!(c.cleared.stage, Stage::Cleared);
        let top_after = symmetric_eigenvalues(&c.cleared.gram()).unwrap()[9];
        assert!(top_after < before[9]);
        assert!(clear_market_mode(&random_panel(10, 3, 1, 0.0)).is_err());
    }

    #[test]
    fn rank_one_panel_clears_to_zero_projection() {
        let v = DVector::from_vec(vec![1.0, 2.0, -0.5, 0.3]).normalize();
        let mut rng = stream_rng(5, 0);
        let m = DMatrix::from_fn(30, 4, |_, c| v[c]);
        let scales = DVector::from_fn(30, |_, _| rng.gen_range(-1.0..1.0));
        let m = DMatrix::from_fn(30, 4, |r, c| scales[r] * m[(r, c)]);
        let p = renormalise(&ReturnsPanel::from_matrix(m, Stage::Raw).unwrap()).unwrap();
        let mode = market_mode(&p).unwrap();
        let proj = project_out(&p, &mode.vector).unwrap();
        assert!((&proj.values * &mode.vector).amax() <= 1e-10);
    }

    #[test]
    fn degenerate_mode_is_rejected() {
        let p = ReturnsPanel::from_matrix(
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, -1.0]),
            Stage::Renormalised,
        )
        .unwrap();
        // rank one, fine
        assert!(market_mode(&p).is_ok());
        let iso = ReturnsPanel::from_matrix(
            DMatrix::from_row_slice(4, 2, &[1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0]),
            Stage::Renormalised,
        )
        .unwrap();
        assert!(matches!(market_mode(&iso), Err(Error::Numerical { .. })));
    }

    #[test]
    fn blocks() {
        let p = random_panel(100, 3, 1, 0.0);
        let one = split_blocks(&p, 1).unwrap();
        assert_eq!(one[0], p);
        let three = split_blocks(&p, 3).unwrap();
        assert_eq!(three.len(), 3);
        assert!(three.iter().all(|b| b.rows() == 33));
        assert_eq!(three[2].timestamps.last().unwrap(), "98");
        assert!(split_blocks(&p, 101).is_err());
        assert!(split_blocks(&p, 0).is_err());
    }

    #[test]
    fn row_volatility_cases() {
        let p = ReturnsPanel::from_matrix(DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 3.0, 3.0]), Stage::Raw).unwrap();
        let v = row_volatility(&p).unwrap();
        assert_relative_eq!(v[0], 2f64.sqrt());
        assert_eq!(v[1], 0.0);
        let narrow = ReturnsPanel::from_matrix(DMatrix::zeros(3, 1), Stage::Raw).unwrap();
        assert!(row_volatility(&narrow).is_err());
    }

    #[test]
    fn hill_on_pareto_grids() {
        for &alpha in &[1.0, 3.0] {
            let fit = tail_exponent(&pareto_grid(alpha, 10_000), TailMethod::Hill, None).unwrap();
            assert!((fit.exponent - alpha).abs() < 0.05, "{alpha}: {fit:?}");
            assert_eq!(fit.k_used, 100);
            assert_relative_eq!(fit.stderr, fit.exponent / 10.0);
        }
        for &alpha in &[1.0, 2.0, 3.0, 4.0] {
            let fit = tail_exponent(&pareto_grid(alpha, 100_000), TailMethod::Hill, None).unwrap();
            assert!((fit.exponent / alpha - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn loglog_matches_hill_on_pareto() {
        let grid = pareto_grid(3.0, 10_000);
        let h = tail_exponent(&grid, TailMethod::Hill, None).unwrap();
        let l = tail_exponent(&grid, TailMethod::LogLogRegression, None).unwrap();
        assert_eq!(l.k_used, 500);
        assert!((h.exponent - l.exponent).abs() < 0.2, "{h:?} {l:?}");
    }

    #[test]
    fn tail_fit_rejections() {
        assert!(tail_exponent(&[1.0; 50], TailMethod::Hill, None).is_err());
        let mut v = vec![0.0; 150];
        v[0] = 1.0;
        assert!(tail_exponent(&v, TailMethod::Hill, Some(5)).is_err());
        assert!(tail_exponent(&pareto_grid(3.0, 200), TailMethod::Hill, Some(200)).is_err());
    }

    #[test]
    fn hill_on_student_three() {
        let v: Vec<f64> = sample(VolatilityModel::student(3.0).unwrap(), 200_000, 12)
            .unwrap()
            .iter()
            .map(|x| x.abs())
            .collect();
        let fit = tail_exponent(&v, TailMethod::Hill, None).unwrap();
        assert!((2.6..3.4).contains(&fit.exponent), "{fit:?}");
    }

    #[test]
    fn spillover() {
        let p = random_panel(40, 3, 3, 0.2);
        let d = spillover_pairs(&p, "s1", "s1").unwrap();
        assert!(d.iter().all(|(x, y)| x == y));
        let mut q = p.clone();
        q.values.column_mut(2).fill(0.0);
        assert!(spillover_pairs(&q, "s0", "s2").unwrap().iter().all(|(_, y)| *y == 0.0));
        assert!(spillover_pairs(&p, "s0", "zz").is_err());
        assert_eq!(joint_exceedance(&[(4.0, -5.0), (4.0, 0.0)], 3.0), 0.5);
    }

    #[test]
    fn log_abs_quantile_summary() {
        let q = log_abs_quantiles(&[0.0, -1.0, std::f64::consts::E, 1.0], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(q, vec![0.0, 0.0, 1.0]);
        assert!(log_abs_quantiles(&[0.0], &[0.5]).is_err());
    }
}
