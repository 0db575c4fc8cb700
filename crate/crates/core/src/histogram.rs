//! Density-normalised histograms and their L1 distance to a density curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Equal-width histogram on `[lo, hi]`.
///
/// Heights integrate to the fraction of finite values inside the range, so a
/// histogram of an eigenvalue sample is directly comparable with the density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub heights: Vec<f64>,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
    /// NaN values, counted but never binned.
    pub invalid: u64,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.heights.len()
    }

    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn inside(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `Σ_k |h_k·w − ∫_{bin k} f|`: the L1 distance between the histogram
    /// and the histogram that the density `f` itself would produce.
    ///
    /// Comparing bin masses rather than pointwise values keeps the distance
    /// free of the discretisation bias a fixed bin width has near steep
    /// spectral edges.
    pub fn l1_distance<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut total = 0.0;
        for (k, &h) in self.heights.iter().enumerate() {
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            let mass = integrate(&mut f, a, b, 1e-11, 1e-10)?.value;
            total += (h * (b - a) - mass).abs();
        }
        Ok(total)
    }
}

pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("invalid histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + width * k as f64 })
        .collect();
    let mut counts = vec![0u64; bins];
    let (mut below, mut above, mut invalid) = (0, 0, 0);
    for &v in values {
        if v.is_nan() {
            invalid += 1;
        } else if v < lo {
            below += 1;
        } else if v > hi {
            above += 1;
        } else {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    let total = values.len() as u64;
    let heights = counts
        .iter()
        .map(|&c| {
            if total == 0 {
                0.0
            } else {
                c as f64 / (total as f64 * width)
            }
        })
        .collect();
    Ok(Histogram {
        edges,
        heights,
        counts,
        below,
        above,
        invalid,
        total,
    })
}
