//! Porter-Thomas comparison of output probabilities.
//!
//! For a chaotic state on `D` basis states the scaled probabilities
//! `x = D p` follow Exp(1). The report carries the Kolmogorov-Smirnov
//! distance to that law and a binned log-density for plotting.

use std::io::Write;

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_X_MAX: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    /// Bin centre.
    pub x: f64,
    /// `log10` of the empirical density; `-inf` for an empty bin.
    pub empirical_log_density: f64,
    /// `log10` of the Exp(1) density averaged over the bin.
    pub theory_log_density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionReport {
    /// Sorted scaled probabilities `D p`.
    pub scaled: Vec<f64>,
    pub ks_distance: f64,
    pub histogram: Vec<HistogramBin>,
    pub chaotic: bool,
}

/// Exp(1) distribution function.
fn exp_cdf(x: f64) -> f64 {
    -(-x.max(0.0)).exp_m1()
}

/// Kolmogorov-Smirnov distance between a sorted sample and Exp(1).
pub fn ks_distance_exp(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = exp_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// KS distance above which a sample of `n` is flagged as not Porter-Thomas:
/// the 1% critical value `1.63 / sqrt(n)`, floored at 0.05.
pub fn chaotic_threshold(n: usize) -> f64 {
    (1.63 / (n as f64).sqrt()).max(0.05)
}

pub fn porter_thomas_report(probabilities: &[f64], dimension: f64) -> Result<DistributionReport> {
    porter_thomas_report_binned(probabilities, dimension, DEFAULT_BINS, DEFAULT_X_MAX)
}

pub fn porter_thomas_report_binned(
    probabilities: &[f64],
    dimension: f64,
    bins: usize,
    x_max: f64,
) -> Result<DistributionReport> {
    if probabilities.is_empty() {
        return Err(Error::invalid("empty probability sample"));
    }
    if dimension.is_nan() || dimension < 2.0 {
        return Err(Error::invalid(format!("dimension {dimension} is below 2")));
    }
    if bins == 0 || x_max.is_nan() || x_max <= 0.0 {
        return Err(Error::invalid(
            "histogram needs at least one bin on a positive range",
        ));
    }
    if let Some(p) = probabilities.iter().find(|p| p.is_nan() || **p < 0.0) {
        return Err(Error::invalid(format!(
            "probability {p} is negative or NaN"
        )));
    }
    let mut scaled: Vec<f64> = probabilities.iter().map(|p| p * dimension).collect();
    scaled.sort_by(f64::total_cmp);
    let ks_distance = ks_distance_exp(&scaled);

    let n = scaled.len() as f64;
    let width = x_max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &scaled {
        if x < x_max {
            counts[((x / width) as usize).min(bins - 1)] += 1;
        }
    }
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(b, &count)| {
            let lo = b as f64 * width;
            let hi = lo + width;
            HistogramBin {
                x: lo + width / 2.0,
                empirical_log_density: (count as f64 / (n * width)).log10(),
                theory_log_density: ((exp_cdf(hi) - exp_cdf(lo)) / width).log10(),
            }
        })
        .collect();

    Ok(DistributionReport {
        chaotic: ks_distance < chaotic_threshold(scaled.len()),
        scaled,
        ks_distance,
        histogram,
    })
}

impl DistributionReport {
    /// Histogram as CSV with header `x,empirical_log_density,theory_log_density`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,empirical_log_density,theory_log_density")?;
        for b in &self.histogram {
            writeln!(
                out,
                "{},{},{}",
                b.x, b.empirical_log_density, b.theory_log_density
            )?;
        }
        Ok(())
    }
}
