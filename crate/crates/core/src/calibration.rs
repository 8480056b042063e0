//! Production-elasticity calibration from industry output and labor data.
//!
//! Each industry group's elasticity is the slope of a log-log least-squares
//! fit of output on labor hours. Slopes are then filtered to the admissible
//! range and, for the heterogeneous-firm scenarios, rescaled into a narrower
//! band and summarized by a lognormal fit from which firm elasticities are
//! drawn.
//!
//! Input CSV schema (header required): `group,year,output,hours`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("group `{group}`: non-positive values at rows {rows:?}")]
    NonPositive { group: String, rows: Vec<usize> },
    #[error("group `{group}`: need at least 2 observations, got {got}")]
    TooFew { group: String, got: usize },
    #[error("group `{group}`: labor hours do not vary, slope undefined")]
    ZeroVariance { group: String },
    #[error("group `{group}`: output and hours lengths differ ({output} vs {hours})")]
    LengthMismatch { group: String, output: usize, hours: usize },
    #[error("no positive elasticities to scale")]
    NoneAdmissible,
    #[error("invalid range [{low}, {high}]")]
    BadRange { low: f64, high: f64 },
    #[error("empty sample")]
    Empty,
    #[error("invalid lognormal parameters: {0}")]
    Distribution(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Annual output and labor hours of one industry group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustrySeries {
    pub group: String,
    pub years: Vec<i32>,
    pub output: Vec<f64>,
    pub hours: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticityFit {
    /// Slope on log labor hours.
    pub alpha: f64,
    /// Intercept.
    pub beta: f64,
}

/// Least-squares fit of `log y = alpha * log N + beta`.
pub fn fit_elasticity(series: &IndustrySeries) -> Result<ElasticityFit, CalibrationError> {
    let group = || series.group.clone();
    if series.output.len() != series.hours.len() {
        return Err(CalibrationError::LengthMismatch {
            group: group(),
            output: series.output.len(),
            hours: series.hours.len(),
        });
    }
    let t = series.output.len();
    if t < 2 {
        return Err(CalibrationError::TooFew { group: group(), got: t });
    }
    let bad: Vec<usize> = (0..t).filter(|&k| !(series.output[k] > 0.0 && series.hours[k] > 0.0)).collect();
    if !bad.is_empty() {
        return Err(CalibrationError::NonPositive { group: group(), rows: bad });
    }
    let x: Vec<f64> = series.hours.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = series.output.iter().map(|v| v.ln()).collect();
    let n = t as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0) {
        return Err(CalibrationError::ZeroVariance { group: group() });
    }
    let alpha = sxy / sxx;
    Ok(ElasticityFit { alpha, beta: my - alpha * mx })
}

/// Drop non-positive elasticities and divide the rest by the largest one.
pub fn scale_and_filter(alphas: &[f64]) -> Result<Vec<f64>, CalibrationError> {
    let kept: Vec<f64> = alphas.iter().copied().filter(|a| *a > 0.0).collect();
    let max = kept.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if kept.is_empty() {
        return Err(CalibrationError::NoneAdmissible);
    }
    Ok(kept.into_iter().map(|a| a / max).collect())
}

/// Maximum-likelihood lognormal parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
}

pub fn fit_lognormal(values: &[f64]) -> Result<LogNormalFit, CalibrationError> {
    if values.is_empty() {
        return Err(CalibrationError::Empty);
    }
    let n = values.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / n;
    Ok(LogNormalFit { mu, sigma: var.sqrt() })
}

/// Lognormal draws clipped into `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalSampler {
    dist: LogNormal<f64>,
    pub low: f64,
    pub high: f64,
}

impl LogNormalSampler {
    pub fn new(mu: f64, sigma: f64, low: f64, high: f64) -> Result<Self, CalibrationError> {
        if !(low <= high) {
            return Err(CalibrationError::BadRange { low, high });
        }
        let dist = LogNormal::new(mu, sigma).map_err(|e| CalibrationError::Distribution(e.to_string()))?;
        Ok(Self { dist, low, high })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng).clamp(self.low, self.high)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledFit {
    pub mu: f64,
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
    /// Rescaled sample.
    pub scaled: Vec<f64>,
    /// Set when every input is equal: the sample has no spread to rescale.
    pub zero_variance: bool,
}

impl ScaledFit {
    pub fn sampler(&self) -> Result<LogNormalSampler, CalibrationError> {
        LogNormalSampler::new(self.mu, self.sigma, self.low, self.high)
    }
}

/// Min-max rescale into `[low, high]`, then fit a lognormal to the result.
/// A degenerate sample maps to the midpoint of the range.
pub fn fit_lognormal_scaled(values: &[f64], low: f64, high: f64) -> Result<ScaledFit, CalibrationError> {
    if !(low < high) || low <= 0.0 {
        return Err(CalibrationError::BadRange { low, high });
    }
    if values.is_empty() {
        return Err(CalibrationError::Empty);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let zero_variance = max == min;
    let scaled: Vec<f64> = if zero_variance {
        vec![0.5 * (low + high); values.len()]
    } else {
        values.iter().map(|v| low + (v - min) / (max - min) * (high - low)).collect()
    };
    let fit = fit_lognormal(&scaled)?;
    Ok(ScaledFit { mu: fit.mu, sigma: fit.sigma, low, high, scaled, zero_variance })
}

#[derive(Debug, Deserialize)]
struct IndustryRow {
    group: String,
    year: i32,
    output: f64,
    hours: f64,
}

/// Read industry series from CSV, grouped in order of first appearance.
pub fn read_industry_csv(path: &Path) -> Result<Vec<IndustrySeries>, CalibrationError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, IndustrySeries> = BTreeMap::new();
    for row in reader.deserialize() {
        let row: IndustryRow = row?;
        let entry = groups.entry(row.group.clone()).or_insert_with(|| {
            order.push(row.group.clone());
            IndustrySeries { group: row.group.clone(), years: Vec::new(), output: Vec::new(), hours: Vec::new() }
        });
        entry.years.push(row.year);
        entry.output.push(row.output);
        entry.hours.push(row.hours);
    }
    Ok(order.into_iter().filter_map(|g| groups.remove(&g)).collect())
}

/// Full calibration report: per-group fits, admissible scaled elasticities,
/// and the lognormal summary of those rescaled into `[low, high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub groups: Vec<(String, ElasticityFit)>,
    pub admissible: Vec<f64>,
    pub lognormal: ScaledFit,
}

pub fn calibrate(series: &[IndustrySeries], low: f64, high: f64) -> Result<CalibrationReport, CalibrationError> {
    let groups = series
        .iter()
        .map(|s| fit_elasticity(s).map(|f| (s.group.clone(), f)))
        .collect::<Result<Vec<_>, _>>()?;
    let alphas: Vec<f64> = groups.iter().map(|(_, f)| f.alpha).collect();
    let admissible = scale_and_filter(&alphas)?;
    let lognormal = fit_lognormal_scaled(&admissible, low, high)?;
    Ok(CalibrationReport { groups, admissible, lognormal })
}

impl CalibrationReport {
    /// TOML fragment that plugs the fitted distribution into a config.
    pub fn config_override(&self) -> String {
        let l = &self.lognormal;
        format!(
            "[firm]\nalpha = {{ lognormal = {{ mu = {}, sigma = {}, low = {}, high = {} }} }}\n",
            l.mu, l.sigma, l.low, l.high
        )
    }
}
