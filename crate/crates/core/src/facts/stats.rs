//! Correlation, least squares and standardized moments.

use serde::{Deserialize, Serialize};

/// Two-pass Pearson correlation; `None` when either input has zero variance
/// or fewer than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "correlated series must have equal length");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Least-squares line `y = slope x + intercept`; `None` when `x` is constant.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r2, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub n: usize,
}

/// Standardized third moment and fourth moment minus 3 (population
/// normalization). `None` below three points or at zero variance.
pub fn moments(x: &[f64]) -> Option<Moments> {
    let n = x.len();
    if n < 3 {
        return None;
    }
    let m = mean(x);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let nf = n as f64;
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    if m2 == 0.0 {
        return None;
    }
    Some(Moments { skewness: m3 / m2.powf(1.5), excess_kurtosis: m4 / (m2 * m2) - 3.0, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cyclicality {
    Pro,
    Counter,
    Acyclical,
}

/// Correlation with the reference series and its classification; a zero
/// variance input is acyclical with `corr = None`.
pub fn cyclicality(series: &[f64], gdp: &[f64]) -> (Option<f64>, Cyclicality) {
    let corr = pearson(series, gdp);
    let class = match corr {
        Some(c) if c > 0.1 => Cyclicality::Pro,
        Some(c) if c < -0.1 => Cyclicality::Counter,
        _ => Cyclicality::Acyclical,
    };
    (corr, class)
}
