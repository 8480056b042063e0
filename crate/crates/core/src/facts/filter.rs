//! Baxter–King band-pass filter.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("series of length {len} is too short for truncation {k}; need at least {min}")]
    TooShort { len: usize, k: usize, min: usize },
    #[error("band [{low}, {high}] must satisfy 2 <= low < high")]
    Band { low: f64, high: f64 },
}

/// Band limits in periods (quarters) and the truncation lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub low: f64,
    pub high: f64,
    pub k: usize,
}

impl Default for Band {
    /// The usual business-cycle band for quarterly data.
    fn default() -> Self {
        Self { low: 6.0, high: 32.0, k: 12 }
    }
}

impl Band {
    /// Weights `w_0..=w_K`; the filter is symmetric (`w_{-j} = w_j`).
    ///
    /// Ideal band-pass coefficients are shifted by a constant so the full
    /// two-sided sum is zero. The centre weight is then set to exactly
    /// `-2 * sum(w_1..=w_K)`, so `w_0 + 2 * sum` evaluates to `0.0`.
    pub fn weights(&self) -> Result<Vec<f64>, FilterError> {
        if !(self.low >= 2.0 && self.low < self.high) {
            return Err(FilterError::Band { low: self.low, high: self.high });
        }
        let k = self.k;
        let a = 2.0 * PI / self.high;
        let b = 2.0 * PI / self.low;
        let mut ideal = Vec::with_capacity(k + 1);
        ideal.push((b - a) / PI);
        for j in 1..=k {
            let j = j as f64;
            ideal.push(((j * b).sin() - (j * a).sin()) / (PI * j));
        }
        let two_sided = ideal[0] + 2.0 * ideal[1..].iter().sum::<f64>();
        let theta = -two_sided / (2 * k + 1) as f64;
        let mut w: Vec<f64> = ideal.iter().map(|x| x + theta).collect();
        let side: f64 = w[1..].iter().sum();
        w[0] = -2.0 * side;
        Ok(w)
    }

    /// Gain of the filter at a cycle of `period` quarters.
    pub fn gain(&self, period: f64) -> Result<f64, FilterError> {
        let w = self.weights()?;
        let omega = 2.0 * PI / period;
        Ok(w[0] + 2.0 * (1..w.len()).map(|j| w[j] * (j as f64 * omega).cos()).sum::<f64>())
    }
}

/// Cyclical component; `2K` observations shorter than the input.
///
/// Each output is `sum_j w_j (x_{t+j} - x_t)`, equal to `sum_j w_j x_{t+j}`
/// because the weights sum to zero, but exactly zero on constant stretches.
pub fn bandpass_cycle(series: &[f64], band: Band) -> Result<Vec<f64>, FilterError> {
    let k = band.k;
    let min = 2 * k + 1;
    if series.len() < min {
        return Err(FilterError::TooShort { len: series.len(), k, min });
    }
    let w = band.weights()?;
    Ok((k..series.len() - k)
        .map(|t| {
            let x = series[t];
            (1..=k).map(|j| w[j] * ((series[t + j] - x) + (series[t - j] - x))).sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_symmetric_zero_sum() {
        let w = Band::default().weights().unwrap();
        assert_eq!(w.len(), 13);
        assert_eq!(w[0] + 2.0 * w[1..].iter().sum::<f64>(), 0.0);
        assert!(w[0] > 0.0);
    }

    /// Gain from a second, independent construction: the full two-sided
    /// weight vector summed as a complex exponential response.
    fn oracle_gain(low: f64, high: f64, k: usize, period: f64) -> f64 {
        let (a, b) = (2.0 * PI / high, 2.0 * PI / low);
        let ideal = |j: i64| if j == 0 { (b - a) / PI } else { ((j as f64 * b).sin() - (j as f64 * a).sin()) / (PI * j as f64) };
        let k = k as i64;
        let raw: Vec<f64> = (-k..=k).map(ideal).collect();
        let theta = -raw.iter().sum::<f64>() / raw.len() as f64;
        let omega = 2.0 * PI / period;
        let (re, im) = (-k..=k).zip(&raw).fold((0.0, 0.0), |(re, im), (j, w)| {
            let x = j as f64 * omega;
            (re + (w + theta) * x.cos(), im + (w + theta) * x.sin())
        });
        (re * re + im * im).sqrt()
    }

    #[test]
    fn frequency_response() {
        let band = Band::default();
        for period in [4.0, 6.0, 12.0, 32.0, 80.0] {
            let g = band.gain(period).unwrap();
            assert!((g.abs() - oracle_gain(6.0, 32.0, 12, period)).abs() < 1e-12, "{period}");
        }
        let pass = band.gain(12.0).unwrap();
        assert!((0.9..=1.05).contains(&pass), "{pass}");
        assert!(band.gain(4.0).unwrap().abs() <= 0.1);
        // truncating at 12 lags leaks about 12% at an 80-quarter cycle
        let slow = band.gain(80.0).unwrap();
        assert!((slow - 0.1168).abs() < 1e-3, "{slow}");
        // longer truncation brings it under 0.1
        assert!(Band { k: 20, ..band }.gain(80.0).unwrap().abs() <= 0.1);
    }

    #[test]
    fn constant_is_removed() {
        let out = bandpass_cycle(&[3.7; 40], Band::default()).unwrap();
        assert_eq!(out.len(), 16);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sinusoid_amplitudes_match_gain() {
        let band = Band::default();
        for (period, lo, hi) in [(12.0, 0.9, 1.0), (80.0, 0.0, 0.12)] {
            let x: Vec<f64> = (0..400).map(|t| (2.0 * PI * t as f64 / period).sin()).collect();
            let y = bandpass_cycle(&x, band).unwrap();
            // a symmetric filter keeps the phase, so y_t = G x_{t+K}
            let gain = band.gain(period).unwrap();
            for (t, v) in y.iter().enumerate() {
                assert!((v - gain * x[t + band.k]).abs() < 1e-12);
            }
            let amp = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(amp >= lo * 0.99 && amp <= hi, "period {period}: {amp}");
        }
    }

    #[test]
    fn too_short() {
        let e = bandpass_cycle(&[1.0; 24], Band::default()).unwrap_err();
        assert_eq!(e, FilterError::TooShort { len: 24, k: 12, min: 25 });
    }
}
