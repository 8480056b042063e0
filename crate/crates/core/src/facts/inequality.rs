//! Lorenz curves, Gini coefficients and income shares.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lorenz {
    /// `(k / n, cumulative share)` for `k = 0..=n`.
    pub points: Vec<(f64, f64)>,
    pub gini: f64,
    /// Coefficient of variation of the (shifted) values; zero when all
    /// values are zero.
    pub cv: f64,
    /// Amount added to every value to make the smallest zero; zero when no
    /// value was negative.
    pub shift: f64,
    /// Every value was zero; the Gini is zero by convention.
    pub all_zero: bool,
    pub n: usize,
}

/// Lorenz curve and Gini coefficient. Negative values (debts) are shifted
/// up by `-min` first. Input order does not matter.
pub fn lorenz_gini(values: &[f64]) -> Lorenz {
    assert!(!values.is_empty(), "lorenz_gini needs at least one value");
    let n = values.len();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if min < 0.0 { -min } else { 0.0 };
    let mut x: Vec<f64> = values.iter().map(|v| v + shift).collect();
    x.sort_by(f64::total_cmp);
    let total: f64 = x.iter().sum();
    let nf = n as f64;
    if total == 0.0 {
        let points = (0..=n).map(|k| (k as f64 / nf, k as f64 / nf)).collect();
        return Lorenz { points, gini: 0.0, cv: 0.0, shift, all_zero: true, n };
    }
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, 0.0));
    let mut cum = 0.0;
    for (k, v) in x.iter().enumerate() {
        cum += v;
        let share = if k + 1 == n { 1.0 } else { cum / total };
        points.push(((k + 1) as f64 / nf, share));
    }
    // sum over ranks of (2i - n - 1) x_(i), paired from both ends so equal
    // values cancel exactly
    let mut acc = 0.0;
    for i in 0..n / 2 {
        let weight = (n - 1 - 2 * i) as f64;
        acc += weight * (x[n - 1 - i] - x[i]);
    }
    let gini = acc / (nf * total);
    let mean = total / nf;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    Lorenz { points, gini, cv: var.sqrt() / mean, shift, all_zero: false, n }
}

/// Area under the Lorenz points by the trapezoid rule.
pub fn lorenz_area(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharePaths {
    /// Share of the bottom `floor(bottom * n)` households by income rank.
    pub bottom: Vec<f64>,
    /// `1 - bottom`, the share of everyone else.
    pub rest: Vec<f64>,
    /// Share of the top `ceil(top * n)` households.
    pub top: Vec<f64>,
    pub bottom_count: usize,
    pub top_count: usize,
}

/// Per-period income shares. `incomes[t]` holds every household's income in
/// period `t`; with distinct incomes the bottom group is exactly the
/// households at or below the median for even `n`. Negative values in a
/// period are shifted up by `-min` as in [`lorenz_gini`], which keeps every
/// share in `[0, 1]` and so makes `bottom + rest` exactly one. Periods with
/// zero total get shares of zero for both groups.
pub fn income_shares(incomes: &[Vec<f64>], bottom: f64, top: f64) -> SharePaths {
    assert!(bottom > 0.0 && bottom < 1.0 && top > 0.0 && top < 1.0, "fractions must lie in (0, 1)");
    let n = incomes.first().map_or(0, Vec::len);
    // guard against fractions like 0.5 * n landing a hair under an integer
    let bottom_count = ((bottom * n as f64) + 1e-9).floor() as usize;
    let top_count = (((top * n as f64) - 1e-9).ceil() as usize).clamp(1, n.max(1));
    let mut paths =
        SharePaths { bottom: Vec::new(), rest: Vec::new(), top: Vec::new(), bottom_count, top_count };
    for period in incomes {
        assert_eq!(period.len(), n, "every period needs one income per household");
        let min = period.iter().copied().fold(f64::INFINITY, f64::min);
        let shift = if min < 0.0 { -min } else { 0.0 };
        let mut x: Vec<f64> = period.iter().map(|v| v + shift).collect();
        x.sort_by(f64::total_cmp);
        let total: f64 = x.iter().sum();
        let (b, t) = if total == 0.0 {
            (0.0, 0.0)
        } else {
            (x[..bottom_count].iter().sum::<f64>() / total, x[n - top_count..].iter().sum::<f64>() / total)
        };
        paths.bottom.push(b);
        paths.rest.push(1.0 - b);
        paths.top.push(t);
    }
    paths
}
