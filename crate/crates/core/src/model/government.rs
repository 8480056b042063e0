//! Tax redistribution, inverse-income welfare weights and the social-welfare
//! reward.

/// Tax credits for the next quarter: household `i` receives
/// `f_i * xi * total_tax`.
///
/// The last household with a positive fraction absorbs rounding, so the
/// credits summed in index order equal `xi * total_tax` exactly. When the
/// earlier credits sum to a value that sits on rounding ties, no last credit
/// hits the pool; an earlier credit then moves by one ulp and the search
/// repeats.
pub fn distribute_credits(total_tax: f64, redistribution: f64, fractions: &[f64]) -> Vec<f64> {
    let pool = redistribution * total_tax;
    let mut credits: Vec<f64> = fractions.iter().map(|f| f * pool).collect();
    let Some(k) = fractions.iter().rposition(|f| *f > 0.0) else {
        return credits;
    };
    for attempt in 0..=4 * k {
        let j = attempt.wrapping_sub(1) % k.max(1);
        if attempt > 0 && credits[j] > 0.0 {
            credits[j] = credits[j].next_up();
        }
        let before = credits[..k].iter().fold(0.0, |acc, c| acc + c);
        let c = (pool - before).max(0.0);
        let candidates = [c, c.next_up(), c.next_down(), c.next_up().next_up(), c.next_down().next_down()];
        if let Some(hit) = candidates.into_iter().find(|c| *c >= 0.0 && before + c == pool) {
            credits[k] = hit;
            return credits;
        }
        credits[k] = c;
    }
    credits
}

/// Normalize non-negative levels to fractions summing to one. All-zero levels
/// yield uniform fractions.
pub fn normalize_fractions(levels: &[f64]) -> Vec<f64> {
    let total: f64 = levels.iter().sum();
    if total <= 0.0 {
        let n = levels.len() as f64;
        return vec![1.0 / n; levels.len()];
    }
    levels.iter().map(|l| l / total).collect()
}

/// Inverse-income weights `1 / (m_i + max_k(-m_k) + eps)` normalized to sum
/// to one. Poorer households get larger weights; a common shift of all
/// savings leaves the weights unchanged.
pub fn welfare_weights(savings: &[f64], epsilon: f64) -> Vec<f64> {
    let shift = savings.iter().map(|m| -m).fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = savings.iter().map(|m| 1.0 / ((m + shift) + epsilon)).collect();
    normalize_fractions(&raw)
}

/// `theta * Σ l_i R_i + (1 - theta) * Σ l_i kappa_i`.
pub fn gov_reward(weights: &[f64], household_rewards: &[f64], credits: &[f64], theta: f64) -> f64 {
    let utility: f64 = weights.iter().zip(household_rewards).map(|(l, r)| l * r).sum();
    let credit: f64 = weights.iter().zip(credits).map(|(l, k)| l * k).sum();
    theta * utility + (1.0 - theta) * credit
}
