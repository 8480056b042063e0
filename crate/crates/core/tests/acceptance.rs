//! Acceptance battery: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! The process fails when a criterion outside `KNOWN_FAILURES` fails, or when
//! a known failure starts passing (so the list cannot go stale).

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use macrosim::calibration::{fit_elasticity, IndustrySeries};
use macrosim::cli::{bench_scaling, BenchPreset};
use macrosim::config::{Preset, SimConfig};
use macrosim::env::Session;
use macrosim::facts::{analyze, bandpass_cycle, income_shares, lorenz_gini, Band};
use macrosim::grid::{decode_all, encode_all, snap, ActionGrid};
use macrosim::kernel::run_episode;
use macrosim::model::{
    distribute_credits, evolve_shock, plan_production, produce, ration_consumption, spending, update_deposits,
    update_inventory, SavingsFlows,
};
use macrosim::policy::{dimensions, AgentType, PolicySpec, TaylorRule};

/// Criteria expected to fail, with the reason recorded in the decisions
/// ledger: the band-pass stopband at 80 quarters cannot reach 0.1 with the
/// specified truncation of 12 lags.
const KNOWN_FAILURES: [u32; 1] = [5];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `|a - b|` relative to the larger of `|b|` and the largest term that fed
/// the sum, so cancellation in additive formulas does not inflate it.
fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs().max(scale)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 8];
    let names = ["rationing", "savings", "plan", "shock", "production", "inventory", "deposits", "credits"];
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let m = rng.random_range(1..=10);

        let requests: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..30.0) }).collect();
        let supply = rng.random_range(0.0..400.0);
        let got = ration_consumption(&requests, supply);
        let total: f64 = requests.iter().sum();
        for (g, r) in got.iter().zip(&requests) {
            let want = if total > 0.0 { r.min(supply * r / total) } else { 0.0 };
            worst[0] = worst[0].max(rel_err(*g, want, 0.0));
        }

        let prices: Vec<f64> = (0..m).map(|_| rng.random_range(100.0..500.0)).collect();
        let consumption: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..25.0)).collect();
        let employed = rng.random_bool(0.7);
        let wage = rng.random_range(5.0..60.0);
        let (savings, rate, tax, credit) =
            (rng.random_range(-5e4..5e4), rng.random_range(0.0..0.06), rng.random_range(0.0..0.4), rng.random_range(0.0..3e3));
        let income = if employed { 480.0 * wage } else { 0.0 };
        let flows = SavingsFlows { savings, rate, labor_income: income, spending: spending(&consumption, &prices), tax_rate: tax, credit };
        let spent: f64 = (0..m).map(|j| consumption[j] * prices[j]).sum();
        let want = (1.0 + rate) * savings + (income - spent) - tax * income + credit;
        let scale = [savings.abs(), income, spent, credit].into_iter().fold(0.0, f64::max);
        worst[1] = worst[1].max(rel_err(flows.next_savings(), want, scale));

        let (forecast, inventory, alpha) = (rng.random_range(0.0..500.0), rng.random_range(0.0..300.0), rng.random_range(0.05..1.0));
        let plan = plan_production(forecast, inventory, alpha);
        let y_hat = if forecast > inventory { forecast - inventory } else { 0.0 };
        worst[2] = worst[2].max(rel_err(plan.output, y_hat, forecast)).max(rel_err(plan.hours, y_hat.powf(1.0 / alpha), 0.0));

        let (prev, rho, eps) = (rng.random_range(0.2..3.0), rng.random_range(0.0..1.0), rng.random_range(-0.5..0.5));
        worst[3] = worst[3].max(rel_err(evolve_shock(prev, rho, eps), (rho * prev.ln() + eps).exp(), 0.0));

        let (hours, factor) = (480.0 * rng.random_range(0..=n) as f64, rng.random_range(0.2..3.0));
        let want = if hours > 0.0 { factor * (alpha * hours.ln()).exp() } else { 0.0 };
        worst[4] = worst[4].max(rel_err(produce(hours, factor, alpha), want, 0.0));

        let (stock, output) = (rng.random_range(0.0..300.0), rng.random_range(0.0..300.0));
        let sold = rng.random_range(0.0..=1.0) * (stock + output);
        let next = update_inventory(stock, output, sold).map_err(|e| e.to_string())?;
        worst[5] = worst[5].max(rel_err(next, stock + output - sold, stock + output));

        let (deposits, revenue, bill) = (rng.random_range(-1e5..1e5), rng.random_range(0.0..5e4), rng.random_range(0.0..5e4));
        let want = (1.0 + rate) * deposits + revenue - bill - tax * (revenue - bill).max(0.0);
        let scale = [deposits.abs(), revenue, bill].into_iter().fold(0.0, f64::max);
        worst[6] = worst[6].max(rel_err(update_deposits(deposits, rate, revenue, bill, tax), want, scale));

        let levels: Vec<f64> = (0..n).map(|_| rng.random_range(1..=5) as f64).collect();
        let level_sum: f64 = levels.iter().sum();
        let fractions: Vec<f64> = levels.iter().map(|l| l / level_sum).collect();
        let (pool_tax, xi) = (rng.random_range(0.0..1e5), rng.random_range(0.0..=1.0));
        for (k, f) in distribute_credits(pool_tax, xi, &fractions).iter().zip(&fractions) {
            worst[7] = worst[7].max(rel_err(*k, f * xi * pool_tax, 0.0));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let max = worst.iter().copied().fold(0.0, f64::max);
    let detail: Vec<String> = names.iter().zip(&worst).map(|(n, w)| format!("{n} {w:.1e}")).collect();
    check(max <= 1e-12 && elapsed < 10.0, format!("max rel err {max:.2e} ({}), {elapsed:.2}s", detail.join(", ")))
}

fn random_policy_config(seed: u64) -> SimConfig {
    let mut c = SimConfig { seed, horizon: 40, households: 10, firms: 3, ..SimConfig::default() };
    for agent in AgentType::ALL {
        *c.policies.get_mut(agent) = PolicySpec::RandomGrid;
    }
    c
}

fn criterion_2() -> Outcome {
    let mut worst_savings = 0.0f64;
    let mut problems = Vec::new();
    for seed in 0..100 {
        let config = random_policy_config(seed);
        let xi = config.government.redistribution;
        let log = run_episode(&config, seed).map_err(|e| e.to_string())?;
        let mut chained: Vec<f64> = vec![0.0; config.households];
        for (t, q) in log.quarters.iter().enumerate() {
            let pool = xi * q.government.total_tax;
            if q.government.next_credits != pool {
                problems.push(format!("seed {seed} t {t}: next credits {} != {pool}", q.government.next_credits));
            }
            if let Some(next) = log.quarters.get(t + 1) {
                let paid = next.households.iter().fold(0.0, |acc, h| acc + h.credit);
                if paid != pool {
                    problems.push(format!("seed {seed} t {t}: credits sum {paid} != {pool}"));
                }
            }
            for f in &q.firms {
                if f.next_inventory < 0.0 || f.inventory < 0.0 {
                    problems.push(format!("seed {seed} t {t}: firm {} inventory {}", f.id, f.next_inventory));
                }
                if f.employees == 0 {
                    problems.push(format!("seed {seed} t {t}: firm {} has no employees", f.id));
                }
            }
            for (h, m) in q.households.iter().zip(chained.iter_mut()) {
                *m = (1.0 + h.rate) * *m + (h.labor_income - h.spending) - h.tax_rate * h.labor_income + h.credit;
                let err = (h.next_savings - *m).abs() / m.abs().max(1.0);
                worst_savings = worst_savings.max(err);
            }
        }
    }
    problems.truncate(3);
    check(
        problems.is_empty() && worst_savings <= 1e-9,
        format!("100 episodes; savings chain max rel err {worst_savings:.2e}; {}", if problems.is_empty() { "credits exact, inventory >= 0, every firm staffed".to_string() } else { problems.join("; ") }),
    )
}

fn criterion_3() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut regional = SimConfig { preset: Preset::RegionalBiweekly, horizon: 26, ..SimConfig::default() };
    regional.regional.scale = 2;
    let cases = [("quarterly", SimConfig { households: 20, firms: 4, ..SimConfig::default() }), ("regional", regional)];
    let mut detail = Vec::new();
    for (name, config) in cases {
        let mut files = Vec::new();
        for run in 0..2 {
            let log = run_episode(&config, 17).map_err(|e| e.to_string())?;
            let prefix = format!("{name}_{run}");
            log.write_files(dir.path(), &prefix).map_err(|e| e.to_string())?;
            files.push(std::fs::read(dir.path().join(format!("{prefix}.csv"))).map_err(|e| e.to_string())?);
        }
        if files[0] != files[1] {
            return Err(format!("{name}: CSVs differ"));
        }
        detail.push(format!("{name} {} bytes identical", files[0].len()));
    }
    Ok(detail.join(", "))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let table = bench_scaling(BenchPreset::Regional, &[2, 5, 10], 3, 0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let r2 = table.messages_r2.unwrap_or(f64::NAN);
    let corr = table.time_message_corr.unwrap_or(f64::NAN);
    let stable = table.rows.iter().all(|r| r.stable_messages);
    let rows: Vec<String> = table.rows.iter().map(|r| format!("{} agents/{} msgs/{:.3}s", r.agents, r.messages, r.median_seconds)).collect();
    check(
        r2 >= 0.99 && corr >= 0.9 && stable && elapsed < 600.0,
        format!("quadratic R2 {r2:.6}, time-message corr {corr:.4}, {} ({elapsed:.1}s)", rows.join(", ")),
    )
}

/// Gain straight from the two-sided weights, independent of `Band::gain`.
fn weight_gain(w: &[f64], period: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI / period;
    let k = w.len() as i64 - 1;
    (-k..=k).map(|j| w[j.unsigned_abs() as usize] * (j as f64 * omega).cos()).sum()
}

fn criterion_5() -> Outcome {
    let band = Band::default();
    let w = band.weights().map_err(|e| e.to_string())?;
    let (pass, slow, fast) = (weight_gain(&w, 12.0), weight_gain(&w, 80.0), weight_gain(&w, 4.0));
    let constant = bandpass_cycle(&[4.2; 60], band).map_err(|e| e.to_string())?;
    let zero = constant.iter().all(|v| *v == 0.0);
    let checks = [
        ("passband@12", (0.9..=1.05).contains(&pass), pass),
        ("stopband@80", slow.abs() <= 0.1, slow),
        ("stopband@4", fast.abs() <= 0.1, fast),
    ];
    let detail: Vec<String> =
        checks.iter().map(|(n, ok, g)| format!("{n} {g:.4} {}", if *ok { "ok" } else { "MISSED" })).collect();
    check(
        checks.iter().all(|c| c.1) && zero,
        format!("K={}: {}, constant->zero {}", band.k, detail.join(", "), if zero { "ok" } else { "MISSED" }),
    )
}

fn criterion_6() -> Outcome {
    let equal = lorenz_gini(&[3.5; 9]).gini;
    let pair = lorenz_gini(&[0.0, 1.0]).gini;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dist = LogNormal::new(0.0, 1.0).unwrap();
    let mut convex = true;
    let mut exact_sum = true;
    for _ in 0..100 {
        let n = rng.random_range(2..200);
        let x: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng) - if rng.random_bool(0.1) { 3.0 } else { 0.0 }).collect();
        let l = lorenz_gini(&x);
        convex &= l.points.windows(3).all(|p| (p[2].1 - p[1].1) >= (p[1].1 - p[0].1) - 1e-12);
        let shares = income_shares(std::slice::from_ref(&x), 0.5, 0.01);
        exact_sum &= shares.bottom[0] + shares.rest[0] == 1.0;
    }
    check(
        equal == 0.0 && (pair - 0.5).abs() <= 1e-12 && convex && exact_sum,
        format!("gini(equal) {equal}, gini(0,1) {pair}, convex {convex}, bottom50+rest==1 {exact_sum}"),
    )
}

fn criterion_7() -> Outcome {
    let hours: Vec<f64> = (0..100).map(|k| 200.0 * (1.0 + 0.05 * k as f64)).collect();
    let series = |output: Vec<f64>| IndustrySeries { group: "g".into(), years: (0..100).collect(), output, hours: hours.clone() };
    let (alpha, beta) = (0.73, 1.4);
    let exact = fit_elasticity(&series(hours.iter().map(|n| (beta + alpha * n.ln()).exp()).collect())).map_err(|e| e.to_string())?;
    let noiseless = (exact.alpha - alpha).abs().max((exact.beta - beta).abs());
    let mut within = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let output = hours.iter().map(|n| (beta + alpha * n.ln() + noise.sample(&mut rng)).exp()).collect();
        let fit = fit_elasticity(&series(output)).map_err(|e| e.to_string())?;
        within += usize::from((fit.alpha - alpha).abs() <= 0.03);
    }
    check(noiseless <= 1e-10 && within >= 95, format!("noiseless error {noiseless:.1e}, noisy within 0.03: {within}/100"))
}

fn criterion_8() -> Outcome {
    let rule = TaylorRule::default();
    let rate = rule.rate(0.02, 0.0, &[]);
    let grid = ActionGrid::default().cb_rate;
    let snapped = TaylorRule { snap_to_grid: true, ..rule };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let members = (0..10_000).all(|_| {
        let (pi, gap) = (rng.random_range(-0.2..0.3), rng.random_range(-2.0..2.0));
        let r = snapped.rate(pi, gap, &grid);
        grid.contains(&r) && r == snap(&grid, rule.rate(pi, gap, &[]))
    });
    check(rate == 0.04 && members, format!("rate at target {rate}, snapped always on grid {members}"))
}

fn criterion_9() -> Outcome {
    let config = SimConfig::default();
    let logs = (0..100).map(|seed| run_episode(&config, seed)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let analysis = analyze(&logs, Band::default()).map_err(|e| e.to_string())?;
    let r = &analysis.pooled;
    let mut missing = Vec::new();
    for row in &r.correlations {
        if row.corr.is_none() {
            missing.push(format!("corr[{}]", row.series));
        }
    }
    let f = &r.firms;
    for (name, present) in [
        ("log_size", f.log_size.is_some()),
        ("growth", f.growth.is_some()),
        ("profitability_change", f.profitability_change.is_some()),
        ("log_productivity", f.log_productivity.is_some()),
        ("growth_variance_slope", f.growth_variance_slope.is_some()),
        ("income", r.inequality.income.n > 0 && r.inequality.income_bottom50.len() == r.periods),
        ("wealth", r.inequality.wealth.n > 0 && r.inequality.wealth_bottom50.len() == r.periods),
    ] {
        if !present {
            missing.push(name.to_string());
        }
    }
    let rel = &r.relations;
    for (name, s) in [("phillips_wage", &rel.phillips_wage), ("phillips_inflation", &rel.phillips_inflation), ("okun", &rel.okun), ("beveridge", &rel.beveridge)] {
        if s.slope.is_none() || s.corr.is_none() {
            missing.push(name.to_string());
        }
    }
    let corr = |name: &str| r.correlation(name).and_then(|c| c.corr);
    let (u, e) = (corr("unemployment_rate"), corr("total_employment"));
    let opposite = matches!((u, e), (Some(u), Some(e)) if u * e < 0.0);
    check(
        missing.is_empty() && r.all_finite() && opposite,
        format!(
            "{} episodes, finite {}, unemployment {:.4} vs employment {:.4}{}",
            r.episodes,
            r.all_finite(),
            u.unwrap_or(f64::NAN),
            e.unwrap_or(f64::NAN),
            if missing.is_empty() { String::new() } else { format!(", missing: {}", missing.join(" ")) }
        ),
    )
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn criterion_10() -> Outcome {
    let config = SimConfig::from_path(&fixture("golden.toml")).map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(fixture("golden_transcript.jsonl")).map_err(|e| e.to_string())?;
    let mut session = Session::new(config.clone());
    let mut lines = golden.lines();
    let mut frames = 0;
    while let Some(sent) = lines.next() {
        let request = sent.strip_prefix("> ").ok_or("transcript: expected a client line")?;
        let want = lines.next().and_then(|l| l.strip_prefix("< ")).ok_or("transcript: expected a server line")?;
        let got = session.handle_line(request);
        if got != want {
            return Err(format!("frame {frames} differs: {got}"));
        }
        frames += 1;
    }

    let mut fresh = Session::new(config.clone());
    fresh.handle_line(r#"{"kind":"reset","seed":1}"#);
    let reply: serde_json::Value = serde_json::from_str(&fresh.handle_line(
        r#"{"kind":"act","actions":{"0":[2,2],"1":[2,2],"2":[2,2],"3":[2,5],"4":[2,2],"5":[2],"6":[2,2,1,1,1]}}"#,
    ))
    .map_err(|e| e.to_string())?;
    let documented = reply["kind"] == "error"
        && reply["code"] == "index_out_of_range"
        && reply["agent"] == 3
        && reply["dimension"] == "price";

    let sim = macrosim::kernel::Simulation::new(config.clone(), 0).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for id in 0..7 {
        let Some(obs) = sim.observe(id) else { continue };
        for dim in dimensions(&obs, &config.grids) {
            for (k, v) in dim.values.iter().enumerate() {
                let one = [macrosim::grid::Dimension { name: dim.name.clone(), values: dim.values }];
                let back = decode_all(&one, &encode_all(&one, &[*v]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                let index = encode_all(&one, &decode_all(&one, &[k]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                if back != [*v] || index != [k] {
                    return Err(format!("{}: value {v} does not round-trip", dim.name));
                }
                checked += 1;
            }
        }
    }
    check(
        documented && frames == 10,
        format!("{frames} frames byte-identical, out-of-range frame documented {documented}, {checked} grid values round-trip"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let known: BTreeSet<u32> = KNOWN_FAILURES.into_iter().collect();
    let mut unexpected = Vec::new();
    for (n, run) in criteria {
        let outcome = run();
        let failed = outcome.is_err();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let note = match (failed, known.contains(&n)) {
            (true, true) => " [known failure, see decisions ledger]",
            (false, true) => " [listed as a known failure but passed]",
            _ => "",
        };
        println!("criterion {n:>2}: {status} - {detail}{note}");
        if failed != known.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
