use approx::assert_relative_eq;
use macrosim::config::{Preset, SimConfig};
use macrosim::kernel::{run_episode, EpisodeLog, MessageKind, Overrides, SimError, Simulation, Stage};
use macrosim::model::Sector;
use macrosim::policy::{Action, PolicySpec};

fn small(n: usize, m: usize, horizon: u32) -> SimConfig {
    SimConfig { households: n, firms: m, horizon, ..SimConfig::default() }
}

#[test]
fn hand_iterated_savings() {
    let cfg = small(2, 1, 4);
    let log = run_episode(&cfg, 11).unwrap();
    assert_eq!(log.quarters.len(), 4);
    let xi = cfg.government.redistribution;
    for (k, q) in log.quarters.iter().enumerate() {
        let f = &q.firms[0];
        for h in &q.households {
            let worked = if h.employer.is_some() { 480.0 } else { 0.0 };
            assert_eq!(h.labor_income, worked * f.wage);
            assert_relative_eq!(h.spending, h.consumption * f.price, max_relative = 1e-12);
            let expect = (1.0 + h.rate) * h.savings + h.labor_income * (1.0 - h.tax_rate) + h.credit - h.spending;
            assert_relative_eq!(h.next_savings, expect, max_relative = 1e-12, epsilon = 1e-9);
        }
        if k + 1 < log.quarters.len() {
            let next = &log.quarters[k + 1];
            for (a, b) in q.households.iter().zip(&next.households) {
                assert_eq!(b.savings, a.next_savings);
                // uniform fractions split the redistributed pool evenly
                assert_relative_eq!(b.credit, xi * q.government.total_tax / 2.0, max_relative = 1e-12);
            }
        }
    }
    assert!(log.quarters[0].households.iter().all(|h| h.savings == 0.0 && h.credit == 0.0));
}

#[test]
fn accounting_identities() {
    let log = run_episode(&small(20, 3, 12), 5).unwrap();
    for q in &log.quarters {
        let bought: f64 = q.households.iter().map(|h| h.consumption).sum();
        let sold: f64 = q.firms.iter().map(|f| f.sales).sum();
        assert_relative_eq!(bought, sold, max_relative = 1e-12, epsilon = 1e-9);
        for f in &q.firms {
            assert!(f.sales <= f.demand + 1e-9);
            assert_relative_eq!(f.next_inventory, f.inventory + f.output - f.sales, epsilon = 1e-9);
            assert!(f.next_inventory >= 0.0);
            let profit = f.revenue - f.wage_bill - f.input_cost;
            assert_relative_eq!(f.profit_tax, f.tax_rate * profit.max(0.0), epsilon = 1e-9);
            assert_relative_eq!(
                f.next_deposits,
                (1.0 + f.rate) * f.deposits + profit - f.profit_tax,
                max_relative = 1e-12,
                epsilon = 1e-6
            );
            assert_eq!(f.hours, 480.0 * f.employees as f64);
        }
        let taxes: f64 = q.households.iter().map(|h| h.income_tax).sum::<f64>()
            + q.firms.iter().map(|f| f.profit_tax).sum::<f64>();
        assert_relative_eq!(q.government.total_tax, taxes, max_relative = 1e-12);
        assert_relative_eq!(q.government.next_credits, 0.1 * q.government.total_tax, max_relative = 1e-12);
        let employed = q.households.iter().filter(|h| h.employer.is_some()).count() as u32;
        assert_eq!(q.firms.iter().map(|f| f.employees).sum::<u32>(), employed);
    }
}

#[test]
fn deterministic_per_seed() {
    let cfg = small(15, 3, 10);
    let a = run_episode(&cfg, 42).unwrap().to_csv_string();
    let b = run_episode(&cfg, 42).unwrap().to_csv_string();
    let c = run_episode(&cfg, 43).unwrap().to_csv_string();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn message_counts_follow_population() {
    let (n, m) = (12, 4);
    let log = run_episode(&small(n, m, 6), 3).unwrap();
    let (n, m) = (n as u64, m as u64);
    for q in &log.quarters {
        let s = &q.messages;
        let employed = q.households.iter().filter(|h| h.employer.is_some()).count() as u64;
        assert_eq!(s.get(MessageKind::PriceQuery), n * m);
        assert_eq!(s.get(MessageKind::PriceReply), n * m);
        assert_eq!(s.get(MessageKind::ConsumptionOrder), n * m);
        assert_eq!(s.get(MessageKind::GoodsDelivery), n * m);
        assert_eq!(s.get(MessageKind::TaxAssessment), n + m);
        assert_eq!(s.get(MessageKind::CreditTransfer), n);
        assert_eq!(s.get(MessageKind::RateBroadcast), 2 * (n + m));
        assert_eq!(s.get(MessageKind::MarketReport), m);
        assert_eq!(s.get(MessageKind::LaborReport), employed);
        assert_eq!(s.get(MessageKind::WageNotify), employed);
        assert_eq!(s.counts.values().sum::<u64>(), s.total);
        let phases: Vec<u8> = q.phases.iter().map(|p| p.phase).collect();
        assert_eq!(phases, (1..=10).collect::<Vec<_>>());
        assert!(q.phases.windows(2).all(|w| w[0].first_event <= w[1].first_event));
    }
    // no demand history yet, so nobody is hired or fired in the first period
    let first = &log.quarters[0].messages;
    assert_eq!(first.get(MessageKind::FireNotify) + first.get(MessageKind::HireRequest), 0);
}

#[test]
fn csv_round_trip() {
    let log = run_episode(&small(6, 2, 5), 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    log.write_files(dir.path(), "ep").unwrap();
    let back = EpisodeLog::read_files(&dir.path().join("ep.csv"), &dir.path().join("ep.json")).unwrap();
    assert_eq!(back.seed, log.seed);
    assert_eq!(back.config, log.config);
    assert_eq!(back.quarters.len(), log.quarters.len());
    for (a, b) in log.quarters.iter().zip(&back.quarters) {
        assert_eq!(a.households, b.households);
        assert_eq!(a.firms, b.firms);
        assert_eq!(a.central_bank, b.central_bank);
        assert_eq!(a.government, b.government);
        assert_eq!(a.messages.total, b.messages.total);
    }
    assert_eq!(back.to_csv_string(), log.to_csv_string());
}

#[test]
fn regional_preset_acts_on_federal_periods() {
    let cfg = SimConfig { preset: Preset::RegionalBiweekly, horizon: 26, ..SimConfig::default() };
    let log = run_episode(&cfg, 2).unwrap();
    let acted: Vec<u32> = log.quarters.iter().filter(|q| q.central_bank.acted).map(|q| q.t).collect();
    assert_eq!(acted, vec![6, 12, 19, 25]);
    let gov: Vec<u32> = log.quarters.iter().filter(|q| q.government.acted).map(|q| q.t).collect();
    assert_eq!(gov, acted);
    for q in &log.quarters {
        for f in &q.firms {
            match f.sector {
                Sector::Retail => assert!(f.output <= f.input_cost / 188.0 + 1e-9),
                _ => assert_eq!(f.input_cost, 0.0),
            }
        }
        if !q.government.acted {
            assert_eq!(q.government.next_credits, 0.0);
        }
    }
    // per-period rate is the annual-quarter rate scaled to two weeks
    let q = &log.quarters[0];
    assert_relative_eq!(q.households[0].rate, q.central_bank.rate * 4.0 / 26.0, max_relative = 1e-15);
}

#[test]
fn overrides_replace_policies() {
    let mut sim = Simulation::new(small(3, 2, 2), 1).unwrap();
    assert!(matches!(sim.finish_period(&Overrides::new()), Err(SimError::Sequence(_))));
    sim.begin_period().unwrap();
    assert_eq!(sim.stage(), Stage::AwaitHouseholds);
    let mut over = Overrides::new();
    over.insert(0, Action::Household { consumption: vec![0.0, 0.0] });
    over.insert(3, Action::Firm { wage: 10.0, price: 200.0 });
    let q = sim.finish_period(&over).unwrap();
    assert_eq!(q.households[0].consumption, 0.0);
    assert!(q.households[1].consumption > 0.0 && q.households[1].consumption <= 24.0);
    assert_eq!(sim.state().firms[0].price, 200.0);
    assert_eq!(sim.state().firms[0].wage, 10.0);

    sim.begin_period().unwrap();
    let mut bad = Overrides::new();
    bad.insert(1, Action::Household { consumption: vec![1.0] });
    let err = sim.finish_period(&bad).unwrap_err();
    assert!(matches!(err, SimError::InvalidAction { agent: 1, .. }), "{err}");
}

#[test]
fn remote_bindings_need_the_server() {
    let mut cfg = small(3, 1, 2);
    cfg.policies.household = PolicySpec::Remote;
    assert!(matches!(run_episode(&cfg, 0), Err(SimError::RemoteBinding("household"))));
    let mut sim = Simulation::new(cfg, 0).unwrap();
    sim.begin_period().unwrap();
    assert!(matches!(sim.finish_period(&Overrides::new()), Err(SimError::Policy { .. })));
}
