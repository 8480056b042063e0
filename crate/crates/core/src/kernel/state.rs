//! World state and its seeded initialization.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, Layout, SimConfig};
use crate::grid::ActionGrid;
use crate::model::{
    CentralBankState, CentralBankView, DemandForecast, FirmState, FirmView, GovernmentState, GovernmentView,
    HouseholdState, HouseholdView, Preferences, PriceHistory, ProductionPlan,
};
use crate::policy::random_grid;
use crate::rng::{stream, Stream};

use super::message::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimClock {
    /// Current period.
    pub t: u32,
    pub horizon: u32,
}

impl SimClock {
    pub fn finished(&self) -> bool {
        self.t >= self.horizon
    }
}

/// Global agent numbering: households, then firms, then the central bank,
/// the government and the optional regional bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentIds {
    pub households: u32,
    pub firms: u32,
    pub regional_bank: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRef {
    Household(usize),
    Firm(usize),
    CentralBank,
    Government,
    RegionalBank,
}

impl AgentIds {
    pub fn new(layout: &Layout) -> Self {
        Self { households: layout.households as u32, firms: layout.firms() as u32, regional_bank: layout.regional_bank }
    }

    pub fn household(&self, i: usize) -> AgentId {
        i as AgentId
    }

    pub fn firm(&self, j: usize) -> AgentId {
        self.households + j as AgentId
    }

    pub fn central_bank(&self) -> AgentId {
        self.households + self.firms
    }

    pub fn government(&self) -> AgentId {
        self.central_bank() + 1
    }

    pub fn regional_bank(&self) -> Option<AgentId> {
        self.regional_bank.then(|| self.government() + 1)
    }

    pub fn total(&self) -> u32 {
        self.government() + 1 + u32::from(self.regional_bank)
    }

    pub fn resolve(&self, id: AgentId) -> Option<AgentRef> {
        let (n, m) = (self.households, self.firms);
        Some(match id {
            i if i < n => AgentRef::Household(i as usize),
            j if j < n + m => AgentRef::Firm((j - n) as usize),
            c if c == n + m => AgentRef::CentralBank,
            g if g == n + m + 1 => AgentRef::Government,
            b if b == n + m + 2 && self.regional_bank => AgentRef::RegionalBank,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EconomyState {
    pub clock: SimClock,
    pub layout: Layout,
    pub ids: AgentIds,
    pub labor_hours: f64,
    pub grids: ActionGrid,
    pub households: Vec<HouseholdState>,
    pub firms: Vec<FirmState>,
    pub central_bank: CentralBankState,
    pub government: GovernmentState,
    /// Per-period rate rebroadcast by the regional bank.
    pub bank_rate: Option<f64>,
    pub shocks: ChaCha8Rng,
}

impl EconomyState {
    /// Household `i`'s employer as a firm index.
    pub fn employment(&self) -> Vec<Option<usize>> {
        self.households.iter().map(|h| h.employer.map(|j| j as usize)).collect()
    }
}

/// Fresh state for an episode. Every source of randomness has its own stream,
/// so replacing one draw by a fixed override leaves the others unchanged.
pub fn init_state(config: &SimConfig, seed: u64) -> Result<EconomyState, ConfigError> {
    let layout = config.layout();
    let n = layout.households;
    let m = layout.firms();
    let grids = config.grids.clone();

    let hp = &config.household;
    // row-major: household i's skill at firm j is flat[i * m + j]
    let flat = hp.skills.sample("household.skills", n * m, true, &mut stream(seed, Stream::Skills))?;

    let mut params = stream(seed, Stream::Parameters);
    let gamma = hp.gamma.sample("household.gamma", n, false, &mut params)?;
    let nu = hp.nu.sample("household.nu", n, false, &mut params)?;
    let mu = hp.mu.sample("household.mu", n, false, &mut params)?;
    let hh_discount = hp.discount.sample("household.discount", n, false, &mut params)?;
    let fp = &config.firm;
    let rho = fp.rho.sample("firm.rho", m, false, &mut params)?;
    let shock_mean = fp.shock_mean.sample("firm.shock_mean", m, false, &mut params)?;
    let shock_std = fp.shock_std.sample("firm.shock_std", m, false, &mut params)?;
    let inventory_risk = fp.inventory_risk.sample("firm.inventory_risk", m, false, &mut params)?;
    let firm_discount = fp.discount.sample("firm.discount", m, false, &mut params)?;
    let alpha = fp.alpha.sample("firm.alpha", m, true, &mut stream(seed, Stream::Elasticities))?;

    let mut init = stream(seed, Stream::InitialActions);
    let mut wage_price = Vec::with_capacity(m);
    for _ in 0..m {
        let w = random_grid(&grids.firm_wage, &mut init);
        let p = random_grid(&grids.firm_price, &mut init);
        wage_price.push((w, p));
    }
    let rate = random_grid(&grids.cb_rate, &mut init);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, Stream::Employment));
    let mut employer = vec![0usize; n];
    for (k, &i) in order.iter().enumerate() {
        employer[i] = k % m;
    }

    let labor_hours = config.labor_hours();
    let households: Vec<HouseholdState> = (0..n)
        .map(|i| HouseholdState {
            id: i as u32,
            savings: 0.0,
            skills: flat[i * m..(i + 1) * m].to_vec(),
            employer: Some(employer[i] as u32),
            prefs: Preferences { gamma: gamma[i], nu: nu[i], mu: mu[i] },
            discount: hh_discount[i],
            labor_hours,
            credit: 0.0,
            view: HouseholdView::default(),
        })
        .collect();

    let firms: Vec<FirmState> = (0..m)
        .map(|j| FirmState {
            id: j as u32,
            sector: layout.sectors[j],
            inventory: 0.0,
            deposits: 0.0,
            price: wage_price[j].1,
            wage: wage_price[j].0,
            alpha: alpha[j],
            rho: rho[j],
            shock_mean: shock_mean[j],
            shock_std: shock_std[j],
            prod_factor: 1.0,
            prev_prod_factor: 1.0,
            shock: 0.0,
            inventory_risk: inventory_risk[j],
            discount: firm_discount[j],
            demand: DemandForecast::default(),
            min_skill: fp.min_skill,
            employees: (0..n).filter(|&i| employer[i] == j).map(|i| i as u32).collect(),
            plan: ProductionPlan::default(),
            view: FirmView::default(),
        })
        .collect();

    let cb = &config.central_bank;
    let central_bank = CentralBankState {
        rate,
        prices: PriceHistory::default(),
        target: cb.target_inflation,
        production_weight: cb.production_weight,
        discount: cb.discount,
        view: CentralBankView::default(),
    };

    let gp = &config.government;
    let tax = config.initial_tax();
    let government = GovernmentState {
        tax_household: tax,
        tax_firm: tax,
        fractions: vec![1.0 / n as f64; n],
        redistribution: gp.redistribution,
        utility_weight: gp.utility_weight,
        weights: vec![1.0 / n as f64; n],
        discount: gp.discount,
        weight_epsilon: gp.weight_epsilon,
        credits: vec![0.0; n],
        view: GovernmentView::default(),
    };

    Ok(EconomyState {
        clock: SimClock { t: 0, horizon: config.horizon },
        ids: AgentIds::new(&layout),
        layout,
        labor_hours,
        grids,
        households,
        firms,
        central_bank,
        government,
        bank_rate: None,
        shocks: stream(seed, Stream::Shocks),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Draw;

    fn config(n: usize, m: usize) -> SimConfig {
        SimConfig { households: n, firms: m, ..SimConfig::default() }
    }

    #[test]
    fn starts_empty_and_fully_employed() {
        for seed in 0..5 {
            let s = init_state(&config(10, 2), seed).unwrap();
            assert!(s.households.iter().all(|h| h.savings == 0.0 && h.employer.is_some()));
            assert!(s.firms.iter().all(|f| f.inventory == 0.0 && f.deposits == 0.0 && !f.employees.is_empty()));
            let staffed: usize = s.firms.iter().map(|f| f.employees.len()).sum();
            assert_eq!(staffed, 10);
            assert!(s.households.iter().flat_map(|h| &h.skills).all(|w| *w > 0.0));
            assert!(s.firms.iter().all(|f| (0.05..=1.0).contains(&f.alpha)));
            assert!(s.state_grid_members());
        }
    }

    impl EconomyState {
        fn state_grid_members(&self) -> bool {
            self.firms.iter().all(|f| self.grids.firm_wage.contains(&f.wage) && self.grids.firm_price.contains(&f.price))
                && self.grids.cb_rate.contains(&self.central_bank.rate)
        }
    }

    #[test]
    fn skill_override_leaves_other_draws() {
        let mut c = config(6, 3);
        let a = init_state(&c, 9).unwrap();
        c.household.skills = Draw::Value(1.0);
        let b = init_state(&c, 9).unwrap();
        assert!(b.households.iter().flat_map(|h| &h.skills).all(|w| *w == 1.0));
        let alphas = |s: &EconomyState| s.firms.iter().map(|f| f.alpha).collect::<Vec<_>>();
        assert_eq!(alphas(&a), alphas(&b));
        assert_eq!(a.employment(), b.employment());
        assert_eq!(a.central_bank.rate, b.central_bank.rate);
    }

    #[test]
    fn ids_resolve() {
        let s = init_state(&config(4, 2), 0).unwrap();
        let ids = s.ids;
        assert_eq!(ids.resolve(3), Some(AgentRef::Household(3)));
        assert_eq!(ids.resolve(ids.firm(1)), Some(AgentRef::Firm(1)));
        assert_eq!(ids.resolve(ids.central_bank()), Some(AgentRef::CentralBank));
        assert_eq!(ids.resolve(ids.government()), Some(AgentRef::Government));
        assert_eq!(ids.resolve(ids.total()), None);
        assert_eq!(ids.regional_bank(), None);
    }
}
