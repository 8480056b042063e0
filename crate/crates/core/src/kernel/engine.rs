//! The per-period phase sequence.
//!
//! A period runs in two halves so that an external driver can supply actions
//! at the household decision point:
//!
//! * [`Simulation::begin_period`] runs phases 1 to 5 up to the price replies;
//! * [`Simulation::finish_period`] takes household actions, then runs phases
//!   6 to 10 and records the period.
//!
//! Phases:
//! 1. rate, tax and credit announcements; firms forecast demand and plan
//! 2. layoffs, then hire requests to qualified unemployed households
//! 3. hire acceptances
//! 4. labor reports, production (retail buys farm output first), wages
//! 5. price queries; households decide consumption
//! 6. orders, rationing, deliveries; firm inventory, deposits and taxes
//! 7. household savings and income taxes
//! 8. firms set next price and wage
//! 9. market reports; the central bank sets the next rate
//! 10. the government sets next tax rates and credits

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};

use crate::config::{Preset, SimConfig};
use crate::grid::ActionGrid;
use crate::model::{
    accept_applicants, choose_employer, distribute_credits, evolve_shock, firm_reward, gov_reward, labor_decision,
    plan_production, produce, profit_tax, ration_consumption, select_layoffs, update_deposits, update_inventory,
    utility, welfare_weights, LaborDecision, Normalizers, ProductionPlan, SavingsFlows, Sector,
};
use crate::policy::{
    Action, AgentType, CentralBankObservation, FirmObservation, GovernmentObservation, HouseholdObservation,
    Observation, Policy,
};

use super::log::{
    CentralBankRecord, EpisodeLog, FirmRecord, GovernmentRecord, HouseholdRecord, PhaseMark, QuarterRecord,
};
use super::message::{AgentId, Announced, Bus, Payload};
use super::state::{init_state, AgentRef, EconomyState};
use super::SimError;

/// Actions supplied from outside, keyed by global agent id. They replace the
/// bound policy for that agent in the current period.
pub type Overrides = BTreeMap<AgentId, Action>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Ready for `begin_period`.
    Open,
    /// Waiting for household actions.
    AwaitHouseholds,
    Finished,
}

/// Working values of the period in progress.
#[derive(Debug, Clone, Default)]
struct Period {
    phases: Vec<PhaseMark>,
    forecast: Vec<Option<f64>>,
    need: Vec<usize>,
    vacancies: Vec<u32>,
    hours: Vec<f64>,
    output: Vec<f64>,
    inputs: Vec<f64>,
    input_cost: Vec<f64>,
    wage_bill: Vec<f64>,
    demand: Vec<f64>,
    sales: Vec<f64>,
    labor_income: Vec<f64>,
    consumption: Vec<f64>,
    spending: Vec<f64>,
}

pub struct Simulation {
    config: SimConfig,
    seed: u64,
    state: EconomyState,
    policies: Vec<Box<dyn Policy>>,
    sellers: Vec<usize>,
    seller_index: Vec<Option<usize>>,
    norm: Normalizers,
    bus: Bus,
    stage: Stage,
    period: Period,
    quarters: Vec<QuarterRecord>,
    /// Production and nominal output since the central bank last decided.
    cb_production: f64,
    cb_nominal: f64,
    /// Taxes collected since the government last decided.
    tax_pool: f64,
}

impl Simulation {
    pub fn new(config: SimConfig, seed: u64) -> Result<Self, SimError> {
        config.validate()?;
        let state = init_state(&config, seed)?;
        let ids = state.ids;
        let n = state.households.len();
        let m = state.firms.len();
        let mut policies: Vec<Box<dyn Policy>> = Vec::with_capacity(n + m + 2);
        for i in 0..n {
            policies.push(config.policies.household.build(AgentType::Household, seed, ids.household(i)));
        }
        for j in 0..m {
            policies.push(config.policies.firm.build(AgentType::Firm, seed, ids.firm(j)));
        }
        policies.push(config.policies.central_bank.build(AgentType::CentralBank, seed, ids.central_bank()));
        policies.push(config.policies.government.build(AgentType::Government, seed, ids.government()));

        let sellers: Vec<usize> = state.layout.sellers().into_iter().map(|j| j as usize).collect();
        let mut seller_index = vec![None; m];
        for (k, &j) in sellers.iter().enumerate() {
            seller_index[j] = Some(k);
        }
        let g = &config.grids;
        let alphas: Vec<f64> = state.firms.iter().map(|f| f.alpha).collect();
        let norm = Normalizers::new(
            ActionGrid::default_of(&g.household_consumption),
            ActionGrid::default_of(&g.firm_price),
            ActionGrid::default_of(&g.firm_wage),
            state.labor_hours,
            n,
            &alphas,
        );
        Ok(Self {
            config,
            seed,
            state,
            policies,
            sellers,
            seller_index,
            norm,
            bus: Bus::default(),
            stage: Stage::Open,
            period: Period::default(),
            quarters: Vec::new(),
            cb_production: 0.0,
            cb_nominal: 0.0,
            tax_pool: 0.0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn state(&self) -> &EconomyState {
        &self.state
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn quarters(&self) -> &[QuarterRecord] {
        &self.quarters
    }

    pub fn normalizers(&self) -> &Normalizers {
        &self.norm
    }

    /// Firm indices households buy from, in the order of household price and
    /// consumption vectors.
    pub fn sellers(&self) -> &[usize] {
        &self.sellers
    }

    pub fn into_log(self) -> EpisodeLog {
        EpisodeLog { seed: self.seed, config: self.config, quarters: self.quarters }
    }

    fn mark(&mut self, phase: u8) {
        self.period.phases.push(PhaseMark { phase, first_event: self.bus.delivered() });
    }

    fn federal(&self) -> bool {
        self.config.preset.federal_acts(self.state.clock.t)
    }

    /// Phases 1 to 5 up to the household decision point.
    pub fn begin_period(&mut self) -> Result<(), SimError> {
        match self.stage {
            Stage::Open => {}
            Stage::AwaitHouseholds => return Err(SimError::Sequence("period already begun")),
            Stage::Finished => return Err(SimError::Sequence("episode finished")),
        }
        let n = self.state.households.len();
        let m = self.state.firms.len();
        self.period = Period {
            forecast: vec![None; m],
            need: vec![0; m],
            vacancies: vec![0; m],
            hours: vec![0.0; m],
            output: vec![0.0; m],
            inputs: vec![0.0; m],
            input_cost: vec![0.0; m],
            wage_bill: vec![0.0; m],
            demand: vec![0.0; m],
            sales: vec![0.0; m],
            labor_income: vec![0.0; n],
            consumption: vec![0.0; n],
            spending: vec![0.0; n],
            phases: Vec::with_capacity(10),
        };
        self.announce();
        self.plan();
        self.labor_round();
        self.produce()?;
        self.quote_prices();
        self.stage = Stage::AwaitHouseholds;
        Ok(())
    }

    /// Phase 1.
    fn announce(&mut self) {
        self.mark(1);
        let s = &mut self.state;
        let ids = s.ids;
        let (source, rate) = match ids.regional_bank() {
            Some(bank) => {
                self.bus.send(ids.central_bank(), bank, Payload::RateBroadcast { rate: s.central_bank.rate, what: Announced::Interest });
                for msg in self.bus.dispatch() {
                    if let Payload::RateBroadcast { rate, .. } = msg.payload {
                        s.bank_rate = Some(rate * self.config.preset.quarter_fraction());
                    }
                }
                (bank, s.bank_rate.unwrap_or(0.0))
            }
            None => (ids.central_bank(), s.central_bank.rate),
        };
        let gov = ids.government();
        for i in 0..s.households.len() {
            let to = ids.household(i);
            self.bus.send(source, to, Payload::RateBroadcast { rate, what: Announced::Interest });
            self.bus.send(gov, to, Payload::RateBroadcast { rate: s.government.tax_household, what: Announced::HouseholdTax });
            self.bus.send(gov, to, Payload::CreditTransfer { amount: s.government.credits[i] });
        }
        for j in 0..s.firms.len() {
            let to = ids.firm(j);
            self.bus.send(source, to, Payload::RateBroadcast { rate, what: Announced::Interest });
            self.bus.send(gov, to, Payload::RateBroadcast { rate: s.government.tax_firm, what: Announced::FirmTax });
        }
        for msg in self.bus.dispatch() {
            match (ids.resolve(msg.recipient), msg.payload) {
                (Some(AgentRef::Household(i)), Payload::RateBroadcast { rate, what }) => {
                    let view = &mut s.households[i].view;
                    match what {
                        Announced::Interest => view.rate = rate,
                        _ => view.tax_rate = rate,
                    }
                }
                (Some(AgentRef::Household(i)), Payload::CreditTransfer { amount }) => s.households[i].credit = amount,
                (Some(AgentRef::Firm(j)), Payload::RateBroadcast { rate, what }) => {
                    let view = &mut s.firms[j].view;
                    match what {
                        Announced::Interest => view.rate = rate,
                        _ => view.tax_rate = rate,
                    }
                }
                _ => unreachable!("unexpected announcement {msg:?}"),
            }
        }
    }

    /// Phase 1, firm side: demand forecast and production plan. Without any
    /// demand history a firm plans to keep its workforce.
    fn plan(&mut self) {
        let n_bar = self.state.labor_hours;
        for (j, f) in self.state.firms.iter_mut().enumerate() {
            let forecast = f.demand.forecast();
            self.period.forecast[j] = forecast;
            f.plan = match forecast {
                Some(c) => plan_production(c, f.inventory, f.alpha),
                None => {
                    let hours = n_bar * f.employees.len() as f64;
                    ProductionPlan { output: hours.powf(f.alpha), hours }
                }
            };
        }
    }

    /// Phases 2 and 3.
    fn labor_round(&mut self) {
        self.mark(2);
        let s = &mut self.state;
        let ids = s.ids;
        let n_bar = s.labor_hours;
        let m = s.firms.len();
        let decisions: Vec<LaborDecision> =
            s.firms.iter().map(|f| labor_decision(f.plan.hours, f.employees.len(), n_bar)).collect();

        for (j, decision) in decisions.iter().enumerate() {
            if let LaborDecision::Fire(count) = *decision {
                let f = &mut s.firms[j];
                let staff: Vec<(u32, f64)> =
                    f.employees.iter().map(|&i| (i, s.households[i as usize].skills[j])).collect();
                let fired = select_layoffs(&staff, count);
                f.employees.retain(|i| fired.binary_search(i).is_err());
                for i in fired {
                    self.bus.send(ids.firm(j), ids.household(i as usize), Payload::FireNotify);
                }
            }
        }
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Household(i)), Payload::FireNotify) = (ids.resolve(msg.recipient), msg.payload) {
                s.households[i].employer = None;
            }
        }

        for (j, decision) in decisions.iter().enumerate() {
            if let LaborDecision::Hire(need) = *decision {
                self.period.need[j] = need;
                let min_skill = s.firms[j].min_skill;
                for (i, h) in s.households.iter().enumerate() {
                    if h.employer.is_none() && h.skills[j] >= min_skill {
                        self.bus.send(ids.firm(j), ids.household(i), Payload::HireRequest);
                    }
                }
            }
        }
        let mut offers: Vec<Vec<(u32, f64)>> = vec![Vec::new(); s.households.len()];
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Household(i)), Some(AgentRef::Firm(j))) =
                (ids.resolve(msg.recipient), ids.resolve(msg.sender))
            {
                offers[i].push((j as u32, s.households[i].skills[j]));
            }
        }

        self.period.phases.push(PhaseMark { phase: 3, first_event: self.bus.delivered() });
        for (i, o) in offers.iter().enumerate() {
            if let Some(j) = choose_employer(o) {
                self.bus.send(ids.household(i), ids.firm(j as usize), Payload::HireAccept);
            }
        }
        let mut applicants: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Firm(j)), Some(AgentRef::Household(i))) =
                (ids.resolve(msg.recipient), ids.resolve(msg.sender))
            {
                applicants[j].push((i as u32, s.households[i].skills[j]));
            }
        }
        for j in 0..m {
            let hired = accept_applicants(&applicants[j], self.period.need[j]);
            for &i in &hired {
                s.households[i as usize].employer = Some(j as u32);
            }
            let f = &mut s.firms[j];
            f.employees.extend(hired);
            f.employees.sort_unstable();
            let wanted = (f.plan.hours / n_bar).ceil();
            self.period.vacancies[j] = (wanted - f.employees.len() as f64).max(0.0) as u32;
        }
    }

    /// Phase 4.
    fn produce(&mut self) -> Result<(), SimError> {
        self.mark(4);
        let t = self.state.clock.t;
        let s = &mut self.state;
        let ids = s.ids;
        for (i, h) in s.households.iter_mut().enumerate() {
            h.view.wage = 0.0;
            if let Some(j) = h.employer {
                self.bus.send(ids.household(i), ids.firm(j as usize), Payload::LaborReport { hours: h.labor_hours });
            }
        }
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Firm(j)), Payload::LaborReport { hours }) = (ids.resolve(msg.recipient), msg.payload) {
                self.period.hours[j] += hours;
            }
        }

        for (j, f) in s.firms.iter_mut().enumerate() {
            if t > 0 {
                let dist = Normal::new(f.shock_mean, f.shock_std).map_err(|e| SimError::Internal(e.to_string()))?;
                let shock = dist.sample(&mut s.shocks);
                f.prev_prod_factor = f.prod_factor;
                f.prod_factor = evolve_shock(f.prod_factor, f.rho, shock);
                f.shock = shock;
            }
            f.view.labor = self.period.hours[j];
            self.period.output[j] = produce(self.period.hours[j], f.prod_factor, f.alpha);
        }

        // Retail stores source their goods from farms.
        let farms: Vec<usize> = (0..s.firms.len()).filter(|&j| s.firms[j].sector == Sector::Farm).collect();
        let retail: Vec<usize> = (0..s.firms.len()).filter(|&j| s.firms[j].sector == Sector::Retail).collect();
        if !retail.is_empty() {
            for &r in &retail {
                let share = self.period.output[r] / farms.len() as f64;
                for &f in &farms {
                    self.bus.send(ids.firm(r), ids.firm(f), Payload::ConsumptionOrder { quantity: share });
                }
            }
            let mut orders: Vec<Vec<(usize, f64)>> = vec![Vec::new(); s.firms.len()];
            for msg in self.bus.dispatch() {
                if let (Some(AgentRef::Firm(f)), Some(AgentRef::Firm(r)), Payload::ConsumptionOrder { quantity }) =
                    (ids.resolve(msg.recipient), ids.resolve(msg.sender), msg.payload)
                {
                    orders[f].push((r, quantity));
                }
            }
            for &f in &farms {
                let requests: Vec<f64> = orders[f].iter().map(|o| o.1).collect();
                let supply = s.firms[f].inventory + self.period.output[f];
                let alloc = ration_consumption(&requests, supply);
                self.period.demand[f] = requests.iter().sum();
                self.period.sales[f] = alloc.iter().sum();
                for ((r, _), q) in orders[f].iter().zip(alloc) {
                    self.bus.send(ids.firm(f), ids.firm(*r), Payload::GoodsDelivery { quantity: q, price: s.firms[f].price });
                }
            }
            for msg in self.bus.dispatch() {
                if let (Some(AgentRef::Firm(r)), Payload::GoodsDelivery { quantity, price }) =
                    (ids.resolve(msg.recipient), msg.payload)
                {
                    self.period.inputs[r] += quantity;
                    self.period.input_cost[r] += quantity * price;
                }
            }
            for &r in &retail {
                self.period.output[r] = self.period.output[r].min(self.period.inputs[r]);
            }
        }

        for (j, f) in s.firms.iter().enumerate() {
            self.period.wage_bill[j] = f.wage * self.period.hours[j];
            for &i in &f.employees {
                self.bus.send(ids.firm(j), ids.household(i as usize), Payload::WageNotify { wage: f.wage });
            }
        }
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Household(i)), Payload::WageNotify { wage }) = (ids.resolve(msg.recipient), msg.payload) {
                let h = &mut s.households[i];
                h.view.wage = wage;
                self.period.labor_income[i] = h.labor_hours * wage;
            }
        }
        Ok(())
    }

    /// Phase 5, up to the decision point.
    fn quote_prices(&mut self) {
        self.mark(5);
        let s = &mut self.state;
        let ids = s.ids;
        for i in 0..s.households.len() {
            s.households[i].view.prices = vec![0.0; self.sellers.len()];
            for &j in &self.sellers {
                self.bus.send(ids.household(i), ids.firm(j), Payload::PriceQuery);
            }
        }
        for msg in self.bus.dispatch() {
            if let Some(AgentRef::Firm(j)) = ids.resolve(msg.recipient) {
                self.bus.send(msg.recipient, msg.sender, Payload::PriceReply { price: s.firms[j].price });
            }
        }
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Household(i)), Some(AgentRef::Firm(j)), Payload::PriceReply { price }) =
                (ids.resolve(msg.recipient), ids.resolve(msg.sender), msg.payload)
            {
                let k = self.seller_index[j].expect("price replies come from sellers");
                s.households[i].view.prices[k] = price;
            }
        }
    }

    /// Observation of any agent from what it has received so far.
    pub fn observe(&self, id: AgentId) -> Option<Observation> {
        let s = &self.state;
        Some(match s.ids.resolve(id)? {
            AgentRef::Household(i) => {
                let h = &s.households[i];
                Observation::Household(HouseholdObservation {
                    id: i as u32,
                    credit: h.credit,
                    tax_rate: h.view.tax_rate,
                    rate: h.view.rate,
                    prices: h.view.prices.clone(),
                    wage: h.view.wage,
                    savings: h.savings,
                    skills: h.skills.clone(),
                })
            }
            AgentRef::Firm(j) => {
                let f = &s.firms[j];
                Observation::Firm(FirmObservation {
                    id: j as u32,
                    tax_rate: f.view.tax_rate,
                    rate: f.view.rate,
                    labor: f.view.labor,
                    consumption: f.view.consumption,
                    shock: f.shock,
                    prev_prod_factor: f.prev_prod_factor,
                    wage: f.wage,
                    price: f.price,
                    inventory: f.inventory,
                    deposits: f.deposits,
                    alpha: f.alpha,
                })
            }
            AgentRef::CentralBank => Observation::CentralBank(CentralBankObservation {
                t: s.clock.t,
                rate: s.central_bank.rate,
                price_totals: s.central_bank.prices.recent(),
                production: self.cb_production,
                nominal_output: self.cb_nominal,
            }),
            AgentRef::Government => {
                let g = &s.government;
                Observation::Government(GovernmentObservation {
                    tax_household: g.tax_household,
                    tax_firm: g.tax_firm,
                    household_taxes: padded(&g.view.household_taxes, s.households.len()),
                    firm_taxes: padded(&g.view.firm_taxes, s.firms.len()),
                    credits: g.credits.clone(),
                    weights: g.weights.clone(),
                })
            }
            AgentRef::RegionalBank => return None,
        })
    }

    fn decide(&mut self, id: AgentId, overrides: &Overrides) -> Result<Action, SimError> {
        let t = self.state.clock.t;
        let obs = self.observe(id).expect("decisions are made by policy-bound agents");
        let agent = obs.agent_type();
        let action = match overrides.get(&id) {
            Some(a) => a.clone(),
            None => self.policies[id as usize]
                .act(&obs, &self.config.grids)
                .map_err(|source| SimError::Policy { t, agent: id, agent_type: agent.as_str(), source })?,
        };
        check_action(&obs, &action).map_err(|reason| SimError::InvalidAction { t, agent: id, reason })?;
        Ok(action)
    }

    /// Household decisions, then phases 6 to 10.
    pub fn finish_period(&mut self, overrides: &Overrides) -> Result<&QuarterRecord, SimError> {
        match self.stage {
            Stage::AwaitHouseholds => {}
            Stage::Open => return Err(SimError::Sequence("period not begun")),
            Stage::Finished => return Err(SimError::Sequence("episode finished")),
        }
        let ids = self.state.ids;
        let n = self.state.households.len();
        let m = self.state.firms.len();
        let t = self.state.clock.t;
        let mut requests = Vec::with_capacity(n);
        for i in 0..n {
            match self.decide(ids.household(i), overrides)? {
                Action::Household { consumption } => requests.push(consumption),
                _ => unreachable!("checked by check_action"),
            }
        }

        // Phase 6.
        self.mark(6);
        for (i, req) in requests.iter().enumerate() {
            for (k, &j) in self.sellers.iter().enumerate() {
                self.bus.send(ids.household(i), ids.firm(j), Payload::ConsumptionOrder { quantity: req[k] });
            }
        }
        let mut orders: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Firm(j)), Some(AgentRef::Household(i)), Payload::ConsumptionOrder { quantity }) =
                (self.state.ids.resolve(msg.recipient), ids.resolve(msg.sender), msg.payload)
            {
                orders[j].push((i, quantity));
            }
        }
        let before: Vec<(f64, f64)> = self.state.firms.iter().map(|f| (f.inventory, f.deposits)).collect();
        let mut revenue = vec![0.0; m];
        let mut taxes = vec![0.0; m];
        for j in 0..m {
            let f = &mut self.state.firms[j];
            if f.sector.sells_to_households() {
                let req: Vec<f64> = orders[j].iter().map(|o| o.1).collect();
                let alloc = ration_consumption(&req, f.inventory + self.period.output[j]);
                self.period.demand[j] = req.iter().sum();
                self.period.sales[j] = alloc.iter().sum();
                for ((i, _), q) in orders[j].iter().zip(alloc) {
                    self.bus.send(ids.firm(j), ids.household(*i), Payload::GoodsDelivery { quantity: q, price: f.price });
                }
            }
            let sales = self.period.sales[j];
            f.inventory = update_inventory(f.inventory, self.period.output[j], sales)
                .map_err(|source| SimError::Inventory { t, firm: j, source })?;
            revenue[j] = f.price * sales;
            let costs = self.period.wage_bill[j] + self.period.input_cost[j];
            taxes[j] = profit_tax(revenue[j], costs, f.view.tax_rate);
            f.deposits = update_deposits(f.deposits, f.view.rate, revenue[j], costs, f.view.tax_rate);
            f.view.consumption = sales;
            f.demand.observe(sales);
            self.bus.send(ids.firm(j), ids.government(), Payload::TaxAssessment { amount: taxes[j], savings: None });
        }
        self.state.government.view.firm_taxes = vec![0.0; m];
        for msg in self.bus.dispatch() {
            match (ids.resolve(msg.recipient), ids.resolve(msg.sender), msg.payload) {
                (Some(AgentRef::Household(i)), _, Payload::GoodsDelivery { quantity, price }) => {
                    self.period.consumption[i] += quantity;
                    self.period.spending[i] += quantity * price;
                }
                (Some(AgentRef::Government), Some(AgentRef::Firm(j)), Payload::TaxAssessment { amount, .. }) => {
                    self.state.government.view.firm_taxes[j] = amount;
                }
                _ => unreachable!("unexpected settlement {msg:?}"),
            }
        }

        // Phase 7.
        self.mark(7);
        let mut hh_records = Vec::with_capacity(n);
        for i in 0..n {
            let h = &mut self.state.households[i];
            let flows = SavingsFlows {
                savings: h.savings,
                rate: h.view.rate,
                labor_income: self.period.labor_income[i],
                spending: self.period.spending[i],
                tax_rate: h.view.tax_rate,
                credit: h.credit,
            };
            let next = flows.next_savings();
            let tax = flows.income_tax();
            let employed = h.employer.is_some();
            let c = self.period.consumption[i];
            let e = if employed { h.labor_hours } else { 0.0 };
            hh_records.push(HouseholdRecord {
                id: i as u32,
                employer: h.employer,
                savings: h.savings,
                next_savings: next,
                labor_income: flows.labor_income,
                consumption: c,
                spending: flows.spending,
                income_tax: tax,
                credit: h.credit,
                rate: flows.rate,
                tax_rate: flows.tax_rate,
                reward: utility(c, e, next, &h.prefs),
                reward_norm: self.norm.household(c, employed, next, &h.prefs),
            });
            self.bus.send(ids.household(i), ids.government(), Payload::TaxAssessment { amount: tax, savings: Some(h.savings) });
            h.savings = next;
        }
        let gv = &mut self.state.government.view;
        gv.household_taxes = vec![0.0; n];
        gv.savings = vec![0.0; n];
        for msg in self.bus.dispatch() {
            if let (Some(AgentRef::Household(i)), Payload::TaxAssessment { amount, savings }) =
                (ids.resolve(msg.sender), msg.payload)
            {
                gv.household_taxes[i] = amount;
                gv.savings[i] = savings.unwrap_or(0.0);
            }
        }

        // Phase 8.
        self.mark(8);
        let mut firm_records = Vec::with_capacity(m);
        let mut next_wage_price = Vec::with_capacity(m);
        for j in 0..m {
            let (wage, price) = match self.decide(ids.firm(j), overrides)? {
                Action::Firm { wage, price } => (wage, price),
                _ => unreachable!("checked by check_action"),
            };
            next_wage_price.push((wage, price));
            let f = &self.state.firms[j];
            let p = &self.period;
            let raw = firm_reward(f.price, p.sales[j], f.wage, p.hours[j], f.inventory_risk, f.inventory) - p.input_cost[j];
            firm_records.push(FirmRecord {
                id: j as u32,
                sector: f.sector,
                employees: f.employees.len() as u32,
                rate: f.view.rate,
                tax_rate: f.view.tax_rate,
                hours: p.hours[j],
                desired_hours: f.plan.hours,
                forecast: p.forecast[j],
                output: p.output[j],
                prod_factor: f.prod_factor,
                shock: f.shock,
                inventory: before[j].0,
                next_inventory: f.inventory,
                deposits: before[j].1,
                next_deposits: f.deposits,
                price: f.price,
                wage: f.wage,
                sales: p.sales[j],
                demand: p.demand[j],
                revenue: revenue[j],
                wage_bill: p.wage_bill[j],
                input_cost: p.input_cost[j],
                profit_tax: taxes[j],
                vacancies: p.vacancies[j],
                reward: raw,
                reward_norm: self.norm.firm(raw),
            });
        }

        // Phase 9.
        self.mark(9);
        for (j, f) in self.state.firms.iter().enumerate() {
            self.bus.send(ids.firm(j), ids.central_bank(), Payload::MarketReport { price: f.price, output: self.period.output[j] });
        }
        let (mut total_price, mut production, mut nominal) = (0.0, 0.0, 0.0);
        let mut reports = Vec::with_capacity(m);
        for msg in self.bus.dispatch() {
            if let Payload::MarketReport { price, output } = msg.payload {
                total_price += price;
                production += output;
                nominal += price * output;
                reports.push((price, output));
            }
        }
        self.state.central_bank.view.reports = reports;
        self.cb_production += production;
        self.cb_nominal += nominal;
        let federal = self.federal();
        let rate = self.state.central_bank.rate;
        let cb_record = if federal {
            self.state.central_bank.prices.push(total_price);
            let next_rate = match self.decide(ids.central_bank(), overrides)? {
                Action::CentralBank { rate } => rate,
                _ => unreachable!("checked by check_action"),
            };
            let cb = &self.state.central_bank;
            let inflation = cb.prices.inflation().expect("a total was just recorded");
            let record = CentralBankRecord {
                rate,
                next_rate,
                total_price,
                inflation: Some(inflation),
                production: self.cb_production,
                nominal_output: self.cb_nominal,
                acted: true,
                reward: Some(crate::model::cb_reward(inflation, cb.target, cb.production_weight, self.cb_production)),
                reward_norm: Some(self.norm.central_bank(inflation, cb.target, cb.production_weight, self.cb_production)),
            };
            self.cb_production = 0.0;
            self.cb_nominal = 0.0;
            record
        } else {
            CentralBankRecord {
                rate,
                next_rate: rate,
                total_price,
                inflation: None,
                production: self.cb_production,
                nominal_output: self.cb_nominal,
                acted: false,
                reward: None,
                reward_norm: None,
            }
        };

        // Phase 10.
        self.mark(10);
        let g = &self.state.government;
        let household_tax: f64 = g.view.household_taxes.iter().sum();
        let firm_tax: f64 = g.view.firm_taxes.iter().sum();
        let total_tax = household_tax + firm_tax;
        self.tax_pool += total_tax;
        let credits_paid: f64 = g.credits.iter().sum();
        let (tax_household, tax_firm) = (g.tax_household, g.tax_firm);
        let gov_record = if federal {
            let weights = welfare_weights(&g.view.savings, g.weight_epsilon);
            self.state.government.weights = weights.clone();
            let (next_h, next_f, fractions) = match self.decide(ids.government(), overrides)? {
                Action::Government { tax_household, tax_firm, fractions } => (tax_household, tax_firm, fractions),
                _ => unreachable!("checked by check_action"),
            };
            let g = &mut self.state.government;
            let raw_rewards: Vec<f64> = hh_records.iter().map(|h| h.reward).collect();
            let norm_rewards: Vec<f64> = hh_records.iter().map(|h| h.reward_norm).collect();
            let reward = gov_reward(&weights, &raw_rewards, &g.credits, g.utility_weight);
            let reward_norm = self.norm.government(&weights, &norm_rewards, &g.credits, g.utility_weight, g.redistribution);
            let pool = self.tax_pool;
            let next_credits = distribute_credits(pool, g.redistribution, &fractions);
            g.tax_household = next_h;
            g.tax_firm = next_f;
            g.fractions = fractions;
            g.credits = next_credits;
            self.tax_pool = 0.0;
            GovernmentRecord {
                tax_household,
                tax_firm,
                total_tax,
                pool,
                credits_paid,
                next_credits: g.credits.iter().sum(),
                acted: true,
                reward: Some(reward),
                reward_norm: Some(reward_norm),
            }
        } else {
            let g = &mut self.state.government;
            g.credits = vec![0.0; n];
            GovernmentRecord {
                tax_household,
                tax_firm,
                total_tax,
                pool: 0.0,
                credits_paid,
                next_credits: 0.0,
                acted: false,
                reward: None,
                reward_norm: None,
            }
        };

        for (f, (wage, price)) in self.state.firms.iter_mut().zip(next_wage_price) {
            f.wage = wage;
            f.price = price;
        }
        self.state.central_bank.rate = cb_record.next_rate;

        let record = QuarterRecord {
            t,
            households: hh_records,
            firms: firm_records,
            central_bank: cb_record,
            government: gov_record,
            messages: self.bus.take_stats(),
            phases: std::mem::take(&mut self.period.phases),
        };
        self.quarters.push(record);
        self.state.clock.t += 1;
        self.stage = if self.state.clock.finished() { Stage::Finished } else { Stage::Open };
        Ok(self.quarters.last().expect("just pushed"))
    }

    /// Run the remaining periods with the bound policies.
    pub fn run_to_end(&mut self) -> Result<(), SimError> {
        let none = Overrides::new();
        while self.stage == Stage::Open {
            self.begin_period()?;
            self.finish_period(&none)?;
        }
        Ok(())
    }
}

fn padded(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(n, 0.0);
    out
}

/// Shape and domain checks of an action against the observing agent.
pub fn check_action(obs: &Observation, action: &Action) -> Result<(), String> {
    let finite = |name: &str, v: f64| if v.is_finite() { Ok(()) } else { Err(format!("{name} is not finite")) };
    match (obs, action) {
        (Observation::Household(o), Action::Household { consumption }) => {
            if consumption.len() != o.prices.len() {
                return Err(format!("expected {} consumption requests, got {}", o.prices.len(), consumption.len()));
            }
            for &c in consumption {
                finite("consumption", c)?;
                if c < 0.0 {
                    return Err(format!("consumption {c} is negative"));
                }
            }
            Ok(())
        }
        (Observation::Firm(_), Action::Firm { wage, price }) => {
            for (name, v) in [("wage", *wage), ("price", *price)] {
                finite(name, v)?;
                if v <= 0.0 {
                    return Err(format!("{name} {v} must be positive"));
                }
            }
            Ok(())
        }
        (Observation::CentralBank(_), Action::CentralBank { rate }) => {
            finite("rate", *rate)?;
            if *rate <= -1.0 {
                return Err(format!("rate {rate} must exceed -1"));
            }
            Ok(())
        }
        (Observation::Government(o), Action::Government { tax_household, tax_firm, fractions }) => {
            for (name, v) in [("tax_household", *tax_household), ("tax_firm", *tax_firm)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("{name} {v} outside [0, 1]"));
                }
            }
            if fractions.len() != o.household_taxes.len() {
                return Err(format!("expected {} credit fractions, got {}", o.household_taxes.len(), fractions.len()));
            }
            if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
                return Err("credit fractions must lie in [0, 1]".into());
            }
            let total: f64 = fractions.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(format!("credit fractions sum to {total}, not 1"));
            }
            Ok(())
        }
        (o, a) => Err(format!("{} action for a {} agent", a.agent_type().as_str(), o.agent_type().as_str())),
    }
}

/// Run one episode with the config's policy bindings.
pub fn run_episode(config: &SimConfig, seed: u64) -> Result<EpisodeLog, SimError> {
    for agent in AgentType::ALL {
        if config.policies.get(agent).is_remote() {
            return Err(SimError::RemoteBinding(agent.as_str()));
        }
    }
    let mut sim = Simulation::new(config.clone(), seed)?;
    sim.run_to_end()?;
    Ok(sim.into_log())
}

impl Simulation {
    /// Whether the central bank and government decide at the end of the
    /// current period.
    pub fn federal_period(&self) -> bool {
        self.federal()
    }

    pub fn preset(&self) -> Preset {
        self.config.preset
    }
}
