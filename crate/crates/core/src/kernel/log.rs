//! Episode records and their flat-file form.
//!
//! An episode is written as a CSV with one row per period per agent plus a
//! JSON manifest. Rows share one column set; columns that do not apply to an
//! agent type are left empty.
//!
//! | column | applies to | meaning |
//! |---|---|---|
//! | `t` | all | period index |
//! | `agent_type` | all | `household`, `firm`, `central_bank`, `government` |
//! | `agent_id` | all | index within the agent type |
//! | `sector` | firm | `goods`, `farm`, `company`, `retail` |
//! | `employer` | household | employing firm index, empty when unemployed |
//! | `employees` | firm | headcount after the labor round |
//! | `savings`, `next_savings` | household | `m_t`, `m_{t+1}` |
//! | `labor_income` | household | gross `n̄ w` |
//! | `consumption`, `spending` | household | goods received, `Σ c p` |
//! | `income_tax`, `credit` | household | tax paid, credit received this period |
//! | `rate` | household, firm, central_bank | interest rate in effect |
//! | `tax_rate` | household, firm | tax rate in effect |
//! | `hours`, `desired_hours` | firm | `N`, `N̂` |
//! | `forecast` | firm | demand forecast `Ĉ`, empty without history |
//! | `output`, `prod_factor`, `shock` | firm | `y`, `ϵ`, `ε` |
//! | `inventory`, `next_inventory` | firm | `Y_t`, `Y_{t+1}` |
//! | `deposits`, `next_deposits` | firm | `d_t`, `d_{t+1}` |
//! | `price`, `wage` | firm | in effect this period |
//! | `sales`, `demand` | firm | goods sold, goods requested |
//! | `revenue`, `wage_bill`, `input_cost`, `profit_tax` | firm | currency flows |
//! | `vacancies` | firm | `max(0, ceil(N̂ / n̄) - employees)` |
//! | `total_price`, `inflation` | central_bank | `Σ p`, gross annual inflation |
//! | `production`, `nominal_output` | central_bank | `Σ y`, `Σ p y` since its last decision |
//! | `next_rate` | central_bank | rate for the next period |
//! | `tax_household`, `tax_firm` | government | rates in effect |
//! | `total_tax` | government | taxes collected this period |
//! | `pool` | government | taxes behind the next credits |
//! | `credits_paid`, `next_credits` | government | `Σ κ_t`, `Σ κ_{t+1}` |
//! | `acted` | central_bank, government | whether the agent decided this period |
//! | `reward`, `reward_norm` | all | raw and normalized reward |

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SimConfig;
use crate::model::Sector;

use super::message::MessageStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdRecord {
    pub id: u32,
    pub employer: Option<u32>,
    pub savings: f64,
    pub next_savings: f64,
    pub labor_income: f64,
    pub consumption: f64,
    pub spending: f64,
    pub income_tax: f64,
    pub credit: f64,
    pub rate: f64,
    pub tax_rate: f64,
    pub reward: f64,
    pub reward_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmRecord {
    pub id: u32,
    pub sector: Sector,
    pub employees: u32,
    pub rate: f64,
    pub tax_rate: f64,
    pub hours: f64,
    pub desired_hours: f64,
    pub forecast: Option<f64>,
    pub output: f64,
    pub prod_factor: f64,
    pub shock: f64,
    pub inventory: f64,
    pub next_inventory: f64,
    pub deposits: f64,
    pub next_deposits: f64,
    pub price: f64,
    pub wage: f64,
    pub sales: f64,
    pub demand: f64,
    pub revenue: f64,
    pub wage_bill: f64,
    pub input_cost: f64,
    pub profit_tax: f64,
    pub vacancies: u32,
    pub reward: f64,
    pub reward_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralBankRecord {
    pub rate: f64,
    pub next_rate: f64,
    pub total_price: f64,
    pub inflation: Option<f64>,
    pub production: f64,
    pub nominal_output: f64,
    pub acted: bool,
    pub reward: Option<f64>,
    pub reward_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GovernmentRecord {
    pub tax_household: f64,
    pub tax_firm: f64,
    pub total_tax: f64,
    pub pool: f64,
    pub credits_paid: f64,
    pub next_credits: f64,
    pub acted: bool,
    pub reward: Option<f64>,
    pub reward_norm: Option<f64>,
}

/// Start of one phase within a period: `first_event` is the number of
/// messages delivered in the episode before the phase began.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseMark {
    pub phase: u8,
    pub first_event: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterRecord {
    pub t: u32,
    pub households: Vec<HouseholdRecord>,
    pub firms: Vec<FirmRecord>,
    pub central_bank: CentralBankRecord,
    pub government: GovernmentRecord,
    #[serde(default)]
    pub messages: MessageStats,
    #[serde(default)]
    pub phases: Vec<PhaseMark>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub seed: u64,
    pub config: SimConfig,
    pub quarters: Vec<QuarterRecord>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("row {row}: {reason}")]
    Malformed { row: usize, reason: String },
    #[error("manifest config: {0}")]
    Config(#[from] crate::config::ConfigError),
}

/// Run metadata written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub generator: String,
    pub seed: u64,
    pub periods: u32,
    pub households: usize,
    pub firms: usize,
    /// The full configuration, as TOML.
    pub config: String,
    pub messages: MessageStats,
    pub period_messages: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Row {
    t: u32,
    agent_type: String,
    agent_id: u32,
    sector: Option<String>,
    employer: Option<u32>,
    employees: Option<u32>,
    savings: Option<f64>,
    next_savings: Option<f64>,
    labor_income: Option<f64>,
    consumption: Option<f64>,
    spending: Option<f64>,
    income_tax: Option<f64>,
    credit: Option<f64>,
    rate: Option<f64>,
    tax_rate: Option<f64>,
    hours: Option<f64>,
    desired_hours: Option<f64>,
    forecast: Option<f64>,
    output: Option<f64>,
    prod_factor: Option<f64>,
    shock: Option<f64>,
    inventory: Option<f64>,
    next_inventory: Option<f64>,
    deposits: Option<f64>,
    next_deposits: Option<f64>,
    price: Option<f64>,
    wage: Option<f64>,
    sales: Option<f64>,
    demand: Option<f64>,
    revenue: Option<f64>,
    wage_bill: Option<f64>,
    input_cost: Option<f64>,
    profit_tax: Option<f64>,
    vacancies: Option<u32>,
    total_price: Option<f64>,
    inflation: Option<f64>,
    production: Option<f64>,
    nominal_output: Option<f64>,
    next_rate: Option<f64>,
    tax_household: Option<f64>,
    tax_firm: Option<f64>,
    total_tax: Option<f64>,
    pool: Option<f64>,
    credits_paid: Option<f64>,
    next_credits: Option<f64>,
    acted: Option<bool>,
    reward: Option<f64>,
    reward_norm: Option<f64>,
}

fn household_row(t: u32, h: &HouseholdRecord) -> Row {
    Row {
        t,
        agent_type: "household".into(),
        agent_id: h.id,
        employer: h.employer,
        savings: Some(h.savings),
        next_savings: Some(h.next_savings),
        labor_income: Some(h.labor_income),
        consumption: Some(h.consumption),
        spending: Some(h.spending),
        income_tax: Some(h.income_tax),
        credit: Some(h.credit),
        rate: Some(h.rate),
        tax_rate: Some(h.tax_rate),
        reward: Some(h.reward),
        reward_norm: Some(h.reward_norm),
        ..Row::default()
    }
}

fn firm_row(t: u32, f: &FirmRecord) -> Row {
    Row {
        t,
        agent_type: "firm".into(),
        agent_id: f.id,
        sector: Some(f.sector.as_str().into()),
        employees: Some(f.employees),
        rate: Some(f.rate),
        tax_rate: Some(f.tax_rate),
        hours: Some(f.hours),
        desired_hours: Some(f.desired_hours),
        forecast: f.forecast,
        output: Some(f.output),
        prod_factor: Some(f.prod_factor),
        shock: Some(f.shock),
        inventory: Some(f.inventory),
        next_inventory: Some(f.next_inventory),
        deposits: Some(f.deposits),
        next_deposits: Some(f.next_deposits),
        price: Some(f.price),
        wage: Some(f.wage),
        sales: Some(f.sales),
        demand: Some(f.demand),
        revenue: Some(f.revenue),
        wage_bill: Some(f.wage_bill),
        input_cost: Some(f.input_cost),
        profit_tax: Some(f.profit_tax),
        vacancies: Some(f.vacancies),
        reward: Some(f.reward),
        reward_norm: Some(f.reward_norm),
        ..Row::default()
    }
}

fn cb_row(t: u32, c: &CentralBankRecord) -> Row {
    Row {
        t,
        agent_type: "central_bank".into(),
        rate: Some(c.rate),
        next_rate: Some(c.next_rate),
        total_price: Some(c.total_price),
        inflation: c.inflation,
        production: Some(c.production),
        nominal_output: Some(c.nominal_output),
        acted: Some(c.acted),
        reward: c.reward,
        reward_norm: c.reward_norm,
        ..Row::default()
    }
}

fn gov_row(t: u32, g: &GovernmentRecord) -> Row {
    Row {
        t,
        agent_type: "government".into(),
        tax_household: Some(g.tax_household),
        tax_firm: Some(g.tax_firm),
        total_tax: Some(g.total_tax),
        pool: Some(g.pool),
        credits_paid: Some(g.credits_paid),
        next_credits: Some(g.next_credits),
        acted: Some(g.acted),
        reward: g.reward,
        reward_norm: g.reward_norm,
        ..Row::default()
    }
}

fn need<T>(v: Option<T>, row: usize, column: &str) -> Result<T, LogError> {
    v.ok_or_else(|| LogError::Malformed { row, reason: format!("missing `{column}`") })
}

impl EpisodeLog {
    pub fn horizon(&self) -> usize {
        self.quarters.len()
    }

    /// Messages over the whole episode.
    pub fn message_stats(&self) -> MessageStats {
        let mut total = MessageStats::default();
        for q in &self.quarters {
            total.merge(&q.messages);
        }
        total
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            generator: format!("macrosim {}", env!("CARGO_PKG_VERSION")),
            seed: self.seed,
            periods: self.quarters.len() as u32,
            households: self.quarters.first().map_or(0, |q| q.households.len()),
            firms: self.quarters.first().map_or(0, |q| q.firms.len()),
            config: self.config.to_toml_string(),
            messages: self.message_stats(),
            period_messages: self.quarters.iter().map(|q| q.messages.total).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(out);
        for q in &self.quarters {
            for h in &q.households {
                w.serialize(household_row(q.t, h))?;
            }
            for f in &q.firms {
                w.serialize(firm_row(q.t, f))?;
            }
            w.serialize(cb_row(q.t, &q.central_bank))?;
            w.serialize(gov_row(q.t, &q.government))?;
        }
        w.flush().map_err(|source| LogError::Io { path: "<csv>".into(), source })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Write `<prefix>.csv` and `<prefix>.json`; each file lands atomically
    /// via a rename.
    pub fn write_files(&self, dir: &Path, prefix: &str) -> Result<(), LogError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| LogError::Io { path: path.clone(), source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let csv_path = dir.join(format!("{prefix}.csv"));
        let tmp = dir.join(format!(".{prefix}.csv.tmp"));
        std::fs::write(&tmp, self.to_csv_string()).map_err(io(&tmp))?;
        std::fs::rename(&tmp, &csv_path).map_err(io(&csv_path))?;
        let json_path = dir.join(format!("{prefix}.json"));
        let tmp = dir.join(format!(".{prefix}.json.tmp"));
        let text = serde_json::to_string_pretty(&self.manifest())? + "\n";
        std::fs::write(&tmp, text).map_err(io(&tmp))?;
        std::fs::rename(&tmp, &json_path).map_err(io(&json_path))?;
        Ok(())
    }

    /// Rebuild a log from its CSV and manifest. Per-period message stats are
    /// not part of the CSV; only period totals are restored.
    pub fn read_files(csv_path: &Path, manifest_path: &Path) -> Result<Self, LogError> {
        let text = std::fs::read_to_string(manifest_path)
            .map_err(|source| LogError::Io { path: manifest_path.display().to_string(), source })?;
        let manifest: RunManifest = serde_json::from_str(&text)?;
        let config = SimConfig::from_toml_str(&manifest.config)?;
        let file = std::fs::File::open(csv_path)
            .map_err(|source| LogError::Io { path: csv_path.display().to_string(), source })?;
        let mut quarters = read_records(file)?;
        for (q, total) in quarters.iter_mut().zip(&manifest.period_messages) {
            q.messages.total = *total;
        }
        Ok(Self { seed: manifest.seed, config, quarters })
    }
}

/// Parse CSV rows back into per-period records.
pub fn read_records<R: Read>(input: R) -> Result<Vec<QuarterRecord>, LogError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut by_t: BTreeMap<u32, QuarterRecord> = BTreeMap::new();
    let placeholder = |t| QuarterRecord {
        t,
        households: Vec::new(),
        firms: Vec::new(),
        central_bank: CentralBankRecord {
            rate: 0.0,
            next_rate: 0.0,
            total_price: 0.0,
            inflation: None,
            production: 0.0,
            nominal_output: 0.0,
            acted: false,
            reward: None,
            reward_norm: None,
        },
        government: GovernmentRecord {
            tax_household: 0.0,
            tax_firm: 0.0,
            total_tax: 0.0,
            pool: 0.0,
            credits_paid: 0.0,
            next_credits: 0.0,
            acted: false,
            reward: None,
            reward_norm: None,
        },
        messages: MessageStats::default(),
        phases: Vec::new(),
    };
    for (k, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        let r = k + 2;
        let q = by_t.entry(row.t).or_insert_with(|| placeholder(row.t));
        match row.agent_type.as_str() {
            "household" => q.households.push(HouseholdRecord {
                id: row.agent_id,
                employer: row.employer,
                savings: need(row.savings, r, "savings")?,
                next_savings: need(row.next_savings, r, "next_savings")?,
                labor_income: need(row.labor_income, r, "labor_income")?,
                consumption: need(row.consumption, r, "consumption")?,
                spending: need(row.spending, r, "spending")?,
                income_tax: need(row.income_tax, r, "income_tax")?,
                credit: need(row.credit, r, "credit")?,
                rate: need(row.rate, r, "rate")?,
                tax_rate: need(row.tax_rate, r, "tax_rate")?,
                reward: need(row.reward, r, "reward")?,
                reward_norm: need(row.reward_norm, r, "reward_norm")?,
            }),
            "firm" => {
                let sector = need(row.sector.as_deref().and_then(Sector::parse), r, "sector")?;
                q.firms.push(FirmRecord {
                    id: row.agent_id,
                    sector,
                    employees: need(row.employees, r, "employees")?,
                    rate: need(row.rate, r, "rate")?,
                    tax_rate: need(row.tax_rate, r, "tax_rate")?,
                    hours: need(row.hours, r, "hours")?,
                    desired_hours: need(row.desired_hours, r, "desired_hours")?,
                    forecast: row.forecast,
                    output: need(row.output, r, "output")?,
                    prod_factor: need(row.prod_factor, r, "prod_factor")?,
                    shock: need(row.shock, r, "shock")?,
                    inventory: need(row.inventory, r, "inventory")?,
                    next_inventory: need(row.next_inventory, r, "next_inventory")?,
                    deposits: need(row.deposits, r, "deposits")?,
                    next_deposits: need(row.next_deposits, r, "next_deposits")?,
                    price: need(row.price, r, "price")?,
                    wage: need(row.wage, r, "wage")?,
                    sales: need(row.sales, r, "sales")?,
                    demand: need(row.demand, r, "demand")?,
                    revenue: need(row.revenue, r, "revenue")?,
                    wage_bill: need(row.wage_bill, r, "wage_bill")?,
                    input_cost: need(row.input_cost, r, "input_cost")?,
                    profit_tax: need(row.profit_tax, r, "profit_tax")?,
                    vacancies: need(row.vacancies, r, "vacancies")?,
                    reward: need(row.reward, r, "reward")?,
                    reward_norm: need(row.reward_norm, r, "reward_norm")?,
                });
            }
            "central_bank" => {
                q.central_bank = CentralBankRecord {
                    rate: need(row.rate, r, "rate")?,
                    next_rate: need(row.next_rate, r, "next_rate")?,
                    total_price: need(row.total_price, r, "total_price")?,
                    inflation: row.inflation,
                    production: need(row.production, r, "production")?,
                    nominal_output: need(row.nominal_output, r, "nominal_output")?,
                    acted: need(row.acted, r, "acted")?,
                    reward: row.reward,
                    reward_norm: row.reward_norm,
                }
            }
            "government" => {
                q.government = GovernmentRecord {
                    tax_household: need(row.tax_household, r, "tax_household")?,
                    tax_firm: need(row.tax_firm, r, "tax_firm")?,
                    total_tax: need(row.total_tax, r, "total_tax")?,
                    pool: need(row.pool, r, "pool")?,
                    credits_paid: need(row.credits_paid, r, "credits_paid")?,
                    next_credits: need(row.next_credits, r, "next_credits")?,
                    acted: need(row.acted, r, "acted")?,
                    reward: row.reward,
                    reward_norm: row.reward_norm,
                }
            }
            other => return Err(LogError::Malformed { row: r, reason: format!("unknown agent_type `{other}`") }),
        }
    }
    let quarters: Vec<QuarterRecord> = by_t.into_values().collect();
    for (k, q) in quarters.iter().enumerate() {
        if q.t as usize != k {
            return Err(LogError::Malformed { row: 0, reason: format!("period {k} missing") });
        }
    }
    Ok(quarters)
}
