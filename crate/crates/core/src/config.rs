//! Simulation configuration.
//!
//! Configs are TOML documents. Every table rejects unknown keys so a typo in
//! an override fails loudly with the offending key and its line. Parameters
//! that may vary across agents accept a scalar (shared by every agent), an
//! explicit per-agent list, or a distribution:
//!
//! ```toml
//! horizon = 40
//! households = 100
//! firms = 10
//! seed = 7
//!
//! [household]
//! skills = 1.0                      # or [..] or { normal = [1.0, 0.3] }
//!
//! [firm]
//! alpha = { uniform = [0.05, 1.0] } # or { linspace = [a, b] } or { lognormal = {..} }
//!
//! [policies.central_bank]
//! kind = "taylor"
//! snap_to_grid = true
//! ```

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::LogNormalSampler;
use crate::grid::{ActionGrid, GridError};
use crate::model::Sector;
use crate::policy::{AgentType, PolicySpec};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_MAX_AGENTS: usize = 16_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    Quarterly,
    /// Farms, companies, retail stores and a regional bank acting every two
    /// weeks; the central bank and government act quarterly.
    RegionalBiweekly,
}

impl Preset {
    pub fn periods_per_year(self) -> u32 {
        match self {
            Preset::Quarterly => 4,
            Preset::RegionalBiweekly => 26,
        }
    }

    /// Whether the quarterly (federal) agents act at the end of `period`.
    pub fn federal_acts(self, period: u32) -> bool {
        let per_year = self.periods_per_year();
        (period + 1) * 4 / per_year > period * 4 / per_year
    }

    /// Fraction of a quarter covered by one period.
    pub fn quarter_fraction(self) -> f64 {
        4.0 / f64::from(self.periods_per_year())
    }
}

/// A per-agent parameter: a shared scalar, an explicit list, or a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Draw {
    Value(f64),
    Values(Vec<f64>),
    Spec(DrawSpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lognormal: Option<LogNormalSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormalSpec {
    pub mu: f64,
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl Draw {
    pub fn is_random(&self) -> bool {
        matches!(self, Draw::Spec(s) if s.uniform.is_some() || s.normal.is_some() || s.lognormal.is_some())
    }

    /// Draw `n` values. Normal draws are resampled until they satisfy
    /// `positive` when requested.
    pub fn sample<R: Rng>(&self, key: &str, n: usize, positive: bool, rng: &mut R) -> Result<Vec<f64>, ConfigError> {
        match self {
            Draw::Value(v) => Ok(vec![*v; n]),
            Draw::Values(v) if v.len() == n => Ok(v.clone()),
            Draw::Values(v) => Err(invalid(key, format!("expected {n} values, got {}", v.len()))),
            Draw::Spec(spec) => {
                let set = [spec.uniform.is_some(), spec.normal.is_some(), spec.linspace.is_some(), spec.lognormal.is_some()];
                if set.iter().filter(|s| **s).count() != 1 {
                    return Err(invalid(key, "exactly one of uniform, normal, linspace, lognormal is required"));
                }
                if let Some([lo, hi]) = spec.uniform {
                    let dist = Uniform::new_inclusive(lo, hi).map_err(|e| invalid(key, e.to_string()))?;
                    Ok((0..n).map(|_| dist.sample(rng)).collect())
                } else if let Some([mean, std]) = spec.normal {
                    let dist = Normal::new(mean, std).map_err(|e| invalid(key, e.to_string()))?;
                    if positive && mean <= 0.0 {
                        return Err(invalid(key, "positive normal draws need a positive mean"));
                    }
                    Ok((0..n)
                        .map(|_| loop {
                            let x = dist.sample(rng);
                            if !positive || x > 0.0 {
                                break x;
                            }
                        })
                        .collect())
                } else if let Some([a, b]) = spec.linspace {
                    Ok(linspace(a, b, n))
                } else if let Some(ln) = spec.lognormal {
                    let sampler = LogNormalSampler::new(ln.mu, ln.sigma, ln.low, ln.high)
                        .map_err(|e| invalid(key, e.to_string()))?;
                    Ok((0..n).map(|_| sampler.sample(rng)).collect())
                } else {
                    unreachable!()
                }
            }
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HouseholdParams {
    pub skills: Draw,
    pub gamma: Draw,
    pub nu: Draw,
    pub mu: Draw,
    pub discount: Draw,
    /// Hours worked per period when employed; 480 per quarter, 80 per two
    /// weeks under the regional preset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labor_hours: Option<f64>,
}

impl Default for HouseholdParams {
    fn default() -> Self {
        Self {
            skills: Draw::Spec(DrawSpec { normal: Some([1.0, 0.3]), ..Default::default() }),
            gamma: Draw::Value(0.33),
            nu: Draw::Value(0.50),
            mu: Draw::Value(0.10),
            discount: Draw::Value(0.99),
            labor_hours: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FirmParams {
    pub alpha: Draw,
    pub rho: Draw,
    pub shock_mean: Draw,
    pub shock_std: Draw,
    pub inventory_risk: Draw,
    pub discount: Draw,
    pub min_skill: f64,
}

impl Default for FirmParams {
    fn default() -> Self {
        Self {
            alpha: Draw::Spec(DrawSpec { uniform: Some([0.05, 1.0]), ..Default::default() }),
            rho: Draw::Value(0.97),
            shock_mean: Draw::Value(0.0),
            shock_std: Draw::Value(0.10),
            inventory_risk: Draw::Value(0.50),
            discount: Draw::Value(0.99),
            min_skill: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CentralBankParams {
    /// Gross annual inflation target.
    pub target_inflation: f64,
    pub production_weight: f64,
    pub discount: f64,
}

impl Default for CentralBankParams {
    fn default() -> Self {
        Self { target_inflation: 1.02, production_weight: 1.0, discount: 0.99 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GovernmentParams {
    pub redistribution: f64,
    pub utility_weight: f64,
    pub discount: f64,
    pub weight_epsilon: f64,
    /// Tax rate in effect at t = 0; the median of the tax grid when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_tax: Option<f64>,
}

impl Default for GovernmentParams {
    fn default() -> Self {
        Self { redistribution: 0.10, utility_weight: 1.0, discount: 0.99, weight_epsilon: 1.0, initial_tax: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionalParams {
    /// `m`: farms; companies are 5m, retail stores m, households 35m.
    pub scale: usize,
}

impl Default for RegionalParams {
    fn default() -> Self {
        Self { scale: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyBindings {
    pub household: PolicySpec,
    pub firm: PolicySpec,
    pub central_bank: PolicySpec,
    pub government: PolicySpec,
}

impl Default for PolicyBindings {
    fn default() -> Self {
        Self {
            household: PolicySpec::fixed(),
            firm: PolicySpec::fixed(),
            central_bank: PolicySpec::taylor(),
            government: PolicySpec::uniform_tax(),
        }
    }
}

impl PolicyBindings {
    pub fn get(&self, agent: AgentType) -> &PolicySpec {
        match agent {
            AgentType::Household => &self.household,
            AgentType::Firm => &self.firm,
            AgentType::CentralBank => &self.central_bank,
            AgentType::Government => &self.government,
        }
    }

    pub fn get_mut(&mut self, agent: AgentType) -> &mut PolicySpec {
        match agent {
            AgentType::Household => &mut self.household,
            AgentType::Firm => &mut self.firm,
            AgentType::CentralBank => &mut self.central_bank,
            AgentType::Government => &mut self.government,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), prefix: "episode".into() }
    }
}

fn default_version() -> u32 {
    CONFIG_VERSION
}
fn default_horizon() -> u32 {
    40
}
fn default_households() -> usize {
    100
}
fn default_firms() -> usize {
    10
}
fn default_max_agents() -> usize {
    DEFAULT_MAX_AGENTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Number of periods (quarters, or two-week periods under the regional
    /// preset).
    #[serde(default = "default_horizon")]
    pub horizon: u32,
    #[serde(default = "default_households")]
    pub households: usize,
    #[serde(default = "default_firms")]
    pub firms: usize,
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub regional: RegionalParams,
    #[serde(default = "default_max_agents")]
    pub max_agents: usize,
    #[serde(default)]
    pub household: HouseholdParams,
    #[serde(default)]
    pub firm: FirmParams,
    #[serde(default)]
    pub central_bank: CentralBankParams,
    #[serde(default)]
    pub government: GovernmentParams,
    #[serde(default)]
    pub grids: ActionGrid,
    #[serde(default)]
    pub policies: PolicyBindings,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 0,
            horizon: default_horizon(),
            households: default_households(),
            firms: default_firms(),
            preset: Preset::Quarterly,
            regional: RegionalParams::default(),
            max_agents: DEFAULT_MAX_AGENTS,
            household: HouseholdParams::default(),
            firm: FirmParams::default(),
            central_bank: CentralBankParams::default(),
            government: GovernmentParams::default(),
            grids: ActionGrid::default(),
            policies: PolicyBindings::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Agent counts and firm sectors implied by a config.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub households: usize,
    pub sectors: Vec<Sector>,
    pub regional_bank: bool,
}

impl Layout {
    pub fn firms(&self) -> usize {
        self.sectors.len()
    }

    /// Households, firms, central bank, government and (regional) bank.
    pub fn total_agents(&self) -> usize {
        self.households + self.firms() + 2 + usize::from(self.regional_bank)
    }

    /// Ids of the firms households buy from.
    pub fn sellers(&self) -> Vec<u32> {
        self.sectors.iter().enumerate().filter(|(_, s)| s.sells_to_households()).map(|(j, _)| j as u32).collect()
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: SimConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => line_col(text, span.start),
                None => (0, 0),
            };
            ConfigError::Parse { line, column, message: e.message().to_string() }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn layout(&self) -> Layout {
        match self.preset {
            Preset::Quarterly => Layout {
                households: self.households,
                sectors: vec![Sector::Goods; self.firms],
                regional_bank: false,
            },
            Preset::RegionalBiweekly => {
                let m = self.regional.scale;
                let mut sectors = vec![Sector::Farm; m];
                sectors.extend(std::iter::repeat_n(Sector::Company, 5 * m));
                sectors.extend(std::iter::repeat_n(Sector::Retail, m));
                Layout { households: 35 * m, sectors, regional_bank: true }
            }
        }
    }

    pub fn labor_hours(&self) -> f64 {
        self.household.labor_hours.unwrap_or(match self.preset {
            Preset::Quarterly => 480.0,
            Preset::RegionalBiweekly => 80.0,
        })
    }

    pub fn initial_tax(&self) -> f64 {
        self.government.initial_tax.unwrap_or_else(|| ActionGrid::default_of(&self.grids.tax_household))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid("version", format!("unsupported config version {}", self.version)));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be > 0"));
        }
        let layout = self.layout();
        if layout.households == 0 {
            return Err(invalid("households", "must be > 0"));
        }
        if layout.firms() == 0 {
            return Err(invalid(if self.preset == Preset::Quarterly { "firms" } else { "regional.scale" }, "must be > 0"));
        }
        if layout.households < layout.firms() {
            return Err(invalid("households", "every firm needs at least one employee: households must be >= firms"));
        }
        if layout.total_agents() > self.max_agents {
            return Err(invalid(
                "max_agents",
                format!("{} agents exceed the cap of {}", layout.total_agents(), self.max_agents),
            ));
        }
        self.grids.validate()?;
        check_grid("grids.firm_wage", &self.grids.firm_wage, |v| v > 0.0, "positive")?;
        check_grid("grids.firm_price", &self.grids.firm_price, |v| v > 0.0, "positive")?;
        check_grid("grids.household_consumption", &self.grids.household_consumption, |v| v >= 0.0, "non-negative")?;
        check_grid("grids.tax_household", &self.grids.tax_household, |v| (0.0..=1.0).contains(&v), "in [0, 1]")?;
        check_grid("grids.tax_firm", &self.grids.tax_firm, |v| (0.0..=1.0).contains(&v), "in [0, 1]")?;
        check_grid("grids.credit_levels", &self.grids.credit_levels, |v| v > 0.0, "positive")?;
        check_grid("grids.cb_rate", &self.grids.cb_rate, |v| v > -1.0, "greater than -1")?;

        let n = layout.households;
        let m = layout.firms();
        let hh = &self.household;
        let fp = &self.firm;
        let skills = n * m;
        // Distributions are checked on their support; explicit values directly.
        let params: [(&str, &Draw, usize, &dyn Fn(f64) -> bool, &str); 11] = [
            ("household.gamma", &hh.gamma, n, &|g| g > 0.0 && g < 1.0, "in (0, 1); gamma = 1 is not supported"),
            ("household.nu", &hh.nu, n, &|v| v >= 0.0, "non-negative"),
            ("household.mu", &hh.mu, n, &|v| v >= 0.0, "non-negative"),
            ("household.discount", &hh.discount, n, &|v| (0.0..1.0).contains(&v), "in [0, 1)"),
            ("household.skills", &hh.skills, skills, &|v| v > 0.0, "positive"),
            ("firm.alpha", &fp.alpha, m, &|a| a > 0.0 && a <= 1.0, "in (0, 1]"),
            ("firm.rho", &fp.rho, m, &|v| (0.0..=1.0).contains(&v), "in [0, 1]"),
            ("firm.shock_mean", &fp.shock_mean, m, &|v| v.is_finite(), "finite"),
            ("firm.shock_std", &fp.shock_std, m, &|v| v >= 0.0, "non-negative"),
            ("firm.inventory_risk", &fp.inventory_risk, m, &|v| v >= 0.0, "non-negative"),
            ("firm.discount", &fp.discount, m, &|v| (0.0..1.0).contains(&v), "in [0, 1)"),
        ];
        let mut probe = crate::rng::stream(self.seed, crate::rng::Stream::Parameters);
        for (key, draw, count, ok, what) in params {
            if let Draw::Spec(spec) = draw {
                let bounds: Option<[f64; 2]> = spec.uniform.or(spec.linspace).or(spec.lognormal.map(|l| [l.low, l.high]));
                if let Some([a, b]) = bounds {
                    if !(ok(a) && ok(b)) {
                        return Err(invalid(key, format!("values must be {what}")));
                    }
                }
            }
            if draw.is_random() {
                draw.sample(key, 1, false, &mut probe)?;
                continue;
            }
            for v in draw.sample(key, count, false, &mut probe)? {
                if !ok(v) {
                    return Err(invalid(key, format!("value {v} must be {what}")));
                }
            }
        }
        if !(self.labor_hours() > 0.0) {
            return Err(invalid("household.labor_hours", "must be > 0"));
        }
        if !(fp.min_skill >= 0.0) {
            return Err(invalid("firm.min_skill", "must be >= 0"));
        }
        let cb = &self.central_bank;
        if !(cb.production_weight > 0.0) {
            return Err(invalid("central_bank.production_weight", "must be > 0"));
        }
        if !(0.0..1.0).contains(&cb.discount) {
            return Err(invalid("central_bank.discount", "must be in [0, 1)"));
        }
        let gov = &self.government;
        for (key, v) in [("government.redistribution", gov.redistribution), ("government.utility_weight", gov.utility_weight)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(key, "must be in [0, 1]"));
            }
        }
        if !(0.0..1.0).contains(&gov.discount) {
            return Err(invalid("government.discount", "must be in [0, 1)"));
        }
        if !(gov.weight_epsilon > 0.0) {
            return Err(invalid("government.weight_epsilon", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.initial_tax()) {
            return Err(invalid("government.initial_tax", "must be in [0, 1]"));
        }
        for agent in AgentType::ALL {
            self.policies
                .get(agent)
                .validate_for(agent)
                .map_err(|reason| invalid(format!("policies.{}", agent.as_str()), reason))?;
        }
        Ok(())
    }
}

fn check_grid(key: &str, values: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<(), ConfigError> {
    match values.iter().find(|v| !ok(**v)) {
        Some(v) => Err(invalid(key, format!("value {v} must be {what}"))),
        None => Ok(()),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}
