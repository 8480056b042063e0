//! Fact reports over one or more episode logs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::EpisodeLog;

use super::filter::{bandpass_cycle, Band, FilterError};
use super::firms::{FirmBlock, FirmSamples};
use super::inequality::{income_shares, lorenz_gini, Lorenz};
use super::relations::{relation_points, Relation, Relations};
use super::series::MacroSeries;
use super::stats::{cyclicality, Cyclicality};

/// Cross-correlations with real GDP reported for the learned-policy runs
/// this toolkit mirrors. Shown next to simulated values for comparison
/// only; built-in policies are not expected to reproduce them.
pub const REFERENCE_CORRELATIONS: [(&str, f64); 11] = [
    ("total_employment", 0.158642),
    ("unemployment_rate", -0.158289),
    ("consumption_expenditure", 0.129125),
    ("total_labor_hours", 0.158642),
    ("labor_productivity", 0.993994),
    ("cpi", -0.050842),
    ("nominal_wage", -0.181873),
    ("real_wage", -0.043230),
    ("inflation", -0.564621),
    ("interest_rate", -0.014768),
    ("phillips_curve", -0.031113),
];

#[derive(Debug, Error)]
pub enum FactError {
    #[error("no logs to analyze")]
    Empty,
    #[error("log {index} has {got} periods, expected {expected}")]
    MismatchedHorizon { index: usize, got: usize, expected: usize },
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub series: String,
    /// Correlation of the series' cyclical component with that of real GDP
    /// (for `phillips_curve`, unemployment with inflation).
    pub corr: Option<f64>,
    pub class: Cyclicality,
    pub n: usize,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub gini: f64,
    pub cv: f64,
    pub shift: f64,
    pub all_zero: bool,
    pub n: usize,
}

impl From<&Lorenz> for Distribution {
    fn from(l: &Lorenz) -> Self {
        Self { gini: l.gini, cv: l.cv, shift: l.shift, all_zero: l.all_zero, n: l.n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityBlock {
    /// Labor income in the final period.
    pub income: Distribution,
    /// Savings at the end of the episode.
    pub wealth: Distribution,
    /// Per-period shares averaged over episodes.
    pub income_bottom50: Vec<f64>,
    pub income_top1: Vec<f64>,
    pub wealth_bottom50: Vec<f64>,
    pub wealth_top1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSummary {
    pub slope: Option<f64>,
    pub corr: Option<f64>,
    pub n: usize,
    pub degenerate: bool,
}

impl From<&Relation> for RelationSummary {
    fn from(r: &Relation) -> Self {
        Self { slope: r.slope, corr: r.corr, n: r.n, degenerate: r.degenerate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationsBlock {
    pub phillips_wage: RelationSummary,
    pub phillips_inflation: RelationSummary,
    pub okun: RelationSummary,
    pub beveridge: RelationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactReport {
    pub episodes: usize,
    pub periods: usize,
    pub band: [f64; 3],
    pub correlations: Vec<CorrelationRow>,
    pub inequality: InequalityBlock,
    pub firms: FirmBlock,
    pub relations: RelationsBlock,
}

impl FactReport {
    /// Every reported number is finite (undefined statistics are `None`).
    pub fn all_finite(&self) -> bool {
        let json = serde_json::to_value(self).expect("reports serialize");
        fn walk(v: &serde_json::Value) -> bool {
            match v {
                serde_json::Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
                serde_json::Value::Array(a) => a.iter().all(walk),
                serde_json::Value::Object(o) => o.values().all(walk),
                _ => true,
            }
        }
        // non-finite floats serialize as null, so look for them directly too
        walk(&json) && !self.has_nan()
    }

    fn has_nan(&self) -> bool {
        let i = &self.inequality;
        let paths = [&i.income_bottom50, &i.income_top1, &i.wealth_bottom50, &i.wealth_top1];
        paths.iter().any(|p| p.iter().any(|v| !v.is_finite()))
            || !(i.income.gini.is_finite() && i.income.cv.is_finite() && i.wealth.gini.is_finite() && i.wealth.cv.is_finite())
    }

    pub fn correlation(&self, series: &str) -> Option<&CorrelationRow> {
        self.correlations.iter().find(|r| r.series == series)
    }
}

/// Pooled and per-episode reports plus the pooled relation points.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub pooled: FactReport,
    pub episodes: Vec<FactReport>,
    pub relations: Relations,
    pub lorenz_income: Lorenz,
    pub lorenz_wealth: Lorenz,
    /// Cyclical components of the first episode, by series name.
    pub cycles: Vec<(String, Vec<f64>)>,
}

fn final_income(log: &EpisodeLog) -> Vec<f64> {
    log.quarters.last().map_or_else(Vec::new, |q| q.households.iter().map(|h| h.labor_income).collect())
}

fn final_wealth(log: &EpisodeLog) -> Vec<f64> {
    log.quarters.last().map_or_else(Vec::new, |q| q.households.iter().map(|h| h.next_savings).collect())
}

fn mean_paths(paths: &[Vec<f64>]) -> Vec<f64> {
    let len = paths.first().map_or(0, Vec::len);
    (0..len).map(|t| paths.iter().map(|p| p[t]).sum::<f64>() / paths.len() as f64).collect()
}

fn report(logs: &[&EpisodeLog], band: Band) -> Result<(FactReport, Relations, Lorenz, Lorenz), FactError> {
    let series: Vec<MacroSeries> = logs.iter().map(|l| MacroSeries::from_log(l)).collect();
    let periods = series[0].len();

    let mut gdp_cycle = Vec::new();
    let names: Vec<&'static str> = series[0].named().iter().map(|(n, _)| *n).collect();
    let mut cycles: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for s in &series {
        gdp_cycle.extend(bandpass_cycle(&s.real_gdp, band)?);
        for (k, (_, x)) in s.named().iter().enumerate() {
            cycles[k].extend(bandpass_cycle(x, band)?);
        }
    }
    let reference = |name: &str| REFERENCE_CORRELATIONS.iter().find(|(n, _)| *n == name).map(|r| r.1);
    let mut correlations: Vec<CorrelationRow> = names
        .iter()
        .zip(&cycles)
        .map(|(name, c)| {
            let (corr, class) = cyclicality(c, &gdp_cycle);
            CorrelationRow { series: name.to_string(), corr, class, n: c.len(), reference: reference(name) }
        })
        .collect();
    let unemployment = &cycles[names.iter().position(|n| *n == "unemployment_rate").expect("named")];
    let inflation = &cycles[names.iter().position(|n| *n == "inflation").expect("named")];
    let (corr, class) = cyclicality(unemployment, inflation);
    correlations.push(CorrelationRow {
        series: "phillips_curve".into(),
        corr,
        class,
        n: unemployment.len(),
        reference: reference("phillips_curve"),
    });

    let income: Vec<f64> = logs.iter().flat_map(|l| final_income(l)).collect();
    let wealth: Vec<f64> = logs.iter().flat_map(|l| final_wealth(l)).collect();
    let lorenz_income = lorenz_gini(&income);
    let lorenz_wealth = lorenz_gini(&wealth);
    let shares = |pick: fn(&crate::kernel::log::HouseholdRecord) -> f64| {
        let per_log: Vec<_> = logs
            .iter()
            .map(|l| {
                let matrix: Vec<Vec<f64>> = l.quarters.iter().map(|q| q.households.iter().map(pick).collect()).collect();
                income_shares(&matrix, 0.5, 0.01)
            })
            .collect();
        let bottom: Vec<Vec<f64>> = per_log.iter().map(|s| s.bottom.clone()).collect();
        let top: Vec<Vec<f64>> = per_log.iter().map(|s| s.top.clone()).collect();
        (mean_paths(&bottom), mean_paths(&top))
    };
    let (income_bottom50, income_top1) = shares(|h| h.labor_income);
    let (wealth_bottom50, wealth_top1) = shares(|h| h.next_savings.max(0.0));

    let mut firms = FirmSamples::default();
    for l in logs {
        firms.merge(FirmSamples::from_log(l));
    }

    let mut relations = relation_points(&series[0]);
    if series.len() > 1 {
        let all = |r: fn(&Relations) -> &Relation| {
            let points: Vec<(f64, f64)> =
                series.iter().flat_map(|s| r(&relation_points(s)).points.clone()).collect();
            Relation::fit(points)
        };
        relations = Relations {
            phillips_wage: all(|r| &r.phillips_wage),
            phillips_inflation: all(|r| &r.phillips_inflation),
            okun: all(|r| &r.okun),
            beveridge: all(|r| &r.beveridge),
        };
    }

    let report = FactReport {
        episodes: logs.len(),
        periods,
        band: [band.low, band.high, band.k as f64],
        correlations,
        inequality: InequalityBlock {
            income: (&lorenz_income).into(),
            wealth: (&lorenz_wealth).into(),
            income_bottom50,
            income_top1,
            wealth_bottom50,
            wealth_top1,
        },
        firms: firms.block(),
        relations: RelationsBlock {
            phillips_wage: (&relations.phillips_wage).into(),
            phillips_inflation: (&relations.phillips_inflation).into(),
            okun: (&relations.okun).into(),
            beveridge: (&relations.beveridge).into(),
        },
    };
    Ok((report, relations, lorenz_income, lorenz_wealth))
}

/// Analyze logs of equal length.
pub fn analyze(logs: &[EpisodeLog], band: Band) -> Result<Analysis, FactError> {
    let first = logs.first().ok_or(FactError::Empty)?;
    let expected = first.quarters.len();
    for (index, l) in logs.iter().enumerate() {
        if l.quarters.len() != expected {
            return Err(FactError::MismatchedHorizon { index, got: l.quarters.len(), expected });
        }
    }
    let all: Vec<&EpisodeLog> = logs.iter().collect();
    let (pooled, relations, lorenz_income, lorenz_wealth) = report(&all, band)?;
    let episodes = if logs.len() == 1 {
        vec![pooled.clone()]
    } else {
        logs.iter().map(|l| report(&[l], band).map(|r| r.0)).collect::<Result<_, _>>()?
    };
    let s = MacroSeries::from_log(first);
    let mut cycles = vec![("real_gdp".to_string(), bandpass_cycle(&s.real_gdp, band)?)];
    for (name, x) in s.named() {
        cycles.push((name.to_string(), bandpass_cycle(x, band)?));
    }
    Ok(Analysis { pooled, episodes, relations, lorenz_income, lorenz_wealth, cycles })
}

impl Analysis {
    /// Write `report.json`, `episode_<k>.json` and the plot-data CSVs.
    pub fn write(&self, dir: &Path) -> Result<(), FactError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| FactError::Io { path: path.clone(), source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let json = |value: &FactReport| serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
        let path = dir.join("report.json");
        std::fs::write(&path, json(&self.pooled)).map_err(io(&path))?;
        for (k, r) in self.episodes.iter().enumerate() {
            let path = dir.join(format!("episode_{k}.json"));
            std::fs::write(&path, json(r)).map_err(io(&path))?;
        }
        let points = |name: &str, header: [&str; 2], pts: &[(f64, f64)]| -> Result<(), FactError> {
            let mut w = csv::Writer::from_path(dir.join(name))?;
            w.write_record(header)?;
            for (x, y) in pts {
                w.write_record([x.to_string(), y.to_string()])?;
            }
            w.flush().map_err(io(&dir.join(name)))?;
            Ok(())
        };
        points("lorenz_income.csv", ["population_share", "income_share"], &self.lorenz_income.points)?;
        points("lorenz_wealth.csv", ["population_share", "wealth_share"], &self.lorenz_wealth.points)?;
        points("phillips_wage.csv", ["unemployment_rate", "wage_growth"], &self.relations.phillips_wage.points)?;
        points("phillips_inflation.csv", ["unemployment_rate", "inflation"], &self.relations.phillips_inflation.points)?;
        points("okun.csv", ["unemployment_change_pp", "gdp_growth_pct"], &self.relations.okun.points)?;
        points("beveridge.csv", ["unemployment_rate", "vacancy_rate"], &self.relations.beveridge.points)?;

        let mut w = csv::Writer::from_path(dir.join("cycles.csv"))?;
        let mut header = vec!["t".to_string()];
        header.extend(self.cycles.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        let len = self.cycles.first().map_or(0, |c| c.1.len());
        for t in 0..len {
            let mut row = vec![t.to_string()];
            row.extend(self.cycles.iter().map(|(_, c)| c[t].to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(io(&dir.join("cycles.csv")))?;
        Ok(())
    }
}
