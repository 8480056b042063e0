//! Command-line front end: `run`, `analyze`, `bench-scaling`, `serve` and
//! `calibrate`.
//!
//! Exit status is 0 on success, 2 for configuration and usage errors and 1
//! for everything else.

use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::calibration::{calibrate, read_industry_csv, CalibrationError};
use crate::config::{ConfigError, Preset, SimConfig};
use crate::env::{serve, Endpoint};
use crate::facts::{analyze, lorenz_gini, pearson, Band, FactError, MacroSeries};
use crate::kernel::{run_episode, EpisodeLog, LogError, SimError};

#[derive(Debug, Parser)]
#[command(name = "macrosim", version, about = "Agent-based macroeconomic simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one or more episodes and write their logs.
    Run(RunArgs),
    /// Compute stylized facts from episode logs.
    Analyze(AnalyzeArgs),
    /// Time episodes and count messages across economy sizes.
    BenchScaling(BenchArgs),
    /// Serve the line-delimited JSON environment protocol.
    Serve(ServeArgs),
    /// Fit production elasticities from an industry CSV.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed. Episode `k` uses `seed + k`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub episodes: u64,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Episode CSVs; each needs its `.json` manifest alongside.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Shortest cycle kept by the band-pass filter, in periods.
    #[arg(long, default_value_t = 6.0)]
    pub band_low: f64,
    /// Longest cycle kept by the band-pass filter, in periods.
    #[arg(long, default_value_t = 32.0)]
    pub band_high: f64,
    /// Band-pass truncation lag.
    #[arg(long, default_value_t = 12)]
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchPreset {
    /// Sizes are firm counts, with ten households per firm.
    Quarterly,
    /// Sizes are the regional scale factor.
    Regional,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchPreset::Regional)]
    pub preset: BenchPreset,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 5, 10])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the table as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `tcp:HOST:PORT` or `unix:PATH`.
    #[arg(long, conflicts_with = "stdio", required_unless_present = "stdio")]
    pub listen: Option<Endpoint>,
    /// Speak the protocol over standard input and output.
    #[arg(long)]
    pub stdio: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// CSV with columns `group,year,output,hours`.
    pub csv: PathBuf,
    #[arg(long, default_value_t = 0.6)]
    pub low: f64,
    #[arg(long, default_value_t = 1.0)]
    pub high: f64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("episode {episode} (seed {seed}): {source}")]
    Simulation { episode: u64, seed: u64, source: SimError },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Facts(#[from] FactError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("macrosim: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(a) => cmd_run(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::BenchScaling(a) => cmd_bench(&a),
        Command::Serve(a) => cmd_serve(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
    }
}

fn load_config(path: Option<&Path>) -> Result<SimConfig, CliError> {
    Ok(match path {
        Some(p) => SimConfig::from_path(p)?,
        None => SimConfig::default(),
    })
}

/// Final-period headline numbers of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub real_gdp: f64,
    pub unemployment: f64,
    /// Gini of the households' final savings.
    pub gini: f64,
}

pub fn summarize(log: &EpisodeLog) -> EpisodeSummary {
    let s = MacroSeries::from_log(log);
    let wealth: Vec<f64> =
        log.quarters.last().map_or_else(Vec::new, |q| q.households.iter().map(|h| h.next_savings).collect());
    EpisodeSummary {
        seed: log.seed,
        real_gdp: s.real_gdp.last().copied().unwrap_or(0.0),
        unemployment: s.unemployment.last().copied().unwrap_or(0.0),
        gini: lorenz_gini(&wealth).gini,
    }
}

fn episode_prefix(base: &str, episodes: u64, k: u64) -> String {
    if episodes == 1 {
        base.to_string()
    } else {
        format!("{base}_{k:04}")
    }
}

pub fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let config = load_config(a.config.as_deref())?;
    for agent in crate::policy::AgentType::ALL {
        if config.policies.get(agent).is_remote() {
            return Err(ConfigError::Invalid {
                key: format!("policies.{}", agent.as_str()),
                reason: "`remote` policies are only available through `serve`".into(),
            }
            .into());
        }
    }
    if a.episodes == 0 {
        return Err(CliError::Usage("--episodes must be at least 1".into()));
    }
    let base_seed = a.seed.unwrap_or(config.seed);
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, a.episodes as usize);

    let next = Mutex::new(0u64);
    let results: Mutex<Vec<(u64, Result<EpisodeSummary, CliError>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = {
                    let mut n = next.lock().expect("counter lock");
                    if *n >= a.episodes {
                        break;
                    }
                    *n += 1;
                    *n - 1
                };
                let seed = base_seed.wrapping_add(k);
                let outcome = run_episode(&config, seed)
                    .map_err(|source| CliError::Simulation { episode: k, seed, source })
                    .and_then(|log| {
                        log.write_files(&dir, &episode_prefix(&config.output.prefix, a.episodes, k))?;
                        Ok(summarize(&log))
                    });
                results.lock().expect("results lock").push((k, outcome));
            });
        }
    });

    let mut results = results.into_inner().expect("results lock");
    results.sort_by_key(|(k, _)| *k);
    println!("episode\tseed\treal_gdp\tunemployment\tgini");
    for (k, outcome) in results {
        let s = outcome?;
        println!("{k}\t{}\t{:.6}\t{:.6}\t{:.6}", s.seed, s.real_gdp, s.unemployment, s.gini);
    }
    Ok(())
}

fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let logs = a
        .logs
        .iter()
        .map(|p| EpisodeLog::read_files(p, &manifest_path(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let band = Band { low: a.band_low, high: a.band_high, k: a.truncation };
    let analysis = analyze(&logs, band)?;
    analysis.write(&a.out)?;
    let r = &analysis.pooled;
    println!("episodes\t{}", r.episodes);
    println!("periods\t{}", r.periods);
    for row in &r.correlations {
        let corr = row.corr.map_or_else(|| "undefined".to_string(), |c| format!("{c:.4}"));
        println!("corr[{}]\t{corr}\t{:?}", row.series, row.class);
    }
    println!("gini_income\t{:.6}", analysis.lorenz_income.gini);
    println!("gini_wealth\t{:.6}", analysis.lorenz_wealth.gini);
    println!("report\t{}", a.out.join("report.json").display());
    Ok(())
}

/// One size of a scaling benchmark.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub size: usize,
    /// Households, firms, central bank, government and any regional bank.
    pub agents: usize,
    pub messages: u64,
    /// Median wall time over repetitions, in seconds.
    pub median_seconds: f64,
    /// Whether every repetition produced the same message count.
    pub stable_messages: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// R² of a quadratic in agent count fitted to message counts.
    pub messages_r2: Option<f64>,
    /// R² of a quadratic in agent count fitted to median wall time.
    pub time_r2: Option<f64>,
    /// Correlation between median wall time and message count.
    pub time_message_corr: Option<f64>,
}

pub fn bench_config(preset: BenchPreset, size: usize) -> SimConfig {
    let mut c = SimConfig::default();
    match preset {
        BenchPreset::Quarterly => {
            c.firms = size;
            c.households = 10 * size;
        }
        BenchPreset::Regional => {
            c.preset = Preset::RegionalBiweekly;
            c.horizon = c.preset.periods_per_year();
            c.regional.scale = size;
        }
    }
    c
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Least-squares fit of `y = c0 + c1 x + c2 x^2`; returns the coefficients
/// and R². `None` when fewer than three distinct x or constant y.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Option<([f64; 3], f64)> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    // centre and scale x to keep the normal equations well conditioned
    let mx = x.iter().sum::<f64>() / n as f64;
    let sx = x.iter().map(|v| (v - mx).abs()).fold(0.0, f64::max);
    if sx == 0.0 {
        return None;
    }
    let z: Vec<f64> = x.iter().map(|v| (v - mx) / sx).collect();
    let mut a = [[0.0; 4]; 3];
    for (zi, yi) in z.iter().zip(y) {
        let basis = [1.0, *zi, zi * zi];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += basis[r] * basis[c];
            }
            a[r][3] += basis[r] * yi;
        }
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        a.swap(col, pivot);
        if a[col][col].abs() < 1e-12 {
            return None;
        }
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..4 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let b = [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]];
    let my = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    let ss_res: f64 = z.iter().zip(y).map(|(zi, yi)| (yi - (b[0] + b[1] * zi + b[2] * zi * zi)).powi(2)).sum();
    // back to the original x
    let coef = [
        b[0] - b[1] * mx / sx + b[2] * mx * mx / (sx * sx),
        b[1] / sx - 2.0 * b[2] * mx / (sx * sx),
        b[2] / (sx * sx),
    ];
    Some((coef, 1.0 - ss_res / ss_tot))
}

pub fn bench_scaling(preset: BenchPreset, sizes: &[usize], reps: usize, seed: u64) -> Result<ScalingTable, CliError> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("--sizes must be non-empty and strictly ascending".into()));
    }
    let reps = reps.max(1);
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let config = bench_config(preset, size);
        config.validate()?;
        let agents = config.layout().total_agents();
        let mut times = Vec::with_capacity(reps);
        let mut counts = Vec::with_capacity(reps);
        for r in 0..reps {
            let start = Instant::now();
            let log = run_episode(&config, seed)
                .map_err(|source| CliError::Simulation { episode: r as u64, seed, source })?;
            times.push(start.elapsed().as_secs_f64());
            counts.push(log.message_stats().total);
        }
        rows.push(ScalingRow {
            size,
            agents,
            messages: counts[0],
            median_seconds: median(&mut times),
            stable_messages: counts.iter().all(|c| *c == counts[0]),
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.agents as f64).collect();
    let msgs: Vec<f64> = rows.iter().map(|r| r.messages as f64).collect();
    let time: Vec<f64> = rows.iter().map(|r| r.median_seconds).collect();
    Ok(ScalingTable {
        messages_r2: quadratic_fit(&x, &msgs).map(|f| f.1),
        time_r2: quadratic_fit(&x, &time).map(|f| f.1),
        time_message_corr: pearson(&time, &msgs),
        rows,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.6}"))
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let table = bench_scaling(a.preset, &a.sizes, a.reps, a.seed)?;
    println!("size\tagents\tmessages\tmedian_seconds\tstable");
    for r in &table.rows {
        println!("{}\t{}\t{}\t{:.6}\t{}", r.size, r.agents, r.messages, r.median_seconds, r.stable_messages);
    }
    println!("messages_quadratic_r2\t{}", fmt_opt(table.messages_r2));
    println!("time_quadratic_r2\t{}", fmt_opt(table.time_r2));
    println!("time_message_corr\t{}", fmt_opt(table.time_message_corr));
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&table).expect("table serializes") + "\n";
        std::fs::write(path, text).map_err(|source| CliError::Io { context: path.display().to_string(), source })?;
    }
    Ok(())
}

pub fn cmd_serve(a: &ServeArgs) -> Result<(), CliError> {
    let config = load_config(a.config.as_deref())?;
    let endpoint = match (&a.listen, a.stdio) {
        (_, true) => Endpoint::Stdio,
        (Some(e), false) => e.clone(),
        (None, false) => return Err(CliError::Usage("give --listen or --stdio".into())),
    };
    let shutdown = Arc::new(AtomicBool::new(false));
    for signal in [signal_hook::consts::SIGTERM, signal_hook::consts::SIGINT] {
        signal_hook::flag::register(signal, Arc::clone(&shutdown))
            .map_err(|source| CliError::Io { context: "installing signal handler".into(), source })?;
    }
    if endpoint != Endpoint::Stdio {
        eprintln!("macrosim: serving on {}", a.listen.as_ref().map_or("stdio".into(), endpoint_text));
    }
    serve(&endpoint, &config, shutdown).map_err(|source| CliError::Io { context: endpoint_text(&endpoint), source })
}

fn endpoint_text(e: &Endpoint) -> String {
    match e {
        Endpoint::Stdio => "stdio".into(),
        Endpoint::Tcp(addr) => format!("tcp:{addr}"),
        Endpoint::Unix(path) => format!("unix:{}", path.display()),
    }
}

pub fn cmd_calibrate(a: &CalibrateArgs) -> Result<(), CliError> {
    let series = read_industry_csv(&a.csv)?;
    let report = calibrate(&series, a.low, a.high)?;
    for (group, fit) in &report.groups {
        println!("{group}\talpha={:.6}\tbeta={:.6}", fit.alpha, fit.beta);
    }
    println!("admissible\t{}", report.admissible.len());
    print!("{}", report.config_override());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_recovers_exact_coefficients() {
        let x = [3.0, 10.0, 20.0, 45.0, 80.0];
        let y: Vec<f64> = x.iter().map(|v| 5.0 + 2.0 * v + 0.5 * v * v).collect();
        let (c, r2) = quadratic_fit(&x, &y).unwrap();
        assert!((c[0] - 5.0).abs() < 1e-6 && (c[1] - 2.0).abs() < 1e-8 && (c[2] - 0.5).abs() < 1e-10, "{c:?}");
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_r2_below_one_with_noise() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [1.0, 3.0, 2.0, 5.0, 4.0, 6.0];
        let (_, r2) = quadratic_fit(&x, &y).unwrap();
        assert!(r2 > 0.0 && r2 < 1.0);
        assert!(quadratic_fit(&x[..2], &y[..2]).is_none());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn unknown_key_is_a_config_error() {
        let err = SimConfig::from_toml_str("horizon = 4\nbogus_key = 1\n").unwrap_err();
        let e = CliError::from(err);
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("bogus_key"), "{e}");
    }

    #[test]
    fn bench_rejects_unsorted_sizes() {
        assert!(matches!(bench_scaling(BenchPreset::Regional, &[5, 2], 1, 0), Err(CliError::Usage(_))));
    }
}
