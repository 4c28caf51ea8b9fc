//! The `mgc` command-line tool.
//!
//! Exit codes: 0 success, 1 other failures, 2 malformed input or unknown
//! simulation name, 3 sample size or dimension mismatch, 4 degenerate data or
//! a method that does not support the data's dimension.

pub mod csvio;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::{mantel, pearson};
use crate::data::DataMatrix;
use crate::distances::DistanceRankPair;
use crate::error::MgcError;
use crate::harness::{power_curve, runtime_bench_with, DEFAULT_BENCH_RUNS, DEFAULT_REPLICATES};
use crate::inference::{domain, permutation_test, Method, RngSpec, DEFAULT_PERMUTATIONS};
use crate::localmap::{local_corr_map, EpsGuard};
use crate::mgc::mgc_test_statistic;
use crate::simgen::{simulate, SimSpec, SimType};

use csvio::{comment_preamble, map_csv, read_table, records_csv, sample_csv};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] MgcError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Output(_) => 1,
            CliError::Core(e) => match e {
                MgcError::InvalidData(_) | MgcError::UnknownSimulation { .. } => 2,
                MgcError::DimensionMismatch(_) | MgcError::InsufficientSample { .. } => 3,
                MgcError::DegenerateData(_) | MgcError::UnsupportedDimension(_) => 4,
                _ => 1,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "mgc", version, about = "Multiscale graph correlation independence testing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Permutation test of independence between two column sets.
    Test(TestArgs),
    /// Export the local correlation map as an n x n grid.
    Map(MapArgs),
    /// Draw a sample from one of the twenty simulation types.
    Simulate(SimulateArgs),
    /// Estimate testing power on a simulation type.
    Power(PowerArgs),
    /// Time the MGC and Dcorr statistics on quadratic data.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| {
        format!(
            "unknown method '{s}'; valid methods: {}",
            Method::ALL.map(|m| m.name()).join(", ")
        )
    })
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// One CSV holding both column sets, or two CSVs (x first, then y).
    #[arg(long, num_args = 1..=2, required = true)]
    pub input: Vec<PathBuf>,
    /// Columns of x: header names or 0-based indices, comma-separated.
    #[arg(long)]
    pub x_cols: Option<String>,
    /// Columns of y, in the same form.
    #[arg(long)]
    pub y_cols: Option<String>,
    /// Add seeded N(0, variance) noise to both sides before testing.
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "mgc", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct MapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Simulation name (e.g. linear, spiral) or its number 1..20.
    #[arg(long)]
    pub sim: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Noise constant; defaults to 1 when p = 1 and 0 otherwise.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PowerArgs {
    #[arg(long)]
    pub sim: String,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "mgc,dcorr", value_parser = parse_method)]
    pub method: Vec<Method>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Timed runs per size and method; the median is reported.
    #[arg(long, default_value_t = DEFAULT_BENCH_RUNS)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    let config = serde_json::to_value(command).map_err(|e| CliError::Output(e.to_string()))?;
    let config = config
        .as_object()
        .and_then(|o| o.iter().next())
        .map(|(name, body)| {
            let mut body = body.clone();
            if let Some(obj) = body.as_object_mut() {
                obj.insert("command".into(), name.clone().into());
            }
            body
        })
        .unwrap_or(config);
    match command {
        Command::Test(a) => cmd_test(a, &config),
        Command::Map(a) => cmd_map(a, &config),
        Command::Simulate(a) => cmd_simulate(a, &config),
        Command::Power(a) => cmd_power(a, &config),
        Command::Bench(a) => cmd_bench(a, &config),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn all_except(columns: usize, taken: &[usize]) -> Vec<usize> {
    (0..columns).filter(|c| !taken.contains(c)).collect()
}

/// Loads `(x, y)` from the input files, applying selectors and jitter.
pub fn load_pair(args: &InputArgs) -> CliResult<(DataMatrix, DataMatrix)> {
    let (x, y) = match args.input.as_slice() {
        [single] => {
            let t = read_table(single)?;
            let (xc, yc) = match (&args.x_cols, &args.y_cols) {
                (Some(xs), Some(ys)) => (t.resolve(xs)?, t.resolve(ys)?),
                (Some(xs), None) => {
                    let xc = t.resolve(xs)?;
                    let yc = all_except(t.columns, &xc);
                    (xc, yc)
                }
                (None, Some(ys)) => {
                    let yc = t.resolve(ys)?;
                    (all_except(t.columns, &yc), yc)
                }
                (None, None) => ((0..t.columns.saturating_sub(1)).collect(), vec![t.columns - 1]),
            };
            if xc.is_empty() || yc.is_empty() {
                return Err(CliError::Input(format!(
                    "{}: need at least one column for each of x and y",
                    single.display()
                )));
            }
            if xc.iter().any(|c| yc.contains(c)) {
                return Err(CliError::Input("x and y column selections overlap".into()));
            }
            (t.select(&xc)?, t.select(&yc)?)
        }
        [xf, yf] => {
            let (tx, ty) = (read_table(xf)?, read_table(yf)?);
            let xc = match &args.x_cols {
                Some(s) => tx.resolve(s)?,
                None => (0..tx.columns).collect(),
            };
            let yc = match &args.y_cols {
                Some(s) => ty.resolve(s)?,
                None => (0..ty.columns).collect(),
            };
            (tx.select(&xc)?, ty.select(&yc)?)
        }
        _ => return Err(CliError::Input("expected one or two input files".into())),
    };
    if x.n() != y.n() {
        return Err(MgcError::DimensionMismatch(format!(
            "x has {} observations, y has {}",
            x.n(),
            y.n()
        ))
        .into());
    }
    match args.jitter {
        Some(v) => {
            let rng = RngSpec::new(args.seed);
            Ok((
                x.jittered(v, &mut rng.stream(domain::JITTER, 0))?,
                y.jittered(v, &mut rng.stream(domain::JITTER, 1))?,
            ))
        }
        None => Ok((x, y)),
    }
}

#[derive(Debug, Serialize)]
struct TestOutput<'a> {
    method: Method,
    statistic: f64,
    p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimal_scale: Option<[usize; 2]>,
    n: usize,
    p: usize,
    q: usize,
    r: usize,
    seed: u64,
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_test_p_value: Option<f64>,
    null_mean: f64,
    null_sd: f64,
    version: &'static str,
    config: &'a serde_json::Value,
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_test(args: &TestArgs, config: &serde_json::Value) -> CliResult<()> {
    let (x, y) = load_pair(&args.input)?;
    let report = permutation_test(&args.method, &x, &y, args.permutations, RngSpec::new(args.input.seed))?;
    let (mut statistic, mut optimal_scale, mut threshold, mut t_p) = (report.statistic, None, None, None);
    match args.method {
        Method::Mgc => {
            let r = mgc_test_statistic(&x, &y)?;
            statistic = r.statistic;
            optimal_scale = Some([r.optimal_scale.0, r.optimal_scale.1]);
            threshold = Some(r.threshold);
        }
        Method::Mantel => statistic = mantel(&x, &y)?.value,
        Method::Pearson => {
            let r = pearson(&x, &y)?;
            statistic = r.r;
            t_p = Some(r.p_value);
        }
        Method::Dcorr => {}
    }
    let (null_mean, null_sd) = report.null_summary();
    let out = TestOutput {
        method: args.method,
        statistic,
        p_value: report.p_value,
        optimal_scale,
        n: x.n(),
        p: x.p(),
        q: y.p(),
        r: report.permutations,
        seed: report.seed,
        threshold,
        t_test_p_value: t_p,
        null_mean,
        null_sd,
        version: VERSION,
        config,
    };
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out).map_err(|e| CliError::Output(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = comment_preamble(config);
            s.push_str("method,statistic,p_value,optimal_k,optimal_l,n,p,q,r,seed,threshold,t_test_p_value\n");
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                out.method,
                out.statistic,
                out.p_value,
                opt_cell(optimal_scale.map(|s| s[0])),
                opt_cell(optimal_scale.map(|s| s[1])),
                out.n,
                out.p,
                out.q,
                out.r,
                out.seed,
                opt_cell(threshold),
                opt_cell(t_p),
            ));
            s
        }
    };
    write_output(args.output.as_deref(), &text)
}

fn cmd_map(args: &MapArgs, config: &serde_json::Value) -> CliResult<()> {
    let (x, y) = load_pair(&args.input)?;
    let map = local_corr_map(
        &DistanceRankPair::from_data(&x)?,
        &DistanceRankPair::from_data(&y)?,
        EpsGuard::Relative,
    )?;
    let mut text = comment_preamble(config);
    text.push_str(&map_csv(&map));
    write_output(args.output.as_deref(), &text)
}

fn sim_spec(sim: &str, n: usize, p: usize, kappa: Option<f64>, seed: u64) -> CliResult<SimSpec> {
    let t = SimType::parse(sim)?;
    Ok(SimSpec::new(t, n, p, kappa.unwrap_or_else(|| SimSpec::default_kappa(p)), seed))
}

fn cmd_simulate(args: &SimulateArgs, config: &serde_json::Value) -> CliResult<()> {
    let spec = sim_spec(&args.sim, args.n, args.p, args.kappa, args.seed)?;
    let pair = simulate(&spec)?;
    let mut text = comment_preamble(config);
    text.push_str(&sample_csv(&pair));
    write_output(args.output.as_deref(), &text)
}

fn tabular<T: Serialize>(records: &[T], format: Format, seed: u64, config: &serde_json::Value) -> CliResult<String> {
    match format {
        Format::Csv => {
            let mut s = comment_preamble(config);
            s.push_str(&records_csv(records)?);
            Ok(s)
        }
        Format::Json => {
            let doc = serde_json::json!({
                "version": VERSION,
                "seed": seed,
                "config": config,
                "results": records,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn cmd_power(args: &PowerArgs, config: &serde_json::Value) -> CliResult<()> {
    let base = sim_spec(&args.sim, 0, args.p, args.kappa, args.seed)?;
    let rows = power_curve(&base, &args.method, &args.n, args.alpha, args.replicates, RngSpec::new(args.seed))?;
    let text = tabular(&rows, args.format, args.seed, config)?;
    write_output(args.output.as_deref(), &text)
}

fn cmd_bench(args: &BenchArgs, config: &serde_json::Value) -> CliResult<()> {
    let rows = runtime_bench_with(&args.n, args.p, args.runs, RngSpec::new(args.seed))?;
    let text = tabular(&rows, args.format, args.seed, config)?;
    write_output(args.output.as_deref(), &text)
}
