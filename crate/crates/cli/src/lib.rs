//! Command-line front end for `poik`.

pub mod figures;
pub mod output;
pub mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use poik::dist::{self, cdf, pmf_table};
use poik::fit::{
    delta_samples, fit_delta_k, fit_mu_series, residual_report, series_samples, DeltaFit,
    FitModel, SeriesFit,
};
use poik::solver::{solve_lambda_star, verify_boundary};
use poik::sweep::sweep_base_median_diff;
use poik::{Delta, Params, Residuals, Series, SolveResult};

use figures::{FigureConfig, DESK_SCALE_K, FULL_SCALE_K};
use output::{Format, Sink};
use verify::{Fault, Level};

/// Seed used by `verify` when neither `--seed` nor `POIK_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "poik", version, about = "Poisson distribution of order k")]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Dist {
    /// Order k (>= 1).
    #[arg(long)]
    pub k: u64,
    /// Rate lambda (> 0).
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct Out {
    /// Write here instead of stdout. The file appears only on success.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableOut {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub out: Out,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probabilities and cumulative probabilities for n = 0..=n_max.
    Pmf {
        #[command(flatten)]
        dist: Dist,
        #[arg(long)]
        n_max: u64,
        #[command(flatten)]
        table: TableOut,
    },
    /// Smallest n with P(Y <= n) >= 1/2, as JSON.
    Median {
        #[command(flatten)]
        dist: Dist,
        #[command(flatten)]
        out: Out,
    },
    /// All maximizers of the pmf, as JSON.
    Mode {
        #[command(flatten)]
        dist: Dist,
        #[command(flatten)]
        out: Out,
    },
    /// Rate at which the median steps from nu to nu + 1, as JSON.
    SolveLambda {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        nu: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Median against the base median for integer means n = n_lo..=n_max.
    Sweep {
        #[arg(long)]
        k: u64,
        /// First integer mean (default: where the median leaves zero).
        #[arg(long)]
        n_lo: Option<u64>,
        /// Last integer mean (default: 10 k).
        #[arg(long)]
        n_max: Option<u64>,
        #[command(flatten)]
        table: TableOut,
    },
    /// Fit mu - k = s k + c + d/k at nu = k.
    FitDelta {
        /// Orders to sample: integers or inclusive ranges `a..b`, comma separated.
        #[arg(long, alias = "k", value_delimiter = ',', value_parser = parse_k_spec)]
        k_list: Vec<KSpec>,
        /// Sample k in [2, 10000] instead of [2, 2000].
        #[arg(long)]
        full_scale: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Fit the cubic in nu/k for mu/(k+1).
    FitSeries {
        /// Orders to sample (default 100,500,1000,2000).
        #[arg(long, alias = "k", value_delimiter = ',', value_parser = parse_k_spec)]
        k_list: Vec<KSpec>,
        /// Grid points in nu/k per order.
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Data series behind figure 1..9.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=9))]
        id: u8,
        /// Override the figure's default orders.
        #[arg(long, alias = "k", value_delimiter = ',', value_parser = parse_k_spec)]
        k_list: Vec<KSpec>,
        /// Last integer mean for figures 7-9.
        #[arg(long)]
        n_max: Option<u64>,
        /// Figure 4 over k <= 10000 instead of 2000.
        #[arg(long)]
        full_scale: bool,
        #[command(flatten)]
        table: TableOut,
    },
    /// Cross-check the independent evaluation paths; exit 1 on any failure.
    Verify {
        #[arg(value_enum)]
        level: Level,
        #[arg(long, env = "POIK_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

/// A single order or an inclusive range of orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KSpec {
    pub lo: u64,
    pub hi: u64,
}

pub fn parse_k_spec(s: &str) -> Result<KSpec, String> {
    let parse = |v: &str| {
        v.trim()
            .parse::<u64>()
            .map_err(|e| format!("invalid order `{v}`: {e}"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let k = parse(s)?;
            (k, k)
        }
    };
    if lo == 0 {
        return Err("orders must be at least 1".into());
    }
    if hi < lo {
        return Err(format!("empty range `{s}`"));
    }
    Ok(KSpec { lo, hi })
}

fn expand(specs: &[KSpec]) -> Option<Vec<u64>> {
    if specs.is_empty() {
        return None;
    }
    Some(specs.iter().flat_map(|s| s.lo..=s.hi).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfRow {
    pub n: u64,
    pub p: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianOutput {
    pub k: u64,
    pub lambda: f64,
    pub median: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeOutput {
    pub k: u64,
    pub lambda: f64,
    pub modes: Vec<u64>,
    pub peak_probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    #[serde(flatten)]
    pub result: SolveResult,
    pub verify_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub count: usize,
    pub max_abs: f64,
    pub bias: f64,
}

impl From<&Residuals> for ResidualSummary {
    fn from(r: &Residuals) -> Self {
        Self {
            count: r.points.len(),
            max_abs: r.max_abs,
            bias: r.bias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaFitOutput {
    pub k_min: u64,
    pub k_max: u64,
    pub samples: usize,
    pub fit: Delta,
    pub fitted_residuals: ResidualSummary,
    pub published: Delta,
    pub published_residuals: ResidualSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFitOutput {
    pub k_list: Vec<u64>,
    pub points: usize,
    pub samples: usize,
    pub fit: Series,
    pub fitted_residuals: ResidualSummary,
    pub published: Series,
    pub published_residuals: ResidualSummary,
}

/// How a command failed, and the exit code that goes with it.
#[derive(Debug)]
pub enum Failure {
    /// Rejected input: exit 2.
    Usage(String),
    /// A verification check failed: exit 1.
    Verification(String),
    /// A computation or I/O step failed: exit 1.
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Usage(_) => ExitCode::from(2),
            Self::Verification(_) | Self::Runtime(_) => ExitCode::from(1),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Verification(m) | Self::Runtime(m) => m,
        }
    }
}

impl From<poik::Error> for Failure {
    fn from(e: poik::Error) -> Self {
        use poik::Error::*;
        match e {
            InvalidParams(_) | Domain(_) | OutOfRange { .. } | AllocationBound { .. }
            | GuardExceeded(_) => Self::Usage(e.to_string()),
            BracketFailure { .. } | SingularSystem(_) => Self::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("write failed: {e}"))
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Pmf { dist, n_max, table } => {
            let params = Params::new(dist.k, dist.lambda)?;
            let t = pmf_table(&params, n_max)?;
            let rows = (0..=n_max)
                .map(|n| {
                    Ok(PmfRow {
                        n,
                        p: t.probability(n)?,
                        cdf: cdf(&t, n)?,
                    })
                })
                .collect::<poik::Result<Vec<_>>>()?;
            Sink::new(table.out.output).rows(&rows, table.format)?;
        }
        Command::Median { dist, out } => {
            let params = Params::new(dist.k, dist.lambda)?;
            Sink::new(out.output).json(&MedianOutput {
                k: dist.k,
                lambda: dist.lambda,
                median: dist::median(&params),
            })?;
        }
        Command::Mode { dist, out } => {
            let params = Params::new(dist.k, dist.lambda)?;
            let m = dist::mode(&params);
            Sink::new(out.output).json(&ModeOutput {
                k: dist.k,
                lambda: dist.lambda,
                modes: m.modes,
                peak_probability: m.peak_probability,
            })?;
        }
        Command::SolveLambda { k, nu, out } => {
            let result = solve_lambda_star::<f64>(k, nu)?;
            Sink::new(out.output).json(&SolveOutput {
                result,
                verify_boundary: verify_boundary(&result),
            })?;
        }
        Command::Sweep {
            k,
            n_lo,
            n_max,
            table,
        } => {
            let n_hi = n_max.unwrap_or(10 * k);
            let rows = sweep_base_median_diff::<f64>(k, n_lo, n_hi)?;
            Sink::new(table.out.output).rows(&rows, table.format)?;
        }
        Command::FitDelta {
            k_list,
            full_scale,
            out,
        } => {
            let top = if full_scale { FULL_SCALE_K } else { DESK_SCALE_K };
            let ks = expand(&k_list).unwrap_or_else(|| (2..=top).collect());
            let samples = delta_samples::<f64>(&ks)?;
            let pairs: Vec<(u64, f64)> = samples.iter().map(|s| (s.k, s.mu_star)).collect();
            let fit = fit_delta_k(&pairs)?;
            let published = DeltaFit::published();
            Sink::new(out.output).json(&DeltaFitOutput {
                k_min: ks.iter().copied().min().unwrap_or(0),
                k_max: ks.iter().copied().max().unwrap_or(0),
                samples: samples.len(),
                fit,
                fitted_residuals: (&residual_report(&FitModel::DeltaK(fit), &samples)).into(),
                published,
                published_residuals: (&residual_report(&FitModel::DeltaK(published), &samples))
                    .into(),
            })?;
        }
        Command::FitSeries {
            k_list,
            points,
            out,
        } => {
            let ks = expand(&k_list).unwrap_or_else(|| vec![100, 500, 1000, 2000]);
            let samples = series_samples::<f64>(&ks, points)?;
            let fit = fit_mu_series(&samples)?;
            let published = SeriesFit::published();
            Sink::new(out.output).json(&SeriesFitOutput {
                k_list: ks,
                points,
                samples: samples.len(),
                fit,
                fitted_residuals: (&residual_report(&FitModel::MuSeries(fit), &samples)).into(),
                published,
                published_residuals: (&residual_report(&FitModel::MuSeries(published), &samples))
                    .into(),
            })?;
        }
        Command::Figure {
            id,
            k_list,
            n_max,
            full_scale,
            table,
        } => {
            let config = FigureConfig {
                k_list: expand(&k_list),
                n_max,
                full_scale,
            };
            let data = figures::figure(id, &config)?;
            data.write(&Sink::new(table.out.output), table.format)?;
            if let Some(r) = data.residuals() {
                eprintln!(
                    "figure {id}: {} rows, max |residual| {:e}, mean residual {:e}",
                    data.len(),
                    r.max_abs,
                    r.bias
                );
            }
        }
        Command::Verify {
            level,
            seed,
            format,
            inject_fault,
            out,
        } => {
            let report = verify::run(level, seed, inject_fault);
            let sink = Sink::new(out.output);
            match format {
                ReportFormat::Json => sink.json(&report)?,
                ReportFormat::Text => sink.emit(|w| {
                    for c in &report.checks {
                        writeln!(w, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
                    }
                    writeln!(w, "verify {}: {}", level.name(), if report.pass { "ok" } else { "FAILED" })
                })?,
            }
            if !report.pass {
                let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                return Err(Failure::Verification(format!(
                    "verification failed: {}",
                    names.join("; ")
                )));
            }
        }
    }
    Ok(())
}
