use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpsrh_core::{Complex64, Error, ModelParams, ParamOverrides};

#[derive(Debug, Parser)]
#[command(name = "gpsrh", version, args_override_self = true, about = "Stationary analysis of a two-class non-work-conserving GPS queue")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the stability conditions.
    Stability(Common),
    /// Empty-queue probabilities and generating-function values.
    Solve(SolveArgs),
    /// Tail regime and asymptotic estimate of a queue length.
    Asymptotics(AsymptoticsArgs),
    /// Truncated-chain solve and optional simulation, with CSV exports.
    Oracle(OracleArgs),
    /// Run the numerical self-check suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi2: Option<f64>,
    /// Flat `key = value` parameter file; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of stdout (a directory for `oracle`).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn params(&self) -> Result<ModelParams, Error> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                ParamOverrides::parse(&text)?
            }
            None => ParamOverrides::default(),
        };
        let flags = ParamOverrides {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            nu1: self.nu1,
            nu2: self.nu2,
            r: self.r,
            phi1: self.phi1,
            phi2: self.phi2,
        };
        file.merged_with(flags).build()
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Points `y` (real or `a+bi`) at which to evaluate P(0, y).
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true)]
    pub eval_p0y: Vec<Complex64>,
    /// Points `x` at which to evaluate P(x, 0).
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true)]
    pub eval_px0: Vec<Complex64>,
    /// Pairs `x:y` at which to evaluate P(x, y).
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, allow_hyphen_values = true)]
    pub eval_pxy: Vec<(Complex64, Complex64)>,
    /// Compare P(0,0) with a truncated chain of this size.
    #[arg(long = "N", value_name = "INT")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Tabulate the estimate of P(N >= n) for n in `a:b`.
    #[arg(long, value_parser = parse_range)]
    pub tail_range: Option<(u32, u32)>,
    /// Queue whose length is analysed.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub queue: u8,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Truncation level of the chain (states 0..N in each queue).
    #[arg(long = "N", value_name = "INT", default_value_t = 400)]
    pub n: usize,
    /// Simulated time per replication; setting any simulation flag enables the simulator.
    #[arg(long, value_name = "REAL")]
    pub horizon: Option<f64>,
    #[arg(long, value_name = "INT")]
    pub replications: Option<usize>,
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Truncation level of the reference chain.
    #[arg(long = "N", value_name = "INT", default_value_t = 200)]
    pub n: usize,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|_| format!("`{s}` is not a number (use `a` or `a+bi`)"))
}

fn parse_pair(s: &str) -> Result<(Complex64, Complex64), String> {
    let (x, y) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form x:y"))?;
    Ok((parse_complex(x)?, parse_complex(y)?))
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form a:b"))?;
    let a: u32 = a.trim().parse().map_err(|_| format!("`{a}` is not a non-negative integer"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("`{b}` is not a non-negative integer"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok((a, b))
}
