//! `clumsy`: exact laws, moments, simulation and limit checks for the
//! clumsy coupon collector.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clumsy::asymptotics::Regime;
use clumsy::harness::{Suite, SuiteConfig};
use clumsy::{Clumsiness, Error, ModelParams};

use output::{Format, Provenance, Table};

#[derive(Parser, Debug)]
#[command(name = "clumsy", version, about = "Clumsy coupon collector toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "CLUMSY_THREADS")]
    threads: Option<usize>,
    /// Relative tolerance for quadratures.
    #[arg(long, global = true, default_value_t = 1e-12)]
    rel_tol: f64,
}

#[derive(Args, Debug, Clone)]
struct Model {
    /// Number of coupon types.
    #[arg(long)]
    m: u32,
    /// Clumsiness: `a/b` selects exact arithmetic, a decimal selects floats.
    #[arg(long)]
    p: Clumsiness,
}

impl Model {
    fn params(&self) -> clumsy::Result<ModelParams> {
        ModelParams::new(self.m, self.p.clone())
    }
}

#[derive(Args, Debug, Clone)]
struct RegimeArgs {
    /// subcritical, critical, supercritical or fixed-p.
    #[arg(long)]
    regime: Regime,
    /// Critical constant; defaults to m·p.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// P(T = n), cumulative mass and tail certificate for n <= n_max.
    Pmf {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
    },
    /// Closed-form mean and variance next to the pmf sums.
    Moments {
        #[command(flatten)]
        model: Model,
        /// Truncation point of the pmf cross-check.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// E e^{tT} over a grid of t <= 0.
    Mgf {
        #[command(flatten)]
        model: Model,
        /// Explicit points; overrides the grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 21)]
        t_steps: usize,
    },
    /// Exact P(T >= r) next to the exponential-moment bound.
    Tail {
        #[command(flatten)]
        model: Model,
        /// Thresholds; defaults to m, 2m, 10m.
        #[arg(long, value_delimiter = ',')]
        r: Vec<usize>,
    },
    /// Coupled Monte Carlo of the clumsy and classical times.
    Simulate {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Also write every coupled sample to this CSV file.
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Laplace transform of the birth-death hitting time, optionally simulated.
    Tau {
        #[arg(long)]
        c: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        s: Vec<f64>,
        /// Monte Carlo draws; 0 evaluates only.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Quantile pairs of the rescaled sample and the limit law.
    Limit {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 99)]
        points: usize,
    },
    /// Regime asymptotics of the mean and variance next to exact values.
    Expand {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        regime: RegimeArgs,
    },
    /// Runs verification suites; exits 0 iff every check passes.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Shrinks every sample size twentyfold.
        #[arg(long)]
        quick: bool,
        /// Multiplier on sample sizes.
        #[arg(long)]
        scale: Option<f64>,
        /// Fixed sample size for every Monte Carlo check.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        ks_threshold: Option<f64>,
        /// Write the full JSON reports here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::MissingParameter(_)
            | Error::OutOfRange(_)
            | Error::RegimeMismatch(_)
            | Error::KindMismatch { .. } => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect()
}

fn run(cli: &Cli, argv: Vec<String>) -> Result<bool, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        // a second build only fails if a pool exists already, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let seed = cli.seed;
    let mut mode = "float";
    let mut pass = true;
    let table: Table = match &cli.command {
        Command::Pmf { model, n_max } => {
            let params = model.params()?;
            mode = commands::mode(&params);
            commands::pmf(&params, *n_max)?
        }
        Command::Moments { model, n_max } => {
            let params = model.params()?;
            mode = commands::mode(&params);
            commands::moments(&params, *n_max)?
        }
        Command::Mgf { model, t, t_min, t_max, t_steps } => {
            let params = model.params()?;
            let ts = if t.is_empty() { grid(*t_min, *t_max, *t_steps) } else { t.clone() };
            commands::mgf(&params, &ts, cli.rel_tol)?
        }
        Command::Tail { model, r } => {
            let params = model.params()?;
            mode = commands::mode(&params);
            let m = params.m() as usize;
            let rs = if r.is_empty() { vec![m, 2 * m, 10 * m] } else { r.clone() };
            commands::tail(&params, &rs, cli.rel_tol)?
        }
        Command::Simulate { model, samples, raw } => {
            commands::simulate(&model.params()?, *samples, seed, raw.as_deref())?
        }
        Command::Tau { c, s, samples } => commands::tau(*c, s, *samples, seed, cli.rel_tol)?,
        Command::Limit { model, regime, samples, points } => {
            let params = model.params()?;
            let regime = commands::resolve_regime(regime.regime, regime.c, &params)?;
            commands::limit(&params, regime, *samples, seed, *points)?
        }
        Command::Expand { model, regime } => {
            let params = model.params()?;
            let regime = commands::resolve_regime(regime.regime, regime.c, &params)?;
            commands::expand(&params, regime, cli.rel_tol)?
        }
        Command::Verify { suite, quick, scale, samples, ks_threshold, report } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                suite
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|e: Error| Failure::Usage(e.to_string()))?
            };
            let mut config = if *quick { SuiteConfig::quick(seed) } else { SuiteConfig { seed, ..Default::default() } };
            if let Some(s) = scale {
                config.scale = *s;
            }
            config.samples = *samples;
            config.ks_threshold = *ks_threshold;
            config.rel_tol = cli.rel_tol;
            let (table, ok) = commands::verify(&suites, &config, report.as_deref())?;
            pass = ok;
            table
        }
    };
    let prov = Provenance { argv, seed, mode };
    output::emit(&table, &prov, cli.format, cli.output.as_deref())
        .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))?;
    Ok(pass)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        // clap exits 2 on usage errors and 0 for --help / --version
        Err(e) => e.exit(),
    };
    match run(&cli, argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("clumsy: some checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("clumsy: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("clumsy: {msg}");
            ExitCode::from(1)
        }
    }
}
