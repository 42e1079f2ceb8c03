use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use laplace_mia::cli::{self, ExperimentSpec, SingleAttackSpec};
use laplace_mia::{Error, LinearQuery, RateMode, RateSpec, VarianceDivisor};

#[derive(Parser)]
#[command(
    name = "laplace-mia",
    version,
    about = "Membership inference against the Laplace mechanism"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success rate against m with the total budget fixed per curve.
    Fig3(GridArgs),
    /// Success rate against m with the per-query budget fixed per curve.
    Fig4(GridArgs),
    /// Attack one target in a JSON-lines dataset.
    Attack(AttackArgs),
    /// Evaluate the closed-form success rate.
    Rate(RateArgs),
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    budget_min: Option<f64>,
    #[arg(long)]
    budget_max: Option<f64>,
    #[arg(long, default_value_t = cli::DEFAULT_STEPS)]
    budget_steps: usize,
    #[arg(long, default_value_t = cli::DEFAULT_M_RANGE.0)]
    m_min: usize,
    #[arg(long, default_value_t = cli::DEFAULT_M_RANGE.1)]
    m_max: usize,
    #[arg(long, default_value_t = cli::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value = "m")]
    s_divisor: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryArg {
    Count,
    Sum,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    /// Comma-separated ids of records the attacker already holds.
    #[arg(long, value_delimiter = ',')]
    known: Vec<String>,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    eps_total: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Budget threshold of the black box; `inf` never aborts.
    #[arg(long, default_value_t = f64::INFINITY)]
    abort_threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "m")]
    s_divisor: String,
    #[arg(long, value_enum, default_value = "count")]
    query: QueryArg,
    /// Bound on |value|, required for sum queries.
    #[arg(long)]
    value_bound: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateModeArg {
    Exact,
    PerQuery,
    Total,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, value_enum)]
    mode: RateModeArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps_total: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
}

fn required(value: Option<f64>, flag: &str) -> Result<f64, Error> {
    value.ok_or_else(|| Error::Config(format!("--{flag} is required for this mode")))
}

fn grid(args: GridArgs, fig3: bool) -> Result<i32, Error> {
    let (lo, hi) = if fig3 { (0.1, 1.0) } else { (0.01, 0.1) };
    let budgets = cli::budget_range(
        args.budget_min.unwrap_or(lo),
        args.budget_max.unwrap_or(hi),
        args.budget_steps,
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let spec = ExperimentSpec {
        budgets,
        m_min: args.m_min,
        m_max: args.m_max,
        trials: args.trials,
        seed: args.seed,
        divisor: args
            .s_divisor
            .parse::<VarianceDivisor>()
            .map_err(|e| Error::Config(e.to_string()))?,
    };
    let rows = if fig3 {
        cli::run_fig3(&spec)?
    } else {
        cli::run_fig4(&spec)?
    };
    cli::write_csv(&rows, &args.out)?;
    if let Some(svg) = args.svg {
        cli::emit_svg(&rows, svg)?;
    }
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(0)
}

fn single_attack(args: AttackArgs) -> Result<i32, Error> {
    let spec = SingleAttackSpec {
        dataset_path: args.data,
        target_id: args.target,
        known_ids: args.known.into_iter().filter(|s| !s.is_empty()).collect(),
        m: args.m,
        eps_total: args.eps_total,
        alpha: args.alpha,
        abort_threshold: args.abort_threshold,
        seed: args.seed,
        divisor: args
            .s_divisor
            .parse::<VarianceDivisor>()
            .map_err(|e| Error::Config(e.to_string()))?,
        query: match args.query {
            QueryArg::Count => LinearQuery::Count,
            QueryArg::Sum => LinearQuery::Sum,
        },
        value_bound: args.value_bound,
    };
    let report = cli::run_single_attack(&spec)?;
    print!("{}", report.human());
    println!("{}", report.to_json());
    Ok(report.exit_code())
}

fn rate(args: RateArgs) -> Result<i32, Error> {
    let mode = match args.mode {
        RateModeArg::Exact => RateMode::Exact {
            mu0: required(args.mu0, "mu0")?,
            mu1: required(args.mu1, "mu1")?,
            s: required(args.s, "s")?,
        },
        RateModeArg::PerQuery => RateMode::PerQuery {
            eps: required(args.eps, "eps")?,
        },
        RateModeArg::Total => RateMode::Total {
            eps_total: required(args.eps_total, "eps-total")?,
        },
    };
    let r = RateSpec { m: args.m, mode }
        .evaluate()
        .map_err(|e| Error::Config(e.to_string()))?;
    println!("{r:.6}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                cli::EXIT_CONFIG as u8
            } else {
                0
            });
        }
    };
    let result = match cli.command {
        Command::Fig3(a) => grid(a, true),
        Command::Fig4(a) => grid(a, false),
        Command::Attack(a) => single_attack(a),
        Command::Rate(a) => rate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::error_exit_code(&e) as u8)
        }
    }
}
