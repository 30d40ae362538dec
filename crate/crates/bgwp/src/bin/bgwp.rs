use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bgwp::cli::{
    cmd_bounds, cmd_check, cmd_simulate, cmd_table1, exit_code, render_json, write_output,
    BoundsRequest, ChainMethod, CheckRequest, LawConfig, OutputFormat, RunConfig,
    SimulateRequest, Table1Request,
};
use bgwp::{Error, Result};

#[derive(Parser)]
#[command(
    name = "bgwp",
    version,
    about = "Extinction-time bounds, certified chain sandwiches, and deterministic \
             Monte Carlo for subcritical two-sex branching processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic tail and mean bounds, optionally with truncated-chain bounds
    Bounds(BoundsArgs),
    /// Comparison grid: envelope cdfs vs exact and Monte Carlo chain bounds
    Table1(Table1Args),
    /// Deterministic Monte Carlo cdf and mean of the extinction time
    Simulate(SimulateArgs),
    /// Certify mating-rule properties on an exhaustive grid
    Check(CheckArgs),
}

/// Ways to name a process: a config file, or the reference sex-multinomial
/// family via --alpha.
#[derive(Args)]
struct ProcessArgs {
    /// JSON config file ({"law": .., "mating": .., "initial": ..})
    #[arg(long)]
    config: Option<PathBuf>,
    /// Litter-3 sex-multinomial daughter probability (shortcut, or override)
    #[arg(long)]
    alpha: Option<f64>,
    /// Initial number of mating units (overrides the config)
    #[arg(long)]
    i: Option<u64>,
}

impl ProcessArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match (&self.config, self.alpha) {
            (Some(path), _) => RunConfig::from_path(path)?,
            (None, Some(alpha)) => RunConfig::sex_multinomial(alpha, 1),
            (None, None) => {
                return Err(Error::Config(
                    "no process given: pass --config FILE or --alpha X".into(),
                ))
            }
        };
        if self.config.is_some() {
            if let Some(alpha) = self.alpha {
                match &mut config.law {
                    LawConfig::SexMultinomial { alpha: a, .. } => *a = alpha,
                    _ => {
                        return Err(Error::Config(
                            "--alpha only applies to sex-multinomial laws".into(),
                        ))
                    }
                }
            }
        }
        if let Some(i) = self.i {
            config.initial = i;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output encoding
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn emit<T: serde::Serialize>(&self, report: &T, csv: impl FnOnce() -> String) -> Result<()> {
        let format: OutputFormat = self.format.parse()?;
        let text = match format {
            OutputFormat::Json => render_json(report)?,
            OutputFormat::Csv => csv(),
        };
        write_output(&text, self.out.as_deref())
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Largest horizon n in the per-generation table
    #[arg(long, default_value_t = 10)]
    n_max: u32,
    /// Also compute truncated-chain bounds with this state cap
    #[arg(long)]
    cap: Option<usize>,
    /// Transition-row construction for the chain section
    #[arg(long, default_value = "exact")]
    method: String,
    /// Replicates per Monte Carlo transition row
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    /// Master seed for any Monte Carlo work
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Require the mean section (errors when initial < 3)
    #[arg(long)]
    mean: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct Table1Args {
    /// Daughter probability of the litter-3 law
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    /// State cap of the truncated chains
    #[arg(long, default_value_t = 20)]
    cap: usize,
    /// Replicates per Monte Carlo transition row
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Largest horizon n in the empirical cdf
    #[arg(long, default_value_t = 10)]
    n_max: u32,
    /// Number of simulated lineages
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Exhaustive grid bound for the property checks
    #[arg(long, default_value_t = 50)]
    cap: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Bounds(args) => {
            let method: ChainMethod = args.method.parse()?;
            let report = cmd_bounds(&BoundsRequest {
                config: args.process.resolve()?,
                n_max: args.n_max,
                chain_cap: args.cap,
                method,
                reps: args.reps,
                seed: args.seed,
                want_mean: args.mean,
            })?;
            args.output.emit(&report, || report.to_csv())?;
        }
        Command::Table1(args) => {
            let report = cmd_table1(&Table1Request {
                alpha: args.alpha,
                cap: args.cap,
                reps: args.reps,
                seed: args.seed,
            })?;
            args.output.emit(&report, || report.to_csv())?;
        }
        Command::Simulate(args) => {
            let report = cmd_simulate(&SimulateRequest {
                config: args.process.resolve()?,
                n_max: args.n_max,
                reps: args.reps,
                seed: args.seed,
            })?;
            args.output.emit(&report, || report.to_csv())?;
        }
        Command::Check(args) => {
            let report = cmd_check(&CheckRequest {
                config: args.process.resolve()?,
                cap: args.cap,
            })?;
            args.output.emit(&report, || report.to_csv())?;
            if !report.all_hold {
                eprintln!("error: the mating rule violates a required property");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
