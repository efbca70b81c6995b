use std::path::PathBuf;
use std::process::ExitCode;

use bienayme::GrowthPreset;
use bienayme_lab::{
    config_err, construct, emit, load_dist, parse_degrees, parse_n_list, parse_sampler, scaling,
    simulate, stochorder, suites, ConfigError, ExperimentConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bienayme-lab",
    version,
    about = "Simulate and measure size-conditioned critical Bienaymé trees"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// distribution spec: a JSON file, inline JSON, or a family name
    #[arg(long, default_value = "geometric")]
    dist: String,
    /// comma-separated sizes, e.g. 100,1e3,1e4
    #[arg(long, default_value = "100")]
    n: String,
    #[arg(long, default_value_t = 100)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    sampler: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1 << 32)]
    max_tries: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// sample T_n and write one CSV row per tree
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "simulate")]
        experiment: String,
    },
    /// a_n, b_n, h_n and V(b_n) over a grid of sizes
    Scaling {
        #[command(flatten)]
        common: Common,
    },
    /// run a verification suite: bijections, oracle-tv or width-not-fat
    Verify {
        suite: String,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// build the short-and-fat offspring law and check its fat levels
    Construct {
        /// lnln, sqrtln or power
        #[arg(long, default_value = "power")]
        preset: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// replicates per level for the fatness check; 0 skips it
        #[arg(long, default_value_t = 1000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// exact expected heights of trees with two degree sequences
    Stochorder {
        #[arg(long)]
        d: String,
        #[arg(long)]
        d2: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config(common: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(
        load_dist(&common.dist)?,
        parse_n_list(&common.n)?,
        common.reps,
        parse_sampler(&common.sampler)?,
        common.seed,
    )?;
    cfg.max_tries = common.max_tries;
    cfg.out = common.out.clone();
    Ok(cfg)
}

/// Ok(true) when every check passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Simulate { common, experiment } => {
            let mut cfg = config(&common)?;
            cfg.experiment = experiment;
            let rows = simulate::run(&cfg)?;
            emit(cfg.out.as_deref(), &simulate::to_csv(&rows)?)?;
            Ok(rows.iter().all(simulate::StatsRow::sandwich_holds))
        }
        Cmd::Scaling { common } => {
            let d = load_dist(&common.dist)?;
            let rows = scaling::run(&d, &parse_n_list(&common.n)?)?;
            emit(common.out.as_deref(), &scaling::to_csv(&rows)?)?;
            Ok(true)
        }
        Cmd::Verify {
            suite,
            reps,
            seed,
            out,
        } => {
            let report = suites::run(&suite, reps, seed)?;
            eprint!("{}", report.render());
            emit(
                out.as_deref(),
                &(serde_json::to_string_pretty(&report)? + "\n"),
            )?;
            Ok(report.passed())
        }
        Cmd::Construct {
            preset,
            levels,
            reps,
            seed,
            out,
        } => {
            let Some(f) = GrowthPreset::parse(&preset) else {
                return config_err(format!(
                    "--preset must be lnln, sqrtln or power, got {preset:?}"
                ));
            };
            let res = construct::run(f, levels, reps, seed)?;
            emit(
                out.as_deref(),
                &(serde_json::to_string_pretty(&res)? + "\n"),
            )?;
            Ok(res
                .metadata
                .fatness
                .iter()
                .all(|r| r.frequency >= r.target - (r.ci.1 - r.ci.0)))
        }
        Cmd::Stochorder { d, d2, out } => {
            let r = stochorder::run(&parse_degrees(&d)?, &parse_degrees(&d2)?)?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&r)? + "\n"))?;
            Ok(r.holds != Some(false))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_none() {
                eprintln!("(runtime failure)");
            }
            ExitCode::from(2)
        }
    }
}
