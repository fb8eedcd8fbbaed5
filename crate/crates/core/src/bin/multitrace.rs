use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multitrace::campaign::{
    explain, run_campaign, suite_checks, CampaignConfig, ReportFormat, Suite,
};
use multitrace::combinatorics::{build_permutation, shape_params};
use multitrace::{Error, Result};

#[derive(Parser)]
#[command(
    name = "multitrace",
    version,
    about = "Verify multivariate trace inequalities on seeded random matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign and write a report.
    Verify(VerifyArgs),
    /// Print what a check tests, with layout and permutation for a given n.
    Explain {
        #[arg(long)]
        check: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Print the reordering of the middle matrices for n.
    Perm {
        #[arg(long)]
        n: usize,
    },
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// identities, inequalities or all
    #[arg(long)]
    suite: Option<Suite>,
    /// Comma-separated check ids; replaces the suite selection.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// Matrix counts, as a range `3..6` (inclusive) or a list `3,5`.
    #[arg(long, value_parser = parse_n_values)]
    n: Option<NValues>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// jsonl or csv
    #[arg(long)]
    format: Option<ReportFormat>,
    #[arg(long)]
    threads: Option<usize>,
    /// TOML config file; flags take precedence.
    #[arg(long, env = "MULTITRACE_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct NValues(Vec<usize>);

fn parse_n_values(s: &str) -> std::result::Result<NValues, String> {
    let parse = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse(lo)?;
        let hi = parse(hi.trim_start_matches('='))?;
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        return Ok(NValues((lo..=hi).collect()));
    }
    s.split(',')
        .map(parse)
        .collect::<std::result::Result<_, _>>()
        .map(NValues)
}

fn build_config(args: VerifyArgs) -> Result<CampaignConfig> {
    let mut config = match &args.config {
        Some(path) => CampaignConfig::from_toml_file(path)?,
        None => CampaignConfig::default(),
    };
    if let Some(suite) = args.suite {
        config.checks = suite_checks(suite);
    }
    if let Some(checks) = args.checks {
        config.checks = checks;
    }
    if let Some(NValues(n)) = args.n {
        config.n_values = n;
    }
    if let Some(d) = args.d {
        config.d = d;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.output = Some(out);
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    if let Some(threads) = args.threads {
        config.threads = Some(threads);
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify(args) => {
            let config = build_config(args)?;
            let (summary, path) = run_campaign(&config)?;
            print!("{}", summary.render());
            println!("report written to {}", path.display());
            Ok(summary.all_passed())
        }
        Command::Explain { check, n } => {
            print!("{}", explain(&check, n)?);
            Ok(true)
        }
        Command::Perm { n } => {
            if n < 3 {
                return Err(Error::InvalidArgument(format!(
                    "n must be at least 3, got {n}"
                )));
            }
            let shape = shape_params(n);
            println!("n' = {}, rho = {}", shape.n_prime, shape.rho);
            println!("{}", build_permutation(n));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
