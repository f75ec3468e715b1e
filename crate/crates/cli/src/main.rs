mod commands;
mod config;
mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use tacsim_planner::Ablation;

use config::OpponentKind;

#[derive(Debug, Parser)]
#[command(name = "tacsim", version, about = "Plan, simulate and verify coordinated strike missions")]
struct Cli {
    /// TOML file overriding the built-in defaults (see defaults.toml).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Log more (repeat for debug output). RUST_LOG overrides this.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TemplateKind {
    Easy,
    Difficult,
    /// Alternating easy and difficult scenarios with jittered defences.
    Suite,
}

/// Seed list: `a..b` (inclusive), a single seed, or `a,b,c`.
#[derive(Debug, Clone)]
struct SeedList(Vec<u64>);

fn seed_list(s: &str) -> Result<SeedList, String> {
    config::parse_seeds(s).map(SeedList)
}

fn ablation(s: &str) -> Result<Ablation, String> {
    s.parse()
}

#[derive(Debug, Args)]
struct RolloutArgs {
    #[arg(long, value_name = "FILE")]
    plan: PathBuf,
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Opponent policy; defaults to the configured one.
    #[arg(long, value_enum)]
    opponent: Option<OpponentKind>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write built-in scenarios as JSON files.
    Template {
        #[arg(value_enum)]
        kind: TemplateKind,
        /// Number of scenarios for `suite`.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Generate validated candidate plans for a scenario.
    Plan {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        /// Mission intent; defaults to destroying the scenario's core target.
        #[arg(long, value_name = "FILE")]
        intent: Option<PathBuf>,
        /// Number of candidates; defaults to the configured count.
        #[arg(short = 'n', long)]
        candidates: Option<usize>,
        /// Disable a pipeline stage: single, no_pf, no_an or no_pl.
        #[arg(long, value_parser = ablation)]
        ablate: Option<Ablation>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Monte-Carlo verification and ranking of candidate plans.
    Verify {
        /// Plan files, or directories of `*.json` plan files.
        #[arg(long, num_args = 1.., required = true, value_name = "PATH")]
        plans: Vec<PathBuf>,
        /// Scenario files, or directories of `*.json` scenario files.
        #[arg(long, num_args = 1.., required = true, value_name = "PATH")]
        scenario: Vec<PathBuf>,
        #[arg(long, value_parser = seed_list)]
        seeds: Option<SeedList>,
        #[arg(long, value_enum)]
        opponent: Option<OpponentKind>,
        /// Worker threads (0 = one per core). Results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run one rollout and write its record, event log and trajectory table.
    Simulate {
        #[command(flatten)]
        rollout: RolloutArgs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Check an event log against a recorded hash, or re-run it.
    Replay {
        #[arg(long, value_name = "FILE")]
        log: PathBuf,
        /// Expected SHA-256 of the log.
        #[arg(long, conflicts_with = "record")]
        hash: Option<String>,
        /// Rollout record whose log hash is expected.
        #[arg(long, value_name = "FILE")]
        record: Option<PathBuf>,
        /// Re-run this plan and compare the regenerated log with the file.
        #[arg(long, value_name = "FILE", requires = "scenario")]
        plan: Option<PathBuf>,
        #[arg(long, value_name = "FILE", requires = "plan")]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum)]
        opponent: Option<OpponentKind>,
    },
    /// Cut rollouts into windowed prediction samples.
    ExportDataset {
        /// Rollout records (`record.json`) to cut.
        #[arg(long, num_args = 1.., value_name = "FILE", conflicts_with_all = ["plan", "scenario"])]
        records: Vec<PathBuf>,
        /// Simulate this plan instead of reading records.
        #[arg(long, value_name = "FILE", requires = "scenario")]
        plan: Option<PathBuf>,
        #[arg(long, value_name = "FILE", requires = "plan")]
        scenario: Option<PathBuf>,
        #[arg(long, value_parser = seed_list)]
        seeds: Option<SeedList>,
        #[arg(long, value_enum)]
        opponent: Option<OpponentKind>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Static rubric score of plans against a scenario.
    Score {
        #[arg(long, num_args = 1.., required = true, value_name = "PATH")]
        plans: Vec<PathBuf>,
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
    },
    /// Planned-versus-executed trajectory overlay (SVG and CSV).
    Plot {
        #[command(flatten)]
        rollout: RolloutArgs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn init_logging(verbose: u8) {
    use tracing_subscriber::EnvFilter;
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).with_target(false).try_init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
