//! Driver for the `mrtg` command-line tool.

pub mod commands;
pub mod config;

use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mrtg::{CoverageRule, MessageSpec, ModelParams, TransferSemantics};

use crate::commands::ReplayConfig;
use crate::config::{
    load_sweep_config, SweepConfig, DEFAULT_ALPHA, DEFAULT_DELAY, DEFAULT_LAMBDA, DEFAULT_NODES,
    DEFAULT_R, DEFAULT_SEED, DEFAULT_TRIALS,
};

#[derive(Debug, Parser)]
#[command(
    name = "mrtg",
    version,
    about = "Delivery ratio of size-constrained epidemic routing over Markovian temporal graphs"
)]
pub struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print one random trajectory in the `temporal-graph v1` text format.
    Generate(GenerateArgs),
    /// Monte Carlo delivery ratios over a parameter grid, as CSV.
    Simulate(SimulateArgs),
    /// Exact delivery probability by exhaustive enumeration.
    Exact(ExactArgs),
    /// Delivery ratios from replaying a contact trace, as CSV.
    Replay(ReplayArgs),
    /// Like `simulate`, with the grid read from a JSON document.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[arg(long, default_value_t = DEFAULT_R)]
    pub r: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

impl ModelArgs {
    fn params(&self) -> ModelParams {
        ModelParams {
            tau: self.tau,
            ..ModelParams::new(self.nodes, self.r, self.lambda)
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_DELAY)]
    pub delay: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub nodes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub r: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub delay: Vec<usize>,
    #[arg(long, default_value_t = TransferSemantics::Restart)]
    pub semantics: TransferSemantics,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl SimulateArgs {
    fn to_config(&self) -> SweepConfig {
        SweepConfig {
            nodes: self.nodes.clone(),
            r: self.r.clone(),
            lambda: self.lambda.clone(),
            alpha: self.alpha.clone(),
            d: self.delay.clone(),
            semantics: self.semantics.into(),
            trials: self.trials,
            seed: self.seed,
            tau: self.tau,
            phi: 1.0,
            output: self.output.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_DELAY)]
    pub delay: usize,
    #[arg(long, default_value_t = TransferSemantics::Restart)]
    pub semantics: TransferSemantics,
    /// Largest number of link-steps (links times delay) to enumerate.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Contact trace: `node_a node_b t_start t_end` per line.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = CoverageRule::Full)]
    pub coverage: CoverageRule,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub delay: Vec<usize>,
    #[arg(long, default_value_t = TransferSemantics::Restart)]
    pub semantics: TransferSemantics,
    /// Number of sampled messages.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output` from the configuration.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn emit<T: serde::Serialize>(
    text: &str,
    output: Option<&PathBuf>,
    command: &str,
    parameters: &T,
) -> Result<()> {
    match output {
        Some(path) => commands::write_with_manifest(path, text, command, parameters),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_grid(cfg: &SweepConfig, command: &str) -> Result<()> {
    let csv = commands::simulate_csv(cfg)?;
    emit(&csv, cfg.output.as_ref(), command, cfg)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let params = args.model.params();
            let text = commands::generate_text(&params, args.delay, args.seed)?;
            let manifest = serde_json::json!({
                "nodes": params.n_nodes, "r": params.r, "lambda": params.lambda,
                "tau": params.tau, "d": args.delay, "seed": args.seed,
            });
            emit(&text, args.output.as_ref(), "generate", &manifest)
        }
        Command::Simulate(args) => {
            if args.trials == 0 {
                bail!("--trials must be at least 1");
            }
            run_grid(&args.to_config(), "simulate")
        }
        Command::Exact(args) => {
            let params = args.model.params();
            let msg = MessageSpec::new(args.alpha, args.delay)?;
            let csv = commands::exact_csv(&params, &msg, args.semantics, args.budget)?;
            let manifest = serde_json::json!({
                "nodes": params.n_nodes, "r": params.r, "lambda": params.lambda,
                "alpha": args.alpha, "d": args.delay, "semantics": args.semantics.to_string(),
                "budget": args.budget,
            });
            emit(&csv, args.output.as_ref(), "exact", &manifest)
        }
        Command::Replay(args) => {
            if args.trials == 0 {
                bail!("--trials must be at least 1");
            }
            let text = std::fs::read_to_string(&args.trace)
                .with_context(|| format!("reading {}", args.trace.display()))?;
            let cfg = ReplayConfig {
                tau: args.tau,
                coverage: args.coverage,
                alpha: args.alpha,
                d: args.delay,
                semantics: args.semantics,
                samples: args.trials,
                seed: args.seed,
            };
            let csv = commands::replay_csv(&text, &cfg)
                .with_context(|| format!("replaying {}", args.trace.display()))?;
            emit(&csv, args.output.as_ref(), "replay", &cfg)
        }
        Command::Sweep(args) => {
            let doc = std::fs::read_to_string(&args.config)
                .with_context(|| format!("reading {}", args.config.display()))?;
            let mut cfg = load_sweep_config(&doc)
                .with_context(|| format!("loading {}", args.config.display()))?;
            if args.output.is_some() {
                cfg.output = args.output;
            }
            run_grid(&cfg, "sweep")
        }
    }
}

/// Runs `execute` on a pool of `threads` workers, or the global pool.
pub fn execute_with_threads(cli: Cli) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(threads) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building thread pool")?;
        return pool.install(|| execute(cli));
    }
    execute(cli)
}
