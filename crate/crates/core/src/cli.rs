//! Command-line entry point: `train`, `eval`, `sweep` and `ccdf`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{validate_config, RootConfig};
use crate::error::{Error, IoContext, Result};
use crate::harness::{self, architecture_label, Policy};
use crate::io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "linkrl",
    version,
    about = "Train and evaluate RL-based Wi-Fi rate adaptation on a simulated 802.11n link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the configured learning agent.
    Train(RunArgs),
    /// Run one evaluation episode with a frozen policy or a baseline.
    Eval(EvalArgs),
    /// Train every learning-rate × architecture cell of the configured grid.
    Sweep(RunArgs),
    /// Compute the throughput CCDF of the logs in a results folder.
    Ccdf(CcdfArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Base directory for the timestamped results folder.
    #[arg(long, default_value = "results")]
    results: PathBuf,
    /// Overrides agent.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides agent.episodes.
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Trained policy (required for dara and dara_tabular).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Load a checkpoint even if it was trained under a different configuration.
    #[arg(long)]
    allow_fingerprint_mismatch: bool,
}

#[derive(Debug, Args)]
struct CcdfArgs {
    #[arg(long)]
    config: PathBuf,
    /// Results folder holding throughput_*.csv logs; ccdf.csv is written there.
    #[arg(long)]
    results: PathBuf,
}

/// Runs the CLI and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>, episodes: Option<usize>) -> Result<RootConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = validate_config(&text)?;
    if let Some(s) = seed {
        cfg.agent.seed = s;
    }
    if let Some(n) = episodes {
        if n == 0 {
            return Err(Error::config("--episodes must be >= 1"));
        }
        cfg.agent.episodes = n;
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::Sweep(args) => sweep(args),
        Command::Ccdf(args) => ccdf(args),
    }
}

fn train(args: RunArgs) -> Result<()> {
    let cfg = load_config(&args.config, args.seed, args.episodes)?;
    if !cfg.agent.algorithm.is_learning() {
        return Err(Error::config(format!(
            "algorithm {} has nothing to train; use eval",
            cfg.agent.algorithm.name()
        )));
    }
    let dir = io::setup_results_dir(
        &args.results,
        &format!("train_{}", cfg.agent.algorithm.name()),
        &cfg,
    )?;
    println!("results: {}", dir.display());
    let total = cfg.agent.episodes;
    harness::run_training(&cfg, Some(&dir), &mut |s| {
        println!(
            "episode {:>3}/{total}  cum_reward {:>12.3}  mean_throughput {:>7.3} Mbit/s  train_steps {}",
            s.episode, s.cum_reward, s.mean_throughput_mbps, s.train_steps
        );
    })?;
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let cfg = load_config(&args.run.config, args.run.seed, args.run.episodes)?;
    let algorithm = cfg.agent.algorithm;
    let policy = match (&args.checkpoint, algorithm.is_learning()) {
        (Some(path), true) => Some(Policy::load(&cfg, path, args.allow_fingerprint_mismatch)?),
        (None, true) => {
            return Err(Error::config(format!(
                "evaluating {} requires --checkpoint <path>",
                algorithm.name()
            )))
        }
        (Some(_), false) => {
            log::warn!("{} is a baseline; ignoring --checkpoint", algorithm.name());
            None
        }
        (None, false) => None,
    };
    let dir = io::setup_results_dir(
        &args.run.results,
        &format!("eval_{}", algorithm.name()),
        &cfg,
    )?;
    if let (Some(src), true) = (&args.checkpoint, algorithm.is_learning()) {
        let name = src.file_name().unwrap_or_else(|| "policy.ckpt".as_ref());
        std::fs::copy(src, dir.join(name)).context(|| format!("copying {}", src.display()))?;
    }
    println!("results: {}", dir.display());
    let out = harness::run_evaluation(&cfg, policy, Some(&dir))?;
    println!(
        "{}: cum_reward {:.3}  mean_throughput {:.3} Mbit/s",
        algorithm.name(),
        out.summary.cum_reward,
        out.summary.mean_throughput_mbps
    );
    Ok(())
}

fn sweep(args: RunArgs) -> Result<()> {
    let cfg = load_config(&args.config, args.seed, args.episodes)?;
    let dir = io::setup_results_dir(&args.results, "sweep", &cfg)?;
    println!("results: {}", dir.display());
    let summary = harness::run_sweep(&cfg, Some(&dir))?;
    for r in &summary.rows {
        match (r.final_cum_reward, &r.error) {
            (Some(v), _) => println!(
                "lr {:<8} hidden {:<10} seed {:<4} final cum_reward {v:.3}",
                r.learning_rate,
                architecture_label(&r.hidden_layers),
                r.seed
            ),
            (None, e) => println!(
                "lr {:<8} hidden {:<10} seed {:<4} FAILED: {}",
                r.learning_rate,
                architecture_label(&r.hidden_layers),
                r.seed,
                e.as_deref().unwrap_or("unknown error")
            ),
        }
    }
    match &summary.winner {
        Some((lr, h)) => println!("winner: lr {lr} hidden {}", architecture_label(h)),
        None => return Err(Error::NotReady("every sweep cell failed".into())),
    }
    Ok(())
}

fn ccdf(args: CcdfArgs) -> Result<()> {
    load_config(&args.config, None, None)?;
    let samples = io::read_throughput_samples(&args.results)?;
    let points = io::ccdf(&samples)?;
    let path = args.results.join(io::CCDF_FILE);
    io::write_file(&path, io::ccdf_csv(&points).as_bytes())?;
    println!("wrote {} ({} samples)", path.display(), samples.len());
    Ok(())
}
