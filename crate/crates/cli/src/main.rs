//! Batch front end: train, evaluate, analyze-steps, latent, sweep.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};

use ddae_cli::{commands, config::RawConfig};
use ddae_core::{MetricKind, SplitMode};

#[derive(Parser)]
#[command(name = "ddae", version, about = "Timestep-conditioned autoencoders for tabular anomaly detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model (first configured seed) and write checkpoint.json.
    Train {
        /// Flat JSON config file.
        #[arg(long)]
        config: PathBuf,
        /// Override one scalar config key, e.g. --set lr=1e-3. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the multi-seed protocol: split, train, score, metrics, result.json.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Decompose a checkpoint's score into per-timestep metrics (steps.csv).
    AnalyzeSteps {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// pr_auc or roc_auc.
        #[arg(long, default_value = "pr_auc")]
        metric: MetricKind,
        /// unsupervised or semi.
        #[arg(long, default_value = "unsupervised")]
        mode: SplitMode,
        /// Defaults to the checkpoint's training seed.
        #[arg(long)]
        split_seed: Option<u64>,
        /// full or train.
        #[arg(long, default_value = "full")]
        standardize_scope: ddae_cli::StandardizeScope,
        /// Defaults to steps.csv next to the checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump latent codes for every row at a fixed conditioning step (latent.csv).
    Latent {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Conditioning timestep; ignored by models trained without embedding.
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Defaults to latent.csv next to the checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the Cartesian product of array-valued config axes.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Parallel cells; each cell still trains single-threaded.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Skip cells whose result.json already exists and validates.
        #[arg(long)]
        resume: bool,
    },
}

fn load_config(path: &Path, overrides: &[String]) -> anyhow::Result<RawConfig> {
    let mut raw = RawConfig::from_path(path)
        .with_context(|| format!("loading {}", path.display()))?;
    for pair in overrides {
        raw.set(pair)?;
    }
    Ok(raw)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train { config, overrides } => {
            let cfg = load_config(&config, &overrides)?.resolve()?;
            let path = commands::train_once(&cfg, &mut std::io::stdout().lock())?;
            println!("wrote {}", path.display());
        }
        Command::Evaluate { config, overrides } => {
            let cfg = load_config(&config, &overrides)?.resolve()?;
            let (result, path) = commands::evaluate(&cfg)?;
            for outcome in &result.per_seed {
                match (outcome.pr_auc, outcome.roc_auc) {
                    (Some(pr), Some(roc)) => println!(
                        "seed {:>2}  pr_auc {pr:.4}  roc_auc {roc:.4}  final_loss {:.4e}",
                        outcome.seed, outcome.final_loss
                    ),
                    _ => println!(
                        "seed {:>2}  metrics undefined: {}",
                        outcome.seed,
                        outcome.error.as_deref().unwrap_or("unknown")
                    ),
                }
            }
            println!(
                "summary  pr_auc {:.4} ± {:.4}  roc_auc {:.4} ± {:.4}",
                result.summary.pr_auc.mean,
                result.summary.pr_auc.std,
                result.summary.roc_auc.mean,
                result.summary.roc_auc.std
            );
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", path.display());
        }
        Command::AnalyzeSteps {
            checkpoint,
            dataset,
            metric,
            mode,
            split_seed,
            standardize_scope,
            out,
        } => {
            let output = commands::analyze_steps(&commands::StepsArgs {
                checkpoint,
                dataset,
                metric,
                mode,
                split_seed,
                scope: standardize_scope,
                out,
            })?;
            let (_, _, cum, _) = output.rows.last().expect("at least one step");
            println!("{} steps, cumulative {metric} {cum:.4}", output.rows.len());
            println!("wrote {}", output.path.display());
        }
        Command::Latent { checkpoint, dataset, t, out } => {
            let path = commands::latent(&commands::LatentArgs {
                checkpoint,
                dataset,
                t,
                scope: ddae_cli::StandardizeScope::Full,
                out,
            })?;
            println!("wrote {}", path.display());
        }
        Command::Sweep { config, overrides, jobs, resume } => {
            let raw = load_config(&config, &overrides)?;
            let outcome = commands::sweep(&raw, jobs, resume)?;
            println!(
                "{} completed, {} skipped; index at {}",
                outcome.completed,
                outcome.skipped,
                outcome.index_path.display()
            );
        }
    }
    Ok(())
}
