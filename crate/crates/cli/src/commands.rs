//! Command implementations. Each function is callable from tests; main.rs
//! only parses arguments and forwards here.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use serde_json::Value;

use ddae_core::{
    aggregate_seeds, checkpoint, dump_latent, load_csv, make_split, per_step_curve, score,
    standardize, standardize_with, train, Dataset, Matrix, MetricKind, MetricSummary, SplitMode,
};

use crate::config::{check_axis_value, ExperimentConfig, RawConfig, StandardizeScope};
use crate::result::{DatasetInfo, ExperimentResult, SeedOutcome, RESULT_SCHEMA_VERSION};
use crate::schema;

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn dataset_info(ds: &Dataset, path: &Path) -> DatasetInfo {
    DatasetInfo {
        name: ds.name.clone(),
        path: path.display().to_string(),
        n_rows: ds.n_rows(),
        n_features: ds.n_features(),
        n_anomalies: ds.n_anomalies(),
    }
}

/// Split and standardized train/eval views for one seed.
struct SeedViews {
    x_train: Matrix,
    x_eval: Matrix,
    y_eval: Vec<u8>,
}

fn seed_views(
    raw: &Dataset,
    full_std: Option<&Dataset>,
    mode: SplitMode,
    scope: StandardizeScope,
    seed: u64,
) -> anyhow::Result<SeedViews> {
    let plan = make_split(raw, mode, seed)?;
    let train_std;
    let source = match scope {
        StandardizeScope::Full => {
            full_std.expect("full standardization precomputed for full scope")
        }
        StandardizeScope::Train => {
            train_std = standardize_with(raw, &plan.train);
            &train_std
        }
    };
    Ok(SeedViews {
        x_train: source.x.select_rows(&plan.train)?,
        x_eval: source.x.select_rows(&plan.eval)?,
        y_eval: plan.eval.iter().map(|&i| source.y[i]).collect(),
    })
}

/// Trains every seed, scores the eval view, and writes result.json plus one
/// checkpoint per seed into the config's out_dir.
pub fn evaluate(cfg: &ExperimentConfig) -> anyhow::Result<(ExperimentResult, PathBuf)> {
    let started_at_unix = now_unix();
    let timer = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;

    let raw = load_csv(&cfg.dataset)?;
    let full_std =
        (cfg.standardize_scope == StandardizeScope::Full).then(|| standardize(&raw));

    let mut per_seed = Vec::with_capacity(cfg.seeds.len());
    let mut warnings = Vec::new();
    let mut pr_values = Vec::new();
    let mut roc_values = Vec::new();

    for &seed in &cfg.seeds {
        let views = seed_views(&raw, full_std.as_ref(), cfg.mode, cfg.standardize_scope, seed)?;
        let train_cfg = cfg.train_config(raw.n_features(), seed);
        let trained = train(&views.x_train, &train_cfg)
            .map_err(|e| anyhow!("seed {seed}: {e}"))?;
        let report = score(&trained, &views.x_eval, false)?;

        let checkpoint_name = format!("checkpoint_seed{seed}.json");
        checkpoint::save(&trained, &cfg.out_dir.join(&checkpoint_name))?;

        let metrics = MetricKind::PrAuc
            .evaluate(&report.scores, &views.y_eval)
            .and_then(|pr| {
                MetricKind::RocAuc.evaluate(&report.scores, &views.y_eval).map(|roc| (pr, roc))
            });
        let (pr_auc, roc_auc, error) = match metrics {
            Ok((pr, roc)) => {
                pr_values.push(pr);
                roc_values.push(roc);
                (Some(pr), Some(roc), None)
            }
            Err(e) => {
                warnings.push(format!("seed {seed}: metrics undefined: {e}"));
                (None, None, Some(e.to_string()))
            }
        };
        per_seed.push(SeedOutcome {
            seed,
            train_rows: views.x_train.rows(),
            eval_rows: views.x_eval.rows(),
            final_loss: *trained.loss_trace.last().expect("non-empty loss trace"),
            pr_auc,
            roc_auc,
            checkpoint: checkpoint_name,
            error,
        });
    }

    if pr_values.is_empty() {
        bail!(
            "metrics undefined for every seed: {}",
            warnings.join("; ")
        );
    }
    if !warnings.is_empty() {
        warnings.push(format!(
            "summary aggregates {} of {} seeds",
            pr_values.len(),
            cfg.seeds.len()
        ));
    }

    let result = ExperimentResult {
        schema_version: RESULT_SCHEMA_VERSION,
        dataset: dataset_info(&raw, &cfg.dataset),
        config: cfg.clone(),
        per_seed,
        summary: MetricSummary {
            pr_auc: aggregate_seeds(&pr_values),
            roc_auc: aggregate_seeds(&roc_values),
        },
        warnings,
        started_at_unix,
        wall_time_s: timer.elapsed().as_secs_f64(),
    };

    let path = cfg.out_dir.join("result.json");
    result.write(&path)?;
    let reread: Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    schema::validate_result(&reread)
        .map_err(|p| anyhow!("emitted result.json violates its schema: {}", p.join("; ")))?;
    Ok((result, path))
}

/// Trains the first configured seed and writes checkpoint.json; the loss
/// trace goes to `log` (stdout in the binary).
pub fn train_once(cfg: &ExperimentConfig, log: &mut dyn Write) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let raw = load_csv(&cfg.dataset)?;
    let full_std =
        (cfg.standardize_scope == StandardizeScope::Full).then(|| standardize(&raw));
    let seed = cfg.seeds[0];
    let views = seed_views(&raw, full_std.as_ref(), cfg.mode, cfg.standardize_scope, seed)?;
    let train_cfg = cfg.train_config(raw.n_features(), seed);
    let trained = train(&views.x_train, &train_cfg)?;
    for (epoch, loss) in trained.loss_trace.iter().enumerate() {
        writeln!(log, "epoch {:>3}/{} loss {loss:.6e}", epoch + 1, cfg.epochs)?;
    }
    let path = cfg.out_dir.join("checkpoint.json");
    checkpoint::save(&trained, &path)?;
    let reread: Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    schema::validate_checkpoint(&reread)
        .map_err(|p| anyhow!("emitted checkpoint.json violates its schema: {}", p.join("; ")))?;
    Ok(path)
}

pub struct StepsArgs {
    pub checkpoint: PathBuf,
    pub dataset: PathBuf,
    pub metric: MetricKind,
    pub mode: SplitMode,
    /// Defaults to the checkpoint's training seed so the eval view matches
    /// the evaluation run that produced it.
    pub split_seed: Option<u64>,
    pub scope: StandardizeScope,
    pub out: Option<PathBuf>,
}

pub struct StepsOutput {
    pub path: PathBuf,
    /// Rows of (t, per-step metric, cumulative metric, alpha_bar).
    pub rows: Vec<(usize, f64, f64, f64)>,
}

/// Per-timestep metric decomposition: how well each noise level separates
/// the classes, and the running metric of the cumulative score.
pub fn analyze_steps(args: &StepsArgs) -> anyhow::Result<StepsOutput> {
    let model = checkpoint::load(&args.checkpoint)?;
    let raw = load_csv(&args.dataset)?;
    if raw.n_features() != model.params.cfg.input_dim {
        bail!(
            "dataset has {} features, checkpoint expects {}",
            raw.n_features(),
            model.params.cfg.input_dim
        );
    }
    let seed = args.split_seed.unwrap_or(model.config.seed);
    let full_std = (args.scope == StandardizeScope::Full).then(|| standardize(&raw));
    let views = seed_views(&raw, full_std.as_ref(), args.mode, args.scope, seed)?;

    let report = score(&model, &views.x_eval, true)?;
    let per = report.per_step.expect("per-step matrix requested");
    let (per_metric, cum_metric) = per_step_curve(&per, &views.y_eval, args.metric)?;

    let mut rows = Vec::with_capacity(per.cols());
    for t in 1..=per.cols() {
        let alpha_bar = model.schedule.signal_strength(t)?;
        rows.push((t, per_metric[t - 1], cum_metric[t - 1], alpha_bar));
    }

    let path = args
        .out
        .clone()
        .unwrap_or_else(|| args.checkpoint.with_file_name("steps.csv"));
    let mut text = String::from("t,per_step_metric,cumulative_metric,alpha_bar\n");
    for (t, per_m, cum_m, ab) in &rows {
        text.push_str(&format!("{t},{per_m:.17e},{cum_m:.17e},{ab:.17e}\n"));
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(StepsOutput { path, rows })
}

pub struct LatentArgs {
    pub checkpoint: PathBuf,
    pub dataset: PathBuf,
    pub t: usize,
    pub scope: StandardizeScope,
    pub out: Option<PathBuf>,
}

/// Latent codes for every dataset row at conditioning step t, with labels.
pub fn latent(args: &LatentArgs) -> anyhow::Result<PathBuf> {
    let model = checkpoint::load(&args.checkpoint)?;
    let raw = load_csv(&args.dataset)?;
    if raw.n_features() != model.params.cfg.input_dim {
        bail!(
            "dataset has {} features, checkpoint expects {}",
            raw.n_features(),
            model.params.cfg.input_dim
        );
    }
    let std_ds = match args.scope {
        StandardizeScope::Full => standardize(&raw),
        StandardizeScope::Train => {
            bail!("latent extraction standardizes over all rows; use --standardize-scope full")
        }
    };
    let z = dump_latent(&model, &std_ds.x, args.t)?;

    let path = args
        .out
        .clone()
        .unwrap_or_else(|| args.checkpoint.with_file_name("latent.csv"));
    let mut text = String::new();
    for k in 0..z.cols() {
        text.push_str(&format!("z{k},"));
    }
    text.push_str("label\n");
    for i in 0..z.rows() {
        for v in z.row(i) {
            text.push_str(&format!("{v:.17e},"));
        }
        text.push_str(&format!("{}\n", std_ds.y[i]));
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

struct SweepCell {
    id: String,
    values: serde_json::Map<String, Value>,
    cfg: ExperimentConfig,
    out_dir: PathBuf,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub index_path: PathBuf,
    pub completed: usize,
    pub skipped: usize,
    pub failed: usize,
}

/// Expands array-valued axes into a Cartesian grid and evaluates each cell
/// into its own directory. Every cell config is resolved and validated
/// before any training starts.
pub fn sweep(raw: &RawConfig, jobs: usize, resume: bool) -> anyhow::Result<SweepOutcome> {
    let mut scalars = raw.clone();
    let axes = scalars.take_axes()?;
    if axes.is_empty() {
        bail!("sweep config has no array-valued axes (for a single run use `ddae evaluate`)");
    }
    for (key, values) in &axes {
        for v in values {
            check_axis_value(key, v)?;
        }
    }

    let base_out = match scalars.get("out_dir") {
        Some(Value::String(s)) => PathBuf::from(s),
        _ => PathBuf::from("runs"),
    };

    let mut cells = Vec::new();
    let counts: Vec<usize> = axes.iter().map(|(_, v)| v.len()).collect();
    let total: usize = counts.iter().product();
    for cell_idx in 0..total {
        // Row-major: the last axis varies fastest as the cell id increments.
        let mut rest = cell_idx;
        let mut picks = vec![0usize; counts.len()];
        for (axis, &len) in counts.iter().enumerate().rev() {
            picks[axis] = rest % len;
            rest /= len;
        }
        let mut values = serde_json::Map::new();
        let mut cell_raw = scalars.clone();
        for ((key, axis_values), &pick) in axes.iter().zip(&picks) {
            let value = axis_values[pick].clone();
            cell_raw
                .set(&format!("{key}={value}"))
                .expect("axis keys are known config keys");
            values.insert(key.clone(), value);
        }
        let id = format!("cell_{cell_idx:04}");
        let out_dir = base_out.join("cells").join(&id);
        cell_raw.set(&format!("out_dir={}", out_dir.display()))?;
        let cfg = cell_raw
            .resolve()
            .map_err(|e| anyhow!("sweep cell {id} ({values:?}): {e}"))?;
        cells.push(SweepCell { id, values, cfg, out_dir });
    }

    let run_cell = |cell: &SweepCell| -> (String, &'static str, Option<String>) {
        let result_path = cell.out_dir.join("result.json");
        if resume && result_is_valid(&result_path) {
            return (cell.id.clone(), "skipped", None);
        }
        match evaluate(&cell.cfg) {
            Ok(_) => (cell.id.clone(), "completed", None),
            Err(e) => (cell.id.clone(), "failed", Some(e.to_string())),
        }
    };
    let statuses: Vec<(String, &'static str, Option<String>)> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building sweep thread pool")?;
        pool.install(|| {
            use rayon::prelude::*;
            cells.par_iter().map(run_cell).collect()
        })
    } else {
        cells.iter().map(run_cell).collect()
    };

    let mut index_cells = Vec::with_capacity(cells.len());
    let (mut completed, mut skipped, mut failed) = (0usize, 0usize, 0usize);
    for (cell, (id, status, error)) in cells.iter().zip(&statuses) {
        debug_assert_eq!(&cell.id, id);
        match *status {
            "completed" => completed += 1,
            "skipped" => skipped += 1,
            _ => failed += 1,
        }
        index_cells.push(serde_json::json!({
            "id": cell.id,
            "values": cell.values,
            "result": cell.out_dir.join("result.json").display().to_string(),
            "status": status,
            "error": error,
        }));
    }
    let axes_obj: serde_json::Map<String, Value> =
        axes.into_iter().map(|(k, v)| (k, Value::Array(v))).collect();
    let index = serde_json::json!({
        "schema_version": 1,
        "axes": axes_obj,
        "cells": index_cells,
    });
    schema::validate_sweep_index(&index)
        .map_err(|p| anyhow!("sweep index violates its schema: {}", p.join("; ")))?;
    std::fs::create_dir_all(&base_out)?;
    let index_path = base_out.join("sweep_index.json");
    std::fs::write(&index_path, serde_json::to_string_pretty(&index)?)?;

    if failed > 0 {
        bail!(
            "{failed} of {} sweep cells failed; see {}",
            cells.len(),
            index_path.display()
        );
    }
    Ok(SweepOutcome { index_path, completed, skipped, failed })
}

fn result_is_valid(path: &Path) -> bool {
    let Ok(text) = std::fs::read_to_string(path) else {
        return false;
    };
    let Ok(value) = serde_json::from_str::<Value>(&text) else {
        return false;
    };
    schema::validate_result(&value).is_ok()
}
