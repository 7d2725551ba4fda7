//! Checkpoint serialization. The on-disk layout is versioned JSON with
//! weights stored as flat row-major arrays; serde_json round-trips f64
//! exactly, so save followed by load reproduces parameters bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Layer, ModelConfig, ModelParams};
use crate::pipeline::{TrainConfig, TrainedModel, Variant};
use crate::schedule::ScheduleKind;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRepr {
    kind: ScheduleKind,
    diffusion_steps: usize,
    beta_min: f64,
    beta_max: f64,
    cosine_offset: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainRepr {
    variant: Variant,
    lr: f64,
    alpha: f64,
    epochs: usize,
    batch_size: usize,
    dae_sigma: f64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRepr {
    /// Row-major weights, fan_in x fan_out.
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    schema_version: u32,
    model: ModelConfig,
    schedule: ScheduleRepr,
    train: TrainRepr,
    loss_trace: Vec<f64>,
    layers: Vec<LayerRepr>,
}

fn to_file(model: &TrainedModel) -> CheckpointFile {
    let cfg = &model.config;
    CheckpointFile {
        schema_version: CHECKPOINT_SCHEMA_VERSION,
        model: cfg.model,
        schedule: ScheduleRepr {
            kind: cfg.scheduler,
            diffusion_steps: cfg.diffusion_steps,
            beta_min: cfg.beta_min,
            beta_max: cfg.beta_max,
            cosine_offset: cfg.cosine_offset,
        },
        train: TrainRepr {
            variant: cfg.variant,
            lr: cfg.lr,
            alpha: cfg.alpha,
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            dae_sigma: cfg.dae_sigma,
            seed: cfg.seed,
        },
        loss_trace: model.loss_trace.clone(),
        layers: model
            .params
            .layers
            .iter()
            .map(|l| LayerRepr { w: l.w.as_slice().to_vec(), b: l.b.clone() })
            .collect(),
    }
}

pub fn save(model: &TrainedModel, path: &Path) -> Result<()> {
    let file = to_file(model);
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Serialized checkpoint body, exposed so callers can embed checkpoints in
/// other artifacts or hash them without touching the filesystem.
pub fn to_json(model: &TrainedModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_file(model))?)
}

pub fn load(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile = serde_json::from_str(&text)?;
    if file.schema_version != CHECKPOINT_SCHEMA_VERSION {
        return Err(Error::State(format!(
            "checkpoint schema version {} unsupported (expected {})",
            file.schema_version, CHECKPOINT_SCHEMA_VERSION
        )));
    }
    let config = TrainConfig {
        model: file.model,
        variant: file.train.variant,
        scheduler: file.schedule.kind,
        diffusion_steps: file.schedule.diffusion_steps,
        beta_min: file.schedule.beta_min,
        beta_max: file.schedule.beta_max,
        cosine_offset: file.schedule.cosine_offset,
        lr: file.train.lr,
        alpha: file.train.alpha,
        epochs: file.train.epochs,
        batch_size: file.train.batch_size,
        dae_sigma: file.train.dae_sigma,
        seed: file.train.seed,
    };
    config.validate()?;
    let schedule = config.build_schedule()?;
    let effective = config.effective_model();
    let dims = effective.layer_dims();
    if file.layers.len() != dims.len() {
        return Err(Error::State(format!(
            "checkpoint has {} layers, config implies {}",
            file.layers.len(),
            dims.len()
        )));
    }
    let mut layers = Vec::with_capacity(dims.len());
    for (l, (repr, &(fan_in, fan_out))) in file.layers.into_iter().zip(&dims).enumerate() {
        if repr.w.len() != fan_in * fan_out || repr.b.len() != fan_out {
            return Err(Error::State(format!(
                "layer {l}: {} weights and {} biases, config implies {}x{}",
                repr.w.len(),
                repr.b.len(),
                fan_in,
                fan_out
            )));
        }
        layers.push(Layer { w: Matrix::from_vec(fan_in, fan_out, repr.w)?, b: repr.b });
    }
    Ok(TrainedModel {
        params: ModelParams { cfg: effective, layers },
        schedule,
        config,
        loss_trace: file.loss_trace,
    })
}
