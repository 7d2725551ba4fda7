//! Diffusion-scheduled denoising autoencoders for tabular anomaly detection.
//!
//! The crate trains a timestep-conditioned autoencoder to reconstruct clean
//! rows from diffused ones, then scores a row by the reconstruction error
//! accumulated across every noise level. Three variants share the pipeline:
//! a plain denoising autoencoder (`dae`), the diffusion-scheduled model
//! (`ddae`), and its contrastive extension (`ddae_c`).

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod grad;
pub mod loss;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod schedule;

pub use error::{Error, Result};
pub use matrix::Matrix;

pub use data::{load_csv, make_split, standardize, standardize_with, Dataset, SplitMode, SplitPlan};
pub use grad::{adam_step, backward, AdamState, Gradients};
pub use loss::{
    combined_loss, contrastive_loss, dae_corrupt, reconstruction_loss, PairBatch,
};
pub use metrics::{
    aggregate_seeds, per_step_curve, MetricKind, MetricSummary, SeedStats,
};
pub use model::{
    encode, forward, forward_encoder, glorot_init, reconstruct, timestep_embedding, ForwardTape,
    Layer, ModelConfig, ModelParams,
};
pub use pipeline::{
    auto_batch_size, dump_latent, score, train, ScoreReport, TrainConfig, TrainedModel, Variant,
};
pub use rng::{streams, substream_seed, RandomSource};
pub use schedule::{build_schedule, forward_diffuse, NoiseSchedule, ScheduleKind};
