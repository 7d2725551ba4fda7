//! Training, scoring, and latent extraction for the three model variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::{adam_step, backward, AdamState};
use crate::loss::{
    combined_loss, contrastive_loss, dae_corrupt, reconstruction_loss, PairBatch,
};
use crate::matrix::Matrix;
use crate::model::{
    encode, forward, forward_encoder, glorot_init, reconstruct, ModelConfig, ModelParams,
};
use crate::rng::{streams, substream_seed, RandomSource};
use crate::schedule::{forward_diffuse, NoiseSchedule, ScheduleKind};

/// Model variant. `Dae` trains against fixed-sigma Gaussian corruption and
/// ignores timestep conditioning; `DdaeC` adds the contrastive term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Dae,
    Ddae,
    DdaeC,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Dae, Variant::Ddae, Variant::DdaeC];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Dae => "dae",
            Variant::Ddae => "ddae",
            Variant::DdaeC => "ddae_c",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                Error::Parse(format!("unknown variant `{s}` (expected dae, ddae, ddae_c)"))
            })
    }
}

/// Everything needed to reproduce one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub variant: Variant,
    pub scheduler: ScheduleKind,
    pub diffusion_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub cosine_offset: f64,
    pub lr: f64,
    pub alpha: f64,
    pub epochs: usize,
    /// 0 selects a size automatically from the training-set size.
    pub batch_size: usize,
    pub dae_sigma: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Checks every field and reports all offenders at once.
    pub fn validate(&self) -> Result<()> {
        let mut offending = Vec::new();
        if let Err(Error::Config(msg)) = self.model.validate() {
            offending.push(msg);
        }
        if let Err(Error::Config(msg)) = NoiseSchedule::build(
            self.scheduler,
            self.diffusion_steps,
            self.beta_min,
            self.beta_max,
            self.cosine_offset,
        )
        .map(|_| ())
        {
            offending.push(msg);
        }
        if self.lr < 0.0 || !self.lr.is_finite() {
            offending.push(format!("lr: {} must be finite and non-negative", self.lr));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            offending.push(format!("alpha: {} outside [0, 1]", self.alpha));
        }
        if self.epochs < 1 || self.epochs > 100 {
            offending.push(format!("epochs: {} outside 1..=100", self.epochs));
        }
        if self.dae_sigma < 0.0 || !self.dae_sigma.is_finite() {
            offending.push(format!(
                "dae_sigma: {} must be finite and non-negative",
                self.dae_sigma
            ));
        }
        if offending.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(offending.join("; ")))
        }
    }

    /// The model config actually trained: `Dae` drops timestep conditioning.
    pub fn effective_model(&self) -> ModelConfig {
        let mut m = self.model;
        if self.variant == Variant::Dae {
            m.embed_dim = 0;
        }
        m
    }

    pub fn build_schedule(&self) -> Result<NoiseSchedule> {
        NoiseSchedule::build(
            self.scheduler,
            self.diffusion_steps,
            self.beta_min,
            self.beta_max,
            self.cosine_offset,
        )
    }
}

/// Power of two in [8, 8192] closest to n/10, ties toward the smaller.
/// Compares |10 * 2^k - n| in integers so the tie-break is exact.
pub fn auto_batch_size(n: usize) -> usize {
    let n = n as u64;
    let mut best_k = 3u32;
    let mut best_diff = u64::MAX;
    for k in 3..=13u32 {
        let diff = (10u64 << k).abs_diff(n);
        if diff < best_diff {
            best_diff = diff;
            best_k = k;
        }
    }
    1usize << best_k
}

/// A trained model together with the pieces scoring needs.
#[derive(Debug)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub schedule: NoiseSchedule,
    pub config: TrainConfig,
    /// Mean training loss per epoch, weighted by batch size.
    pub loss_trace: Vec<f64>,
}

/// Scores plus optional per-step reconstruction errors (rows align with the
/// scored matrix, column t-1 holds the step-t squared error). `labels` is
/// never set by `score`; callers that know ground truth attach it.
#[derive(Debug)]
pub struct ScoreReport {
    pub scores: Vec<f64>,
    pub per_step: Option<Matrix>,
    pub labels: Option<Vec<u8>>,
}

pub fn train(x_train: &Matrix, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    let n = x_train.rows();
    if n == 0 {
        return Err(Error::Shape("training set is empty".into()));
    }
    if x_train.cols() != cfg.model.input_dim {
        return Err(Error::Shape(format!(
            "training set has {} columns, model expects {}",
            x_train.cols(),
            cfg.model.input_dim
        )));
    }
    let schedule = cfg.build_schedule()?;
    let model_cfg = cfg.effective_model();

    let mut rng_init = RandomSource::substream(cfg.seed, streams::INIT);
    let mut rng_shuffle = RandomSource::substream(cfg.seed, streams::SHUFFLE);
    let mut rng_noise = RandomSource::substream(cfg.seed, streams::NOISE);
    let mut rng_pair = RandomSource::substream(cfg.seed, streams::PAIR);

    let mut params = glorot_init(&model_cfg, &mut rng_init)?;
    let mut adam = AdamState::new(&params, cfg.lr);
    let batch = if cfg.batch_size == 0 { auto_batch_size(n) } else { cfg.batch_size };

    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        rng_shuffle.shuffle(&mut order);
        let mut weighted = 0.0;
        for (batch_idx, chunk) in order.chunks(batch).enumerate() {
            let x0 = x_train.select_rows(chunk)?;
            let loss = match cfg.variant {
                Variant::Dae => dae_step(&mut params, &mut adam, &x0, cfg, &mut rng_noise)?,
                Variant::Ddae | Variant::DdaeC => diffusion_step(
                    &mut params,
                    &mut adam,
                    &x0,
                    cfg,
                    &schedule,
                    &mut rng_noise,
                    &mut rng_pair,
                )?,
            };
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "loss {loss} at epoch {epoch}, batch {batch_idx}"
                )));
            }
            weighted += loss * chunk.len() as f64;
        }
        loss_trace.push(weighted / n as f64);
    }

    Ok(TrainedModel { params, schedule, config: cfg.clone(), loss_trace })
}

fn dae_step(
    params: &mut ModelParams,
    adam: &mut AdamState,
    x0: &Matrix,
    cfg: &TrainConfig,
    rng_noise: &mut RandomSource,
) -> Result<f64> {
    let corrupted = dae_corrupt(x0, cfg.dae_sigma, rng_noise)?;
    let (_z, x_hat, tape) = forward(params, &corrupted, &[])?;
    let (rec, up_output) = reconstruction_loss(x0, &x_hat)?;
    let grads = backward(params, &tape, &up_output, None)?;
    adam_step(adam, params, &grads)?;
    Ok(rec)
}

/// One optimizer step shared by ddae and ddae_c. Draws the batch timesteps
/// and then the noise from the NOISE stream, so both variants consume it
/// identically; pair shuffles come from the separate PAIR stream.
fn diffusion_step(
    params: &mut ModelParams,
    adam: &mut AdamState,
    x0: &Matrix,
    cfg: &TrainConfig,
    schedule: &NoiseSchedule,
    rng_noise: &mut RandomSource,
    rng_pair: &mut RandomSource,
) -> Result<f64> {
    let b = x0.rows();
    let t_max = schedule.t_max();
    let t: Vec<usize> = (0..b).map(|_| 1 + rng_noise.below(t_max)).collect();
    let mut eps = Matrix::zeros(b, x0.cols());
    rng_noise.fill_gauss(eps.as_mut_slice());
    let x_t = forward_diffuse(x0, &t, &eps, schedule)?;

    let (z_t, x_hat, tape_noisy) = forward(params, &x_t, &t)?;
    let (rec, up_output) = reconstruction_loss(x0, &x_hat)?;

    if cfg.variant == Variant::Ddae {
        let grads = backward(params, &tape_noisy, &up_output, None)?;
        adam_step(adam, params, &grads)?;
        return Ok(rec);
    }

    // ddae_c: anchors are clean encodings with the anchor's own timestep
    // embedding; positive partners reuse that same timestep.
    let pairs = PairBatch::build(&t, t_max, rng_pair);
    let (z0, tape_clean) = forward_encoder(params, x0, &t)?;
    let alpha = cfg.alpha;

    let (cont, up_clean, up_partner, up_latent) = match &pairs.derangement {
        Some(perm) => {
            let x0_perm = x0.select_rows(perm)?;
            let (z_pos, tape_partner) = forward_encoder(params, &x0_perm, &t)?;
            let z_left = Matrix::concat_rows(&z0, &z0)?;
            let z_right = Matrix::concat_rows(&z_pos, &z_t)?;
            let y = pairs.labels();
            let margins = pairs.margins_stacked();
            let (cont, gl, gr) = contrastive_loss(&z_left, &z_right, &y, &margins)?;
            let up_clean = gl.slice_rows(0, b)?.add(&gl.slice_rows(b, 2 * b)?)?.scale(alpha);
            let up_partner = Some((tape_partner, gr.slice_rows(0, b)?.scale(alpha)));
            let up_latent = gr.slice_rows(b, 2 * b)?.scale(alpha);
            (cont, up_clean, up_partner, up_latent)
        }
        // Single-row batch: no positive pair exists, only the negative.
        None => {
            let y = pairs.labels();
            let margins = pairs.margins_stacked();
            let (cont, gl, gr) = contrastive_loss(&z0, &z_t, &y, &margins)?;
            (cont, gl.scale(alpha), None, gr.scale(alpha))
        }
    };

    let total = combined_loss(rec, cont, alpha)?;
    let up_rec = up_output.scale(1.0 - alpha);
    let mut grads = backward(params, &tape_noisy, &up_rec, Some(&up_latent))?;
    grads.add_assign(&backward(params, &tape_clean, &up_clean, None)?)?;
    if let Some((tape_partner, up)) = up_partner {
        grads.add_assign(&backward(params, &tape_partner, &up, None)?)?;
    }
    adam_step(adam, params, &grads)?;
    Ok(total)
}

/// Cumulative anomaly scores. For diffusion variants each row gets its own
/// noise substream keyed by row index, and the per-step errors are summed
/// in timestep order so the cumulative value is a plain prefix sum.
pub fn score(model: &TrainedModel, x: &Matrix, keep_per_step: bool) -> Result<ScoreReport> {
    let d = model.params.cfg.input_dim;
    if x.cols() != d {
        return Err(Error::Shape(format!(
            "scoring {} columns, model expects {d}",
            x.cols()
        )));
    }
    let n = x.rows();
    if n == 0 {
        return Err(Error::Shape("scoring set is empty".into()));
    }
    let score_master = substream_seed(model.config.seed, streams::SCORE);

    if model.config.variant == Variant::Dae {
        let sigma = model.config.dae_sigma;
        let mut corrupted = x.clone();
        if sigma > 0.0 {
            for i in 0..n {
                let mut rng = RandomSource::substream(score_master, i as u64);
                for v in corrupted.row_mut(i) {
                    *v += sigma * rng.next_gauss();
                }
            }
        }
        let (_z, x_hat) = reconstruct(&model.params, &corrupted, &[])?;
        let scores = x.row_sq_distances(&x_hat)?;
        let per_step = keep_per_step.then(|| {
            let mut m = Matrix::zeros(n, 1);
            for (i, &s) in scores.iter().enumerate() {
                m.set(i, 0, s);
            }
            m
        });
        return Ok(ScoreReport { scores, per_step, labels: None });
    }

    let t_max = model.schedule.t_max();
    let mut row_rngs: Vec<RandomSource> =
        (0..n).map(|i| RandomSource::substream(score_master, i as u64)).collect();
    let mut scores = vec![0.0; n];
    let mut per_step = keep_per_step.then(|| Matrix::zeros(n, t_max));
    let mut eps = Matrix::zeros(n, d);
    for t in 1..=t_max {
        for (i, rng) in row_rngs.iter_mut().enumerate() {
            rng.fill_gauss(eps.row_mut(i));
        }
        let ts = vec![t; n];
        let x_t = forward_diffuse(x, &ts, &eps, &model.schedule)?;
        let (_z, x_hat) = reconstruct(&model.params, &x_t, &ts)?;
        let errs = x.row_sq_distances(&x_hat)?;
        for (i, &e) in errs.iter().enumerate() {
            scores[i] += e;
            if let Some(p) = &mut per_step {
                p.set(i, t - 1, e);
            }
        }
    }
    Ok(ScoreReport { scores, per_step, labels: None })
}

/// Latent codes for clean inputs conditioned on timestep t (1-based,
/// validated against the schedule). The DAE variant ignores t.
pub fn dump_latent(model: &TrainedModel, x: &Matrix, t: usize) -> Result<Matrix> {
    if model.params.cfg.embed_dim == 0 {
        return encode(&model.params, x, &[]);
    }
    model.schedule.signal_strength(t)?;
    let ts = vec![t; x.rows()];
    encode(&model.params, x, &ts)
}
