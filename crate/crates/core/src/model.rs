//! Timestep-conditioned encoder-decoder MLP. The encoder maps
//! [x_t | e_t] through n LeakyReLU hidden layers to a linear latent z;
//! the decoder mirrors the widths back to a linear reconstruction of x_0.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::RandomSource;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub n_hidden_layers: usize,
    pub hidden_width: usize,
    pub latent_dim: usize,
    /// 0 disables timestep conditioning entirely.
    pub embed_dim: usize,
    pub leaky_slope: f64,
}

impl ModelConfig {
    /// Validates every field and reports all offenders at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.input_dim < 1 {
            bad.push("input_dim: must be at least 1".to_string());
        }
        if !(1..=5).contains(&self.n_hidden_layers) {
            bad.push(format!(
                "n_hidden_layers: {} outside 1..=5",
                self.n_hidden_layers
            ));
        }
        if !(2..=4096).contains(&self.hidden_width) {
            bad.push(format!("hidden_width: {} outside 2..=4096", self.hidden_width));
        }
        if !(1..=1024).contains(&self.latent_dim) {
            bad.push(format!("latent_dim: {} outside 1..=1024", self.latent_dim));
        }
        if self.embed_dim > 512 {
            bad.push(format!("embed_dim: {} above 512", self.embed_dim));
        }
        if self.embed_dim % 2 != 0 {
            bad.push(format!("embed_dim: {} must be even", self.embed_dim));
        }
        if !self.leaky_slope.is_finite() {
            bad.push(format!("leaky_slope: {} not finite", self.leaky_slope));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    /// Layer dimensions in forward order: encoder (d+e -> h^n -> k), then
    /// decoder (k -> h^n -> d). 2n+2 layers total.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let d = self.input_dim;
        let h = self.hidden_width;
        let k = self.latent_dim;
        let n = self.n_hidden_layers;
        let mut dims = Vec::with_capacity(2 * n + 2);
        let mut prev = d + self.embed_dim;
        for _ in 0..n {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, k));
        prev = k;
        for _ in 0..n {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, d));
        dims
    }

    /// Index of the latent projection within layer_dims.
    pub fn latent_layer(&self) -> usize {
        self.n_hidden_layers
    }

    /// Hidden layers carry LeakyReLU; the latent projection and the final
    /// reconstruction layer are linear.
    pub fn is_hidden(&self, layer: usize) -> bool {
        let n = self.n_hidden_layers;
        layer < n || (layer > n && layer < 2 * n + 1)
    }

    pub fn n_layers(&self) -> usize {
        2 * self.n_hidden_layers + 2
    }
}

/// One affine layer y = x W + b, with W stored fan-in by fan-out.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer { w: Matrix::zeros(fan_in, fan_out), b: vec![0.0; fan_out] }
    }

    fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let mut y = x.matmul(&self.w)?;
        for r in 0..y.rows() {
            for (v, &b) in y.row_mut(r).iter_mut().zip(&self.b) {
                *v += b;
            }
        }
        Ok(y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub cfg: ModelConfig,
    /// Encoder layers followed by decoder layers, in forward order.
    pub layers: Vec<Layer>,
}

/// Glorot-uniform initialization: weights uniform within
/// +-sqrt(6/(fan_in+fan_out)), biases zero. Weights are drawn in layer
/// order, row-major within each matrix, so a seed fixes the full tree.
pub fn glorot_init(cfg: &ModelConfig, rng: &mut RandomSource) -> Result<ModelParams> {
    cfg.validate()?;
    let layers = cfg
        .layer_dims()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Matrix::from_fn(fan_in, fan_out, |_, _| (2.0 * rng.uniform() - 1.0) * bound);
            Layer { w, b: vec![0.0; fan_out] }
        })
        .collect();
    Ok(ModelParams { cfg: *cfg, layers })
}

/// Sinusoidal embedding of a timestep: embed_dim/2 sines followed by
/// embed_dim/2 cosines of t scaled by frequencies 10000^(-2i/embed_dim).
/// embed_dim 0 yields an empty vector. t is not range-checked here; the
/// schedule owns timestep bounds.
pub fn timestep_embedding(t: usize, embed_dim: usize) -> Result<Vec<f64>> {
    if embed_dim % 2 != 0 {
        return Err(Error::Config(format!("embed_dim: {embed_dim} must be even")));
    }
    let half = embed_dim / 2;
    let mut e = vec![0.0; embed_dim];
    for i in 0..half {
        let freq = (-(2.0 * i as f64 / embed_dim as f64) * 10_000f64.ln()).exp();
        let arg = t as f64 * freq;
        e[i] = arg.sin();
        e[half + i] = arg.cos();
    }
    Ok(e)
}

/// Builds the network input [x | e_t] row by row.
pub fn concat_embedding(x: &Matrix, t: &[usize], embed_dim: usize) -> Result<Matrix> {
    if embed_dim == 0 {
        return Ok(x.clone());
    }
    if t.len() != x.rows() {
        return Err(Error::Shape(format!(
            "{} timesteps for {} rows",
            t.len(),
            x.rows()
        )));
    }
    let mut emb = Matrix::zeros(x.rows(), embed_dim);
    for (i, &ti) in t.iter().enumerate() {
        let e = timestep_embedding(ti, embed_dim)?;
        emb.row_mut(i).copy_from_slice(&e);
    }
    Matrix::concat_cols(x, &emb)
}

/// Activations recorded during a forward pass, sufficient to run the
/// backward pass without recomputation. `pre` and `post` align with the
/// first `pre.len()` entries of the parameter layers; an encoder-only
/// pass records exactly the encoder layers.
#[derive(Debug)]
pub struct ForwardTape {
    /// Network input including embedding columns.
    pub input: Matrix,
    pub pre: Vec<Matrix>,
    pub post: Vec<Matrix>,
}

impl ForwardTape {
    pub fn batch_rows(&self) -> usize {
        self.input.rows()
    }
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

fn run_layers(
    params: &ModelParams,
    input: Matrix,
    n_layers: usize,
    record: bool,
) -> Result<(Matrix, Option<ForwardTape>)> {
    let slope = params.cfg.leaky_slope;
    let mut pre = Vec::with_capacity(if record { n_layers } else { 0 });
    let mut post = Vec::with_capacity(if record { n_layers } else { 0 });
    let mut x = input.clone();
    for l in 0..n_layers {
        let z = params.layers[l].apply(&x)?;
        let h = if params.cfg.is_hidden(l) {
            z.map(|v| leaky(v, slope))
        } else {
            z.clone()
        };
        if record {
            pre.push(z);
            post.push(h.clone());
        }
        x = h;
    }
    let tape = record.then_some(ForwardTape { input, pre, post });
    Ok((x, tape))
}

fn check_forward_input(params: &ModelParams, x: &Matrix, t: &[usize]) -> Result<()> {
    if x.cols() != params.cfg.input_dim {
        return Err(Error::Shape(format!(
            "forward: {} input columns, model expects {}",
            x.cols(),
            params.cfg.input_dim
        )));
    }
    if params.cfg.embed_dim > 0 && t.len() != x.rows() {
        return Err(Error::Shape(format!(
            "forward: {} timesteps for {} rows",
            t.len(),
            x.rows()
        )));
    }
    Ok(())
}

/// Full forward pass with tape: returns (z, x_hat, tape).
pub fn forward(
    params: &ModelParams,
    x_t: &Matrix,
    t: &[usize],
) -> Result<(Matrix, Matrix, ForwardTape)> {
    check_forward_input(params, x_t, t)?;
    let input = concat_embedding(x_t, t, params.cfg.embed_dim)?;
    let n = params.cfg.n_layers();
    let (x_hat, tape) = run_layers(params, input, n, true)?;
    let tape = tape.expect("tape recorded");
    let z = tape.post[params.cfg.latent_layer()].clone();
    Ok((z, x_hat, tape))
}

/// Encoder-only forward pass with tape: returns (z, tape).
pub fn forward_encoder(
    params: &ModelParams,
    x: &Matrix,
    t: &[usize],
) -> Result<(Matrix, ForwardTape)> {
    check_forward_input(params, x, t)?;
    let input = concat_embedding(x, t, params.cfg.embed_dim)?;
    let n = params.cfg.latent_layer() + 1;
    let (z, tape) = run_layers(params, input, n, true)?;
    Ok((z, tape.expect("tape recorded")))
}

/// Tape-free encoder pass: returns z only.
pub fn encode(params: &ModelParams, x: &Matrix, t: &[usize]) -> Result<Matrix> {
    check_forward_input(params, x, t)?;
    let input = concat_embedding(x, t, params.cfg.embed_dim)?;
    let n = params.cfg.latent_layer() + 1;
    let (z, _) = run_layers(params, input, n, false)?;
    Ok(z)
}

/// Tape-free forward pass for scoring: returns (z, x_hat).
pub fn reconstruct(params: &ModelParams, x_t: &Matrix, t: &[usize]) -> Result<(Matrix, Matrix)> {
    check_forward_input(params, x_t, t)?;
    let input = concat_embedding(x_t, t, params.cfg.embed_dim)?;
    let enc_layers = params.cfg.latent_layer() + 1;
    let (z, _) = run_layers(params, input, enc_layers, false)?;
    let mut x = z.clone();
    for l in enc_layers..params.cfg.n_layers() {
        let zl = params.layers[l].apply(&x)?;
        x = if params.cfg.is_hidden(l) {
            zl.map(|v| leaky(v, params.cfg.leaky_slope))
        } else {
            zl
        };
    }
    Ok((z, x))
}
