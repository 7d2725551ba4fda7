//! Hand-derived reverse-mode gradients for the encoder-decoder MLP and a
//! bias-corrected Adam optimizer. The backward pass accepts upstream
//! signals at the reconstruction output and (optionally) at the latent,
//! which is all the objectives in this crate need.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{ForwardTape, Layer, ModelParams};

/// Parameter-shaped gradient tree.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros(params: &ModelParams) -> Self {
        Gradients {
            layers: params
                .layers
                .iter()
                .map(|l| Layer::zeros(l.w.rows(), l.w.cols()))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::State(format!(
                "gradient trees have {} vs {} layers",
                self.layers.len(),
                other.layers.len()
            )));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.w.add_assign(&b.w)?;
            for (x, y) in a.b.iter_mut().zip(&b.b) {
                *x += y;
            }
        }
        Ok(())
    }
}

fn leaky_grad(pre: f64, slope: f64) -> f64 {
    if pre >= 0.0 {
        1.0
    } else {
        slope
    }
}

/// Reverse-mode pass over the layers recorded on `tape`.
///
/// `up_output` is dL/d(last recorded output): x_hat for a full tape, z for
/// an encoder-only tape. `up_latent` adds dL/dz on a full tape (ignored
/// position on encoder tapes must be None). Upstream matrices carry any
/// batch averaging; this pass is purely the chain rule, so gradients of a
/// sum are the sum of gradients.
pub fn backward(
    params: &ModelParams,
    tape: &ForwardTape,
    up_output: &Matrix,
    up_latent: Option<&Matrix>,
) -> Result<Gradients> {
    let recorded = tape.pre.len();
    let n_layers = params.cfg.n_layers();
    let enc_layers = params.cfg.latent_layer() + 1;
    if recorded != n_layers && recorded != enc_layers {
        return Err(Error::State(format!(
            "tape records {recorded} layers; model has {n_layers} (encoder {enc_layers})"
        )));
    }
    if tape.input.cols() != params.layers[0].w.rows() {
        return Err(Error::State(format!(
            "tape input width {} does not match layer 0 fan-in {}",
            tape.input.cols(),
            params.layers[0].w.rows()
        )));
    }
    let last = recorded - 1;
    if up_output.shape() != tape.post[last].shape() {
        return Err(Error::Shape(format!(
            "upstream {}x{} vs recorded output {}x{}",
            up_output.rows(),
            up_output.cols(),
            tape.post[last].rows(),
            tape.post[last].cols()
        )));
    }
    if recorded == enc_layers && up_latent.is_some() {
        return Err(Error::State(
            "encoder-only tape takes its latent upstream via up_output".to_string(),
        ));
    }

    let mut grads = Gradients::zeros(params);
    let slope = params.cfg.leaky_slope;
    let latent = params.cfg.latent_layer();

    let mut d_y = up_output.clone();
    for l in (0..recorded).rev() {
        if l == latent && recorded == n_layers {
            if let Some(up_z) = up_latent {
                d_y = d_y.add(up_z)?;
            }
        }
        let d_z = if params.cfg.is_hidden(l) {
            d_y.zip_map(&tape.pre[l], |g, pre| g * leaky_grad(pre, slope))?
        } else {
            d_y
        };
        let x_l = if l == 0 { &tape.input } else { &tape.post[l - 1] };
        grads.layers[l].w = x_l.matmul_tn(&d_z)?;
        grads.layers[l].b = d_z.col_sums();
        if l > 0 {
            d_y = d_z.matmul_nt(&params.layers[l].w)?;
        } else {
            d_y = d_z; // consumed; keeps the loop shape uniform
        }
    }
    Ok(grads)
}

/// Adam state: first/second moment trees, step counter, hyperparameters.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Layer>,
    v: Vec<Layer>,
}

impl AdamState {
    pub fn new(params: &ModelParams, lr: f64) -> Self {
        let zeros = || {
            params
                .layers
                .iter()
                .map(|l| Layer::zeros(l.w.rows(), l.w.cols()))
                .collect::<Vec<_>>()
        };
        AdamState { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: zeros(), v: zeros() }
    }
}

/// One bias-corrected Adam step. Rejects non-finite gradients, naming the
/// offending layer.
pub fn adam_step(state: &mut AdamState, params: &mut ModelParams, grads: &Gradients) -> Result<()> {
    if grads.layers.len() != params.layers.len() {
        return Err(Error::State(format!(
            "gradient tree has {} layers, params have {}",
            grads.layers.len(),
            params.layers.len()
        )));
    }
    for (l, (p, g)) in params.layers.iter().zip(&grads.layers).enumerate() {
        if p.w.shape() != g.w.shape() || p.b.len() != g.b.len() {
            return Err(Error::State(format!("layer {l}: gradient shape mismatch")));
        }
        if !g.w.is_finite() || !g.b.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric(format!("layer {l}: non-finite gradient")));
        }
    }
    state.step += 1;
    let (lr, b1, b2, eps) = (state.lr, state.beta1, state.beta2, state.eps);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..theta.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            theta[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
        }
    };
    for l in 0..params.layers.len() {
        update(
            params.layers[l].w.as_mut_slice(),
            grads.layers[l].w.as_slice(),
            state.m[l].w.as_mut_slice(),
            state.v[l].w.as_mut_slice(),
        );
        update(
            &mut params.layers[l].b,
            &grads.layers[l].b,
            &mut state.m[l].b,
            &mut state.v[l].b,
        );
    }
    Ok(())
}
