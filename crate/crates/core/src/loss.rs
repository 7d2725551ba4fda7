//! Training objectives: mean squared reconstruction, the margin
//! contrastive loss over clean/noised embedding pairs, their convex
//! combination, and the fixed-noise corruption of the plain DAE baseline.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::RandomSource;

/// Mean over the batch of per-sample squared L2 reconstruction error.
/// Returns the value and dL/dx_hat = 2 (x_hat - x0) / batch.
pub fn reconstruction_loss(x0: &Matrix, x_hat: &Matrix) -> Result<(f64, Matrix)> {
    if x0.shape() != x_hat.shape() {
        return Err(Error::Shape(format!(
            "reconstruction_loss: {}x{} vs {}x{}",
            x0.rows(),
            x0.cols(),
            x_hat.rows(),
            x_hat.cols()
        )));
    }
    let b = x0.rows() as f64;
    let mut value = 0.0;
    for (&a, &p) in x0.as_slice().iter().zip(x_hat.as_slice()) {
        let d = a - p;
        value += d * d;
    }
    value /= b;
    let grad = x_hat.zip_map(x0, |p, a| 2.0 * (p - a) / b)?;
    Ok((value, grad))
}

/// Margin contrastive loss over pairs of latent rows. Pair i contributes
/// (1-y_i) delta^2 + y_i max(0, m_i - delta)^2 with delta = ||zl_i - zr_i||;
/// the mean over pairs is returned together with gradients at both sides.
/// The hinge is flat at delta = m (derivative 0 from both branches); a
/// delta floor of 1e-12 guards the direction vector when both embeddings
/// coincide.
pub fn contrastive_loss(
    z_left: &Matrix,
    z_right: &Matrix,
    y: &[u8],
    margin: &[f64],
) -> Result<(f64, Matrix, Matrix)> {
    if z_left.shape() != z_right.shape() {
        return Err(Error::Shape(format!(
            "contrastive_loss: {}x{} vs {}x{}",
            z_left.rows(),
            z_left.cols(),
            z_right.rows(),
            z_right.cols()
        )));
    }
    let pairs = z_left.rows();
    if y.len() != pairs || margin.len() != pairs {
        return Err(Error::Shape(format!(
            "contrastive_loss: {} labels / {} margins for {} pairs",
            y.len(),
            margin.len(),
            pairs
        )));
    }
    if let Some(bad) = margin.iter().find(|&&m| m <= 0.0 || m.is_nan()) {
        return Err(Error::Config(format!("margin: {bad} must be positive")));
    }
    if pairs == 0 {
        return Err(Error::Shape("contrastive_loss: empty pair batch".to_string()));
    }

    let p = pairs as f64;
    let mut value = 0.0;
    let mut grad_left = Matrix::zeros(z_left.rows(), z_left.cols());
    let mut grad_right = Matrix::zeros(z_left.rows(), z_left.cols());
    for i in 0..pairs {
        let zl = z_left.row(i);
        let zr = z_right.row(i);
        let delta_sq: f64 = zl
            .iter()
            .zip(zr)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        let delta = delta_sq.sqrt();
        if y[i] == 0 {
            value += delta_sq;
            let gl = grad_left.row_mut(i);
            for ((g, &a), &b) in gl.iter_mut().zip(zl).zip(zr) {
                *g = 2.0 * (a - b) / p;
            }
            let gr = grad_right.row_mut(i);
            for ((g, &a), &b) in gr.iter_mut().zip(zl).zip(zr) {
                *g = -2.0 * (a - b) / p;
            }
        } else {
            let m = margin[i];
            if delta < m {
                let gap = m - delta;
                value += gap * gap;
                let coef = -2.0 * gap / (delta.max(1e-12) * p);
                let gl = grad_left.row_mut(i);
                for ((g, &a), &b) in gl.iter_mut().zip(zl).zip(zr) {
                    *g = coef * (a - b);
                }
                let gr = grad_right.row_mut(i);
                for ((g, &a), &b) in gr.iter_mut().zip(zl).zip(zr) {
                    *g = -coef * (a - b);
                }
            }
        }
    }
    Ok((value / p, grad_left, grad_right))
}

/// (1 - alpha) rec + alpha cont; alpha must lie in [0, 1].
pub fn combined_loss(rec: f64, cont: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha: {alpha} outside [0,1]")));
    }
    Ok((1.0 - alpha) * rec + alpha * cont)
}

/// Fixed-noise corruption x0 + sigma * eps with eps drawn row-major.
pub fn dae_corrupt(x0: &Matrix, sigma: f64, rng: &mut RandomSource) -> Result<Matrix> {
    if sigma < 0.0 || sigma.is_nan() {
        return Err(Error::Config(format!("dae_sigma: {sigma} must be non-negative")));
    }
    let mut out = x0.clone();
    if sigma > 0.0 {
        for v in out.as_mut_slice() {
            *v += sigma * rng.next_gauss();
        }
    }
    Ok(out)
}

/// Pair plan for one minibatch of B anchors: B positive pairs (each anchor
/// with an independently drawn clean partner, never itself) when B >= 2,
/// followed by B negative pairs (each anchor with its own diffused
/// version). Margins grow with the anchor's noise level: m = 1 + t/T.
#[derive(Clone, Debug)]
pub struct PairBatch {
    /// Positive-pair partner index per anchor; None when B == 1 and no
    /// derangement exists.
    pub derangement: Option<Vec<usize>>,
    pub t: Vec<usize>,
    pub margin: Vec<f64>,
}

impl PairBatch {
    /// Draws a fixed-point-free shuffle from `rng` (reshuffling until no
    /// anchor pairs with itself), and computes margins from `t`.
    pub fn build(t: &[usize], t_max: usize, rng: &mut RandomSource) -> PairBatch {
        let b = t.len();
        let margin: Vec<f64> = t.iter().map(|&ti| 1.0 + ti as f64 / t_max as f64).collect();
        let derangement = if b >= 2 {
            let mut idx: Vec<usize> = (0..b).collect();
            loop {
                rng.shuffle(&mut idx);
                if idx.iter().enumerate().all(|(i, &j)| i != j) {
                    break;
                }
            }
            Some(idx)
        } else {
            None
        };
        PairBatch { derangement, t: t.to_vec(), margin }
    }

    pub fn n_anchors(&self) -> usize {
        self.t.len()
    }

    pub fn n_pairs(&self) -> usize {
        if self.derangement.is_some() {
            2 * self.t.len()
        } else {
            self.t.len()
        }
    }

    /// Labels in stacked order: positives (0) first when present, then
    /// negatives (1).
    pub fn labels(&self) -> Vec<u8> {
        let b = self.t.len();
        let mut y = Vec::with_capacity(self.n_pairs());
        if self.derangement.is_some() {
            y.resize(b, 0u8);
        }
        y.resize(y.len() + b, 1u8);
        y
    }

    /// Margins in the same stacked order as labels.
    pub fn margins_stacked(&self) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.n_pairs());
        if self.derangement.is_some() {
            m.extend_from_slice(&self.margin);
        }
        m.extend_from_slice(&self.margin);
        m
    }
}
