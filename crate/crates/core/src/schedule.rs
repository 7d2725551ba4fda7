//! Diffusion noise schedules and the closed-form forward process
//! x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps, where abar_t is the
//! running product of (1 - beta_i).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
    Cosine,
    Quadratic,
    Sigmoid,
    Exponential,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 5] = [
        ScheduleKind::Linear,
        ScheduleKind::Cosine,
        ScheduleKind::Quadratic,
        ScheduleKind::Sigmoid,
        ScheduleKind::Exponential,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Linear => "linear",
            ScheduleKind::Cosine => "cosine",
            ScheduleKind::Quadratic => "quadratic",
            ScheduleKind::Sigmoid => "sigmoid",
            ScheduleKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ScheduleKind::Linear),
            "cosine" => Ok(ScheduleKind::Cosine),
            "quadratic" => Ok(ScheduleKind::Quadratic),
            "sigmoid" => Ok(ScheduleKind::Sigmoid),
            "exponential" => Ok(ScheduleKind::Exponential),
            other => Err(Error::Config(format!(
                "scheduler: unknown kind `{other}` (expected linear|cosine|quadratic|sigmoid|exponential)"
            ))),
        }
    }
}

/// Precomputed beta / alpha-bar tables for one scheduler kind and horizon T.
/// Timesteps are 1-based at the API (t in 1..=T); storage is 0-based.
#[derive(Clone, Debug)]
pub struct NoiseSchedule {
    kind: ScheduleKind,
    t_max: usize,
    beta: Vec<f64>,
    alpha_bar: Vec<f64>,
    beta_min: f64,
    beta_max: f64,
    cosine_offset: f64,
}

/// Linearly spaced grid with exact endpoints; n == 1 yields [a].
fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|t| {
            if t == 1 {
                a
            } else if t == n {
                b
            } else {
                a + (b - a) * ((t - 1) as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

pub fn build_schedule(
    kind: ScheduleKind,
    t_max: usize,
    beta_min: f64,
    beta_max: f64,
    cosine_offset: f64,
) -> Result<NoiseSchedule> {
    NoiseSchedule::build(kind, t_max, beta_min, beta_max, cosine_offset)
}

impl NoiseSchedule {
    pub fn build(
        kind: ScheduleKind,
        t_max: usize,
        beta_min: f64,
        beta_max: f64,
        cosine_offset: f64,
    ) -> Result<Self> {
        let mut offending = Vec::new();
        if t_max < 1 {
            offending.push("diffusion_steps: must be at least 1".to_string());
        }
        if !(beta_min > 0.0 && beta_min < 1.0) {
            offending.push(format!("beta_min: {beta_min} outside (0,1)"));
        }
        if !(beta_max > 0.0 && beta_max < 1.0) {
            offending.push(format!("beta_max: {beta_max} outside (0,1)"));
        }
        if beta_min >= beta_max {
            offending.push(format!(
                "beta_min/beta_max: require beta_min < beta_max, got {beta_min} >= {beta_max}"
            ));
        }
        if kind == ScheduleKind::Cosine && (cosine_offset <= 0.0 || cosine_offset.is_nan()) {
            offending.push(format!("cosine_offset: {cosine_offset} must be positive"));
        }
        if !offending.is_empty() {
            return Err(Error::Config(offending.join("; ")));
        }

        let beta = if t_max == 1 {
            // Degenerate horizon: the single step uses beta_min for every kind.
            vec![beta_min]
        } else {
            match kind {
                ScheduleKind::Linear => linspace(beta_min, beta_max, t_max),
                ScheduleKind::Quadratic => linspace(beta_min.sqrt(), beta_max.sqrt(), t_max)
                    .into_iter()
                    .map(|v| v * v)
                    .collect(),
                ScheduleKind::Sigmoid => linspace(-6.0, 6.0, t_max)
                    .into_iter()
                    .map(|u| beta_min + (beta_max - beta_min) * sigmoid(u))
                    .collect(),
                ScheduleKind::Exponential => {
                    let ratio = beta_max / beta_min;
                    linspace(0.0, 1.0, t_max)
                        .into_iter()
                        .map(|p| beta_min * ratio.powf(p))
                        .collect()
                }
                ScheduleKind::Cosine => {
                    // abar'_t = f(t)/f(0), f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2);
                    // beta_t = 1 - abar'_t/abar'_{t-1}, clipped to (1e-8, 0.999).
                    // The final step always hits the upper clip because f(T) = 0
                    // up to rounding, so the stored abar_T follows the clipped
                    // product rather than f(T)/f(0).
                    let s = cosine_offset;
                    let f = |t: usize| -> f64 {
                        let arg = ((t as f64 / t_max as f64) + s) / (1.0 + s)
                            * std::f64::consts::FRAC_PI_2;
                        let c = arg.cos();
                        c * c
                    };
                    let f0 = f(0);
                    let mut prev = 1.0;
                    (1..=t_max)
                        .map(|t| {
                            let cur = f(t) / f0;
                            let b = (1.0 - cur / prev).clamp(1e-8, 0.999);
                            prev = cur;
                            b
                        })
                        .collect()
                }
            }
        };

        for (i, &b) in beta.iter().enumerate() {
            if !(b > 0.0 && b < 1.0) || !b.is_finite() {
                return Err(Error::Numeric(format!(
                    "{kind} schedule: beta_{} = {b} outside (0,1)",
                    i + 1
                )));
            }
        }

        let mut alpha_bar = Vec::with_capacity(t_max);
        let mut prod = 1.0;
        for &b in &beta {
            prod *= 1.0 - b;
            alpha_bar.push(prod);
        }

        Ok(NoiseSchedule { kind, t_max, beta, alpha_bar, beta_min, beta_max, cosine_offset })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    pub fn cosine_offset(&self) -> f64 {
        self.cosine_offset
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bar
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t < 1 || t > self.t_max {
            return Err(Error::Index(format!(
                "timestep {} outside 1..={}",
                t, self.t_max
            )));
        }
        Ok(())
    }

    /// beta_t, 1-based.
    pub fn beta(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.beta[t - 1])
    }

    /// Retained signal fraction abar_t, 1-based.
    pub fn signal_strength(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.alpha_bar[t - 1])
    }
}

/// Row i of the output is sqrt(abar_{t_i}) x0_i + sqrt(1 - abar_{t_i}) eps_i.
pub fn forward_diffuse(
    x0: &Matrix,
    t: &[usize],
    eps: &Matrix,
    sched: &NoiseSchedule,
) -> Result<Matrix> {
    if x0.shape() != eps.shape() {
        return Err(Error::Shape(format!(
            "forward_diffuse: x0 {}x{} vs eps {}x{}",
            x0.rows(),
            x0.cols(),
            eps.rows(),
            eps.cols()
        )));
    }
    if t.len() != x0.rows() {
        return Err(Error::Shape(format!(
            "forward_diffuse: {} timesteps for {} rows",
            t.len(),
            x0.rows()
        )));
    }
    let mut out = Matrix::zeros(x0.rows(), x0.cols());
    for (i, &ti) in t.iter().enumerate() {
        let abar = sched.signal_strength(ti)?;
        let signal = abar.sqrt();
        let noise = (1.0 - abar).sqrt();
        let row = out.row_mut(i);
        for ((o, &x), &e) in row.iter_mut().zip(x0.row(i)).zip(eps.row(i)) {
            *o = signal * x + noise * e;
        }
    }
    Ok(out)
}
