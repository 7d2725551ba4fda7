//! Ranking metrics with explicit tie handling: ROC-AUC in Mann-Whitney
//! form, PR-AUC as average precision over grouped thresholds, per-timestep
//! metric curves, and multi-seed aggregation.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    PrAuc,
    RocAuc,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::PrAuc => "pr_auc",
            MetricKind::RocAuc => "roc_auc",
        }
    }

    pub fn evaluate(&self, scores: &[f64], labels: &[u8]) -> Result<f64> {
        match self {
            MetricKind::PrAuc => pr_auc(scores, labels),
            MetricKind::RocAuc => roc_auc(scores, labels),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pr_auc" => Ok(MetricKind::PrAuc),
            "roc_auc" => Ok(MetricKind::RocAuc),
            other => Err(Error::Config(format!(
                "metric: unknown kind `{other}` (expected pr_auc|roc_auc)"
            ))),
        }
    }
}

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::UndefinedMetric("empty score list".to_string()));
    }
    if let Some(bad) = scores.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite score {bad}")));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Parse(format!("label {bad} outside {{0,1}}")));
    }
    Ok(())
}

/// P(score_anomaly > score_normal) + 1/2 P(tie), computed from tie-averaged
/// ranks in O(n log n). Labels: 1 = anomaly.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_inputs(scores, labels)?;
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "roc_auc needs both classes in labels".to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Average ranks over tie groups; rank sum of positives gives the
    // Mann-Whitney U statistic with the tie convention built in.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0; // mean of ranks i+1 ..= j
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Average precision with step interpolation: descending over grouped
/// score thresholds, sum precision-at-group times the recall increment.
/// Labels: 1 = anomaly; requires at least one positive.
pub fn pr_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_inputs(scores, labels)?;
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    if n_pos == 0 {
        return Err(Error::UndefinedMetric(
            "pr_auc needs at least one positive label".to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut ap = 0.0;
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let mut group_pos = 0usize;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                group_pos += 1;
            }
            j += 1;
        }
        tp += group_pos;
        seen = j;
        let precision = tp as f64 / seen as f64;
        ap += (group_pos as f64 / n_pos as f64) * precision;
        i = j;
    }
    debug_assert_eq!(seen, scores.len());
    Ok(ap)
}

/// Column-wise metric and prefix-sum (cumulative) metric over an n x T
/// per-timestep score matrix.
pub fn per_step_curve(
    per_step: &Matrix,
    labels: &[u8],
    metric: MetricKind,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, t_max) = per_step.shape();
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {} rows", labels.len(), n)));
    }
    let mut per = Vec::with_capacity(t_max);
    let mut cum = Vec::with_capacity(t_max);
    let mut running = vec![0.0; n];
    let mut column = vec![0.0; n];
    for t in 0..t_max {
        for i in 0..n {
            let v = per_step.at(i, t);
            column[i] = v;
            running[i] += v;
        }
        per.push(metric.evaluate(&column, labels)?);
        cum.push(metric.evaluate(&running, labels)?);
    }
    Ok((per, cum))
}

/// Mean and population standard deviation over per-seed metric values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedStats {
    pub mean: f64,
    pub std: f64,
    pub per_seed: Vec<f64>,
}

pub fn aggregate_seeds(values: &[f64]) -> SeedStats {
    assert!(!values.is_empty(), "aggregate_seeds needs at least one value");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    SeedStats { mean, std: var.sqrt(), per_seed: values.to_vec() }
}

/// Both ranking metrics aggregated over seeds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricSummary {
    pub pr_auc: SeedStats,
    pub roc_auc: SeedStats,
}
