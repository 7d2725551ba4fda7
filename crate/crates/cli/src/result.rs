//! The result.json document: everything needed to reread or re-run an
//! evaluation. `started_at_unix` and `wall_time_s` are the only fields two
//! identical runs may disagree on.

use std::path::Path;

use serde::Serialize;

use ddae_core::MetricSummary;

use crate::config::ExperimentConfig;

pub const RESULT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub path: String,
    pub n_rows: usize,
    pub n_features: usize,
    pub n_anomalies: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub train_rows: usize,
    pub eval_rows: usize,
    /// Final epoch mean training loss.
    pub final_loss: f64,
    pub pr_auc: Option<f64>,
    pub roc_auc: Option<f64>,
    /// Checkpoint path relative to the result file.
    pub checkpoint: String,
    /// Set when metrics were undefined for this seed (single-class eval).
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub dataset: DatasetInfo,
    pub config: ExperimentConfig,
    pub per_seed: Vec<SeedOutcome>,
    /// Aggregated over the seeds with defined metrics.
    pub summary: MetricSummary,
    pub warnings: Vec<String>,
    pub started_at_unix: u64,
    pub wall_time_s: f64,
}

impl ExperimentResult {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }
}
