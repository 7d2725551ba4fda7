//! Experiment configuration: a flat JSON object with strict keys. Scalar
//! keys configure a single run; the sweepable keys may hold arrays when the
//! file is used with the sweep command.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use serde_json::Value;

use ddae_core::{ModelConfig, ScheduleKind, SplitMode, TrainConfig, Variant};

/// Keys that may carry an array of grid values for sweeps, together with
/// the legal value set for each axis.
pub const SWEEPABLE_KEYS: [&str; 7] = [
    "scheduler",
    "diffusion_steps",
    "lr",
    "n_hidden_layers",
    "hidden_width",
    "latent_dim",
    "embed_dim",
];

const ALL_KEYS: [&str; 21] = [
    "dataset",
    "variant",
    "mode",
    "scheduler",
    "diffusion_steps",
    "beta_min",
    "beta_max",
    "cosine_offset",
    "n_hidden_layers",
    "hidden_width",
    "latent_dim",
    "embed_dim",
    "leaky_slope",
    "lr",
    "alpha",
    "epochs",
    "batch_size",
    "dae_sigma",
    "seeds",
    "standardize_scope",
    "out_dir",
];

pub const GRID_DIFFUSION_STEPS: [usize; 10] = [5, 10, 20, 50, 100, 300, 500, 1000, 1500, 2000];
pub const GRID_LR: [f64; 3] = [1e-3, 1e-4, 1e-5];
pub const GRID_N_HIDDEN_LAYERS: [usize; 5] = [1, 2, 3, 4, 5];
pub const GRID_HIDDEN_WIDTH: [usize; 9] = [2, 8, 32, 128, 256, 512, 1024, 2048, 4096];
pub const GRID_LATENT_DIM: [usize; 6] = [2, 8, 32, 128, 512, 1024];
pub const GRID_EMBED_DIM: [usize; 10] = [0, 2, 4, 8, 16, 32, 64, 128, 256, 512];

/// Feature-scaling scope: statistics from every row, or from the train
/// view only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizeScope {
    Full,
    Train,
}

impl std::str::FromStr for StandardizeScope {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "full" => Ok(StandardizeScope::Full),
            "train" => Ok(StandardizeScope::Train),
            other => Err(anyhow!(
                "standardize_scope: unknown value `{other}` (expected full, train)"
            )),
        }
    }
}

/// A fully resolved single-run configuration. Field order matches the JSON
/// echo emitted into results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub variant: Variant,
    pub mode: SplitMode,
    pub scheduler: ScheduleKind,
    pub diffusion_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub cosine_offset: f64,
    pub n_hidden_layers: usize,
    pub hidden_width: usize,
    pub latent_dim: usize,
    pub embed_dim: usize,
    pub leaky_slope: f64,
    pub lr: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dae_sigma: f64,
    pub seeds: Vec<u64>,
    pub standardize_scope: StandardizeScope,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Training config for one seed; the input dimension comes from the
    /// loaded dataset.
    pub fn train_config(&self, input_dim: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            model: ModelConfig {
                input_dim,
                n_hidden_layers: self.n_hidden_layers,
                hidden_width: self.hidden_width,
                latent_dim: self.latent_dim,
                embed_dim: self.embed_dim,
                leaky_slope: self.leaky_slope,
            },
            variant: self.variant,
            scheduler: self.scheduler,
            diffusion_steps: self.diffusion_steps,
            beta_min: self.beta_min,
            beta_max: self.beta_max,
            cosine_offset: self.cosine_offset,
            lr: self.lr,
            alpha: self.alpha,
            epochs: self.epochs,
            batch_size: self.batch_size,
            dae_sigma: self.dae_sigma,
            seed,
        }
    }
}

/// The raw key/value view of a config file: parsed JSON object with every
/// key checked against the known set, before type resolution.
#[derive(Clone, Debug)]
pub struct RawConfig {
    entries: BTreeMap<String, Value>,
}

impl RawConfig {
    pub fn from_path(path: &Path) -> anyhow::Result<RawConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> anyhow::Result<RawConfig> {
        let value: Value = serde_json::from_str(text).context("config is not valid JSON")?;
        let Value::Object(map) = value else {
            bail!("config root must be a JSON object");
        };
        let unknown: Vec<&String> =
            map.keys().filter(|k| !ALL_KEYS.contains(&k.as_str())).collect();
        if !unknown.is_empty() {
            bail!(
                "unknown config key{}: {}",
                if unknown.len() == 1 { "" } else { "s" },
                unknown.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", ")
            );
        }
        Ok(RawConfig { entries: map.into_iter().collect() })
    }

    /// Applies a `key=json_value` override from the command line.
    pub fn set(&mut self, assignment: &str) -> anyhow::Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{assignment}` is not key=value"))?;
        if !ALL_KEYS.contains(&key) {
            bail!("unknown config key: `{key}`");
        }
        // Accept bare strings so `--set variant=ddae_c` works without
        // nested quoting; everything that parses as JSON is taken as-is.
        let value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    /// Splits sweep axes (array-valued sweepable keys) from the scalar
    /// residue. Returns the axes in declaration order of SWEEPABLE_KEYS.
    pub fn take_axes(&mut self) -> anyhow::Result<Vec<(String, Vec<Value>)>> {
        let mut axes = Vec::new();
        for key in SWEEPABLE_KEYS {
            if let Some(Value::Array(items)) = self.entries.get(key) {
                if items.is_empty() {
                    bail!("sweep axis `{key}` is empty");
                }
                axes.push((key.to_string(), items.clone()));
                self.entries.remove(key);
            }
        }
        // Arrays on non-sweepable scalar keys are caught by resolve(); the
        // seeds key legitimately holds an array.
        Ok(axes)
    }

    /// Resolves every key to its typed value, collecting all problems into
    /// one error message.
    pub fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut problems: Vec<String> = Vec::new();

        let dataset = match self.entries.get("dataset") {
            Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
            Some(_) => {
                problems.push("dataset: must be a non-empty string path".into());
                PathBuf::new()
            }
            None => {
                problems.push("dataset: required key is missing".into());
                PathBuf::new()
            }
        };

        let variant = self.parse_enum("variant", Variant::Ddae, &mut problems);
        let mode = self.parse_enum("mode", SplitMode::Unsupervised, &mut problems);
        let scheduler = self.parse_enum("scheduler", ScheduleKind::Linear, &mut problems);
        let standardize_scope =
            self.parse_enum("standardize_scope", StandardizeScope::Full, &mut problems);

        let diffusion_steps = self.parse_usize("diffusion_steps", 100, &mut problems);
        let n_hidden_layers = self.parse_usize("n_hidden_layers", 3, &mut problems);
        let hidden_width = self.parse_usize("hidden_width", 512, &mut problems);
        let latent_dim = self.parse_usize("latent_dim", 32, &mut problems);
        let embed_dim = self.parse_usize("embed_dim", 16, &mut problems);
        let epochs = self.parse_usize("epochs", 100, &mut problems);
        let batch_size = self.parse_usize("batch_size", 0, &mut problems);

        let beta_min = self.parse_f64("beta_min", 1e-4, &mut problems);
        let beta_max = self.parse_f64("beta_max", 0.02, &mut problems);
        let cosine_offset = self.parse_f64("cosine_offset", 0.008, &mut problems);
        let leaky_slope = self.parse_f64("leaky_slope", 0.01, &mut problems);
        let lr = self.parse_f64("lr", 1e-3, &mut problems);
        let alpha = self.parse_f64("alpha", 0.5, &mut problems);
        let dae_sigma = self.parse_f64("dae_sigma", 0.1, &mut problems);

        let seeds = self.parse_seeds(&mut problems);
        let out_dir = match self.entries.get("out_dir") {
            None => PathBuf::from("runs"),
            Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
            Some(_) => {
                problems.push("out_dir: must be a non-empty string path".into());
                PathBuf::new()
            }
        };

        let cfg = ExperimentConfig {
            dataset,
            variant,
            mode,
            scheduler,
            diffusion_steps,
            beta_min,
            beta_max,
            cosine_offset,
            n_hidden_layers,
            hidden_width,
            latent_dim,
            embed_dim,
            leaky_slope,
            lr,
            alpha,
            epochs,
            batch_size,
            dae_sigma,
            seeds,
            standardize_scope,
            out_dir,
        };

        // Deep validation through the training contract; input_dim is not
        // known yet, so probe with a placeholder that is always legal.
        if problems.is_empty() {
            if let Err(e) = cfg.train_config(1, 0).validate() {
                problems.push(e.to_string());
            }
        }

        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(anyhow!("invalid config: {}", problems.join("; ")))
        }
    }

    fn parse_enum<T>(&self, key: &str, default: T, problems: &mut Vec<String>) -> T
    where
        T: std::str::FromStr + Copy,
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => default,
            Some(Value::String(s)) => match s.parse::<T>() {
                Ok(v) => v,
                Err(e) => {
                    problems.push(format!("{key}: {e}"));
                    default
                }
            },
            Some(other) => {
                problems.push(format!("{key}: expected a string, got {other}"));
                default
            }
        }
    }

    fn parse_usize(&self, key: &str, default: usize, problems: &mut Vec<String>) -> usize {
        match self.entries.get(key) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(n) => n as usize,
                None => {
                    problems.push(format!("{key}: expected a non-negative integer, got {v}"));
                    default
                }
            },
        }
    }

    fn parse_f64(&self, key: &str, default: f64, problems: &mut Vec<String>) -> f64 {
        match self.entries.get(key) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) => x,
                None => {
                    problems.push(format!("{key}: expected a number, got {v}"));
                    default
                }
            },
        }
    }

    fn parse_seeds(&self, problems: &mut Vec<String>) -> Vec<u64> {
        match self.entries.get("seeds") {
            None => vec![0, 1, 2, 3, 4],
            Some(Value::Array(items)) if !items.is_empty() => {
                let mut seeds = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match item.as_u64() {
                        Some(s) => seeds.push(s),
                        None => problems
                            .push(format!("seeds[{i}]: expected a non-negative integer, got {item}")),
                    }
                }
                seeds
            }
            Some(other) => {
                problems.push(format!("seeds: expected a non-empty array, got {other}"));
                vec![0]
            }
        }
    }
}

/// Checks one sweep-axis value against the search-space table. Returns the
/// normalized scalar to substitute into the cell config.
pub fn check_axis_value(key: &str, value: &Value) -> anyhow::Result<Value> {
    fn in_usize_set(set: &[usize], v: &Value) -> bool {
        v.as_u64().is_some_and(|n| set.contains(&(n as usize)))
    }
    let ok = match key {
        "scheduler" => matches!(value, Value::String(s) if s.parse::<ScheduleKind>().is_ok()),
        "diffusion_steps" => in_usize_set(&GRID_DIFFUSION_STEPS, value),
        "lr" => value.as_f64().is_some_and(|x| GRID_LR.contains(&x)),
        "n_hidden_layers" => in_usize_set(&GRID_N_HIDDEN_LAYERS, value),
        "hidden_width" => in_usize_set(&GRID_HIDDEN_WIDTH, value),
        "latent_dim" => in_usize_set(&GRID_LATENT_DIM, value),
        "embed_dim" => in_usize_set(&GRID_EMBED_DIM, value),
        other => bail!("`{other}` is not a sweepable key"),
    };
    if !ok {
        bail!("sweep axis `{key}`: value {value} is outside the search space");
    }
    Ok(value.clone())
}
