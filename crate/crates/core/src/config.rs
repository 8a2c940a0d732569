//! Experiment configuration documents.
//!
//! ```json
//! {
//!   "dataset": {"kind": "synthetic", "n": 2000, "noise_std": 0.2, "x_min": -4, "x_max": 4, "seed": 0},
//!   "architecture": {"hidden_layers": [64, 64]},
//!   "training": {"epochs": 200, "batch_size": 32, "lr": 0.001},
//!   "split": {"kind": "plain", "test_fraction": 0.2},
//!   "seeds": [0, 1, 2, 3, 4]
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{generate_synthetic, load_csv, ColumnSchema, Dataset};
use crate::error::{Error, Result};
use crate::mlp::{AdamParams, TrainConfig};
use crate::report::f64_17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        n: usize,
        #[serde(serialize_with = "f64_17")]
        noise_std: f64,
        #[serde(serialize_with = "f64_17")]
        x_min: f64,
        #[serde(serialize_with = "f64_17")]
        x_max: f64,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        /// Relative paths resolve against the config file's directory.
        path: PathBuf,
        columns: ColumnSchema,
    },
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::Synthetic {
                n,
                noise_std,
                x_min,
                x_max,
                seed,
            } => generate_synthetic(*n, *noise_std, *x_min, *x_max, *seed),
            DatasetSpec::Csv { path, columns } => load_csv(path, columns),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    pub hidden_layers: Vec<usize>,
    /// Checked against the preprocessed feature count when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
}

fn default_epochs() -> usize {
    200
}
fn default_batch_size() -> usize {
    32
}
fn default_lr() -> f64 {
    AdamParams::default().lr
}
fn default_beta1() -> f64 {
    AdamParams::default().beta1
}
fn default_beta2() -> f64 {
    AdamParams::default().beta2
}
fn default_eps() -> f64 {
    AdamParams::default().eps
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSpec {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_lr", serialize_with = "f64_17")]
    pub lr: f64,
    #[serde(default = "default_beta1", serialize_with = "f64_17")]
    pub beta1: f64,
    #[serde(default = "default_beta2", serialize_with = "f64_17")]
    pub beta2: f64,
    #[serde(default = "default_eps", serialize_with = "f64_17")]
    pub eps: f64,
    #[serde(default = "default_true")]
    pub standardize_target: bool,
}

impl Default for TrainingSpec {
    fn default() -> Self {
        Self {
            epochs: default_epochs(),
            batch_size: default_batch_size(),
            lr: default_lr(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
            standardize_target: true,
        }
    }
}

impl TrainingSpec {
    pub fn for_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: AdamParams {
                lr: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                eps: self.eps,
            },
            seed,
            standardize_target: self.standardize_target,
        }
    }
}

fn default_iid_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SplitSpec {
    Plain {
        #[serde(serialize_with = "f64_17")]
        test_fraction: f64,
    },
    Shift {
        feature: String,
        #[serde(serialize_with = "f64_17")]
        low_q: f64,
        #[serde(serialize_with = "f64_17")]
        high_q: f64,
        #[serde(default = "default_iid_fraction", serialize_with = "f64_17")]
        iid_test_fraction: f64,
    },
}

pub fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub architecture: ArchitectureSpec,
    #[serde(default)]
    pub training: TrainingSpec,
    pub split: SplitSpec,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn in_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl ExperimentConfig {
    /// Parses and validates a config document. Errors carry the JSON line and
    /// column plus the path of the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!(
                "line {}, column {}, field `{}`: {}",
                inner.line(),
                inner.column(),
                path,
                inner
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let DatasetSpec::Csv { path, .. } = &mut self.dataset {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        if self.architecture.hidden_layers.is_empty() {
            return Err(Error::Config(
                "architecture needs at least one hidden layer".into(),
            ));
        }
        if self.architecture.hidden_layers.contains(&0) || self.architecture.input_dim == Some(0) {
            return Err(Error::Config("layer widths must be ≥ 1".into()));
        }
        self.training
            .for_seed(0)
            .validate()
            .map_err(|e| Error::Config(format!("training: {e}")))?;
        match &self.dataset {
            DatasetSpec::Synthetic {
                n,
                noise_std,
                x_min,
                x_max,
                ..
            } => {
                if *n == 0 || noise_std.is_nan() || *noise_std < 0.0 || x_min.partial_cmp(x_max) != Some(std::cmp::Ordering::Less) {
                    return Err(Error::Config(format!(
                        "synthetic dataset needs n ≥ 1, noise_std ≥ 0, x_min < x_max \
                         (got n={n}, noise_std={noise_std}, range [{x_min}, {x_max}])"
                    )));
                }
            }
            DatasetSpec::Csv { columns, .. } => columns
                .validate()
                .map_err(|e| Error::Config(format!("dataset.columns: {e}")))?,
        }
        match &self.split {
            SplitSpec::Plain { test_fraction } => in_unit_interval("test_fraction", *test_fraction)?,
            SplitSpec::Shift {
                low_q,
                high_q,
                iid_test_fraction,
                ..
            } => {
                in_unit_interval("low_q", *low_q)?;
                in_unit_interval("high_q", *high_q)?;
                in_unit_interval("iid_test_fraction", *iid_test_fraction)?;
                if low_q >= high_q {
                    return Err(Error::Config(format!(
                        "low_q ({low_q}) must be below high_q ({high_q})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTH: &str = r#"{
        "dataset": {"kind": "synthetic", "n": 100, "noise_std": 0.2, "x_min": -4, "x_max": 4},
        "architecture": {"hidden_layers": [8]},
        "split": {"kind": "plain", "test_fraction": 0.2}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json_str(SYNTH).unwrap();
        assert_eq!(cfg.seeds, vec![0, 1, 2, 3, 4]);
        assert_eq!(cfg.training, TrainingSpec::default());
        assert_eq!(cfg.training.for_seed(3).adam.lr, 1e-3);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let bad = SYNTH.replace("\"n\": 100", "\"n\": \"lots\"");
        let msg = ExperimentConfig::from_json_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("line 2") && msg.contains("`dataset`"), "{msg}");
        assert!(msg.contains("expected usize"), "{msg}");

        let typo = SYNTH.replace("hidden_layers", "hidden");
        assert!(matches!(
            ExperimentConfig::from_json_str(&typo),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn semantic_validation() {
        for (from, to) in [
            ("\"test_fraction\": 0.2", "\"test_fraction\": 1.5"),
            ("[8]", "[]"),
            ("[8]", "[0]"),
            ("\"x_min\": -4", "\"x_min\": 9"),
        ] {
            let text = SYNTH.replace(from, to);
            assert!(
                matches!(ExperimentConfig::from_json_str(&text), Err(Error::Config(_))),
                "{to}"
            );
        }
        let no_seeds = SYNTH.replace("\"split\"", "\"seeds\": [], \"split\"");
        assert!(ExperimentConfig::from_json_str(&no_seeds).is_err());
    }

    #[test]
    fn relative_csv_paths_resolve_against_config_dir() {
        let mut cfg = ExperimentConfig::from_json_str(
            r#"{
            "dataset": {"kind": "csv", "path": "data/x.csv",
                        "columns": [{"name": "a", "kind": "numeric"}, {"name": "y", "kind": "target"}]},
            "architecture": {"hidden_layers": [4]},
            "split": {"kind": "shift", "feature": "a", "low_q": 0.1, "high_q": 0.9}
        }"#,
        )
        .unwrap();
        cfg.resolve_paths(Path::new("/etc/base"));
        match &cfg.dataset {
            DatasetSpec::Csv { path, .. } => assert_eq!(path, Path::new("/etc/base/data/x.csv")),
            _ => unreachable!(),
        }
    }
}
