//! Measures how linearly decodable a trained regression network is.
//!
//! The workflow fits three models on the same training rows: an affine
//! baseline on `(x, y)`, a ReLU network `f`, and an affine surrogate `g` on
//! `(x, f(x))`. The linearity score `λ(f)` is the R² of `g` against `f`;
//! comparing it with each model's R² on the true target separates fidelity to
//! the network from fidelity to the task.
//!
//! The `examples/` directory has one runnable program per capability:
//!
//! ```bash
//! cargo run --release -p lindec --example linearity_score
//! cargo run --release -p lindec --example synthetic_sanity
//! cargo run --release -p lindec --example shift_split
//! cargo run --release -p lindec --example least_squares
//! cargo run --release -p lindec --example gradient_check
//! cargo run --release -p lindec --example model_roundtrip
//! cargo run --release -p lindec --example medical_insurance -- data/insurance.csv
//! cargo run --release -p lindec --example california_shift -- data/california_housing.csv
//! ```

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod mlp;
pub mod plot;
pub mod report;
pub mod rng;
pub mod surrogate;

pub use config::{DatasetSpec, ExperimentConfig, SplitSpec, TrainingSpec};
pub use dataset::{ColumnKind, ColumnSchema, ColumnSpec, Dataset, ShiftSplit, Standardizer};
pub use error::{Error, Result};
pub use experiment::{aggregate, run, run_shift, run_standard, ExperimentRun, SeedArtifacts};
pub use linalg::{Matrix, Vector};
pub use metrics::{evaluate_triplet, lambda_score, r_squared, rmse, EvalResult};
pub use mlp::{init_mlp, train, MlpArchitecture, MlpModel, TrainConfig};
pub use report::{DomainLabel, DomainResult, ExperimentReport};
pub use surrogate::{fit_surrogate, ols_fit, LinearModel};
