//! Affine models fit by ordinary least squares. The data baseline is fit to
//! `(x, y)`; the surrogate `g` is fit to `(x, f(x))` for a network `f`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, solve_least_squares, Matrix, Vector};
use crate::mlp::MlpModel;
use crate::report::{f64_17, f64_17_map};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vector,
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(weights: Vector, intercept: f64) -> Result<Self> {
        if !intercept.is_finite() {
            return Err(Error::NonFinite("linear model intercept".into()));
        }
        Ok(Self { weights, intercept })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn predict(&self, features: &Matrix) -> Result<Vector> {
        if features.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "linear model has {} weights, features have {} columns",
                self.dim(),
                features.cols()
            )));
        }
        let out: Vec<f64> = (0..features.rows())
            .map(|r| dot(features.row(r), self.weights.as_slice()) + self.intercept)
            .collect();
        Vector::from_vec(out)
    }

    /// Named coefficients for inspection.
    pub fn coefficients(&self, feature_names: &[String]) -> Coefficients {
        Coefficients {
            intercept: self.intercept,
            weights: feature_names
                .iter()
                .cloned()
                .zip(self.weights.iter().copied())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    #[serde(serialize_with = "f64_17")]
    pub intercept: f64,
    #[serde(serialize_with = "f64_17_map")]
    pub weights: BTreeMap<String, f64>,
}

/// Least-squares affine fit: solves for `[w; b]` on the design `[X | 1]`.
pub fn ols_fit(features: &Matrix, targets: &Vector) -> Result<LinearModel> {
    if features.rows() == 0 {
        return Err(Error::EmptyData("OLS fit on no rows".into()));
    }
    let beta = solve_least_squares(&features.with_intercept_column(), targets)?.into_vec();
    let (w, b) = beta.split_at(features.cols());
    LinearModel::new(Vector::from_vec(w.to_vec())?, b[0])
}

pub fn predict(m: &LinearModel, features: &Matrix) -> Result<Vector> {
    m.predict(features)
}

/// Fits the baseline on the true targets.
pub fn fit_baseline(train: &Dataset) -> Result<LinearModel> {
    ols_fit(train.features(), train.target())
}

/// Fits `g` on the training inputs with the network's outputs as targets.
pub fn fit_surrogate(net: &MlpModel, train: &Dataset) -> Result<LinearModel> {
    if train.is_empty() {
        return Err(Error::EmptyData("surrogate fit on no rows".into()));
    }
    let f = net.forward(train.features())?;
    ols_fit(train.features(), &f)
}
