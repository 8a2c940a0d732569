//! Goodness-of-fit statistics and the linearity score.
//!
//! All variances are population variances (1/n). The linearity score is the
//! coefficient of determination with the network's outputs in the role of
//! the truth, so its denominator is the variance of the network, not of the
//! task target.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::mlp::MlpModel;
use crate::report::f64_17;
use crate::surrogate::LinearModel;

/// Variances below this are treated as zero.
pub const MIN_VARIANCE: f64 = 1e-12;

fn check_pair(a: &Vector, b: &Vector, min_len: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < min_len {
        return Err(Error::EmptyData(format!(
            "need at least {min_len} values, got {}",
            a.len()
        )));
    }
    Ok(())
}

fn mse(a: &Vector, b: &Vector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

pub fn population_variance(v: &Vector) -> f64 {
    let mean = v.mean();
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
}

/// `1 − mean((y − ŷ)²) / var(y)`.
pub fn r_squared(y_true: &Vector, y_pred: &Vector) -> Result<f64> {
    check_pair(y_true, y_pred, 2)?;
    let var = population_variance(y_true);
    if var < MIN_VARIANCE {
        return Err(Error::DegenerateVariance(format!(
            "reference values have variance {var:e}"
        )));
    }
    Ok(1.0 - mse(y_true, y_pred) / var)
}

/// λ(f): R² of the surrogate's predictions against the network's.
pub fn lambda_score(f_preds: &Vector, g_preds: &Vector) -> Result<f64> {
    r_squared(f_preds, g_preds).map_err(|e| match e {
        Error::DegenerateVariance(msg) => {
            Error::DegenerateVariance(format!("network output is constant ({msg})"))
        }
        other => other,
    })
}

pub fn rmse(y_true: &Vector, y_pred: &Vector) -> Result<f64> {
    check_pair(y_true, y_pred, 1)?;
    Ok(mse(y_true, y_pred).sqrt())
}

/// Scores for the baseline, the network `f`, and its surrogate `g` on one
/// evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    #[serde(serialize_with = "f64_17")]
    pub r2_baseline: f64,
    #[serde(serialize_with = "f64_17")]
    pub r2_network: f64,
    #[serde(serialize_with = "f64_17")]
    pub r2_surrogate: f64,
    #[serde(serialize_with = "f64_17")]
    pub lambda: f64,
    #[serde(serialize_with = "f64_17")]
    pub rmse_f: f64,
    #[serde(serialize_with = "f64_17")]
    pub rmse_g: f64,
    /// `rmse_g − rmse_f`.
    #[serde(serialize_with = "f64_17")]
    pub delta_rmse: f64,
}

impl EvalResult {
    pub const FIELDS: [&'static str; 7] = [
        "r2_baseline",
        "r2_network",
        "r2_surrogate",
        "lambda",
        "rmse_f",
        "rmse_g",
        "delta_rmse",
    ];

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.r2_baseline,
            self.r2_network,
            self.r2_surrogate,
            self.lambda,
            self.rmse_f,
            self.rmse_g,
            self.delta_rmse,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            r2_baseline: a[0],
            r2_network: a[1],
            r2_surrogate: a[2],
            lambda: a[3],
            rmse_f: a[4],
            rmse_g: a[5],
            delta_rmse: a[6],
        }
    }
}

fn with_context(stat: &str, e: Error) -> Error {
    match e {
        Error::DegenerateVariance(msg) => Error::DegenerateVariance(format!("{stat}: {msg}")),
        other => other,
    }
}

pub fn evaluate_triplet(
    baseline: &LinearModel,
    net: &MlpModel,
    surrogate: &LinearModel,
    eval_set: &Dataset,
) -> Result<EvalResult> {
    let x = eval_set.features();
    let y = eval_set.target();
    let base_pred = baseline.predict(x)?;
    let f_pred = net.forward(x)?;
    let g_pred = surrogate.predict(x)?;
    let rmse_f = rmse(y, &f_pred)?;
    let rmse_g = rmse(y, &g_pred)?;
    Ok(EvalResult {
        r2_baseline: r_squared(y, &base_pred).map_err(|e| with_context("r2_baseline", e))?,
        r2_network: r_squared(y, &f_pred).map_err(|e| with_context("r2_network", e))?,
        r2_surrogate: r_squared(y, &g_pred).map_err(|e| with_context("r2_surrogate", e))?,
        lambda: lambda_score(&f_pred, &g_pred).map_err(|e| with_context("lambda", e))?,
        rmse_f,
        rmse_g,
        delta_rmse: rmse_g - rmse_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec()).unwrap()
    }

    #[test]
    fn r2_identity_and_mean() {
        let y = v(&[1.0, 4.0, -2.0, 0.5]);
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        let mean = v(&[y.mean(); 4]);
        assert!(r_squared(&y, &mean).unwrap().abs() < 1e-12);
    }

    #[test]
    fn r2_by_hand() {
        // SS_res = 1, n·var = 2
        assert!((r_squared(&v(&[0.0, 1.0, 2.0]), &v(&[0.0, 1.0, 1.0])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn r2_errors() {
        assert!(matches!(
            r_squared(&v(&[2.0, 2.0]), &v(&[1.0, 3.0])),
            Err(Error::DegenerateVariance(_))
        ));
        assert!(matches!(r_squared(&v(&[1.0]), &v(&[1.0])), Err(Error::EmptyData(_))));
        assert!(matches!(r_squared(&v(&[1.0, 2.0]), &v(&[1.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn lambda_by_hand() {
        // MSE = 1/3, Var(f) = 14/9
        let l = lambda_score(&v(&[1.0, 2.0, 4.0]), &v(&[1.0, 2.0, 3.0])).unwrap();
        assert!((l - 11.0 / 14.0).abs() < 1e-15);
        assert_eq!(lambda_score(&v(&[1.0, 3.0]), &v(&[1.0, 3.0])).unwrap(), 1.0);
        assert!(matches!(
            lambda_score(&v(&[5.0, 5.0, 5.0]), &v(&[1.0, 2.0, 3.0])),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn rmse_by_hand() {
        assert_eq!(rmse(&v(&[1.0, 2.0]), &v(&[1.0, 2.0])).unwrap(), 0.0);
        assert!((rmse(&v(&[0.0, 0.0]), &v(&[3.0, 4.0])).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(rmse(&v(&[0.0]), &v(&[])), Err(Error::Shape(_))));
    }

    #[test]
    fn rmse_squared_is_mse() {
        let (a, b) = (v(&[0.1, -2.0, 3.3, 7.0]), v(&[1.0, -1.5, 2.0, 6.0]));
        assert!((rmse(&a, &b).unwrap().powi(2) - mse(&a, &b)).abs() < 1e-12);
    }
}
