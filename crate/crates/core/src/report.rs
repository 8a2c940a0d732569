//! Report documents and fixed-precision JSON number formatting.
//!
//! Every real in a report is written with 17 significant digits in
//! scientific notation, so identical numerics give identical bytes.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::metrics::EvalResult;
use crate::surrogate::Coefficients;

pub fn format_f64_17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn f64_17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return Err(S::Error::custom(format!("non-finite report value {v}")));
    }
    RawValue::from_string(format_f64_17(*v))
        .map_err(S::Error::custom)?
        .serialize(s)
}

pub fn f64_17_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct W<'a>(#[serde(serialize_with = "f64_17")] &'a f64);
    s.collect_map(m.iter().map(|(k, v)| (k, W(v))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainLabel {
    #[serde(rename = "Test")]
    Test,
    #[serde(rename = "IID")]
    Iid,
    #[serde(rename = "Tail-L")]
    TailLow,
    #[serde(rename = "Tail-R")]
    TailHigh,
}

impl DomainLabel {
    /// File-name stem used for plot series.
    pub fn slug(self) -> &'static str {
        match self {
            DomainLabel::Test => "test",
            DomainLabel::Iid => "iid",
            DomainLabel::TailLow => "tail_l",
            DomainLabel::TailHigh => "tail_r",
        }
    }
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainLabel::Test => "Test",
            DomainLabel::Iid => "IID",
            DomainLabel::TailLow => "Tail-L",
            DomainLabel::TailHigh => "Tail-R",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainResult {
    pub label: DomainLabel,
    pub eval_rows: usize,
    pub per_seed: Vec<EvalResult>,
    pub mean: EvalResult,
    pub std: EvalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub seed: u64,
    pub train_rows: usize,
    pub epochs: usize,
    #[serde(serialize_with = "f64_17")]
    pub final_train_loss: f64,
    pub baseline: Coefficients,
    pub surrogate: Coefficients,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch at report creation.
    pub timestamp: u64,
    /// SHA-256 of the serialized config echo.
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_echo: ExperimentConfig,
    pub domains: Vec<DomainResult>,
    pub models: Vec<ModelSummary>,
    pub provenance: Provenance,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl ExperimentReport {
    pub fn domain(&self, label: DomainLabel) -> Option<&DomainResult> {
        self.domains.iter().find(|d| d.label == label)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// The report with the timestamp zeroed; equal across reruns of a config.
    pub fn numerics_json(&self) -> serde_json::Result<String> {
        let mut copy = self.clone();
        copy.provenance.timestamp = 0;
        copy.to_json()
    }

    /// Plain-text summary: one table of R² (baseline, network, surrogate) and
    /// one of λ, RMSE(f), RMSE(g), ΔRMSE, each as mean ± std over seeds.
    pub fn summary_table(&self) -> String {
        let pm = |m: f64, s: f64| format!("{m:>7.3} ± {s:<6.3}");
        let mut out = String::new();
        out.push_str(&format!(
            "{:<8} {:>16} {:>16} {:>16} {:>16}\n",
            "Domain", "λ(f)", "RMSE(f)", "RMSE(g)", "ΔRMSE"
        ));
        for d in &self.domains {
            out.push_str(&format!(
                "{:<8} {:>16} {:>16} {:>16} {:>+16.3}\n",
                d.label.to_string(),
                pm(d.mean.lambda, d.std.lambda),
                pm(d.mean.rmse_f, d.std.rmse_f),
                pm(d.mean.rmse_g, d.std.rmse_g),
                d.mean.delta_rmse
            ));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:<8} {:>16} {:>16} {:>16}\n",
            "Domain", "Baseline R²", "Network R²", "Surrogate R²"
        ));
        for d in &self.domains {
            out.push_str(&format!(
                "{:<8} {:>16} {:>16} {:>16}\n",
                d.label.to_string(),
                pm(d.mean.r2_baseline, d.std.r2_baseline),
                pm(d.mean.r2_network, d.std.r2_network),
                pm(d.mean.r2_surrogate, d.std.r2_surrogate)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_format() {
        assert_eq!(format_f64_17(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64_17(-2.5), "-2.5000000000000000e0");
        for v in [0.1, 1.0 / 3.0, -1e-300, 12345.678, 0.0] {
            assert_eq!(format_f64_17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn serializer_emits_json_numbers() {
        #[derive(Serialize)]
        struct T {
            #[serde(serialize_with = "f64_17")]
            x: f64,
        }
        let s = serde_json::to_string(&T { x: 0.25 }).unwrap();
        assert_eq!(s, r#"{"x":2.5000000000000000e-1}"#);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.25));
        assert!(serde_json::to_string(&T { x: f64::NAN }).is_err());
    }
}
