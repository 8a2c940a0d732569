//! End-to-end runs of the three-model protocol: a data baseline, a trained
//! network `f`, and the surrogate `g` fit to `f`, scored per evaluation
//! domain and aggregated over seeds.

use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::config::{ExperimentConfig, SplitSpec};
use crate::dataset::{fit_standardizer, quantile_shift_split, train_test_split, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_triplet, EvalResult};
use crate::mlp::{train, MlpArchitecture, TrainedMlp};
use crate::report::{config_hash, DomainLabel, DomainResult, ExperimentReport, ModelSummary, Provenance};
use crate::surrogate::{fit_baseline, fit_surrogate, LinearModel};

/// Caps concurrent seed pipelines; `0` or unset means one per core.
pub const THREADS_ENV: &str = "LINDEC_THREADS";

/// Smallest partition that still yields every statistic.
pub const MIN_PARTITION_ROWS: usize = 2;

/// Everything one seed's pipeline produced, in standardized feature units.
#[derive(Debug, Clone)]
pub struct SeedArtifacts {
    pub seed: u64,
    pub standardizer: Standardizer,
    pub train: Dataset,
    pub baseline: LinearModel,
    pub network: TrainedMlp,
    pub surrogate: LinearModel,
    pub eval_sets: Vec<(DomainLabel, Dataset)>,
    pub results: Vec<EvalResult>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub artifacts: Vec<SeedArtifacts>,
}

/// Field-wise mean and population standard deviation.
pub fn aggregate(per_seed: &[EvalResult]) -> Result<(EvalResult, EvalResult)> {
    if per_seed.is_empty() {
        return Err(Error::EmptyData("no per-seed results to aggregate".into()));
    }
    let n = per_seed.len() as f64;
    let mut mean = [0.0; 7];
    for r in per_seed {
        for (m, v) in mean.iter_mut().zip(r.to_array()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = [0.0; 7];
    for r in per_seed {
        for ((s, v), m) in var.iter_mut().zip(r.to_array()).zip(mean) {
            *s += (v - m).powi(2);
        }
    }
    let std = var.map(|s| (s / n).sqrt());
    Ok((EvalResult::from_array(mean), EvalResult::from_array(std)))
}

fn check_rows(what: &str, d: &Dataset) -> Result<()> {
    if d.len() < MIN_PARTITION_ROWS {
        return Err(Error::Parameter(format!(
            "{what} partition has {} rows, below the minimum of {MIN_PARTITION_ROWS}",
            d.len()
        )));
    }
    Ok(())
}

fn check_invariants(r: &EvalResult) -> Result<()> {
    if r.lambda > 1.0 + 1e-9 {
        return Err(Error::Invariant(format!("λ = {} exceeds 1", r.lambda)));
    }
    if r.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::Invariant("non-finite evaluation statistic".into()));
    }
    Ok(())
}

/// Standardize on train, fit baseline, train the network, fit the surrogate,
/// and evaluate on each raw evaluation partition.
fn run_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    train_raw: &Dataset,
    evals_raw: Vec<(DomainLabel, Dataset)>,
) -> Result<SeedArtifacts> {
    check_rows("train", train_raw)?;
    for (label, d) in &evals_raw {
        check_rows(&label.to_string(), d)?;
    }
    let standardizer = fit_standardizer(train_raw)?;
    let train_set = standardizer.apply(train_raw)?;
    let eval_sets = evals_raw
        .into_iter()
        .map(|(label, d)| Ok((label, standardizer.apply(&d)?)))
        .collect::<Result<Vec<_>>>()?;

    if let Some(dim) = cfg.architecture.input_dim {
        if dim != train_set.dim() {
            return Err(Error::Config(format!(
                "architecture.input_dim is {dim} but preprocessing yields {} features",
                train_set.dim()
            )));
        }
    }
    let arch = MlpArchitecture::new(train_set.dim(), cfg.architecture.hidden_layers.clone())?;
    let baseline = fit_baseline(&train_set)?;
    let network = train(&arch, &train_set, &cfg.training.for_seed(seed))?;
    let surrogate = fit_surrogate(&network.model, &train_set)?;
    let results = eval_sets
        .iter()
        .map(|(label, d)| {
            let r = evaluate_triplet(&baseline, &network.model, &surrogate, d).map_err(|e| match e {
                Error::DegenerateVariance(msg) => {
                    Error::DegenerateVariance(format!("{label} domain, {msg}"))
                }
                other => other,
            })?;
            check_invariants(&r)?;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedArtifacts {
        seed,
        standardizer,
        train: train_set,
        baseline,
        network,
        surrogate,
        eval_sets,
        results,
    })
}

fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn for_each_seed<F>(cfg: &ExperimentConfig, threads: usize, f: F) -> Result<Vec<SeedArtifacts>>
where
    F: Fn(u64) -> Result<SeedArtifacts> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| f(seed).map_err(|e| e.with_seed(seed)))
            .collect()
    })
}

fn assemble(cfg: &ExperimentConfig, artifacts: Vec<SeedArtifacts>) -> Result<ExperimentRun> {
    let labels: Vec<DomainLabel> = artifacts[0].eval_sets.iter().map(|(l, _)| *l).collect();
    let mut domains = Vec::with_capacity(labels.len());
    for (i, &label) in labels.iter().enumerate() {
        let per_seed: Vec<EvalResult> = artifacts.iter().map(|a| a.results[i]).collect();
        let (mean, std) = aggregate(&per_seed)?;
        domains.push(DomainResult {
            label,
            eval_rows: artifacts[0].eval_sets[i].1.len(),
            per_seed,
            mean,
            std,
        });
    }
    let models = artifacts
        .iter()
        .map(|a| ModelSummary {
            seed: a.seed,
            train_rows: a.train.len(),
            epochs: a.network.epoch_losses.len(),
            final_train_loss: a.network.final_loss(),
            baseline: a.baseline.coefficients(a.train.feature_names()),
            surrogate: a.surrogate.coefficients(a.train.feature_names()),
        })
        .collect();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let report = ExperimentReport {
        config_echo: cfg.clone(),
        domains,
        models,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp,
            config_hash: config_hash(cfg),
        },
    };
    Ok(ExperimentRun { report, artifacts })
}

/// Random train/test split per seed; evaluation on the held-out test rows.
pub fn run_standard_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentRun> {
    cfg.validate()?;
    let SplitSpec::Plain { test_fraction } = cfg.split else {
        return Err(Error::Config("run_standard needs a plain split".into()));
    };
    let data = cfg.dataset.load()?;
    let artifacts = for_each_seed(cfg, threads, |seed| {
        let (train_raw, test_raw) = train_test_split(&data, test_fraction, seed)?;
        run_seed(cfg, seed, &train_raw, vec![(DomainLabel::Test, test_raw)])
    })?;
    assemble(cfg, artifacts)
}

/// Quantile-band shift protocol: train on the middle band, evaluate on its
/// held-out IID rows and on both tails. The bands depend only on the data.
pub fn run_shift_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentRun> {
    cfg.validate()?;
    let SplitSpec::Shift {
        ref feature,
        low_q,
        high_q,
        iid_test_fraction,
    } = cfg.split
    else {
        return Err(Error::Config("run_shift needs a shift split".into()));
    };
    let data = cfg.dataset.load()?;
    let artifacts = for_each_seed(cfg, threads, |seed| {
        let split = quantile_shift_split(&data, feature, low_q, high_q, iid_test_fraction, seed)?;
        run_seed(
            cfg,
            seed,
            &split.train,
            vec![
                (DomainLabel::Iid, split.iid_test),
                (DomainLabel::TailLow, split.tail_low),
                (DomainLabel::TailHigh, split.tail_high),
            ],
        )
    })?;
    assemble(cfg, artifacts)
}

pub fn run_standard(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    run_standard_with_threads(cfg, threads_from_env())
}

pub fn run_shift(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    run_shift_with_threads(cfg, threads_from_env())
}

/// Dispatches on the split kind.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    match cfg.split {
        SplitSpec::Plain { .. } => run_standard(cfg),
        SplitSpec::Shift { .. } => run_shift(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn er(v: f64) -> EvalResult {
        EvalResult::from_array([v; 7])
    }

    #[test]
    fn aggregate_by_hand() {
        let (m, s) = aggregate(&[er(1.0), er(3.0)]).unwrap();
        assert_eq!(m.lambda, 2.0);
        assert_eq!(s.rmse_f, 1.0);
        let (_, s1) = aggregate(&[er(0.4)]).unwrap();
        assert_eq!(s1.to_array(), [0.0; 7]);
        assert!(matches!(aggregate(&[]), Err(Error::EmptyData(_))));
    }
}
