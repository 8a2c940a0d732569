//! Datasets: synthetic generation, CSV ingestion, standardization, and the
//! random and quantile-band splits used by the experiments.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    target: Vector,
    feature_names: Vec<String>,
    target_name: String,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        target: Vector,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        if features.rows() != target.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} targets",
                features.rows(),
                target.len()
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::Shape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        Ok(Self {
            features,
            target,
            feature_names,
            target_name: target_name.into(),
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Rows by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            target: self.target.select(idx),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        }
    }

    /// Writes the dataset as CSV: feature columns then the target column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.target_name);
        w.write_record(&header).map_err(csv_write_err)?;
        for r in 0..self.len() {
            let mut rec: Vec<String> = self.features.row(r).iter().map(|v| v.to_string()).collect();
            rec.push(self.target[r].to_string());
            w.write_record(&rec).map_err(csv_write_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

fn csv_write_err(e: csv::Error) -> Error {
    Error::io("<csv writer>", std::io::Error::other(e))
}

/// `y = x·sin(x) + noise_std·z` with `x ~ U[x_min, x_max]`, `z ~ N(0, 1)`.
pub fn generate_synthetic(
    n: usize,
    noise_std: f64,
    x_min: f64,
    x_max: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Parameter("synthetic sample count must be ≥ 1".into()));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::Parameter(format!("noise_std must be ≥ 0, got {noise_std}")));
    }
    if !(x_min.is_finite() && x_max.is_finite() && x_min <= x_max) {
        return Err(Error::Parameter(format!(
            "invalid input range [{x_min}, {x_max}]"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Synthetic);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = if x_min == x_max {
            x_min
        } else {
            rng.random_range(x_min..=x_max)
        };
        let z: f64 = rng.sample(StandardNormal);
        xs.push(x);
        ys.push(x * x.sin() + noise_std * z);
    }
    Dataset::new(
        Matrix::from_vec(n, 1, xs)?,
        Vector::from_vec(ys)?,
        vec!["x".into()],
        "y",
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Target,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnSchema {
    pub columns: Vec<ColumnSpec>,
}

impl ColumnSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let schema = Self { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let targets = self
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Target)
            .count();
        if targets != 1 {
            return Err(Error::Schema(format!(
                "schema needs exactly one target column, found {targets}"
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("column `{}` listed twice", c.name)));
            }
        }
        Ok(())
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Parses CSV text against a schema. Categorical columns are one-hot
/// expanded over their sorted distinct levels with the first level dropped.
pub fn read_csv<R: Read>(reader: R, schema: &ColumnSchema) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let position: HashMap<&str, usize> = header
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();
    for c in &schema.columns {
        if !position.contains_key(c.name.as_str()) {
            return Err(Error::Schema(format!("column `{}` missing from CSV header", c.name)));
        }
    }
    if let Some(extra) = header
        .iter()
        .find(|h| !schema.columns.iter().any(|c| &c.name == *h))
    {
        return Err(Error::Schema(format!(
            "CSV column `{extra}` is not in the schema (mark it `drop` to ignore)"
        )));
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); schema.columns.len()];
    for (row_idx, rec) in rdr.records().enumerate() {
        let row = row_idx + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        for (ci, c) in schema.columns.iter().enumerate() {
            let cell = rec.get(position[c.name.as_str()]).unwrap_or("").trim();
            if c.kind != ColumnKind::Drop && cell.is_empty() {
                return Err(Error::Parse {
                    row,
                    column: c.name.clone(),
                    message: "missing value".into(),
                });
            }
            raw[ci].push(cell.to_string());
        }
    }
    let n = raw.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::EmptyData("CSV has no data rows".into()));
    }

    let parse_numeric = |ci: usize| -> Result<Vec<f64>> {
        let name = &schema.columns[ci].name;
        raw[ci]
            .iter()
            .enumerate()
            .map(|(i, s)| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    row: i + 1,
                    column: name.clone(),
                    message: format!("`{s}` is not a finite number"),
                }),
            })
            .collect()
    };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    let mut target = None;
    let mut target_name = String::new();
    for (ci, c) in schema.columns.iter().enumerate() {
        match c.kind {
            ColumnKind::Drop => {}
            ColumnKind::Numeric => {
                columns.push(parse_numeric(ci)?);
                names.push(c.name.clone());
            }
            ColumnKind::Target => {
                target = Some(parse_numeric(ci)?);
                target_name = c.name.clone();
            }
            ColumnKind::Categorical => {
                let levels: BTreeSet<&str> = raw[ci].iter().map(String::as_str).collect();
                for level in levels.iter().skip(1) {
                    columns.push(
                        raw[ci]
                            .iter()
                            .map(|s| if s == level { 1.0 } else { 0.0 })
                            .collect(),
                    );
                    names.push(format!("{}_{}", c.name, level));
                }
            }
        }
    }
    let d = columns.len();
    let mut data = Vec::with_capacity(n * d);
    for r in 0..n {
        data.extend(columns.iter().map(|col| col[r]));
    }
    Dataset::new(
        Matrix::from_vec(n, d, data)?,
        Vector::from_vec(target.expect("validated schema has a target"))?,
        names,
        target_name,
    )
}

/// Per-feature affine standardization fit on one partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Always > 0; constant columns store 1.
    pub stds: Vec<f64>,
}

/// Population standard deviations below this count as constant columns.
const MIN_STD: f64 = 1e-12;

pub fn fit_standardizer(d: &Dataset) -> Result<Standardizer> {
    if d.is_empty() {
        return Err(Error::EmptyData("cannot fit a standardizer on no rows".into()));
    }
    let n = d.len() as f64;
    let x = d.features();
    let (means, stds) = (0..d.dim())
        .map(|c| {
            let col = x.column(c);
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            (mean, if std > MIN_STD { std } else { 1.0 })
        })
        .unzip();
    Ok(Standardizer { means, stds })
}

impl Standardizer {
    fn check(&self, d: &Dataset) -> Result<()> {
        if d.dim() != self.means.len() {
            return Err(Error::Shape(format!(
                "standardizer fit on {} columns, dataset has {}",
                self.means.len(),
                d.dim()
            )));
        }
        Ok(())
    }

    fn map(&self, d: &Dataset, f: impl Fn(f64, f64, f64) -> f64) -> Result<Dataset> {
        self.check(d)?;
        let cols = d.dim();
        let data: Vec<f64> = d
            .features()
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &v)| f(v, self.means[i % cols], self.stds[i % cols]))
            .collect();
        Dataset::new(
            Matrix::from_vec(d.len(), cols, data)?,
            d.target().clone(),
            d.feature_names().to_vec(),
            d.target_name(),
        )
    }

    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        self.map(d, |v, m, s| (v - m) / s)
    }

    pub fn invert(&self, d: &Dataset) -> Result<Dataset> {
        self.map(d, |v, m, s| v * s + m)
    }
}

pub fn apply_standardizer(s: &Standardizer, d: &Dataset) -> Result<Dataset> {
    s.apply(d)
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must lie in (0, 1), got {f}")))
    }
}

/// Seeded shuffle, then the first `round(n·test_fraction)` shuffled rows
/// become the test part. Both parts keep the shuffled order.
pub fn train_test_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction("test_fraction", test_fraction)?;
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut stream_rng(seed, Stream::Split));
    let n_test = (d.len() as f64 * test_fraction).round() as usize;
    let (test, train) = idx.split_at(n_test);
    Ok((d.select(train), d.select(test)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSplit {
    pub train: Dataset,
    pub iid_test: Dataset,
    pub tail_low: Dataset,
    pub tail_high: Dataset,
    pub split_feature: String,
    pub low_q: f64,
    pub high_q: f64,
}

/// 1-based rank of the empirical `q` quantile among `n` values.
fn quantile_rank(q: f64, n: usize) -> usize {
    // Absorb representation error such as 0.9 * 10 = 9.000000000000002.
    ((q * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Row indices of the (low tail, middle band, high tail) by `values`.
///
/// With `v` sorted ascending, `k_lo = ceil(low_q·n)` and `k_hi = ceil(high_q·n)`:
/// the low tail holds rows strictly below `v[k_lo]` and the high tail rows
/// strictly above `v[k_hi − 1]`. Rows tied with a band boundary stay in the
/// middle band. Each part keeps source row order.
pub fn quantile_bands(values: &[f64], low_q: f64, high_q: f64) -> Result<[Vec<usize>; 3]> {
    check_fraction("low_q", low_q)?;
    check_fraction("high_q", high_q)?;
    if low_q >= high_q {
        return Err(Error::Parameter(format!(
            "low_q ({low_q}) must be below high_q ({high_q})"
        )));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k_lo = quantile_rank(low_q, n);
    let k_hi = quantile_rank(high_q, n).max(k_lo);
    let lo_cut = sorted.get(k_lo).copied().unwrap_or(f64::INFINITY);
    let hi_cut = if k_hi == 0 {
        f64::NEG_INFINITY
    } else {
        sorted[k_hi - 1]
    };
    let mut bands: [Vec<usize>; 3] = Default::default();
    for (i, &v) in values.iter().enumerate() {
        let band = if v < lo_cut {
            0
        } else if v > hi_cut {
            2
        } else {
            1
        };
        bands[band].push(i);
    }
    Ok(bands)
}

/// Splits off the low and high quantile tails of `feature`, then splits the
/// middle band into train and IID test. The tails depend only on the data;
/// `seed` drives only the middle-band split.
pub fn quantile_shift_split(
    d: &Dataset,
    feature: &str,
    low_q: f64,
    high_q: f64,
    iid_test_fraction: f64,
    seed: u64,
) -> Result<ShiftSplit> {
    let col = d
        .feature_index(feature)
        .ok_or_else(|| Error::Schema(format!("unknown shift feature `{feature}`")))?;
    check_fraction("iid_test_fraction", iid_test_fraction)?;
    let values = d.features().column(col);
    let [low, mid, high] = quantile_bands(values.as_slice(), low_q, high_q)?;
    if low.is_empty() || high.is_empty() {
        return Err(Error::Parameter(format!(
            "quantile band on `{feature}` leaves an empty tail ({} low, {} high)",
            low.len(),
            high.len()
        )));
    }
    let (train, iid_test) = train_test_split(&d.select(&mid), iid_test_fraction, seed)?;
    Ok(ShiftSplit {
        train,
        iid_test,
        tail_low: d.select(&low),
        tail_high: d.select(&high),
        split_feature: feature.to_string(),
        low_q,
        high_q,
    })
}
