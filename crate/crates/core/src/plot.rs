//! Plot data: paired prediction series per evaluation domain, and the
//! per-seed artifact dumps they can be regenerated from.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::experiment::SeedArtifacts;
use crate::linalg::Vector;
use crate::mlp::{MlpModel, ModelDocument};
use crate::report::DomainLabel;
use crate::surrogate::LinearModel;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vector,
    pub y: Vector,
}

impl PlotSeries {
    pub fn new(name: &str, x_label: &str, y_label: &str, x: Vector, y: Vector) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "plot series `{name}` has {} x and {} y values",
                x.len(),
                y.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io(format!("<plot {}>", self.name), e);
        writeln!(w, "{},{}", self.x_label, self.y_label).map_err(io)?;
        for (x, y) in self.x.iter().zip(self.y.iter()) {
            writeln!(w, "{x:e},{y:e}").map_err(io)?;
        }
        Ok(())
    }
}

/// Three series for one evaluation set: true y against the baseline, true y
/// against the network, and the network against its surrogate.
pub fn domain_series(
    baseline: &LinearModel,
    network: &MlpModel,
    surrogate: &LinearModel,
    eval: &Dataset,
) -> Result<Vec<PlotSeries>> {
    let x = eval.features();
    let y = eval.target().clone();
    let f = network.forward(x)?;
    Ok(vec![
        PlotSeries::new("baseline", "y_true", "y_baseline", y.clone(), baseline.predict(x)?)?,
        PlotSeries::new("network", "y_true", "y_network", y, f.clone())?,
        PlotSeries::new("surrogate", "y_network", "y_surrogate", f, surrogate.predict(x)?)?,
    ])
}

/// Writes `<domain>_<series>.csv` files and returns their paths.
pub fn write_domain_series(
    out_dir: &Path,
    label: DomainLabel,
    series: &[PlotSeries],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    series
        .iter()
        .map(|s| {
            let path = out_dir.join(format!("{}_{}.csv", label.slug(), s.name));
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            s.write_csv(std::io::BufWriter::new(file))?;
            Ok(path)
        })
        .collect()
}

pub const ARTIFACT_FORMAT: &str = "lindec-artifacts";
pub const ARTIFACT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSetDump {
    pub label: DomainLabel,
    pub dataset: Dataset,
}

/// Trained models and standardized evaluation sets of one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedDump {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub standardizer: Standardizer,
    pub baseline: LinearModel,
    pub surrogate: LinearModel,
    pub network: ModelDocument,
    pub eval_sets: Vec<EvalSetDump>,
}

impl SeedDump {
    pub fn from_artifacts(a: &SeedArtifacts) -> Self {
        Self {
            format: ARTIFACT_FORMAT.into(),
            version: ARTIFACT_FORMAT_VERSION,
            seed: a.seed,
            standardizer: a.standardizer.clone(),
            baseline: a.baseline.clone(),
            surrogate: a.surrogate.clone(),
            network: ModelDocument::new(a.network.model.clone()),
            eval_sets: a
                .eval_sets
                .iter()
                .map(|(label, dataset)| EvalSetDump {
                    label: *label,
                    dataset: dataset.clone(),
                })
                .collect(),
        }
    }

    pub fn file_name(seed: u64) -> String {
        format!("seed_{seed}.json")
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(Self::file_name(self.seed));
        fs::write(&path, serde_json::to_string(self)?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dump: SeedDump = serde_json::from_str(&text)?;
        if dump.format != ARTIFACT_FORMAT || dump.version != ARTIFACT_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "{}: unsupported artifact document {} v{}",
                path.display(),
                dump.format,
                dump.version
            )));
        }
        Ok(dump)
    }

    pub fn network(&self) -> Result<MlpModel> {
        self.network.clone().into_model()
    }

    /// Plot series for every evaluation set in the dump.
    pub fn series(&self) -> Result<Vec<(DomainLabel, Vec<PlotSeries>)>> {
        let net = self.network()?;
        self.eval_sets
            .iter()
            .map(|e| {
                Ok((
                    e.label,
                    domain_series(&self.baseline, &net, &self.surrogate, &e.dataset)?,
                ))
            })
            .collect()
    }
}
