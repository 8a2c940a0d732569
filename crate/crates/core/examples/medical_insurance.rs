//! Runs the insurance-charges experiment on a local copy of the dataset
//! (columns age, sex, bmi, children, smoker, region, charges).
//!
//! cargo run --release -p lindec --example medical_insurance -- data/insurance.csv

use std::path::{Path, PathBuf};

use lindec::{DatasetSpec, ExperimentConfig};

fn main() -> lindec::Result<()> {
    let csv = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| "data/insurance.csv".into());
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/medical_insurance.json");
    let mut cfg = ExperimentConfig::from_file(config)?;
    if let DatasetSpec::Csv { path, .. } = &mut cfg.dataset {
        *path = csv;
    }
    let run = lindec::run(&cfg)?;
    print!("{}", run.report.summary_table());
    for m in &run.report.models {
        println!("seed {}: surrogate intercept {:.1}", m.seed, m.surrogate.intercept);
    }
    Ok(())
}
