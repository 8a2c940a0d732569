//! Distribution-shift experiment on California housing: train on the middle
//! 80% of median income, evaluate on IID rows and on both income tails.
//!
//! cargo run --release -p lindec --example california_shift -- data/california_housing.csv

use std::path::{Path, PathBuf};

use lindec::{DatasetSpec, DomainLabel, ExperimentConfig};

fn main() -> lindec::Result<()> {
    let csv = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| "data/california_housing.csv".into());
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/california_housing.json");
    let mut cfg = ExperimentConfig::from_file(config)?;
    if let DatasetSpec::Csv { path, .. } = &mut cfg.dataset {
        *path = csv;
    }
    let run = lindec::run(&cfg)?;
    print!("{}", run.report.summary_table());
    let iid = &run.report.domain(DomainLabel::Iid).unwrap().mean;
    let tail = &run.report.domain(DomainLabel::TailHigh).unwrap().mean;
    println!(
        "surrogate beats the network on the high tail: {}",
        tail.delta_rmse < 0.0 && iid.delta_rmse > 0.0
    );
    Ok(())
}
