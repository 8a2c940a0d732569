//! Runs the bundled synthetic config end to end: y = x·sin(x) is invisible to
//! any affine model, so both linear R² values and λ(f) should sit near zero
//! while the network fits well.

use std::path::Path;

use lindec::ExperimentConfig;

fn main() -> lindec::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/synthetic.json");
    let cfg = ExperimentConfig::from_file(path)?;
    let run = lindec::run(&cfg)?;
    print!("{}", run.report.summary_table());
    Ok(())
}
