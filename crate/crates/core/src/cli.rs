//! Command-line front end. The `lindec` binary is a thin wrapper around
//! [`main_with_args`].

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::dataset::generate_synthetic;
use crate::error::{Error, Result};
use crate::experiment;
use crate::plot::{domain_series, write_domain_series, SeedDump};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

pub const REPORT_FILE: &str = "report.json";
pub const MODELS_DIR: &str = "models";

#[derive(Debug, Parser)]
#[command(name = "lindec", version, about = "Linear decodability of regression networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment config; writes report.json and plot CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-seed models and evaluation sets under <out>/models.
        #[arg(long)]
        dump_models: bool,
    },
    /// Write the synthetic x·sin(x) dataset as CSV.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        noise_std: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        x_max: f64,
    },
    /// Regenerate plot CSVs from dumped artifacts.
    Plotdata {
        #[arg(long)]
        artifacts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed to plot; defaults to the first dumped seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Exit status for a failure from `run` or `plotdata`.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io { .. }
        | Error::Json(_)
        | Error::Schema(_)
        | Error::Parse { .. }
        | Error::EmptyData(_)
        | Error::DegenerateVariance(_)
        | Error::Parameter(_) => EXIT_DATA,
        Error::Shape(_)
        | Error::NonFinite(_)
        | Error::NotPositiveDefinite
        | Error::Invariant(_)
        | Error::Seed { .. } => EXIT_INTERNAL,
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            dump_models,
        } => cmd_run(&config, &out, dump_models).map_err(|e| (exit_code(&e), e)),
        Command::Synth {
            n,
            noise_std,
            seed,
            out,
            x_min,
            x_max,
        } => cmd_synth(n, noise_std, seed, &out, x_min, x_max).map_err(|e| {
            let code = match e {
                Error::Parameter(_) => EXIT_CONFIG,
                _ => exit_code(&e),
            };
            (code, e)
        }),
        Command::Plotdata {
            artifacts,
            out,
            seed,
        } => cmd_plotdata(&artifacts, &out, seed).map_err(|e| (exit_code(&e), e)),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err((code, e)) => {
            eprintln!("lindec: {e}");
            code
        }
    }
}

pub fn cmd_run(config_path: &Path, out_dir: &Path, dump_models: bool) -> Result<()> {
    let cfg = ExperimentConfig::from_file(config_path)?;
    let run = experiment::run(&cfg)?;
    let report_json = run.report.to_json()?;
    let first = &run.artifacts[0];
    let series = first
        .eval_sets
        .iter()
        .map(|(label, d)| {
            Ok((
                *label,
                domain_series(&first.baseline, &first.network.model, &first.surrogate, d)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let report_path = out_dir.join(REPORT_FILE);
    fs::write(&report_path, report_json).map_err(|e| Error::io(&report_path, e))?;
    for (label, s) in &series {
        write_domain_series(out_dir, *label, s)?;
    }
    if dump_models {
        let dir = out_dir.join(MODELS_DIR);
        for a in &run.artifacts {
            SeedDump::from_artifacts(a).save(&dir)?;
        }
    }
    print!("{}", run.report.summary_table());
    Ok(())
}

pub fn cmd_synth(
    n: usize,
    noise_std: f64,
    seed: u64,
    out_path: &Path,
    x_min: f64,
    x_max: f64,
) -> Result<()> {
    if x_min >= x_max {
        return Err(Error::Parameter(format!("x_min ({x_min}) must be below x_max ({x_max})")));
    }
    let d = generate_synthetic(n, noise_std, x_min, x_max, seed)?;
    let mut buf = Vec::new();
    d.write_csv(&mut buf)?;
    if let Some(dir) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(out_path, buf).map_err(|e| Error::io(out_path, e))
}

fn find_dumps(artifacts: &Path) -> Result<Vec<PathBuf>> {
    let dir = if artifacts.join(MODELS_DIR).is_dir() {
        artifacts.join(MODELS_DIR)
    } else {
        artifacts.to_path_buf()
    };
    let mut found: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("seed_") && n.ends_with(".json"))
        })
        .collect();
    found.sort();
    if found.is_empty() {
        return Err(Error::io(
            dir,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no seed_*.json artifacts (rerun with --dump-models)",
            ),
        ));
    }
    Ok(found)
}

pub fn cmd_plotdata(artifacts: &Path, out_dir: &Path, seed: Option<u64>) -> Result<()> {
    let dumps = find_dumps(artifacts)?;
    let dump = match seed {
        Some(s) => {
            let path = dumps
                .iter()
                .find(|p| p.file_name().and_then(|n| n.to_str()) == Some(&SeedDump::file_name(s)))
                .ok_or_else(|| {
                    Error::io(
                        artifacts,
                        std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            format!("no artifacts for seed {s}"),
                        ),
                    )
                })?;
            SeedDump::load(path)?
        }
        None => {
            // Lowest seed number, not lexicographic file order.
            let mut loaded = dumps
                .iter()
                .map(|p| SeedDump::load(p))
                .collect::<Result<Vec<_>>>()?;
            loaded.sort_by_key(|d| d.seed);
            loaded.swap_remove(0)
        }
    };
    let series = dump.series()?;
    for (label, s) in &series {
        write_domain_series(out_dir, *label, s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Schema("x".into())), EXIT_DATA);
        assert_eq!(
            exit_code(&Error::Parse {
                row: 3,
                column: "a".into(),
                message: "bad".into()
            }),
            EXIT_DATA
        );
        assert_eq!(exit_code(&Error::NotPositiveDefinite), EXIT_INTERNAL);
        let wrapped = Error::DegenerateVariance("y".into()).with_seed(4);
        assert_eq!(exit_code(&wrapped), EXIT_DATA);
        assert_eq!(exit_code(&Error::Invariant("λ".into()).with_seed(1)), EXIT_INTERNAL);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(main_with_args(["lindec", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["lindec", "run"]), EXIT_CONFIG);
    }
}
