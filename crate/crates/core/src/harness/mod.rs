//! Seeded, resumable experiment runs writing `config.json`, `raw.csv`,
//! `summary.csv` and `meta.json` into one directory.

mod config;
mod experiments;
mod report;

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{apply_override, ExperimentConfig, ExperimentKind, InnerProductEstimator, SamplingConfig};
pub use experiments::{raw_header, run_in_memory, summarize, unit_count, Context};
pub use report::{percentile_label, report_percentiles, summarize_groups, Table};

use crate::error::{Error, Result};

pub const CONFIG_FILE: &str = "config.json";
pub const RAW_FILE: &str = "raw.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const META_FILE: &str = "meta.json";

/// What a finished run left on disk.
#[derive(Clone, Debug)]
pub struct Report {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub raw: Table,
    pub summary: Table,
    pub meta: serde_json::Value,
}

/// Run an experiment into `out`. If `out` already holds a run of the same
/// configuration, completed units are kept and only the rest are computed.
/// A directory holding a different configuration is a config error.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Report> {
    cfg.validate()?;
    let started = Instant::now();
    let started_at = unix_seconds();
    fs::create_dir_all(out)?;
    let config_text = cfg.to_json_pretty() + "\n";
    let config_path = out.join(CONFIG_FILE);
    let raw_path = out.join(RAW_FILE);
    let header = raw_header(cfg.experiment);

    let mut done = Vec::new();
    if config_path.exists() {
        if fs::read_to_string(&config_path)? != config_text {
            return Err(Error::config(
                "--out",
                format!("{} holds a run with a different configuration", out.display()),
            ));
        }
        if raw_path.exists() {
            done = resume_raw(&raw_path, header)?;
        }
    } else {
        fs::write(&config_path, &config_text)?;
    }
    if done.is_empty() {
        fs::write(&raw_path, Table::new(header).to_csv())?;
    }

    let ctx = Context::new(cfg)?;
    let units = unit_count(cfg);
    let mut file = OpenOptions::new().append(true).open(&raw_path)?;
    let mut computed = 0;
    for u in 0..units {
        if done.contains(&u) {
            continue;
        }
        let rows = ctx.run_unit(u)?;
        let chunk = Table { header: Vec::new(), rows };
        file.write_all(chunk.rows_csv().as_bytes())?;
        file.flush()?;
        computed += 1;
        log::info!("{}: unit {}/{} done", cfg.experiment, u + 1, units);
    }
    drop(file);

    let raw = Table::read(&raw_path)?;
    let summary = summarize(cfg, &raw)?;
    fs::write(out.join(SUMMARY_FILE), summary.to_csv())?;
    let meta = serde_json::json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "estimator_seed": cfg.estimator.seed,
        "optimizer_seed": cfg.optimizer.seed,
        "units": units,
        "units_computed": computed,
        "units_resumed": done.len(),
        "raw_rows": raw.rows.len(),
        "started_at_unix": started_at,
        "finished_at_unix": unix_seconds(),
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "crate_version": env!("CARGO_PKG_VERSION"),
    });
    fs::write(out.join(META_FILE), serde_json::to_string_pretty(&meta).expect("json") + "\n")?;
    Ok(Report {
        dir: out.to_path_buf(),
        config: cfg.clone(),
        raw,
        summary,
        meta,
    })
}

/// Keep the complete units of an interrupted raw file and rewrite it without
/// the last (possibly partial) unit. Returns the kept unit indices.
fn resume_raw(path: &Path, header: &[&str]) -> Result<Vec<usize>> {
    let mut table = Table::read(path)?;
    if table.header != header {
        return Err(Error::Parse {
            line: 1,
            message: format!("{} has unexpected columns", path.display()),
        });
    }
    let unit_of = |row: &Vec<String>, line: usize| -> Result<usize> {
        row[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad unit index {:?}", row[0]),
        })
    };
    let mut units = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let u = unit_of(row, i + 2)?;
        if units.last() != Some(&u) {
            units.push(u);
        }
    }
    if let Some(last) = units.pop() {
        table.rows.retain(|r| r[0] != last.to_string());
    }
    fs::write(path, table.to_csv())?;
    Ok(units)
}

/// Recompute the summary of a finished run from its raw table and compare it
/// byte for byte with the stored one.
pub fn verify(dir: &Path) -> Result<()> {
    let cfg = ExperimentConfig::from_json(&fs::read_to_string(dir.join(CONFIG_FILE))?)?;
    let raw = Table::read(&dir.join(RAW_FILE))?;
    let expected_rows = unit_count(&cfg);
    let units: std::collections::BTreeSet<&str> = raw.rows.iter().map(|r| r[0].as_str()).collect();
    if units.len() != expected_rows {
        return Err(Error::Numerical(format!(
            "raw table covers {} of {} units",
            units.len(),
            expected_rows
        )));
    }
    let summary = summarize(&cfg, &raw)?.to_csv();
    if fs::read_to_string(dir.join(SUMMARY_FILE))? != summary {
        return Err(Error::Numerical("summary.csv does not match the raw table".into()));
    }
    Ok(())
}

fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}
