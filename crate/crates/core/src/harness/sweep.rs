//! Independent runs over many configurations with one summary table.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::bundle::{run_scenario, StatusKind, EXIT_STAGE};
use super::config::parse_config;
use super::fmt_num;
use crate::error::{Error, Result};

pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub config: String,
    pub output_dir: String,
    pub status: String,
    pub exit_code: i32,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_cells: Option<usize>,
    pub exp_d_u: Option<f64>,
    pub exp_d_rho: Option<f64>,
    pub exp_x_plus: Option<f64>,
    pub exp_dx_plus_dt: Option<f64>,
    pub error: String,
}

impl SweepRow {
    fn failed(config: &Path, dir: &Path, e: &Error) -> Self {
        Self {
            config: config.display().to_string(),
            output_dir: dir.display().to_string(),
            status: "failed".into(),
            exit_code: EXIT_STAGE,
            gamma: None,
            epsilon: None,
            n_cells: None,
            exp_d_u: None,
            exp_d_rho: None,
            exp_x_plus: None,
            exp_dx_plus_dt: None,
            error: e.to_string(),
        }
    }
}

/// One output directory per config, named after the file stem and made unique
/// by a numeric suffix when stems collide.
fn run_dirs(configs: &[PathBuf], out: &Path) -> Vec<PathBuf> {
    let mut used = HashSet::new();
    configs
        .iter()
        .map(|c| {
            let stem = c.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            let mut name = stem.clone();
            let mut k = 1;
            while !used.insert(name.clone()) {
                name = format!("{stem}-{k}");
                k += 1;
            }
            out.join(name)
        })
        .collect()
}

fn run_one(config: &Path, dir: &Path) -> SweepRow {
    let parsed = fs::read_to_string(config)
        .map_err(|e| Error::io(config, e))
        .and_then(|text| parse_config(&text));
    let mut cfg = match parsed {
        Ok(c) => c,
        Err(e) => return SweepRow::failed(config, dir, &e),
    };
    cfg.output_dir = dir.to_path_buf();
    let outcome = match run_scenario(&cfg) {
        Ok(o) => o,
        Err(e) => return SweepRow::failed(config, dir, &e),
    };
    let fits = outcome.data.as_ref().map(|d| &d.report.fits);
    let exp = |f: fn(&crate::diagnostics::Fits) -> Option<crate::diagnostics::RateFit>| {
        fits.and_then(f).map(|r| r.exponent)
    };
    SweepRow {
        config: config.display().to_string(),
        output_dir: dir.display().to_string(),
        status: match outcome.status.status {
            StatusKind::Ok => "ok",
            StatusKind::VerdictFailed => "verdict_failed",
            StatusKind::Inconclusive => "inconclusive",
            StatusKind::Failed => "failed",
        }
        .into(),
        exit_code: outcome.status.exit_code,
        gamma: Some(cfg.gamma),
        epsilon: Some(cfg.position.amplitude),
        n_cells: Some(cfg.n_cells),
        exp_d_u: exp(|f| f.d_u),
        exp_d_rho: exp(|f| f.d_rho),
        exp_x_plus: exp(|f| f.x_plus),
        exp_dx_plus_dt: exp(|f| f.dx_plus_dt),
        error: outcome.status.error.unwrap_or_default(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Runs every config concurrently, each into its own directory under `out`,
/// then writes `out/summary.csv` in input order from this thread alone.
/// Failing configs become failed rows; the sweep itself only fails on I/O.
pub fn sweep(configs: &[PathBuf], out: &Path) -> Result<Vec<SweepRow>> {
    if configs.is_empty() {
        return Err(Error::config("configs", "sweep needs at least one config"));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let dirs = run_dirs(configs, out);
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .zip(dirs.par_iter())
        .map(|(c, d)| run_one(c, d))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "config",
        "output_dir",
        "status",
        "exit_code",
        "gamma",
        "epsilon",
        "n_cells",
        "exp_D_u",
        "exp_D_rho",
        "exp_x_plus",
        "exp_dx_plus_dt",
        "error",
    ])?;
    for r in &rows {
        w.write_record([
            r.config.clone(),
            r.output_dir.clone(),
            r.status.clone(),
            r.exit_code.to_string(),
            opt(r.gamma),
            opt(r.epsilon),
            r.n_cells.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.exp_d_u),
            opt(r.exp_d_rho),
            opt(r.exp_x_plus),
            opt(r.exp_dx_plus_dt),
            r.error.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(SUMMARY_CSV, e.into_error()))?;
    let p = out.join(SUMMARY_CSV);
    fs::write(&p, bytes).map_err(|e| Error::io(p, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colliding_stems_get_distinct_dirs() {
        let cfgs = vec![PathBuf::from("a/run.txt"), PathBuf::from("b/run.txt"), PathBuf::from("c/other.txt")];
        let dirs = run_dirs(&cfgs, Path::new("out"));
        assert_eq!(dirs, vec![PathBuf::from("out/run"), PathBuf::from("out/run-1"), PathBuf::from("out/other")]);
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(sweep(&[], Path::new("unused")).is_err());
    }
}
