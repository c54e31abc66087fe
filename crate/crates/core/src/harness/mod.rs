//! Configuration, scenario orchestration, sweeps and on-disk artifacts.

mod bundle;
mod config;
mod sweep;

use std::path::Path;

pub use bundle::{
    ansatz_summary, compute_scenario, diagnose, parse_snapshot, render_ansatz_csv, render_diagnostics_csv,
    render_json, render_snapshot, report_context, run_ansatz, run_scenario, verify, AnsatzSummary, BundleOutcome,
    RunStatus, ScenarioData, Stage, StatusKind, VerifyOutcome, ANSATZ_CSV, ANSATZ_SUMMARY, CONFIG_FILE,
    DIAGNOSTICS_COLUMNS, DIAGNOSTICS_CSV, EXIT_PASS, EXIT_STAGE, EXIT_VERDICT, REPORT_JSON, SNAPSHOT_DIR,
    STATUS_JSON, TRAJECTORY_INDEX,
};
pub use config::{parse_config, RunConfig, SnapshotSchedule, DEFAULT_OUTPUT_DIR};
pub use sweep::{sweep, SweepRow, SUMMARY_CSV};

use crate::diagnostics::{fit_rate, RateFit};
use crate::error::{Error, Result};

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e6)`.
pub(crate) fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Fits column `column` of a CSV file against its `t` column. Rows with a
/// blank cell in either column are skipped.
pub fn fit_csv(path: &Path, column: &str, window: (f64, f64)) -> Result<RateFit> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config(name, format!("no such column in {}", path.display())))
    };
    let (ti, yi) = (find("t")?, find(column)?);
    let mut series = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let (t, y) = (rec.get(ti).unwrap_or("").trim(), rec.get(yi).unwrap_or("").trim());
        if t.is_empty() || y.is_empty() {
            continue;
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Fit(format!("unreadable number {s:?}")));
        series.push((parse(t)?, parse(y)?));
    }
    fit_rate(&series, window)
}
