//! Scenario execution and the on-disk artifact bundle.
//!
//! A bundle directory holds:
//!
//! ```text
//! config.txt             canonical configuration
//! ansatz.csv             ansatz samples with envelope ratios
//! ansatz_summary.json    K_observed, phase times, Duhamel residual
//! snapshots/NNNN.csv     solver states
//! trajectory.csv         snapshot index
//! diagnostics.csv        per-snapshot energies, gaps and boundary data
//! theorem_report.json    rate fits and verdicts
//! status.json            outcome, failing stage, exit code
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{parse_config, RunConfig};
use super::fmt_num;
use crate::ansatz::{h_envelope, h_t_envelope, AnsatzTable, DerivativeBound, MAX_DERIVATIVE_ORDER};
use crate::diagnostics::{
    snapshot_diagnostics, theorem_report, ReportContext, ReportMode, SnapshotDiagnostics, TheoremReport, Verdict,
};
use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::solver::{self, Grid, RunSettings, SolverState};

pub const CONFIG_FILE: &str = "config.txt";
pub const ANSATZ_CSV: &str = "ansatz.csv";
pub const ANSATZ_SUMMARY: &str = "ansatz_summary.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const TRAJECTORY_INDEX: &str = "trajectory.csv";
pub const DIAGNOSTICS_CSV: &str = "diagnostics.csv";
pub const REPORT_JSON: &str = "theorem_report.json";
pub const STATUS_JSON: &str = "status.json";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 2;
pub const EXIT_STAGE: i32 = 3;

pub const DIAGNOSTICS_COLUMNS: [&str; 21] = [
    "t",
    "E0",
    "E0_tilde",
    "E1",
    "E2",
    "E01",
    "E11",
    "sup_bundle",
    "D_rho",
    "D_u",
    "x_plus",
    "x_minus",
    "elliptic_ratio_01",
    "E02",
    "elliptic_ratio_11",
    "elliptic_ratio_02",
    "D_rho_unweighted",
    "dx_plus_dt",
    "d2x_plus_dt2",
    "boundary_ratio",
    "w_sup_relative",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Ansatz,
    Solver,
    Diagnostics,
    Report,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusKind {
    Ok,
    VerdictFailed,
    Inconclusive,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub status: StatusKind,
    pub stage: Option<Stage>,
    pub error: Option<String>,
    pub verdict: Option<Verdict>,
    pub exit_code: i32,
}

impl RunStatus {
    fn from_verdict(v: Verdict) -> Self {
        let (status, exit_code) = match v {
            Verdict::Pass | Verdict::Info => (StatusKind::Ok, EXIT_PASS),
            Verdict::Fail => (StatusKind::VerdictFailed, EXIT_VERDICT),
            Verdict::Inconclusive => (StatusKind::Inconclusive, EXIT_VERDICT),
        };
        Self {
            status,
            stage: None,
            error: None,
            verdict: Some(v),
            exit_code,
        }
    }

    fn failed(stage: Stage, e: &Error) -> Self {
        Self {
            status: StatusKind::Failed,
            stage: Some(stage),
            error: Some(e.to_string()),
            verdict: None,
            exit_code: EXIT_STAGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnsatzSummary {
    pub gamma: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    #[serde(rename = "K_observed")]
    pub k_observed: f64,
    pub min_stretch_ratio: f64,
    pub h_ratio_max: f64,
    pub h_t_ratio_max: f64,
    pub min_eta_xt: f64,
    pub min_h: f64,
    pub derivative_bounds: Vec<DerivativeBound>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub h_max: Option<f64>,
    /// Why the phase times are missing, if they are.
    pub phase_note: Option<String>,
    pub duhamel_residual: f64,
    pub steps: usize,
}

pub fn ansatz_summary(table: &AnsatzTable) -> Result<AnsatzSummary> {
    let env = table.decay_envelope_check(MAX_DERIVATIVE_ORDER)?;
    let (phase, phase_note) = match table.phase_portrait() {
        Ok(p) => (Some(p), None),
        Err(e @ Error::HorizonTooShort { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(AnsatzSummary {
        gamma: table.gamma,
        rel_tol: table.rel_tol,
        t_end: table.t_end(),
        k_observed: env.k_observed,
        min_stretch_ratio: env.min_stretch_ratio,
        h_ratio_max: env.h_ratio_max,
        h_t_ratio_max: env.h_t_ratio_max,
        min_eta_xt: env.min_eta_xt,
        min_h: env.min_h,
        derivative_bounds: env.orders,
        t0: phase.map(|p| p.t0),
        t1: phase.map(|p| p.t1),
        t2: phase.map(|p| p.t2),
        h_max: phase.map(|p| p.h_max),
        phase_note,
        duhamel_residual: table.duhamel_residual()?,
        steps: table.times.len() - 1,
    })
}

/// `t, eta_x, eta_xt, eta_xtt, h, h_t, envelope_ratio_h, envelope_ratio_ht` at
/// the integrator mesh; the ratios are blank for `t < 1`.
pub fn render_ansatz_csv(table: &AnsatzTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "eta_x", "eta_xt", "eta_xtt", "h", "h_t", "envelope_ratio_h", "envelope_ratio_ht"])?;
    for i in 0..table.times.len() {
        let t = table.times[i];
        let (rh, rht) = if t >= 1.0 {
            (
                fmt_num(table.h[i] / h_envelope(table.gamma, t)),
                fmt_num(table.h_t[i].abs() / h_t_envelope(table.gamma, t)),
            )
        } else {
            (String::new(), String::new())
        };
        w.write_record([
            fmt_num(t),
            fmt_num(table.eta_x[i]),
            fmt_num(table.eta_xt[i]),
            fmt_num(table.eta_xtt[i]),
            fmt_num(table.h[i]),
            fmt_num(table.h_t[i]),
            rh,
            rht,
        ])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::io("<memory>", e.into_error()))
}

pub fn render_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Header comment lines, then `x_lagrangian, eta, eta_t, density_mid` per node.
/// The density column holds the cell to the right of the node and is blank on the last row.
pub fn render_snapshot(gas: &GasParameters, grid: &Grid, state: &SolverState) -> Result<Vec<u8>> {
    let fields = solver::physical_fields(grid, state)?;
    let mut out = String::new();
    for (k, v) in [
        ("gamma", fmt_num(gas.gamma)),
        ("mass", fmt_num(gas.mass)),
        ("A", fmt_num(gas.a)),
        ("B", fmt_num(gas.b)),
        ("L", fmt_num(gas.half_width)),
        ("n_cells", grid.n_cells.to_string()),
        ("t", fmt_num(state.t)),
        ("step_count", state.step_count.to_string()),
    ] {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    let mut w = csv::Writer::from_writer(out.into_bytes());
    w.write_record(["x_lagrangian", "eta", "eta_t", "density_mid"])?;
    for i in 0..grid.node_count() {
        w.write_record([
            fmt_num(grid.nodes[i]),
            fmt_num(state.eta[i]),
            fmt_num(state.eta_t[i]),
            fields.density_mids.get(i).map_or(String::new(), |&d| fmt_num(d)),
        ])?;
    }
    finish(w)
}

/// Reads a snapshot written by [`render_snapshot`] back into a solver state.
pub fn parse_snapshot(text: &str) -> Result<SolverState> {
    let mut header = HashMap::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix('#') {
            Some(h) => {
                if let Some((k, v)) = h.split_once('=') {
                    header.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let get = |k: &str| {
        header
            .get(k)
            .ok_or_else(|| Error::config(k, "missing from snapshot header"))
    };
    let t: f64 = get("t")?.parse().map_err(|_| Error::config("t", "bad snapshot time"))?;
    let step_count: u64 = get("step_count")?
        .parse()
        .map_err(|_| Error::config("step_count", "bad step count"))?;
    let mut eta = Vec::new();
    let mut eta_t = Vec::new();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize, name: &str| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::config(name, "unreadable snapshot value"))
        };
        eta.push(num(1, "eta")?);
        eta_t.push(num(2, "eta_t")?);
    }
    Ok(SolverState {
        t,
        eta,
        eta_t,
        step_count,
    })
}

pub fn render_diagnostics_csv(rows: &[SnapshotDiagnostics]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DIAGNOSTICS_COLUMNS)?;
    for r in rows {
        let e = &r.energies;
        let vals = [
            r.t,
            e.e0,
            e.e0_tilde,
            e.e1,
            e.e2,
            e.e01,
            e.e11,
            e.sup_bundle,
            r.d_rho,
            r.d_u,
            r.x_plus,
            r.x_minus,
            r.elliptic_01.value(),
            e.e02,
            r.elliptic_11.value(),
            r.elliptic_02.value(),
            r.d_rho_unweighted,
            r.dx_plus_dt,
            r.d2x_plus_dt2,
            r.boundary_ratio,
            r.w_sup_relative,
        ];
        w.write_record(vals.iter().map(|&v| fmt_num(v)))?;
    }
    finish(w)
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, bytes).map_err(|e| Error::io(p, e))
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let p = dir.join(name);
    fs::read_to_string(&p).map_err(|e| Error::io(p, e))
}

fn snapshot_name(k: usize) -> String {
    format!("{SNAPSHOT_DIR}/{k:04}.csv")
}

fn render_index(states: &[SolverState]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "t", "path"])?;
    for (k, s) in states.iter().enumerate() {
        w.write_record([k.to_string(), fmt_num(s.t), snapshot_name(k)])?;
    }
    finish(w)
}

/// Everything a scenario computes, before it is written.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub gas: GasParameters,
    pub table: AnsatzTable,
    pub summary: AnsatzSummary,
    pub grid: Grid,
    pub snapshots: Vec<SolverState>,
    pub rows: Vec<SnapshotDiagnostics>,
    pub report: TheoremReport,
}

pub fn report_context(config: &RunConfig, gas: GasParameters, summary: &AnsatzSummary) -> ReportContext {
    let spec = config.perturbation();
    ReportContext {
        gas,
        window: config.window(),
        mode: if spec.is_zero() { ReportMode::Exact } else { ReportMode::Perturbed },
        odd_data: spec.is_odd(),
        k_observed: summary.k_observed,
    }
}

pub fn diagnose(grid: &Grid, snapshots: &[SolverState], table: &AnsatzTable, gas: &GasParameters) -> Result<Vec<SnapshotDiagnostics>> {
    snapshots
        .par_iter()
        .map(|s| snapshot_diagnostics(grid, s, table, gas))
        .collect()
}

/// Runs every stage in memory; an error carries the stage it came from.
pub fn compute_scenario(config: &RunConfig) -> std::result::Result<ScenarioData, (Stage, Error)> {
    let at = |stage: Stage| move |e: Error| (stage, e);
    config.validate().map_err(at(Stage::Config))?;
    let gas = GasParameters::derive(config.gamma, config.mass).map_err(at(Stage::Config))?;
    let table = AnsatzTable::integrate(&gas, config.t_end, config.rel_tol).map_err(at(Stage::Ansatz))?;
    let summary = ansatz_summary(&table).map_err(at(Stage::Ansatz))?;
    let grid = Grid::new(&gas, config.n_cells).map_err(at(Stage::Solver))?;
    let settings = RunSettings {
        t_end: config.t_end,
        cfl: config.cfl,
    };
    let trajectory = solver::run(&gas, &grid, &config.perturbation(), settings, &config.snapshot_times())
        .map_err(at(Stage::Solver))?;
    let rows = diagnose(&grid, &trajectory.snapshots, &table, &gas).map_err(at(Stage::Diagnostics))?;
    let report = theorem_report(&rows, &report_context(config, gas, &summary));
    Ok(ScenarioData {
        gas,
        table,
        summary,
        grid,
        snapshots: trajectory.snapshots,
        rows,
        report,
    })
}

fn write_bundle(dir: &Path, data: &ScenarioData) -> Result<()> {
    write(dir, ANSATZ_CSV, &render_ansatz_csv(&data.table)?)?;
    write(dir, ANSATZ_SUMMARY, &render_json(&data.summary)?)?;
    let snap_dir = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;
    for (k, s) in data.snapshots.iter().enumerate() {
        write(dir, &snapshot_name(k), &render_snapshot(&data.gas, &data.grid, s)?)?;
    }
    write(dir, TRAJECTORY_INDEX, &render_index(&data.snapshots)?)?;
    write(dir, DIAGNOSTICS_CSV, &render_diagnostics_csv(&data.rows)?)?;
    write(dir, REPORT_JSON, &render_json(&data.report)?)
}

#[derive(Debug, Clone)]
pub struct BundleOutcome {
    pub dir: PathBuf,
    pub status: RunStatus,
    pub data: Option<ScenarioData>,
}

/// Runs a scenario into `config.output_dir` and records the outcome in
/// `status.json`. Stage failures are recorded, not returned; only a failure to
/// create the directory or write the status file is an `Err`.
pub fn run_scenario(config: &RunConfig) -> Result<BundleOutcome> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for stale in [STATUS_JSON, REPORT_JSON, DIAGNOSTICS_CSV, TRAJECTORY_INDEX] {
        let _ = fs::remove_file(dir.join(stale));
    }
    write(&dir, CONFIG_FILE, config.to_text().as_bytes())?;
    let (status, data) = match compute_scenario(config) {
        Ok(data) => match write_bundle(&dir, &data) {
            Ok(()) => (RunStatus::from_verdict(data.report.verdict), Some(data)),
            Err(e) => (RunStatus::failed(Stage::Write, &e), None),
        },
        Err((stage, e)) => {
            log::error!("{} failed at stage {stage:?}: {e}", dir.display());
            (RunStatus::failed(stage, &e), None)
        }
    };
    write(&dir, STATUS_JSON, &render_json(&status)?)?;
    Ok(BundleOutcome { dir, status, data })
}

/// Integrates the ansatz for `config` and writes `ansatz.csv` and `ansatz_summary.json`.
pub fn run_ansatz(config: &RunConfig) -> Result<AnsatzSummary> {
    let gas = GasParameters::derive(config.gamma, config.mass)?;
    let table = AnsatzTable::integrate(&gas, config.t_end, config.rel_tol)?;
    let summary = ansatz_summary(&table)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, ANSATZ_CSV, &render_ansatz_csv(&table)?)?;
    write(dir, ANSATZ_SUMMARY, &render_json(&summary)?)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub checked: Vec<String>,
    pub mismatches: Vec<String>,
    pub verdict: Verdict,
    pub exit_code: i32,
}

/// Recomputes a bundle from its `config.txt` and compares every artifact byte
/// for byte. Diagnostics are additionally recomputed from the stored snapshots,
/// so a tampered snapshot is caught even if the solver reproduces the original.
pub fn verify(dir: &Path) -> Result<VerifyOutcome> {
    let mut config = parse_config(&read(dir, CONFIG_FILE)?)?;
    config.output_dir = dir.to_path_buf();
    let data = compute_scenario(&config).map_err(|(_, e)| e)?;
    let mut checked = Vec::new();
    let mut mismatches = Vec::new();
    let mut compare = |name: String, expected: Vec<u8>| {
        let p = dir.join(&name);
        match fs::read(&p) {
            Ok(found) if found == expected => {}
            Ok(_) => mismatches.push(format!("{name}: contents differ")),
            Err(e) => mismatches.push(format!("{name}: {e}")),
        }
        checked.push(name);
    };
    compare(ANSATZ_CSV.into(), render_ansatz_csv(&data.table)?);
    compare(ANSATZ_SUMMARY.into(), render_json(&data.summary)?);
    compare(TRAJECTORY_INDEX.into(), render_index(&data.snapshots)?);
    for (k, s) in data.snapshots.iter().enumerate() {
        compare(snapshot_name(k), render_snapshot(&data.gas, &data.grid, s)?);
    }
    compare(DIAGNOSTICS_CSV.into(), render_diagnostics_csv(&data.rows)?);
    compare(REPORT_JSON.into(), render_json(&data.report)?);

    let stored: Vec<SolverState> = (0..data.snapshots.len())
        .map(|k| read(dir, &snapshot_name(k)).and_then(|t| parse_snapshot(&t)))
        .collect::<Result<_>>()
        .unwrap_or_default();
    if stored.len() == data.snapshots.len() {
        match diagnose(&data.grid, &stored, &data.table, &data.gas) {
            Ok(rows) if render_diagnostics_csv(&rows)? == render_diagnostics_csv(&data.rows)? => {}
            Ok(_) => mismatches.push(format!("{DIAGNOSTICS_CSV}: differs when recomputed from stored snapshots")),
            Err(e) => mismatches.push(format!("{SNAPSHOT_DIR}: stored snapshots cannot be diagnosed: {e}")),
        }
    } else {
        mismatches.push(format!("{SNAPSHOT_DIR}: unreadable snapshots"));
    }

    let verdict = data.report.verdict;
    let exit_code = if !mismatches.is_empty() {
        EXIT_STAGE
    } else {
        RunStatus::from_verdict(verdict).exit_code
    };
    Ok(VerifyOutcome {
        checked,
        mismatches,
        verdict,
        exit_code,
    })
}
