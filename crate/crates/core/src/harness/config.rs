//! Flat `key = value` run configuration.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use super::fmt_num;
use crate::ansatz::log_spaced_times;
use crate::error::{Error, Result};
use crate::solver::{PerturbationSpec, PolynomialShape, MIN_CELLS};

pub const DEFAULT_OUTPUT_DIR: &str = "vacuum-lab-out";
const MAX_SNAPSHOTS: usize = 100_000;
const MAX_SHAPE_POWER: u32 = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SnapshotSchedule {
    /// `count` times log-spaced in `1 + t` over `[0, t_end]`.
    LogSpaced(usize),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub gamma: f64,
    pub mass: f64,
    pub n_cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshots: SnapshotSchedule,
    pub position: PolynomialShape,
    pub velocity: PolynomialShape,
    pub rel_tol: f64,
    /// `None` means `[10, t_end / 10]`.
    pub fit_window: Option<(f64, f64)>,
    pub output_dir: PathBuf,
    /// Reserved; every run is deterministic.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            mass: 1.0,
            n_cells: 400,
            cfl: 0.5,
            t_end: 1e3,
            snapshots: SnapshotSchedule::LogSpaced(64),
            position: PolynomialShape { amplitude: 1e-3, q: 1, r: 1 },
            velocity: PolynomialShape { amplitude: 0.0, q: 1, r: 1 },
            rel_tol: 1e-10,
            fit_window: None,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn perturbation(&self) -> PerturbationSpec {
        if self.position.amplitude == 0.0 && self.velocity.amplitude == 0.0 {
            PerturbationSpec::None
        } else {
            PerturbationSpec::Polynomial {
                position: self.position,
                velocity: self.velocity,
            }
        }
    }

    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((10.0, self.t_end / 10.0))
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        match &self.snapshots {
            SnapshotSchedule::LogSpaced(n) => log_spaced_times(self.t_end, *n),
            SnapshotSchedule::Explicit(v) => v.clone(),
        }
    }

    /// Canonical text form; `parse_config(&c.to_text())` reproduces `c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("gamma", fmt_num(self.gamma));
        kv("mass", fmt_num(self.mass));
        kv("n_cells", self.n_cells.to_string());
        kv("cfl", fmt_num(self.cfl));
        kv("t_end", fmt_num(self.t_end));
        match &self.snapshots {
            SnapshotSchedule::LogSpaced(n) => kv("snapshots", n.to_string()),
            SnapshotSchedule::Explicit(v) => kv(
                "snapshot_times",
                v.iter().map(|&t| fmt_num(t)).collect::<Vec<_>>().join(", "),
            ),
        }
        kv("epsilon", fmt_num(self.position.amplitude));
        kv("q", self.position.q.to_string());
        kv("r", self.position.r.to_string());
        kv("velocity_epsilon", fmt_num(self.velocity.amplitude));
        kv("velocity_q", self.velocity.q.to_string());
        kv("velocity_r", self.velocity.r.to_string());
        kv("rel_tol", fmt_num(self.rel_tol));
        if let Some((lo, hi)) = self.fit_window {
            kv("fit_window", format!("{}, {}", fmt_num(lo), fmt_num(hi)));
        }
        kv("output_dir", self.output_dir.display().to_string());
        kv("seed", self.seed.to_string());
        s
    }

    /// Range checks for every field; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(Error::config(key, reason));
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return bad("gamma", format!("must be finite and > 1, got {}", self.gamma));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return bad("mass", format!("must be finite and > 0, got {}", self.mass));
        }
        if self.n_cells < MIN_CELLS || self.n_cells % 2 != 0 {
            return bad("n_cells", format!("must be even and >= {MIN_CELLS}, got {}", self.n_cells));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl", format!("must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("t_end", format!("must be finite and > 0, got {}", self.t_end));
        }
        match &self.snapshots {
            SnapshotSchedule::LogSpaced(n) if *n == 0 || *n > MAX_SNAPSHOTS => {
                return bad("snapshots", format!("count must lie in [1, {MAX_SNAPSHOTS}], got {n}"));
            }
            SnapshotSchedule::Explicit(v) => {
                if v.is_empty() || v.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("snapshot_times", "must be nonempty and strictly increasing".into());
                }
                if v.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
                    return bad("snapshot_times", format!("must lie in [0, t_end = {}]", self.t_end));
                }
            }
            _ => {}
        }
        for (prefix, s) in [("", &self.position), ("velocity_", &self.velocity)] {
            if !s.amplitude.is_finite() {
                return bad(&format!("{}epsilon", prefix), format!("must be finite, got {}", s.amplitude));
            }
            for (name, v) in [("q", s.q), ("r", s.r)] {
                if !(1..=MAX_SHAPE_POWER).contains(&v) {
                    return bad(&format!("{prefix}{name}"), format!("must lie in [1, {MAX_SHAPE_POWER}], got {v}"));
                }
            }
        }
        if !(1e-13..=1e-6).contains(&self.rel_tol) {
            return bad("rel_tol", format!("must lie in [1e-13, 1e-6], got {}", self.rel_tol));
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return bad("fit_window", format!("need 0 <= lo < hi, got ({lo}, {hi})"));
            }
        }
        Ok(())
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(key, format!("cannot parse {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored.
/// Missing keys take their defaults; unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    let mut seen = HashSet::new();
    let mut explicit_times = None;
    let mut count = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(Error::config(key, "duplicate key"));
        }
        match key {
            "gamma" => c.gamma = parse_value(key, value)?,
            "mass" => c.mass = parse_value(key, value)?,
            "n_cells" => c.n_cells = parse_value(key, value)?,
            "cfl" => c.cfl = parse_value(key, value)?,
            "t_end" => c.t_end = parse_value(key, value)?,
            "snapshots" => count = Some(parse_value(key, value)?),
            "snapshot_times" => explicit_times = Some(parse_list(key, value)?),
            "epsilon" => c.position.amplitude = parse_value(key, value)?,
            "q" => c.position.q = parse_value(key, value)?,
            "r" => c.position.r = parse_value(key, value)?,
            "velocity_epsilon" => c.velocity.amplitude = parse_value(key, value)?,
            "velocity_q" => c.velocity.q = parse_value(key, value)?,
            "velocity_r" => c.velocity.r = parse_value(key, value)?,
            "rel_tol" => c.rel_tol = parse_value(key, value)?,
            "fit_window" => {
                let v = parse_list(key, value)?;
                if v.len() != 2 {
                    return Err(Error::config(key, format!("expected `lo, hi`, got {value:?}")));
                }
                c.fit_window = Some((v[0], v[1]));
            }
            "output_dir" => c.output_dir = PathBuf::from(value),
            "seed" => c.seed = parse_value(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
    }
    c.snapshots = match (count, explicit_times) {
        (Some(_), Some(_)) => {
            return Err(Error::config("snapshot_times", "conflicts with `snapshots`"));
        }
        (Some(n), None) => SnapshotSchedule::LogSpaced(n),
        (None, Some(v)) => SnapshotSchedule::Explicit(v),
        (None, None) => SnapshotSchedule::LogSpaced(64),
    };
    c.validate()?;
    Ok(c)
}
