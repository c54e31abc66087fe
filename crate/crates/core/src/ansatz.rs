//! The ansatz correction.
//!
//! The Barenblatt Lagrangian map `x (1+t)^{1/(gamma+1)}` does not solve the
//! damped momentum equation exactly. Replacing its stretch by the solution
//! `eta_x(t)` of
//!
//! ```text
//! eta_x'' + eta_x' - eta_x^{-gamma} / (gamma + 1) = 0,   eta_x(0) = 1,  eta_x'(0) = 1/(gamma+1)
//! ```
//!
//! gives the separable exact solution `x * eta_x(t)`. The correction is
//! `h(t) = eta_x(t) - (1+t)^{1/(gamma+1)}`.
//!
//! This module integrates that ODE with a dense-output Runge–Kutta method and
//! checks the properties the asymptotic theory relies on: the sign of `h` and
//! `eta_x'`, the two-sided growth envelope, the derivative decay rates, the
//! Duhamel integral representation of `eta_x'` and the phase structure of `(h, h_t)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::ode::{self, DenseSolution, StepControl};
use crate::quadrature::{self, Tolerance};

/// Width of the history window kept in the Duhamel integral; the kernel
/// `e^{-(t-s)}` is below `1e-26` beyond it.
const DUHAMEL_WINDOW: f64 = 60.0;
const DUHAMEL_CHECKPOINTS: usize = 50;
const ENVELOPE_CHECKPOINTS: usize = 400;
/// Highest derivative order of `eta_x` with a closed-form expression in the state.
pub const MAX_DERIVATIVE_ORDER: usize = 3;

/// Dense samples of the ansatz stretch, its derivatives and the correction `h`.
#[derive(Debug, Clone)]
pub struct AnsatzTable {
    pub gamma: f64,
    pub rel_tol: f64,
    pub times: Vec<f64>,
    pub eta_x: Vec<f64>,
    pub eta_xt: Vec<f64>,
    pub eta_xtt: Vec<f64>,
    pub h: Vec<f64>,
    pub h_t: Vec<f64>,
    pub interpolation_order: usize,
    trajectory: DenseSolution<2>,
}

/// Everything known about the ansatz at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnsatzPoint {
    pub t: f64,
    pub eta_x: f64,
    pub eta_xt: f64,
    pub eta_xtt: f64,
    pub eta_xttt: f64,
    pub h: f64,
    pub h_t: f64,
    pub h_tt: f64,
}

impl AnsatzPoint {
    /// `d^k eta_x / dt^k` for `k <= 3`.
    pub fn derivative(&self, k: usize) -> Option<f64> {
        match k {
            0 => Some(self.eta_x),
            1 => Some(self.eta_xt),
            2 => Some(self.eta_xtt),
            3 => Some(self.eta_xttt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSummary {
    /// Maximum of `z = h_t`.
    pub t0: f64,
    /// Maximum of `h` (zero of `z`).
    pub t1: f64,
    /// Minimum of `z`.
    pub t2: f64,
    pub h_max: f64,
    pub z_max: f64,
    pub z_min: f64,
    pub terminal_h: f64,
    pub terminal_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBound {
    pub order: usize,
    /// `sup |d^k eta_x/dt^k| (1+t)^{k - 1/(gamma+1)}` over the checkpoints.
    pub scaled_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub orders: Vec<DerivativeBound>,
    /// `sup eta_x / (1+t)^{1/(gamma+1)}`.
    pub k_observed: f64,
    /// `inf eta_x / (1+t)^{1/(gamma+1)}`; never below 1 up to integration error.
    pub min_stretch_ratio: f64,
    /// `sup h / ((1+t)^{-gamma/(gamma+1)} ln(1+t))` on `t >= 1`.
    pub h_ratio_max: f64,
    /// `sup |h_t| / ((1+t)^{-1-gamma/(gamma+1)} ln(1+t))` on `t >= 1`.
    pub h_t_ratio_max: f64,
    pub min_eta_xt: f64,
    pub min_h: f64,
    pub checkpoints: usize,
}

/// `(1+t)^{-gamma/(gamma+1)} ln(1+t)`.
pub fn h_envelope(gamma: f64, t: f64) -> f64 {
    (1.0 + t).powf(-gamma / (gamma + 1.0)) * t.ln_1p()
}

/// `(1+t)^{-1-gamma/(gamma+1)} ln(1+t)`.
pub fn h_t_envelope(gamma: f64, t: f64) -> f64 {
    h_envelope(gamma, t) / (1.0 + t)
}

/// Points `(1+t_end)^{k/(count-1)} - 1`, `k = 0..count`: log-spaced in `1 + t`.
pub fn log_spaced_times(t_end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![t_end],
        _ => {
            let top = t_end.ln_1p();
            let mut out: Vec<f64> = (0..count)
                .map(|k| (top * k as f64 / (count - 1) as f64).exp_m1())
                .collect();
            out[0] = 0.0;
            out[count - 1] = t_end;
            out
        }
    }
}

fn eval_point(gamma: f64, t: f64, state: [f64; 2]) -> AnsatzPoint {
    let [e, v] = state;
    let g1 = gamma + 1.0;
    let acc = -v + e.powf(-gamma) / g1;
    let jerk = -acc - gamma / g1 * e.powf(-gamma - 1.0) * v;
    let s = 1.0 + t;
    let bar = s.powf(1.0 / g1);
    let bar_t = s.powf(-gamma / g1) / g1;
    let bar_tt = -gamma / (g1 * g1) * s.powf(-gamma / g1 - 1.0);
    AnsatzPoint {
        t,
        eta_x: e,
        eta_xt: v,
        eta_xtt: acc,
        eta_xttt: jerk,
        h: e - bar,
        h_t: v - bar_t,
        h_tt: acc - bar_tt,
    }
}

impl AnsatzTable {
    /// Integrates the stretch ODE on `[0, t_end]` with local relative error `rel_tol`.
    pub fn integrate(gas: &GasParameters, t_end: f64, rel_tol: f64) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::Domain(format!("t_end must be finite and > 0, got {t_end}")));
        }
        if !(1e-13..=1e-6).contains(&rel_tol) {
            return Err(Error::Domain(format!("rel_tol must lie in [1e-13, 1e-6], got {rel_tol}")));
        }
        let gamma = gas.gamma;
        let g1 = gamma + 1.0;
        let rhs = move |_t: f64, y: &[f64; 2]| [y[1], -y[1] + y[0].powf(-gamma) / g1];
        let ctl = StepControl {
            rtol: rel_tol,
            // eta_x' decays like (1+t)^{-gamma/(gamma+1)}; keep it resolved relatively
            atol: rel_tol * 1e-4,
            max_steps: 5_000_000,
            max_step: f64::INFINITY,
        };
        let trajectory = ode::integrate(rhs, 0.0, [1.0, 1.0 / g1], t_end, ctl, |t, y| {
            if y[0] <= 0.0 || !y[0].is_finite() || !y[1].is_finite() {
                Err(Error::StateDomain {
                    t,
                    reason: format!("eta_x = {} left (0, inf)", y[0]),
                })
            } else {
                Ok(())
            }
        })?;

        let mesh: Vec<(f64, [f64; 2])> = trajectory.mesh().collect();
        let mut table = AnsatzTable {
            gamma,
            rel_tol,
            times: Vec::with_capacity(mesh.len()),
            eta_x: Vec::with_capacity(mesh.len()),
            eta_xt: Vec::with_capacity(mesh.len()),
            eta_xtt: Vec::with_capacity(mesh.len()),
            h: Vec::with_capacity(mesh.len()),
            h_t: Vec::with_capacity(mesh.len()),
            interpolation_order: ode::DENSE_OUTPUT_DEGREE,
            trajectory,
        };
        for (t, y) in mesh {
            let p = eval_point(gamma, t, y);
            table.times.push(t);
            table.eta_x.push(p.eta_x);
            table.eta_xt.push(p.eta_xt);
            table.eta_xtt.push(p.eta_xtt);
            table.h.push(p.h);
            table.h_t.push(p.h_t);
        }
        Ok(table)
    }

    pub fn t_end(&self) -> f64 {
        self.trajectory.t_end()
    }

    /// Dense-output evaluation of the stretch and its derivatives.
    pub fn at(&self, t: f64) -> Result<AnsatzPoint> {
        let y = self.trajectory.eval(t).ok_or_else(|| {
            Error::Domain(format!("t = {t} outside the ansatz table [0, {}]", self.t_end()))
        })?;
        Ok(eval_point(self.gamma, t, y))
    }

    /// `(h(t), h_t(t))`.
    pub fn correction_h(&self, t: f64) -> Result<(f64, f64)> {
        let p = self.at(t)?;
        Ok((p.h, p.h_t))
    }

    /// Largest relative mismatch between `eta_x'(t)` and its Duhamel representation
    /// `e^{-t}/(gamma+1) + 1/(gamma+1) int_0^t e^{-(t-s)} eta_x(s)^{-gamma} ds`
    /// over log-spaced checkpoints.
    pub fn duhamel_residual(&self) -> Result<f64> {
        let gamma = self.gamma;
        let g1 = gamma + 1.0;
        let mut worst: f64 = 0.0;
        for t in log_spaced_times(self.t_end(), DUHAMEL_CHECKPOINTS) {
            let lhs = self.at(t)?.eta_xt;
            let lo = (t - DUHAMEL_WINDOW).max(0.0);
            let integral = if t > lo {
                quadrature::integrate(
                    |s| {
                        let e = self.trajectory.eval(s).map_or(f64::NAN, |y| y[0]);
                        (s - t).exp() * e.powf(-gamma)
                    },
                    lo,
                    t,
                    Tolerance {
                        abs: 0.0,
                        rel: 1e-12,
                        max_intervals: 8000,
                    },
                )?
                .value
            } else {
                0.0
            };
            let rhs = ((-t).exp() + integral) / g1;
            worst = worst.max((lhs - rhs).abs() / lhs.abs());
        }
        Ok(worst)
    }

    fn scan_times(&self) -> Vec<f64> {
        const SUB: usize = 4;
        let mut out = Vec::with_capacity(self.times.len() * SUB);
        for w in self.times.windows(2) {
            for k in 0..SUB {
                out.push(w[0] + (w[1] - w[0]) * k as f64 / SUB as f64);
            }
        }
        out.push(self.t_end());
        out
    }

    fn bisect<F: Fn(&AnsatzPoint) -> f64>(&self, mut lo: f64, mut hi: f64, f: F) -> Result<f64> {
        let f_lo = f(&self.at(lo)?);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(&self.at(mid)?);
            if fm == 0.0 {
                return Ok(mid);
            }
            if (fm > 0.0) == (f_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // the endpoint with the smaller residual
        let (a, b) = (f(&self.at(lo)?).abs(), f(&self.at(hi)?).abs());
        Ok(if a <= b { lo } else { hi })
    }

    /// Locates the extremum times of `h` and `z = h_t` along the trajectory.
    ///
    /// The trajectory must have passed the minimum of `z` and recovered to
    /// within 1% of it (`|z(t_end)| <= 0.01 |z(t2)|`).
    pub fn phase_portrait(&self) -> Result<PhaseSummary> {
        let t_end = self.t_end();
        let too_short = |reason: &str| Error::HorizonTooShort {
            t_end,
            reason: reason.to_string(),
        };
        let scan = self.scan_times();
        let pts: Vec<AnsatzPoint> = scan.iter().map(|&t| self.at(t)).collect::<Result<_>>()?;

        let find = |from: usize, pred: &dyn Fn(&AnsatzPoint, &AnsatzPoint) -> bool| -> Option<usize> {
            (from..pts.len().saturating_sub(1)).find(|&i| pred(&pts[i], &pts[i + 1]))
        };
        let i0 = find(1, &|a, b| a.h_tt > 0.0 && b.h_tt <= 0.0).ok_or_else(|| too_short("z never reaches a maximum"))?;
        let t0 = self.bisect(pts[i0].t, pts[i0 + 1].t, |p| p.h_tt)?;
        let i1 = find(i0, &|a, b| a.h_t > 0.0 && b.h_t <= 0.0).ok_or_else(|| too_short("h never reaches a maximum"))?;
        let t1 = self.bisect(pts[i1].t, pts[i1 + 1].t, |p| p.h_t)?;
        let i2 = find(i1, &|a, b| a.h_tt < 0.0 && b.h_tt >= 0.0).ok_or_else(|| too_short("z never reaches a minimum"))?;
        let t2 = self.bisect(pts[i2].t, pts[i2 + 1].t, |p| p.h_tt)?;

        let (p0, p1, p2, pe) = (self.at(t0)?, self.at(t1)?, self.at(t2)?, self.at(t_end)?);
        if pe.h_t.abs() > 0.01 * p2.h_t.abs() {
            return Err(too_short(&format!(
                "z(t_end) = {:e} has not recovered from z(t2) = {:e}",
                pe.h_t, p2.h_t
            )));
        }
        if !(0.0 < t0 && t0 < t1 && t1 < t2) || p0.h_t <= 0.0 {
            return Err(Error::StateDomain {
                t: t2,
                reason: format!("phase ordering violated: t0 = {t0}, t1 = {t1}, t2 = {t2}"),
            });
        }
        if let Some(p) = pts.iter().filter(|p| p.t > t1 && p.t < t2).find(|p| p.h_t > 0.0) {
            return Err(Error::StateDomain {
                t: p.t,
                reason: "h increases between its maximum and the minimum of z".into(),
            });
        }
        Ok(PhaseSummary {
            t0,
            t1,
            t2,
            h_max: p1.h,
            z_max: p0.h_t,
            z_min: p2.h_t,
            terminal_h: pe.h,
            terminal_z: pe.h_t,
        })
    }

    /// Weighted suprema of `d^k eta_x/dt^k` for `k <= k_max` and of `h`, `h_t`
    /// against their logarithmic envelopes.
    pub fn decay_envelope_check(&self, k_max: usize) -> Result<EnvelopeReport> {
        if k_max > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder(format!(
                "derivative order {k_max} > {MAX_DERIVATIVE_ORDER}"
            )));
        }
        let gamma = self.gamma;
        let inv = 1.0 / (gamma + 1.0);
        let mut times = log_spaced_times(self.t_end(), ENVELOPE_CHECKPOINTS);
        times.extend_from_slice(&self.times);
        let mut sups = vec![0.0f64; k_max + 1];
        let mut report = EnvelopeReport {
            orders: Vec::new(),
            k_observed: 0.0,
            min_stretch_ratio: f64::INFINITY,
            h_ratio_max: 0.0,
            h_t_ratio_max: 0.0,
            min_eta_xt: f64::INFINITY,
            min_h: f64::INFINITY,
            checkpoints: times.len(),
        };
        for &t in &times {
            let p = self.at(t)?;
            let s = 1.0 + t;
            for (k, sup) in sups.iter_mut().enumerate() {
                let d = p.derivative(k).expect("k <= 3");
                *sup = sup.max(d.abs() * s.powf(k as f64 - inv));
            }
            let ratio = p.eta_x / s.powf(inv);
            report.k_observed = report.k_observed.max(ratio);
            report.min_stretch_ratio = report.min_stretch_ratio.min(ratio);
            report.min_eta_xt = report.min_eta_xt.min(p.eta_xt);
            report.min_h = report.min_h.min(p.h);
            if t >= 1.0 {
                report.h_ratio_max = report.h_ratio_max.max(p.h / h_envelope(gamma, t));
                report.h_t_ratio_max = report.h_t_ratio_max.max(p.h_t.abs() / h_t_envelope(gamma, t));
            }
        }
        report.orders = sups
            .into_iter()
            .enumerate()
            .map(|(order, scaled_sup)| DerivativeBound { order, scaled_sup })
            .collect();
        Ok(report)
    }
}
