//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Step control follows the usual mixed error norm
//! `sc_i = atol + rtol * max(|y_i|, |y_new_i|)`; the dense output is the
//! fourth-order Hermite-type interpolant of Hairer, Nørsett & Wanner.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Degree of the dense-output interpolant.
pub const DENSE_OUTPUT_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step size (`f64::INFINITY` for none).
    pub max_step: f64,
}

/// One accepted step: `[t, t + h]` and the interpolation coefficients.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t: f64,
    pub h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn start(&self) -> [f64; N] {
        self.coeffs[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.coeffs[0][i] + self.coeffs[1][i];
        }
        y
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let r = &self.coeffs;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        y
    }
}

/// Accepted steps of one trajectory, contiguous in time.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    steps: Vec<DenseStep<N>>,
    t_start: f64,
    y_start: [f64; N],
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.steps
            .last()
            .map_or(self.t_start, |s| s.t + s.h)
    }

    pub fn steps(&self) -> &[DenseStep<N>] {
        &self.steps
    }

    /// Step endpoints, starting with `t_start`.
    pub fn mesh(&self) -> impl Iterator<Item = (f64, [f64; N])> + '_ {
        std::iter::once((self.t_start, self.y_start)).chain(self.steps.iter().map(|s| (s.t + s.h, s.end())))
    }

    /// Evaluates the interpolant; `None` outside `[t_start, t_end]`.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if !(t >= self.t_start && t <= self.t_end()) {
            return None;
        }
        if self.steps.is_empty() || t == self.t_start {
            return Some(self.y_start);
        }
        let idx = self.steps.partition_point(|s| s.t + s.h < t);
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        if t == step.t + step.h {
            return Some(step.end());
        }
        Some(step.eval(t))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn error_norm<const N: usize>(err: &[f64; N], y: &[f64; N], y_new: &[f64; N], ctl: &StepControl) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` and keeps every accepted step.
///
/// `check` is called on each accepted state and may abort the integration.
pub fn integrate<const N: usize, F, C>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctl: StepControl,
    mut check: C,
) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    C: FnMut(f64, &[f64; N]) -> Result<()>,
{
    if !(t_end > t0) {
        return Err(Error::Domain(format!("t_end = {t_end} must exceed t0 = {t0}")));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t0, &y0, &k1, &ctl).min(ctl.max_step).min(t_end - t0);
    let mut steps = Vec::new();
    let mut rejected_last = false;

    while t < t_end {
        if steps.len() >= ctl.max_steps {
            return Err(Error::Integration {
                last_time: t,
                reason: format!("maximum of {} steps reached", ctl.max_steps),
            });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration {
                last_time: t,
                reason: format!("step size collapsed to {h:e}"),
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&err, &y, &y_new, &ctl);
        if !en.is_finite() {
            h *= 0.1;
            rejected_last = true;
            continue;
        }

        if en <= 1.0 {
            let mut coeffs = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y_new[i] - y[i];
                let bspl = h * k1[i] - dy;
                coeffs[0][i] = y[i];
                coeffs[1][i] = dy;
                coeffs[2][i] = bspl;
                coeffs[3][i] = dy - h * k7[i] - bspl;
                coeffs[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let t_new = if last { t_end } else { t + h };
            check(t_new, &y_new)?;
            steps.push(DenseStep { t, h, coeffs });
            t = t_new;
            y = y_new;
            k1 = k7;
            let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h * fac.clamp(0.2, 5.0)).min(ctl.max_step);
            rejected_last = false;
        } else {
            h *= (0.9 * en.powf(-0.2)).max(0.2);
            rejected_last = true;
        }
    }

    Ok(DenseSolution {
        steps,
        t_start: t0,
        y_start: y0,
    })
}

fn initial_step<const N: usize, F>(f: &F, t0: f64, y0: &[f64; N], f0: &[f64; N], ctl: &StepControl) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let norm = |v: &[f64; N]| -> f64 {
        let s: f64 = (0..N)
            .map(|i| (v[i] / (ctl.atol + ctl.rtol * y0[i].abs())).powi(2))
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl(tol: f64) -> StepControl {
        StepControl {
            rtol: tol,
            atol: tol,
            max_steps: 100_000,
            max_step: f64::INFINITY,
        }
    }

    #[test]
    fn harmonic_oscillator_and_dense_output() {
        let sol = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, ctl(1e-11), |_, _| Ok(())).unwrap();
        for k in 0..=200 {
            let t = 10.0 * k as f64 / 200.0;
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-8, "t={t}: {} vs {}", y[0], t.sin());
            assert!((y[1] - t.cos()).abs() < 1e-8);
        }
        assert_eq!(sol.t_end(), 10.0);
        assert!(sol.eval(10.5).is_none());
    }

    #[test]
    fn exponential_decay_global_error_tracks_tolerance() {
        let exact = (-5.0f64).exp();
        let mut prev = f64::INFINITY;
        for tol in [1e-6, 1e-8, 1e-10] {
            let sol = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, ctl(tol), |_, _| Ok(())).unwrap();
            let err = (sol.eval(5.0).unwrap()[0] - exact).abs() / exact;
            assert!(err < 100.0 * tol, "tol {tol}: err {err}");
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn check_callback_aborts() {
        let res = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            5.0,
            ctl(1e-8),
            |t, y| {
                if y[0] > 10.0 {
                    Err(Error::StateDomain { t, reason: "too big".into() })
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(res, Err(Error::StateDomain { .. })));
    }

    #[test]
    fn blow_up_collapses_step() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let res = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, ctl(1e-8), |_, _| Ok(()));
        match res {
            Err(Error::Integration { last_time, .. }) => assert!(last_time > 0.9 && last_time < 1.0 + 1e-6, "{last_time}"),
            other => panic!("expected integration failure, got {other:?}"),
        }
    }
}
