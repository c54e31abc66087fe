//! Pinned tolerances for the acceptance checks and the theorem report.
//!
//! Every pass/fail decision in the crate reads its threshold from here so a
//! change to any of them shows up in one diff.

/// Barenblatt amplitude against the brute-force oracle (relative).
pub const CONSTANT_RTOL: f64 = 1e-10;
/// Total Barenblatt mass against `M` (relative).
pub const MASS_RTOL: f64 = 1e-8;
pub const MASS_CHECK_TIMES: [f64; 3] = [0.0, 1.0, 10.0];

/// Zero-perturbation run: `sup |eta - x eta_x| / (L eta_x)`.
pub const SEPARABLE_REL_ERROR: f64 = 1e-3;
/// Error ratio between successive grid doublings for second order.
pub const CONVERGENCE_RATIO: (f64, f64) = (3.0, 5.0);

/// `eta_x / (1+t)^{1/(gamma+1)}` must lie in `[1 - STRETCH_LOWER_SLACK, STRETCH_UPPER]`.
pub const STRETCH_LOWER_SLACK: f64 = 1e-9;
pub const STRETCH_UPPER: f64 = 2.0;
/// Floor for quantities that are nonnegative in exact arithmetic.
pub const SIGN_FLOOR: f64 = -1e-12;
/// `h / ((1+t)^{-gamma/(gamma+1)} ln(1+t)) <= 1 + H_ENVELOPE_SLACK` on `t >= 1`.
pub const H_ENVELOPE_SLACK: f64 = 1e-6;
/// Fitted slope of `h` on `[H_SLOPE_WINDOW]` must not exceed `-gamma/(gamma+1) + H_SLOPE_SLACK`.
pub const H_SLOPE_SLACK: f64 = 0.05;
pub const H_SLOPE_WINDOW: (f64, f64) = (1e2, 1e4);
pub const ANSATZ_HORIZON: f64 = 1e4;

/// Relative Duhamel residual at `rel_tol = 1e-10`.
pub const DUHAMEL_RESIDUAL: f64 = 1e-6;

/// `|fitted - target|` bounds for the asymptotic rates.
pub const VELOCITY_RATE_TOL: f64 = 0.15;
pub const DENSITY_RATE_TOL: f64 = 0.15;
pub const BOUNDARY_RATE_TOL: f64 = 0.02;
pub const BOUNDARY_SPEED_RATE_TOL: f64 = 0.05;
/// `max_t |x_+ + x_-|`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// `E_0(t) <= ENERGY_GROWTH * E_0(0)`.
pub const ENERGY_GROWTH: f64 = 2.0;
/// Sup bundle `<= SUP_BUNDLE_GROWTH *` its initial value.
pub const SUP_BUNDLE_GROWTH: f64 = 4.0;
/// `max / median` of the elliptic ratio series.
pub const ELLIPTIC_SPREAD: f64 = 10.0;

/// Hardy ratio for `F = 1`, `k = 2` against `3 / L^2` (absolute).
pub const HARDY_CLOSED_FORM_TOL: f64 = 1e-3;
pub const PROPERTY_CASES: u32 = 100;

/// Relative slack on the zero-perturbation envelope checks of the theorem report,
/// covering the discretisation error of a run that meets [`SEPARABLE_REL_ERROR`].
pub const EXACT_ENVELOPE_SLACK: f64 = 1e-2;
/// A report needs `(1 + t_end) >= MIN_SPAN` (two decades) to be conclusive.
pub const MIN_SPAN: f64 = 100.0;
/// Minimum number of snapshots inside a fit window.
pub const MIN_FIT_POINTS: usize = 8;
