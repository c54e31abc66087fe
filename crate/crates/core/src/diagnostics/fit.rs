//! Power-law fits `y ~ C (1+t)^p` by least squares in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::MIN_FIT_POINTS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    /// `ln C`.
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Fits `ln y = intercept + exponent * ln(1+t)` over the points with `t` in
/// the closed `window`.
pub fn fit_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(Error::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo && t <= hi)
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} points in window [{lo}, {hi}], need at least {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    if let Some(&(t, y)) = pts.iter().find(|&&(t, y)| !(y > 0.0) || !y.is_finite() || !(t > -1.0)) {
        return Err(Error::Fit(format!("cannot take logarithms of y = {y} at t = {t}")));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|&(t, _)| t.ln_1p()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, y)| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all points share one abscissa".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        exponent,
        intercept,
        r_squared,
        window,
        n_points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::log_spaced_times;
    use approx::assert_relative_eq;

    fn sample(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let t = match k {
                    0 => lo,
                    k if k == n - 1 => hi,
                    _ => ((1.0 + lo).ln() + ((1.0 + hi) / (1.0 + lo)).ln() * k as f64 / (n - 1) as f64).exp() - 1.0,
                };
                (t, f(t))
            })
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        let s = sample(|t| 1.0 / (1.0 + t), 10.0, 100.0, 20);
        let f = fit_rate(&s, (10.0, 100.0)).unwrap();
        assert_relative_eq!(f.exponent, -1.0, epsilon = 1e-12);
        assert_relative_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(f.n_points, 20);

        let s = sample(|t| 5.0 * (1.0 + t).powf(1.0 / 3.0), 0.0, 1e3, 30);
        let f = fit_rate(&s, (0.0, 1e3)).unwrap();
        assert_relative_eq!(f.exponent, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn log_factor_bias() {
        // Oracle: numpy polyfit of ln((1+t)^{-2/3} ln(1+t)) against ln(1+t) on
        // 64 log-spaced points of [1e2, 1e4] gives -0.518538.
        let s = sample(|t| (1.0 + t).powf(-2.0 / 3.0) * t.ln_1p(), 1e2, 1e4, 64);
        let f = fit_rate(&s, (1e2, 1e4)).unwrap();
        assert!((f.exponent + 0.518538).abs() < 1e-6, "{}", f.exponent);
        assert!(f.exponent > -2.0 / 3.0);
    }

    #[test]
    fn window_filtering() {
        let times = log_spaced_times(1e3, 64);
        let s: Vec<(f64, f64)> = times.iter().map(|&t| (t, (1.0 + t).powi(-2))).collect();
        let f = fit_rate(&s, (10.0, 100.0)).unwrap();
        assert!(f.n_points >= 8 && f.n_points < 64);
        assert_relative_eq!(f.exponent, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let s = sample(|t| 1.0 / (1.0 + t), 10.0, 100.0, 7);
        assert!(matches!(fit_rate(&s, (10.0, 100.0)), Err(Error::Fit(_))));
        let mut s = sample(|t| 1.0 / (1.0 + t), 10.0, 100.0, 10);
        s[3].1 = 0.0;
        assert!(matches!(fit_rate(&s, (10.0, 100.0)), Err(Error::Fit(_))));
        assert!(fit_rate(&s, (100.0, 10.0)).is_err());
    }
}
