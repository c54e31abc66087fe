//! Pressure law `p = rho^gamma`, the mass-determined Barenblatt constants and
//! the Barenblatt self-similar flow in Eulerian variables.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Relative tolerance for the profile integral that fixes `A`.
pub const PROFILE_INTEGRAL_RTOL: f64 = 1e-12;

/// Gas and Barenblatt constants for a given adiabatic exponent and total mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParameters {
    pub gamma: f64,
    pub mass: f64,
    /// Barenblatt amplitude, `varsigma(0) = A`.
    #[serde(rename = "A")]
    pub a: f64,
    /// `B = (gamma - 1) / (2 gamma (gamma + 1))`.
    #[serde(rename = "B")]
    pub b: f64,
    /// `1 / (gamma - 1)`.
    pub alpha: f64,
    /// Half-width `L = sqrt(A / B)` of the initial support.
    #[serde(rename = "L")]
    pub half_width: f64,
}

/// `int_{-1}^{1} (1 - y^2)^alpha dy`, evaluated as `int cos^{2 alpha + 1}(theta)`
/// over `(-pi/2, pi/2)` so the integrand stays bounded at the endpoints.
pub fn profile_integral(alpha: f64) -> Result<f64> {
    let power = 2.0 * alpha + 1.0;
    let r = quadrature::integrate(
        |theta: f64| theta.cos().max(0.0).powf(power),
        -FRAC_PI_2,
        FRAC_PI_2,
        Tolerance {
            abs: 0.0,
            rel: PROFILE_INTEGRAL_RTOL,
            max_intervals: 4000,
        },
    )?;
    Ok(r.value)
}

impl GasParameters {
    /// Derives `B`, `A`, `alpha` and `L` from `gamma > 1` and `mass > 0`.
    pub fn derive(gamma: f64, mass: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 1.0 {
            return Err(Error::ParameterDomain(format!("gamma must be finite and > 1, got {gamma}")));
        }
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::ParameterDomain(format!("mass must be finite and > 0, got {mass}")));
        }
        let b = (gamma - 1.0) / (2.0 * gamma * (gamma + 1.0));
        let alpha = 1.0 / (gamma - 1.0);
        let integral = profile_integral(alpha)?;
        // A^{(gamma+1)/(2(gamma-1))} = M sqrt(B) / integral
        let rhs = mass * b.sqrt() / integral;
        let a = rhs.powf(2.0 * (gamma - 1.0) / (gamma + 1.0));
        let half_width = (a / b).sqrt();
        Ok(Self {
            gamma,
            mass,
            a,
            b,
            alpha,
            half_width,
        })
    }

    /// `(1 + t)^{1/(gamma+1)}`, the Barenblatt Lagrangian stretch.
    pub fn stretch(&self, t: f64) -> f64 {
        (1.0 + t).powf(1.0 / (self.gamma + 1.0))
    }

    /// `varsigma(x) = A - B x^2`, clamped at zero outside the support.
    pub fn varsigma(&self, x: f64) -> f64 {
        (self.a - self.b * x * x).max(0.0)
    }

    /// Barenblatt density; zero outside the support.
    pub fn barenblatt_density(&self, x: f64, t: f64) -> f64 {
        let s = 1.0 + t;
        let bracket = self.a - self.b * s.powf(-2.0 / (self.gamma + 1.0)) * x * x;
        if bracket <= 0.0 || x.abs() >= self.barenblatt_boundaries(t).1 {
            return 0.0;
        }
        s.powf(-1.0 / (self.gamma + 1.0)) * bracket.powf(self.alpha)
    }

    pub fn barenblatt_velocity(&self, x: f64, t: f64) -> f64 {
        x / ((self.gamma + 1.0) * (1.0 + t))
    }

    /// Left and right vacuum boundaries of the Barenblatt flow.
    pub fn barenblatt_boundaries(&self, t: f64) -> (f64, f64) {
        let r = self.half_width * self.stretch(t);
        (-r, r)
    }

    /// `(rho_bar_0(x), varsigma(x))` on the closed reference interval.
    pub fn initial_weight(&self, x: f64) -> Result<(f64, f64)> {
        if !(x.abs() <= self.half_width) {
            return Err(Error::Domain(format!(
                "|x| = {} exceeds the half-width {}",
                x.abs(),
                self.half_width
            )));
        }
        let s = self.varsigma(x);
        Ok((s.powf(self.alpha), s))
    }

    /// Mass of the Barenblatt density at time `t`, by adaptive quadrature over its support.
    pub fn total_mass(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be >= 0, got {t}")));
        }
        let (_, right) = self.barenblatt_boundaries(t);
        // x = right * sin(theta) keeps the integrand smooth at the vacuum boundary
        let r = quadrature::integrate(
            |theta: f64| self.barenblatt_density(right * theta.sin(), t) * right * theta.cos(),
            -FRAC_PI_2,
            FRAC_PI_2,
            Tolerance {
                abs: 0.0,
                rel: 1e-12,
                max_intervals: 4000,
            },
        )
        .map_err(|e| Error::Quadrature(format!("total mass at t = {t}: {e}")))?;
        Ok(r.value)
    }
}
