//! Weighted functionals of the perturbation `w = eta - x eta_x~(t)`.
//!
//! Energies use the midpoint rule on the solver grid with the weights `varsigma^p`
//! evaluated in closed form at cell midpoints. Cell values of `w` are averages
//! of the two nodes; first spatial derivatives are cell differences; second
//! derivatives are averages of nodal second differences (one-sided at the end
//! nodes, where every weight that multiplies them vanishes).

mod fit;
mod report;

pub use fit::{fit_rate, RateFit};
pub use report::{
    snapshot_diagnostics, theorem_report, Check, Fits, ReportContext, ReportMode, SnapshotDiagnostics,
    TheoremReport, Verdict,
};

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzTable;
use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::solver::{self, end_derivatives, Grid, SolverState};

/// Highest time-derivative order of the energies `E_j`.
pub const MAX_ENERGY_ORDER: usize = 2;
/// The `(j, i)` pairs for which `E_{j,i}` is implemented.
pub const MIXED_ORDERS: [(usize, usize); 3] = [(0, 1), (1, 1), (0, 2)];

/// Time derivatives `d^j w / dt^j`, `j = 0..=3`, at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFields {
    pub t: f64,
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
    pub w_tt: Vec<f64>,
    pub w_ttt: Vec<f64>,
    pub w_x: Vec<f64>,
    pub w_tx: Vec<f64>,
    pub w_xx: Vec<f64>,
    pub w_txx: Vec<f64>,
    dx: f64,
}

/// Centred first derivative at interior nodes, second-order one-sided at the ends.
pub fn nodal_dx(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let (l, r) = end_derivatives(f, dx);
    let mut out = vec![0.0; n + 1];
    out[0] = l;
    out[n] = r;
    for i in 1..n {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    out
}

/// Centred second derivative at interior nodes, second-order one-sided at the ends.
pub fn nodal_dxx(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let h2 = dx * dx;
    let mut out = vec![0.0; n + 1];
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    out[n] = (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / h2;
    for i in 1..n {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    out
}

fn cell_average(f: &[f64]) -> impl Iterator<Item = f64> + '_ {
    f.windows(2).map(|w| 0.5 * (w[0] + w[1]))
}

fn cell_difference(f: &[f64], dx: f64) -> impl Iterator<Item = f64> + '_ {
    f.windows(2).map(move |w| (w[1] - w[0]) / dx)
}

impl PerturbationFields {
    /// Fields from prescribed nodal time derivatives `[w, w_t, w_tt, w_ttt]`.
    pub fn from_levels(t: f64, levels: [Vec<f64>; 4], grid: &Grid) -> Result<Self> {
        let n = grid.node_count();
        if levels.iter().any(|l| l.len() != n) {
            return Err(Error::Domain(format!("every field level needs {n} nodal values")));
        }
        let [w, w_t, w_tt, w_ttt] = levels;
        let dx = grid.dx;
        Ok(Self {
            t,
            w_x: nodal_dx(&w, dx),
            w_tx: nodal_dx(&w_t, dx),
            w_xx: nodal_dxx(&w, dx),
            w_txx: nodal_dxx(&w_t, dx),
            w,
            w_t,
            w_tt,
            w_ttt,
            dx,
        })
    }

    /// Reconstructs `w` and its time derivatives from a solver state. The
    /// second and third time derivatives come from the semi-discrete equation
    /// and its time derivative, never from differencing snapshots.
    pub fn from_state(state: &SolverState, grid: &Grid, table: &AnsatzTable, gas: &GasParameters) -> Result<Self> {
        let p = table.at(state.t)?;
        let acc = solver::acceleration(grid, state, gas)?;
        let jerk = solver::jerk(grid, state, &acc, gas)?;
        let sub = |f: &[f64], scale: f64| -> Vec<f64> {
            f.iter().zip(&grid.nodes).map(|(v, x)| v - x * scale).collect()
        };
        Self::from_levels(
            state.t,
            [
                sub(&state.eta, p.eta_x),
                sub(&state.eta_t, p.eta_xt),
                sub(&acc, p.eta_xtt),
                sub(&jerk, p.eta_xttt),
            ],
            grid,
        )
    }

    /// `d^j w / dt^j` at the nodes.
    pub fn level(&self, j: usize) -> &[f64] {
        match j {
            0 => &self.w,
            1 => &self.w_t,
            2 => &self.w_tt,
            _ => &self.w_ttt,
        }
    }

    /// Every field multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| c * x).collect::<Vec<f64>>();
        Self {
            t: self.t,
            w: s(&self.w),
            w_t: s(&self.w_t),
            w_tt: s(&self.w_tt),
            w_ttt: s(&self.w_ttt),
            w_x: s(&self.w_x),
            w_tx: s(&self.w_tx),
            w_xx: s(&self.w_xx),
            w_txx: s(&self.w_txx),
            dx: self.dx,
        }
    }

    /// `sup |w|` over the nodes.
    pub fn sup_w(&self) -> f64 {
        self.w.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_grid(fields: &PerturbationFields, grid: &Grid) -> Result<()> {
    if fields.w.len() != grid.node_count() || fields.dx != grid.dx {
        return Err(Error::Domain("fields were built on a different grid".into()));
    }
    Ok(())
}

/// `E_j` for `j <= 2`:
/// `(1+t)^{2j} int [varsigma^alpha (d_t^j w)^2 + varsigma^{alpha+1} (d_t^j w_x)^2 + (1+t) varsigma^alpha (d_t^{j+1} w)^2]`.
pub fn energy(fields: &PerturbationFields, grid: &Grid, j: usize) -> Result<f64> {
    if j > MAX_ENERGY_ORDER {
        return Err(Error::UnsupportedOrder(format!(
            "energy order {j} > {MAX_ENERGY_ORDER}"
        )));
    }
    check_grid(fields, grid)?;
    let s = 1.0 + fields.t;
    let f = fields.level(j);
    let g = fields.level(j + 1);
    let sum: f64 = cell_average(f)
        .zip(cell_difference(f, grid.dx))
        .zip(cell_average(g))
        .zip(grid.rho0_mids.iter().zip(&grid.flux_weight_mids))
        .map(|(((v, vx), next), (r0, r1))| r0 * v * v + r1 * vx * vx + s * r0 * next * next)
        .sum();
    Ok(s.powi(2 * j as i32) * sum * grid.dx)
}

/// `E_0~ = E_0 - int varsigma^alpha w^2`, summed directly from its two remaining terms.
pub fn energy_tilde0(fields: &PerturbationFields, grid: &Grid) -> Result<f64> {
    check_grid(fields, grid)?;
    let s = 1.0 + fields.t;
    let sum: f64 = cell_difference(&fields.w, grid.dx)
        .zip(cell_average(&fields.w_t))
        .zip(grid.rho0_mids.iter().zip(&grid.flux_weight_mids))
        .map(|((wx, wt), (r0, r1))| r1 * wx * wx + s * r0 * wt * wt)
        .sum();
    Ok(sum * grid.dx)
}

/// `E_{j,i} = (1+t)^{2j} int [varsigma^{alpha+i+1} (d_t^j d_x^{i+1} w)^2 + varsigma^{alpha+i-1} (d_t^j d_x^i w)^2]`
/// for `(j, i)` in [`MIXED_ORDERS`].
pub fn energy_mixed(fields: &PerturbationFields, grid: &Grid, gas: &GasParameters, j: usize, i: usize) -> Result<f64> {
    if !MIXED_ORDERS.contains(&(j, i)) {
        return Err(Error::UnsupportedOrder(format!(
            "E_{{{j},{i}}} is not implemented; available: {MIXED_ORDERS:?}"
        )));
    }
    check_grid(fields, grid)?;
    let f = fields.level(j);
    let dx = grid.dx;
    let f_xx = nodal_dxx(f, dx);
    // (high-order derivative, low-order derivative) per cell
    let pairs: Vec<(f64, f64)> = match i {
        1 => cell_average(&f_xx).zip(cell_difference(f, dx)).collect(),
        _ => cell_difference(&f_xx, dx).zip(cell_average(&f_xx)).collect(),
    };
    let hi = gas.alpha + i as f64 + 1.0;
    let lo = gas.alpha + i as f64 - 1.0;
    let sum: f64 = pairs
        .iter()
        .zip(&grid.varsigma_mids)
        .map(|(&(d_hi, d_lo), &s)| s.powf(hi) * d_hi * d_hi + s.powf(lo) * d_lo * d_lo)
        .sum();
    Ok((1.0 + fields.t).powi(2 * j as i32) * sum * dx)
}

/// Truncated weighted sup-norm bundle, maximised over nodes:
/// `sum_{j<=2} (1+t)^{2j} |d_t^j w|^2 + sum_{j<=1} (1+t)^{2j} |d_t^j w_x|^2
///  + |varsigma^{1/2} w_xx|^2 + (1+t)^2 |varsigma w_txx|^2`.
///
/// The last two terms are the `(i, j) = (2, 0), (2, 1)` members of the family
/// `varsigma^{(2i+j-3)/2} d_t^j d_x^i w`.
pub fn sup_bundle(fields: &PerturbationFields, grid: &Grid) -> Result<f64> {
    check_grid(fields, grid)?;
    let s2 = (1.0 + fields.t).powi(2);
    let mut best: f64 = 0.0;
    for k in 0..grid.node_count() {
        let sig = grid.varsigma_nodes[k];
        let v = fields.w[k].powi(2)
            + s2 * fields.w_t[k].powi(2)
            + s2 * s2 * fields.w_tt[k].powi(2)
            + fields.w_x[k].powi(2)
            + s2 * fields.w_tx[k].powi(2)
            + sig * fields.w_xx[k].powi(2)
            + s2 * sig * sig * fields.w_txx[k].powi(2);
        best = best.max(v);
    }
    Ok(best)
}

/// Energies of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub e0: f64,
    pub e0_tilde: f64,
    pub e1: f64,
    pub e2: f64,
    pub e01: f64,
    pub e11: f64,
    pub e02: f64,
    pub sup_bundle: f64,
}

impl EnergyReport {
    pub fn compute(fields: &PerturbationFields, grid: &Grid, gas: &GasParameters) -> Result<Self> {
        Ok(Self {
            t: fields.t,
            e0: energy(fields, grid, 0)?,
            e0_tilde: energy_tilde0(fields, grid)?,
            e1: energy(fields, grid, 1)?,
            e2: energy(fields, grid, 2)?,
            e01: energy_mixed(fields, grid, gas, 0, 1)?,
            e11: energy_mixed(fields, grid, gas, 1, 1)?,
            e02: energy_mixed(fields, grid, gas, 0, 2)?,
            sup_bundle: sup_bundle(fields, grid)?,
        })
    }

    fn mixed(&self, j: usize, i: usize) -> Option<f64> {
        match (j, i) {
            (0, 1) => Some(self.e01),
            (1, 1) => Some(self.e11),
            (0, 2) => Some(self.e02),
            _ => None,
        }
    }

    fn energy(&self, j: usize) -> f64 {
        [self.e0, self.e1, self.e2][j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EllipticRatio {
    Finite(f64),
    /// Numerator and denominator both vanish; counted as 0.
    ZeroOverZero,
    /// Nonzero numerator over a zero denominator.
    Infinite,
}

impl EllipticRatio {
    pub fn value(&self) -> f64 {
        match *self {
            EllipticRatio::Finite(v) => v,
            EllipticRatio::ZeroOverZero => 0.0,
            EllipticRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn of(num: f64, den: f64) -> Self {
        match (num == 0.0, den == 0.0) {
            (true, true) => EllipticRatio::ZeroOverZero,
            (false, true) => EllipticRatio::Infinite,
            _ => EllipticRatio::Finite(num / den),
        }
    }
}

/// `E_{j,i} / (E_0~ + sum_{iota=1}^{i+j} E_iota)` per report.
pub fn elliptic_ratio(reports: &[EnergyReport], j: usize, i: usize) -> Result<Vec<EllipticRatio>> {
    if !MIXED_ORDERS.contains(&(j, i)) || i + j > MAX_ENERGY_ORDER {
        return Err(Error::UnsupportedOrder(format!("elliptic ratio for (j, i) = ({j}, {i})")));
    }
    Ok(reports
        .iter()
        .map(|r| {
            let num = r.mixed(j, i).expect("checked above");
            let den = r.e0_tilde + (1..=i + j).map(|k| r.energy(k)).sum::<f64>();
            EllipticRatio::of(num, den)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of `int d^{k-2} F^2 <= C int d^k (F^2 + F_x^2)` by the midpoint rule,
/// `d(x) = min(x + L, L - x)`, for nodal samples `f`.
pub fn hardy_check(f: &[f64], grid: &Grid, k: f64) -> Result<HardyCheck> {
    if !(k > 1.0) {
        return Err(Error::Domain(format!("Hardy weight power must be > 1, got {k}")));
    }
    if f.len() != grid.node_count() {
        return Err(Error::Domain(format!("need {} nodal samples, got {}", grid.node_count(), f.len())));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let l = grid.nodes[grid.n_cells];
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for ((x, v), vx) in grid.mids.iter().zip(cell_average(f)).zip(cell_difference(f, grid.dx)) {
        let d = (x + l).min(l - x);
        lhs += d.powf(k - 2.0) * v * v;
        rhs += d.powf(k) * (v * v + vx * vx);
    }
    lhs *= grid.dx;
    rhs *= grid.dx;
    let ratio = match (lhs == 0.0, rhs == 0.0) {
        (true, _) => 0.0,
        (false, true) => f64::INFINITY,
        _ => lhs / rhs,
    };
    Ok(HardyCheck { lhs, rhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{init_state, PerturbationSpec};
    use approx::assert_relative_eq;

    fn setup(n: usize) -> (GasParameters, Grid) {
        let gas = GasParameters::derive(2.0, 1.0).unwrap();
        let grid = Grid::new(&gas, n).unwrap();
        (gas, grid)
    }

    fn frozen(grid: &Grid, t: f64, f: impl Fn(f64) -> f64) -> PerturbationFields {
        let w: Vec<f64> = grid.nodes.iter().map(|&x| f(x)).collect();
        let z = vec![0.0; grid.node_count()];
        PerturbationFields::from_levels(t, [w, z.clone(), z.clone(), z], grid).unwrap()
    }

    #[test]
    fn nodal_derivatives_are_exact_on_quadratics() {
        let (_, g) = setup(32);
        let f: Vec<f64> = g.nodes.iter().map(|x| 1.0 + 2.0 * x + 3.0 * x * x).collect();
        let d = nodal_dx(&f, g.dx);
        let dd = nodal_dxx(&f, g.dx);
        for (k, x) in g.nodes.iter().enumerate() {
            assert!((d[k] - (2.0 + 6.0 * x)).abs() < 1e-11);
            assert!((dd[k] - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_fields_vanish() {
        let (gas, g) = setup(64);
        let f = frozen(&g, 3.0, |_| 0.0);
        let r = EnergyReport::compute(&f, &g, &gas).unwrap();
        for v in [r.e0, r.e0_tilde, r.e1, r.e2, r.e01, r.e11, r.e02, r.sup_bundle] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(elliptic_ratio(&[r], 0, 1).unwrap(), vec![EllipticRatio::ZeroOverZero]);
    }

    #[test]
    fn order_limits() {
        let (gas, g) = setup(32);
        let f = frozen(&g, 0.0, |x| x);
        assert!(matches!(energy(&f, &g, 3), Err(Error::UnsupportedOrder(_))));
        assert!(matches!(energy_mixed(&f, &g, &gas, 2, 1), Err(Error::UnsupportedOrder(_))));
        assert!(matches!(energy_mixed(&f, &g, &gas, 0, 0), Err(Error::UnsupportedOrder(_))));
        assert!(elliptic_ratio(&[], 1, 2).is_err());
    }

    #[test]
    fn linear_field_energy_against_closed_form() {
        // gamma = 2: E_0 = eps^2 int (varsigma x^2 + varsigma^2) dx, which is a
        // polynomial: int_{-L}^{L} (A x^2 - B x^4 + A^2 - 2AB x^2 + B^2 x^4) dx
        let (gas, g) = setup(400);
        let eps = 1e-3;
        let f = frozen(&g, 0.0, |x| eps * x);
        let (a, b, l) = (gas.a, gas.b, gas.half_width);
        let exact = eps * eps
            * (2.0 * a * l.powi(3) / 3.0 - 2.0 * b * l.powi(5) / 5.0 + 2.0 * a * a * l
                - 4.0 * a * b * l.powi(3) / 3.0
                + 2.0 * b * b * l.powi(5) / 5.0);
        let e0 = energy(&f, &g, 0).unwrap();
        assert_relative_eq!(e0, exact, max_relative = 1e-4);
        assert!(energy_tilde0(&f, &g).unwrap() <= e0);
    }

    #[test]
    fn homogeneity_and_reflection() {
        let (gas, g) = setup(64);
        let f = frozen(&g, 2.0, |x| 0.01 * x * (1.0 - x * x / 5.0));
        let r1 = EnergyReport::compute(&f, &g, &gas).unwrap();
        let r3 = EnergyReport::compute(&f.scaled(3.0), &g, &gas).unwrap();
        assert_relative_eq!(r3.e0, 9.0 * r1.e0, max_relative = 1e-14);
        assert_relative_eq!(r3.e01, 9.0 * r1.e01, max_relative = 1e-14);
        let mirrored = frozen(&g, 2.0, |x| 0.01 * (-x) * (1.0 - x * x / 5.0));
        let rm = EnergyReport::compute(&mirrored, &g, &gas).unwrap();
        assert_relative_eq!(rm.e01, r1.e01, max_relative = 1e-12);
        assert_relative_eq!(rm.e02, r1.e02, max_relative = 1e-12);
    }

    #[test]
    fn hardy_closed_form() {
        let (gas, g) = setup(400);
        let h = hardy_check(&vec![1.0; 401], &g, 2.0).unwrap();
        assert_relative_eq!(h.lhs, 2.0 * gas.half_width, max_relative = 1e-12);
        assert!((h.ratio - 3.0 / gas.half_width.powi(2)).abs() < 1e-3);
        assert!((h.ratio - 0.693).abs() < 1e-3);
        assert_eq!(hardy_check(&vec![0.0; 401], &g, 2.0).unwrap().ratio, 0.0);
        assert!(matches!(hardy_check(&vec![1.0; 401], &g, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn fields_from_unperturbed_state() {
        let (gas, g) = setup(64);
        let tab = AnsatzTable::integrate(&gas, 1.0, 1e-10).unwrap();
        let s = init_state(&g, &PerturbationSpec::None, &gas).unwrap();
        let f = PerturbationFields::from_state(&s, &g, &tab, &gas).unwrap();
        assert_eq!(f.sup_w(), 0.0);
        // truncation error ~ dx^2 / rho0(x_i) ~ dx / i at the i-th node from the vacuum boundary
        for i in 1..=32 {
            assert!(f.w_tt[i].abs() < 3e-3 / i as f64, "node {i}: {}", f.w_tt[i]);
            assert!((f.w_tt[i] + f.w_tt[64 - i]).abs() < 1e-15);
        }
        let s = init_state(&g, &PerturbationSpec::polynomial(1e-3, 1, 1), &gas).unwrap();
        let f = PerturbationFields::from_state(&s, &g, &tab, &gas).unwrap();
        for (k, x) in g.nodes.iter().enumerate() {
            assert_eq!(f.w[k], s.eta[k] - x);
        }
    }

    #[test]
    fn elliptic_flags() {
        assert_eq!(EllipticRatio::of(1.0, 0.0).value(), f64::INFINITY);
        assert_eq!(EllipticRatio::of(0.0, 0.0).value(), 0.0);
        assert_eq!(EllipticRatio::of(1.0, 4.0).value(), 0.25);
    }
}
