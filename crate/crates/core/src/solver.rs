//! Finite-difference evolution of the Lagrangian free boundary problem
//!
//! ```text
//! rho0 eta_tt + rho0 eta_t + (rho0^gamma / eta_x^gamma)_x = 0   on [-L, L]
//! ```
//!
//! with `rho0 = varsigma^alpha` the initial Barenblatt density. The unknown is
//! the flow map `eta` at uniformly spaced nodes. Interior nodes use a
//! conservative flux difference with `rho0^gamma` sampled analytically at cell
//! midpoints; since `rho0^gamma` vanishes at `x = +-L` both domain faces carry
//! zero flux. The end nodes, where `rho0 = 0`, use the flux divergence divided
//! by `rho0` in closed form:
//! `eta_tt = -eta_t - (alpha + 1) varsigma_x eta_x^{-gamma}`.
//!
//! Time integration is the classical four-stage Runge–Kutta scheme with the
//! damping kept inside the stages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParameters;

pub const MIN_CELLS: usize = 16;
const MIN_DT: f64 = 1e-12;

/// Uniform Lagrangian mesh on `[-L, L]` with the degenerate weights precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n_cells: usize,
    pub dx: f64,
    pub nodes: Vec<f64>,
    pub mids: Vec<f64>,
    pub rho0_nodes: Vec<f64>,
    pub rho0_mids: Vec<f64>,
    pub varsigma_nodes: Vec<f64>,
    pub varsigma_mids: Vec<f64>,
    pub varsigma_x_nodes: Vec<f64>,
    /// `rho0^gamma = varsigma^{alpha+1}` at midpoints: the face flux weight.
    pub flux_weight_mids: Vec<f64>,
}

impl Grid {
    /// Builds a mesh of `n_cells` (even, at least 16) cells. Coordinates are
    /// mirrored exactly so the grid is symmetric under `x -> -x`.
    pub fn new(gas: &GasParameters, n_cells: usize) -> Result<Self> {
        if n_cells < MIN_CELLS || n_cells % 2 != 0 {
            return Err(Error::config(
                "n_cells",
                format!("must be even and >= {MIN_CELLS}, got {n_cells}"),
            ));
        }
        let l = gas.half_width;
        let dx = 2.0 * l / n_cells as f64;
        let half = n_cells / 2;
        let mut nodes = vec![0.0; n_cells + 1];
        for i in 0..half {
            nodes[i] = -l + i as f64 * dx;
            nodes[n_cells - i] = -nodes[i];
        }
        nodes[half] = 0.0;
        let mut mids = vec![0.0; n_cells];
        for i in 0..half {
            mids[i] = -l + (i as f64 + 0.5) * dx;
            mids[n_cells - 1 - i] = -mids[i];
        }

        let varsigma_nodes: Vec<f64> = nodes.iter().map(|&x| gas.varsigma(x)).collect();
        let varsigma_mids: Vec<f64> = mids.iter().map(|&x| gas.varsigma(x)).collect();
        let mut varsigma_nodes = varsigma_nodes;
        varsigma_nodes[0] = 0.0;
        varsigma_nodes[n_cells] = 0.0;
        Ok(Self {
            n_cells,
            dx,
            rho0_nodes: varsigma_nodes.iter().map(|s| s.powf(gas.alpha)).collect(),
            rho0_mids: varsigma_mids.iter().map(|s| s.powf(gas.alpha)).collect(),
            flux_weight_mids: varsigma_mids.iter().map(|s| s.powf(gas.alpha + 1.0)).collect(),
            varsigma_x_nodes: nodes.iter().map(|&x| -2.0 * gas.b * x).collect(),
            varsigma_nodes,
            varsigma_mids,
            nodes,
            mids,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n_cells + 1
    }

    /// `sum rho0(mid) dx`; the discrete total mass, fixed for all time.
    pub fn discrete_mass(&self) -> f64 {
        self.rho0_mids.iter().sum::<f64>() * self.dx
    }
}

/// Time, flow map and velocity at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub t: f64,
    pub eta: Vec<f64>,
    pub eta_t: Vec<f64>,
    pub step_count: u64,
}

impl SolverState {
    /// First node index where `eta` fails to increase strictly (or is non-finite).
    pub fn monotonicity_violation(&self) -> Option<usize> {
        if let Some(i) = self
            .eta
            .iter()
            .zip(&self.eta_t)
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Some(i);
        }
        self.eta.windows(2).position(|w| w[1] <= w[0])
    }
}

/// Polynomial shape `amp * L * (x/L)^q * (1 - (x/L)^2)^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialShape {
    pub amplitude: f64,
    pub q: u32,
    pub r: u32,
}

impl PolynomialShape {
    pub fn eval(&self, x: f64, half_width: f64) -> f64 {
        let y = x / half_width;
        self.amplitude * half_width * y.powi(self.q as i32) * (1.0 - y * y).powi(self.r as i32)
    }

    /// Whether the shape is odd in `x`.
    pub fn is_odd(&self) -> bool {
        self.amplitude == 0.0 || self.q % 2 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    None,
    /// Position perturbation `w0` and velocity perturbation `w1`.
    Polynomial {
        position: PolynomialShape,
        velocity: PolynomialShape,
    },
    /// Nodal samples of `w0` and `w1`, one per grid node.
    CustomSampled {
        position: Vec<f64>,
        velocity: Vec<f64>,
        /// Reject data whose end-node stretch makes `(rho_0^{gamma-1})_x` degenerate
        /// at the vacuum boundary; otherwise only log a warning.
        strict_vacuum_check: bool,
    },
}

impl PerturbationSpec {
    pub fn polynomial(epsilon: f64, q: u32, r: u32) -> Self {
        PerturbationSpec::Polynomial {
            position: PolynomialShape { amplitude: epsilon, q, r },
            velocity: PolynomialShape { amplitude: 0.0, q, r },
        }
    }

    /// Whether both `w0` and `w1` are odd, so the solution stays odd.
    pub fn is_odd(&self) -> bool {
        match self {
            PerturbationSpec::None => true,
            PerturbationSpec::Polynomial { position, velocity } => position.is_odd() && velocity.is_odd(),
            PerturbationSpec::CustomSampled { .. } => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PerturbationSpec::None => true,
            PerturbationSpec::Polynomial { position, velocity } => position.amplitude == 0.0 && velocity.amplitude == 0.0,
            PerturbationSpec::CustomSampled { position, velocity, .. } => {
                position.iter().chain(velocity).all(|&v| v == 0.0)
            }
        }
    }

    /// `(w0, w1)` at the grid nodes.
    pub fn sample(&self, grid: &Grid, gas: &GasParameters) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = grid.node_count();
        match self {
            PerturbationSpec::None => Ok((vec![0.0; n], vec![0.0; n])),
            PerturbationSpec::Polynomial { position, velocity } => {
                for (name, s) in [("position", position), ("velocity", velocity)] {
                    if !s.amplitude.is_finite() || s.q < 1 || s.r < 1 {
                        return Err(Error::ParameterDomain(format!(
                            "{name} perturbation needs finite amplitude and q, r >= 1, got {s:?}"
                        )));
                    }
                }
                let l = gas.half_width;
                Ok((
                    grid.nodes.iter().map(|&x| position.eval(x, l)).collect(),
                    grid.nodes.iter().map(|&x| velocity.eval(x, l)).collect(),
                ))
            }
            PerturbationSpec::CustomSampled { position, velocity, .. } => {
                if position.len() != n || velocity.len() != n {
                    return Err(Error::ParameterDomain(format!(
                        "custom perturbation needs {n} samples, got {} and {}",
                        position.len(),
                        velocity.len()
                    )));
                }
                if position.iter().chain(velocity).any(|v| !v.is_finite()) {
                    return Err(Error::ParameterDomain("custom perturbation has non-finite samples".into()));
                }
                Ok((position.clone(), velocity.clone()))
            }
        }
    }
}

/// Second-order one-sided derivative at the two end nodes.
pub(crate) fn end_derivatives(f: &[f64], dx: f64) -> (f64, f64) {
    let n = f.len() - 1;
    let left = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    let right = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * dx);
    (left, right)
}

/// `eta = x + w0`, `eta_t = x/(gamma+1) + w1`: the ansatz at `t = 0` plus the perturbation.
pub fn init_state(grid: &Grid, spec: &PerturbationSpec, gas: &GasParameters) -> Result<SolverState> {
    let (w0, w1) = spec.sample(grid, gas)?;
    let g1 = gas.gamma + 1.0;
    let state = SolverState {
        t: 0.0,
        eta: grid.nodes.iter().zip(&w0).map(|(x, w)| x + w).collect(),
        eta_t: grid.nodes.iter().zip(&w1).map(|(x, w)| x / g1 + w).collect(),
        step_count: 0,
    };
    if let Some(node) = state.monotonicity_violation() {
        let min_stretch = state
            .eta
            .windows(2)
            .map(|w| (w[1] - w[0]) / grid.dx)
            .fold(f64::INFINITY, f64::min);
        return Err(Error::PerturbationTooLarge { node, min_stretch });
    }
    if let PerturbationSpec::CustomSampled {
        strict_vacuum_check, ..
    } = spec
    {
        let (left, right) = end_derivatives(&state.eta, grid.dx);
        for (side, s) in [("left", left), ("right", right)] {
            if !(s > 0.0 && s.is_finite()) {
                let msg = format!("{side} vacuum boundary is not physical: eta_x = {s:e}");
                if *strict_vacuum_check {
                    return Err(Error::ParameterDomain(msg));
                }
                log::warn!("{msg}");
            }
        }
    }
    Ok(state)
}

/// Nodal acceleration `eta_tt` of the semi-discrete system.
pub fn acceleration(grid: &Grid, state: &SolverState, gas: &GasParameters) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.node_count()];
    acceleration_into(grid, &state.eta, &state.eta_t, gas, state.t, &mut out)?;
    Ok(out)
}

fn acceleration_into(
    grid: &Grid,
    eta: &[f64],
    eta_t: &[f64],
    gas: &GasParameters,
    t: f64,
    out: &mut [f64],
) -> Result<()> {
    let n = grid.n_cells;
    let dx = grid.dx;
    let gamma = gas.gamma;
    let mut flux_left = 0.0;
    for i in 0..n {
        let stretch = (eta[i + 1] - eta[i]) / dx;
        if !(stretch > 0.0) {
            return Err(Error::BlowUp {
                t,
                node: i,
                reason: format!("eta_x = {stretch:e} in cell {i}"),
            });
        }
        let flux_right = grid.flux_weight_mids[i] * stretch.powf(-gamma);
        if i > 0 {
            out[i] = -eta_t[i] - (flux_right - flux_left) / (dx * grid.rho0_nodes[i]);
        }
        flux_left = flux_right;
    }
    let (sl, sr) = end_derivatives(eta, dx);
    for (idx, s) in [(0, sl), (n, sr)] {
        if !(s > 0.0) {
            return Err(Error::BlowUp {
                t,
                node: idx,
                reason: format!("one-sided eta_x = {s:e} at the vacuum boundary"),
            });
        }
        out[idx] = -eta_t[idx] - (gas.alpha + 1.0) * grid.varsigma_x_nodes[idx] * s.powf(-gamma);
    }
    Ok(())
}

/// Time derivative of [`acceleration`] along the semi-discrete flow: `eta_ttt`
/// given the current `eta_tt`.
pub fn jerk(grid: &Grid, state: &SolverState, eta_tt: &[f64], gas: &GasParameters) -> Result<Vec<f64>> {
    let n = grid.n_cells;
    let dx = grid.dx;
    let gamma = gas.gamma;
    let eta = &state.eta;
    let eta_t = &state.eta_t;
    let mut out = vec![0.0; n + 1];
    let mut dflux_left = 0.0;
    for i in 0..n {
        let stretch = (eta[i + 1] - eta[i]) / dx;
        if !(stretch > 0.0) {
            return Err(Error::BlowUp {
                t: state.t,
                node: i,
                reason: format!("eta_x = {stretch:e} in cell {i}"),
            });
        }
        let stretch_t = (eta_t[i + 1] - eta_t[i]) / dx;
        let dflux_right = -gamma * grid.flux_weight_mids[i] * stretch.powf(-gamma - 1.0) * stretch_t;
        if i > 0 {
            out[i] = -eta_tt[i] - (dflux_right - dflux_left) / (dx * grid.rho0_nodes[i]);
        }
        dflux_left = dflux_right;
    }
    let (sl, sr) = end_derivatives(eta, dx);
    let (vl, vr) = end_derivatives(eta_t, dx);
    for (idx, s, v) in [(0, sl, vl), (n, sr, vr)] {
        out[idx] = -eta_tt[idx] + (gas.alpha + 1.0) * grid.varsigma_x_nodes[idx] * gamma * s.powf(-gamma - 1.0) * v;
    }
    Ok(out)
}

/// Stable step `cfl * dx / max_mid sqrt(gamma varsigma) eta_x^{-(gamma+1)/2}`, floored at 1e-12.
pub fn cfl_dt(grid: &Grid, state: &SolverState, gas: &GasParameters, cfl: f64) -> f64 {
    let gamma = gas.gamma;
    let speed = (0..grid.n_cells)
        .map(|i| {
            let stretch = (state.eta[i + 1] - state.eta[i]) / grid.dx;
            (gamma * grid.varsigma_mids[i]).sqrt() * stretch.powf(-0.5 * (gamma + 1.0))
        })
        .fold(0.0, f64::max);
    if !(speed > 0.0) {
        return f64::INFINITY;
    }
    (cfl * grid.dx / speed).max(MIN_DT)
}

/// Reusable stage buffers for [`step`].
#[derive(Debug, Clone)]
pub struct Stepper {
    stage_eta: Vec<f64>,
    stage_v: Vec<f64>,
    k_x: [Vec<f64>; 4],
    k_v: [Vec<f64>; 4],
}

impl Stepper {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.node_count();
        Self {
            stage_eta: vec![0.0; n],
            stage_v: vec![0.0; n],
            k_x: std::array::from_fn(|_| vec![0.0; n]),
            k_v: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    /// Advances `state` by `dt` in place with one classical RK4 step.
    pub fn advance(&mut self, grid: &Grid, state: &mut SolverState, gas: &GasParameters, dt: f64) -> Result<()> {
        const STAGE: [f64; 4] = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            if s == 0 {
                self.stage_eta.copy_from_slice(&state.eta);
                self.stage_v.copy_from_slice(&state.eta_t);
            } else {
                let c = STAGE[s] * dt;
                for i in 0..self.stage_eta.len() {
                    self.stage_eta[i] = state.eta[i] + c * self.k_x[s - 1][i];
                    self.stage_v[i] = state.eta_t[i] + c * self.k_v[s - 1][i];
                }
            }
            self.k_x[s].copy_from_slice(&self.stage_v);
            let (kv, _) = self.k_v.split_at_mut(s + 1);
            acceleration_into(grid, &self.stage_eta, &self.stage_v, gas, state.t + STAGE[s] * dt, &mut kv[s])?;
        }
        let w = dt / 6.0;
        for i in 0..state.eta.len() {
            state.eta[i] += w * (self.k_x[0][i] + 2.0 * self.k_x[1][i] + 2.0 * self.k_x[2][i] + self.k_x[3][i]);
            state.eta_t[i] += w * (self.k_v[0][i] + 2.0 * self.k_v[1][i] + 2.0 * self.k_v[2][i] + self.k_v[3][i]);
        }
        state.t += dt;
        state.step_count += 1;
        if let Some(node) = state.monotonicity_violation() {
            return Err(Error::BlowUp {
                t: state.t,
                node,
                reason: "monotonicity of the flow map lost".into(),
            });
        }
        Ok(())
    }
}

/// One RK4 step returning the new state.
pub fn step(grid: &Grid, state: &SolverState, gas: &GasParameters, dt: f64) -> Result<SolverState> {
    let mut next = state.clone();
    Stepper::new(grid).advance(grid, &mut next, gas, dt)?;
    Ok(next)
}

/// Eulerian view of a Lagrangian state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFields {
    /// Particle positions `eta` at the nodes.
    pub positions: Vec<f64>,
    /// `rho0(mid) / eta_x(mid)` per cell.
    pub density_mids: Vec<f64>,
    pub velocity_nodes: Vec<f64>,
    pub x_minus: f64,
    pub x_plus: f64,
}

impl PhysicalFields {
    /// `sum density * (eta_{i+1} - eta_i)`.
    pub fn mass(&self) -> f64 {
        self.density_mids
            .iter()
            .zip(self.positions.windows(2))
            .map(|(rho, w)| rho * (w[1] - w[0]))
            .sum()
    }
}

pub fn physical_fields(grid: &Grid, state: &SolverState) -> Result<PhysicalFields> {
    if let Some(node) = state.monotonicity_violation() {
        return Err(Error::BlowUp {
            t: state.t,
            node,
            reason: "state is not monotone".into(),
        });
    }
    let density_mids = grid
        .rho0_mids
        .iter()
        .zip(state.eta.windows(2))
        .map(|(rho0, w)| rho0 / ((w[1] - w[0]) / grid.dx))
        .collect();
    Ok(PhysicalFields {
        positions: state.eta.clone(),
        density_mids,
        velocity_nodes: state.eta_t.clone(),
        x_minus: state.eta[0],
        x_plus: state.eta[grid.n_cells],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub t_end: f64,
    pub cfl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<SolverState>,
}

/// Evolves from `init_state` to `t_end`, landing exactly on each snapshot time.
///
/// Snapshot times must be sorted and lie in `[0, t_end]`; `t_end` itself is
/// always recorded.
pub fn run(
    gas: &GasParameters,
    grid: &Grid,
    perturbation: &PerturbationSpec,
    settings: RunSettings,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    let RunSettings { t_end, cfl } = settings;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::config("t_end", format!("must be finite and >= 0, got {t_end}")));
    }
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::config("cfl", format!("must lie in (0, 1], got {cfl}")));
    }
    if snapshot_times.windows(2).any(|w| w[1] < w[0])
        || snapshot_times.iter().any(|&t| !(t >= 0.0 && t <= t_end))
    {
        return Err(Error::config("snapshot_times", "must be sorted and within [0, t_end]"));
    }
    let mut targets: Vec<f64> = snapshot_times.to_vec();
    targets.dedup();
    if targets.last() != Some(&t_end) {
        targets.push(t_end);
    }

    let mut state = init_state(grid, perturbation, gas)?;
    let mut stepper = Stepper::new(grid);
    let mut snapshots = Vec::with_capacity(targets.len());
    for &target in &targets {
        while state.t < target {
            let mut dt = cfl_dt(grid, &state, gas, cfl);
            if state.t + dt >= target {
                dt = target - state.t;
            }
            stepper.advance(grid, &mut state, gas, dt)?;
            if state.t > target || target - state.t < 1e-12 * target.max(1.0) {
                state.t = target;
            }
        }
        snapshots.push(state.clone());
    }
    Ok(Trajectory { snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gas() -> GasParameters {
        GasParameters::derive(2.0, 1.0).unwrap()
    }

    #[test]
    fn grid_layout() {
        let p = gas();
        let g = Grid::new(&p, 16).unwrap();
        assert_eq!(g.nodes.len(), 17);
        assert_eq!(g.mids.len(), 16);
        assert_eq!(g.nodes[0], -p.half_width);
        assert_eq!(g.nodes[16], p.half_width);
        assert!((g.nodes[0] + 2.080).abs() < 1e-3);
        assert_eq!(g.varsigma_nodes[0], 0.0);
        assert_eq!(g.varsigma_nodes[16], 0.0);
        assert_eq!(g.varsigma_nodes[8], p.a);
        for i in 0..=16 {
            assert_eq!(g.nodes[i], -g.nodes[16 - i]);
        }
        assert!(g.varsigma_nodes[1..16].iter().all(|&s| s > 0.0));
        assert!(g.varsigma_mids.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn grid_rejects_bad_counts() {
        let p = gas();
        assert!(matches!(Grid::new(&p, 15), Err(Error::Config { .. })));
        assert!(matches!(Grid::new(&p, 17), Err(Error::Config { .. })));
        assert!(matches!(Grid::new(&p, 14), Err(Error::Config { .. })));
    }

    #[test]
    fn initial_states() {
        let p = gas();
        let g = Grid::new(&p, 32).unwrap();
        let s = init_state(&g, &PerturbationSpec::None, &p).unwrap();
        for i in 0..=32 {
            assert_eq!(s.eta[i], g.nodes[i]);
            assert_eq!(s.eta_t[i], g.nodes[i] / 3.0);
        }
        let s = init_state(&g, &PerturbationSpec::polynomial(1e-3, 1, 1), &p).unwrap();
        assert_eq!(s.eta[16], 0.0);
        assert_eq!(s.eta_t[16], 0.0);
        // 1 + w0' = 1 - 2 eps at the ends, so eps = 10 folds the map
        assert!(matches!(
            init_state(&g, &PerturbationSpec::polynomial(10.0, 1, 1), &p),
            Err(Error::PerturbationTooLarge { .. })
        ));
    }

    #[test]
    fn custom_samples_are_validated() {
        let p = gas();
        let g = Grid::new(&p, 16).unwrap();
        let short = PerturbationSpec::CustomSampled {
            position: vec![0.0; 5],
            velocity: vec![0.0; 5],
            strict_vacuum_check: false,
        };
        assert!(init_state(&g, &short, &p).is_err());
        // squeeze the last cell so the one-sided end stretch turns negative
        let mut pos = vec![0.0; 17];
        pos[16] = -0.9 * g.dx;
        pos[15] = 0.0;
        pos[14] = 0.0;
        let degenerate = |strict| PerturbationSpec::CustomSampled {
            position: pos.clone(),
            velocity: vec![0.0; 17],
            strict_vacuum_check: strict,
        };
        assert!(init_state(&g, &degenerate(false), &p).is_ok());
        assert!(matches!(init_state(&g, &degenerate(true), &p), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn boundary_acceleration_vanishes_for_the_ansatz_at_rest() {
        let p = gas();
        let g = Grid::new(&p, 64).unwrap();
        let s = init_state(&g, &PerturbationSpec::None, &p).unwrap();
        let a = acceleration(&g, &s, &p).unwrap();
        // -L/3 + 2 * 2 B L = 0
        assert!(a[64].abs() < 1e-14, "{}", a[64]);
        assert!(a[0].abs() < 1e-14);
        for i in 0..=64 {
            assert!((a[i] + a[64 - i]).abs() < 1e-14);
        }
        // first face carries rho0^gamma(mid) only; the domain faces themselves carry none
        assert_eq!(p.varsigma(p.half_width), 0.0);
    }

    #[test]
    fn cfl_examples() {
        let p = gas();
        let g = Grid::new(&p, 400).unwrap();
        let s = init_state(&g, &PerturbationSpec::None, &p).unwrap();
        let dt = cfl_dt(&g, &s, &p, 0.5);
        let speed = 0.5 * g.dx / dt;
        // max over midpoints, the centre node itself is not a midpoint
        assert!((speed - (2.0 * p.a).sqrt()).abs() < 1e-4, "{speed}");
        assert!((speed - 0.849).abs() < 1e-3);
        let g2 = Grid::new(&p, 800).unwrap();
        let s2 = init_state(&g2, &PerturbationSpec::None, &p).unwrap();
        assert_relative_eq!(cfl_dt(&g2, &s2, &p, 0.5) / dt, 0.5, max_relative = 1e-5);
        let stretched = SolverState {
            eta: s.eta.iter().map(|x| 2.0 * x).collect(),
            ..s.clone()
        };
        assert!(cfl_dt(&g, &stretched, &p, 0.5) > dt);
    }

    #[test]
    fn zero_run_snapshots() {
        let p = gas();
        let g = Grid::new(&p, 32).unwrap();
        let settings = RunSettings { t_end: 0.0, cfl: 0.5 };
        let tr = run(&p, &g, &PerturbationSpec::None, settings, &[0.0]).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.snapshots[0], init_state(&g, &PerturbationSpec::None, &p).unwrap());
        let tr = run(&p, &g, &PerturbationSpec::None, RunSettings { t_end: 1.0, cfl: 0.5 }, &[0.0, 0.5]).unwrap();
        assert_eq!(tr.snapshots.len(), 3);
        assert_eq!(tr.snapshots[1].t, 0.5);
        assert_eq!(tr.snapshots[2].t, 1.0);
        assert!(run(&p, &g, &PerturbationSpec::None, RunSettings { t_end: 1.0, cfl: 1.5 }, &[]).is_err());
        assert!(run(&p, &g, &PerturbationSpec::None, RunSettings { t_end: 1.0, cfl: 0.5 }, &[0.5, 0.2]).is_err());
    }

    #[test]
    fn odd_data_stays_odd_and_mass_is_fixed() {
        let p = gas();
        let g = Grid::new(&p, 64).unwrap();
        let spec = PerturbationSpec::Polynomial {
            position: PolynomialShape { amplitude: 0.01, q: 3, r: 2 },
            velocity: PolynomialShape { amplitude: -0.02, q: 1, r: 1 },
        };
        let tr = run(&p, &g, &spec, RunSettings { t_end: 2.0, cfl: 0.5 }, &[]).unwrap();
        let s = tr.snapshots.last().unwrap();
        for i in 0..=64 {
            assert!((s.eta[i] + s.eta[64 - i]).abs() < 1e-13);
        }
        let f = physical_fields(&g, s).unwrap();
        assert_relative_eq!(f.mass(), g.discrete_mass(), max_relative = 1e-13);
        assert_eq!(f.x_plus, s.eta[64]);
    }

    #[test]
    fn step_matches_stepper() {
        let p = gas();
        let g = Grid::new(&p, 32).unwrap();
        let s = init_state(&g, &PerturbationSpec::polynomial(1e-3, 1, 1), &p).unwrap();
        let dt = cfl_dt(&g, &s, &p, 0.5);
        let a = step(&g, &s, &p, dt).unwrap();
        let mut b = s.clone();
        Stepper::new(&g).advance(&g, &mut b, &p, dt).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.step_count, 1);
    }

    #[test]
    fn jerk_matches_finite_difference_of_acceleration() {
        let p = gas();
        let g = Grid::new(&p, 32).unwrap();
        let s = init_state(&g, &PerturbationSpec::polynomial(0.05, 2, 1), &p).unwrap();
        let a = acceleration(&g, &s, &p).unwrap();
        let j = jerk(&g, &s, &a, &p).unwrap();
        let dt = 1e-5;
        let fwd = SolverState {
            eta: s.eta.iter().zip(&s.eta_t).map(|(e, v)| e + dt * v).collect(),
            eta_t: s.eta_t.iter().zip(&a).map(|(v, acc)| v + dt * acc).collect(),
            ..s.clone()
        };
        let bwd = SolverState {
            eta: s.eta.iter().zip(&s.eta_t).map(|(e, v)| e - dt * v).collect(),
            eta_t: s.eta_t.iter().zip(&a).map(|(v, acc)| v - dt * acc).collect(),
            ..s.clone()
        };
        let af = acceleration(&g, &fwd, &p).unwrap();
        let ab = acceleration(&g, &bwd, &p).unwrap();
        for i in 0..=32 {
            let fd = (af[i] - ab[i]) / (2.0 * dt);
            assert!((fd - j[i]).abs() < 1e-6 * (1.0 + j[i].abs()), "node {i}: {fd} vs {}", j[i]);
        }
    }
}
