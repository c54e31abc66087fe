//! Acceptance gate: one PASS/FAIL line per criterion, tolerances from
//! `vacuum_lab::tolerances`.
//!
//! `cargo test --test acceptance -- --nocapture` shows the lines.

use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use vacuum_lab::ansatz::{h_envelope, log_spaced_times, AnsatzTable};
use vacuum_lab::diagnostics::{
    energy, energy_mixed, energy_tilde0, fit_rate, hardy_check, sup_bundle, PerturbationFields, MIXED_ORDERS,
};
use vacuum_lab::harness::{compute_scenario, RunConfig, ScenarioData};
use vacuum_lab::solver::{physical_fields, run, Grid, PerturbationSpec, PolynomialShape, RunSettings};
use vacuum_lab::tolerances as tol;
use vacuum_lab::GasParameters;

fn verdict(id: &str, checks: &[(String, bool)]) -> bool {
    let ok = checks.iter().all(|(_, ok)| *ok);
    println!("{id} {}", if ok { "PASS" } else { "FAIL" });
    for (line, ok) in checks {
        println!("    [{}] {line}", if *ok { "ok" } else { "x" });
    }
    ok
}

// Gamma(x) by Lanczos (g = 7, 9 terms), good to ~1e-15 for x > 0.5.
fn gamma_fn(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (k, c) in C.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `A` from `int_{-1}^{1} (1-y^2)^alpha dy = sqrt(pi) Gamma(alpha+1) / Gamma(alpha+3/2)`
/// and bisection on `A^{(gamma+1)/(2(gamma-1))} = M sqrt(B) / integral`.
fn amplitude_oracle(gamma: f64, mass: f64) -> f64 {
    let alpha = 1.0 / (gamma - 1.0);
    let b = (gamma - 1.0) / (2.0 * gamma * (gamma + 1.0));
    let integral = PI.sqrt() * gamma_fn(alpha + 1.0) / gamma_fn(alpha + 1.5);
    let target = mass * b.sqrt() / integral;
    let p = (gamma + 1.0) / (2.0 * (gamma - 1.0));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi.powf(p) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.powf(p) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn a1_constants() {
    let mut checks = Vec::new();
    for (gamma, mass) in [(2.0, 1.0), (3.0, 2.0), (1.5, 1.0)] {
        let gas = GasParameters::derive(gamma, mass).unwrap();
        let oracle = amplitude_oracle(gamma, mass);
        let rel = (gas.a - oracle).abs() / oracle;
        checks.push((
            format!("gamma {gamma}, M {mass}: A = {:.15}, oracle {oracle:.15}, rel {rel:.1e}", gas.a),
            rel <= tol::CONSTANT_RTOL,
        ));
        for t in tol::MASS_CHECK_TIMES {
            let m = gas.total_mass(t).unwrap();
            let rel = (m - mass).abs() / mass;
            checks.push((format!("gamma {gamma}: mass({t}) rel error {rel:.1e}"), rel <= tol::MASS_RTOL));
        }
    }
    assert!(verdict("A1", &checks));
}

fn separable_error(gas: &GasParameters, table: &AnsatzTable, n: usize, t_end: f64) -> f64 {
    let grid = Grid::new(gas, n).unwrap();
    let settings = RunSettings { t_end, cfl: 0.5 };
    let traj = run(gas, &grid, &PerturbationSpec::None, settings, &[]).unwrap();
    let last = traj.snapshots.last().unwrap();
    let exact = table.at(t_end).unwrap().eta_x;
    let err = grid
        .nodes
        .iter()
        .zip(&last.eta)
        .map(|(x, eta)| (eta - x * exact).abs())
        .fold(0.0, f64::max);
    err / (gas.half_width * exact)
}

#[test]
fn a2_separable_solution() {
    let gas = GasParameters::derive(2.0, 1.0).unwrap();
    let t_end = 10.0;
    let table = AnsatzTable::integrate(&gas, t_end, 1e-12).unwrap();
    let errs: Vec<f64> = [100, 200, 400].iter().map(|&n| separable_error(&gas, &table, n, t_end)).collect();
    let (lo, hi) = tol::CONVERGENCE_RATIO;
    let mut checks = vec![(
        format!("n = 200: relative sup error {:.3e}", errs[1]),
        errs[1] <= tol::SEPARABLE_REL_ERROR,
    )];
    for (k, n) in [(0, 100), (1, 200)] {
        let r = errs[k] / errs[k + 1];
        checks.push((format!("error({n}) / error({}) = {r:.3}", 2 * n), (lo..=hi).contains(&r)));
    }
    assert!(verdict("A2", &checks));
}

#[test]
fn a3_ansatz_envelopes() {
    let mut checks = Vec::new();
    for gamma in [1.5, 2.0, 3.0] {
        let gas = GasParameters::derive(gamma, 1.0).unwrap();
        let table = AnsatzTable::integrate(&gas, tol::ANSATZ_HORIZON, 1e-10).unwrap();
        let env = table.decay_envelope_check(1).unwrap();
        checks.push((
            format!("gamma {gamma}: eta_x / stretch in [{:.12}, {:.6}]", env.min_stretch_ratio, env.k_observed),
            env.min_stretch_ratio >= 1.0 - tol::STRETCH_LOWER_SLACK && env.k_observed <= tol::STRETCH_UPPER,
        ));
        checks.push((format!("gamma {gamma}: min eta_xt = {:.3e}", env.min_eta_xt), env.min_eta_xt >= tol::SIGN_FLOOR));
        checks.push((format!("gamma {gamma}: min h = {:.3e}", env.min_h), env.min_h >= tol::SIGN_FLOOR));
        checks.push((
            format!("gamma {gamma}: sup h / envelope = {:.6}", env.h_ratio_max),
            env.h_ratio_max <= 1.0 + tol::H_ENVELOPE_SLACK,
        ));
        let (lo, hi) = tol::H_SLOPE_WINDOW;
        let series: Vec<(f64, f64)> = log_spaced_times(hi, 400)
            .into_iter()
            .filter(|&t| t >= lo)
            .map(|t| (t, table.correction_h(t).unwrap().0))
            .collect();
        let slope = fit_rate(&series, (lo, hi)).unwrap().exponent;
        let bound = -gamma / (gamma + 1.0) + tol::H_SLOPE_SLACK;
        checks.push((format!("gamma {gamma}: slope of h = {slope:.4}, bound {bound:.4}"), slope <= bound));
        // the envelope itself, sampled the same way, for comparison
        let env_series: Vec<(f64, f64)> = series.iter().map(|&(t, _)| (t, h_envelope(gamma, t))).collect();
        let env_slope = fit_rate(&env_series, (lo, hi)).unwrap().exponent;
        println!("    gamma {gamma}: slope of the envelope itself = {env_slope:.4}");
    }
    assert!(verdict("A3", &checks));
}

#[test]
fn a4_duhamel() {
    let mut checks = Vec::new();
    for gamma in [1.5, 2.0, 3.0] {
        let gas = GasParameters::derive(gamma, 1.0).unwrap();
        let table = AnsatzTable::integrate(&gas, tol::ANSATZ_HORIZON, 1e-10).unwrap();
        let r = table.duhamel_residual().unwrap();
        checks.push((format!("gamma {gamma}: residual {r:.2e}"), r <= tol::DUHAMEL_RESIDUAL));
    }
    assert!(verdict("A4", &checks));
}

fn default_run() -> &'static (RunConfig, ScenarioData) {
    static RUN: OnceLock<(RunConfig, ScenarioData)> = OnceLock::new();
    RUN.get_or_init(|| {
        let config = RunConfig::default();
        assert_eq!((config.gamma, config.n_cells, config.t_end), (2.0, 400, 1e3));
        assert_eq!(config.position.amplitude, 1e-3);
        let data = compute_scenario(&config).map_err(|(stage, e)| format!("{stage:?}: {e}")).unwrap();
        (config, data)
    })
}

#[test]
fn a5_rates() {
    let (config, data) = default_run();
    let window = (10.0, 100.0);
    assert_eq!(config.window(), window);
    let g1 = config.gamma + 1.0;
    let rows = &data.rows;
    let fit = |f: &dyn Fn(&vacuum_lab::diagnostics::SnapshotDiagnostics) -> f64| {
        let s: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, f(r))).collect();
        fit_rate(&s, window).unwrap().exponent
    };
    let mut checks = Vec::new();
    for (name, measured, target, tolerance) in [
        ("D_u", fit(&|r| r.d_u), -1.0, tol::VELOCITY_RATE_TOL),
        ("D_rho", fit(&|r| r.d_rho), -2.0 / g1, tol::DENSITY_RATE_TOL),
        ("x_+", fit(&|r| r.x_plus), 1.0 / g1, tol::BOUNDARY_RATE_TOL),
        ("|dx_+/dt|", fit(&|r| r.dx_plus_dt.abs()), 1.0 / g1 - 1.0, tol::BOUNDARY_SPEED_RATE_TOL),
    ] {
        checks.push((
            format!("{name} exponent {measured:.4}, target {target:.4} +- {tolerance}"),
            (measured - target).abs() <= tolerance,
        ));
    }
    let asym = rows.iter().map(|r| (r.x_plus + r.x_minus).abs()).fold(0.0, f64::max);
    checks.push((format!("max |x_+ + x_-| = {asym:.1e}"), asym <= tol::SYMMETRY_TOL));
    assert!(verdict("A5", &checks));
}

#[test]
fn a6_energy_bounds() {
    let (_, data) = default_run();
    let rows = &data.rows;
    let first = &rows[0].energies;
    let e0_max = rows.iter().map(|r| r.energies.e0).fold(0.0, f64::max);
    let bundle_max = rows.iter().map(|r| r.energies.sup_bundle).fold(0.0, f64::max);
    let mut ell: Vec<f64> = rows.iter().map(|r| r.elliptic_01.value()).collect();
    ell.sort_by(f64::total_cmp);
    let median = if ell.len() % 2 == 1 {
        ell[ell.len() / 2]
    } else {
        0.5 * (ell[ell.len() / 2 - 1] + ell[ell.len() / 2])
    };
    let spread = ell[ell.len() - 1] / median;
    let checks = vec![
        (
            format!("max E0 = {e0_max:.4e}, E0(0) = {:.4e}", first.e0),
            e0_max <= tol::ENERGY_GROWTH * first.e0,
        ),
        (
            format!("max sup bundle = {bundle_max:.4e}, initial {:.4e}", first.sup_bundle),
            bundle_max <= tol::SUP_BUNDLE_GROWTH * first.sup_bundle,
        ),
        (format!("elliptic ratio (0,1) max / median = {spread:.3}"), spread <= tol::ELLIPTIC_SPREAD),
    ];
    assert!(verdict("A6", &checks));
}

fn invariants_case(gamma: f64, n_half: usize, eps: f64, q: u32, r: u32, veps: f64, t_end: f64) -> Result<(), TestCaseError> {
    let gas = GasParameters::derive(gamma, 1.0).unwrap();
    let grid = Grid::new(&gas, 2 * n_half).unwrap();
    let spec = PerturbationSpec::Polynomial {
        position: PolynomialShape { amplitude: eps, q, r },
        velocity: PolynomialShape { amplitude: veps, q, r },
    };
    let traj = run(&gas, &grid, &spec, RunSettings { t_end, cfl: 0.5 }, &[0.5 * t_end])
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let m0 = grid.discrete_mass();
    let n = grid.n_cells;
    for s in &traj.snapshots {
        let m = physical_fields(&grid, s).unwrap().mass();
        prop_assert!((m - m0).abs() <= tol::MASS_RTOL * m0, "mass {m} vs {m0}");
        if spec.is_odd() {
            for i in 0..=n {
                prop_assert!((s.eta[i] + s.eta[n - i]).abs() <= tol::SYMMETRY_TOL);
                prop_assert!((s.eta_t[i] + s.eta_t[n - i]).abs() <= tol::SYMMETRY_TOL);
            }
        }
    }
    Ok(())
}

#[test]
fn a7_properties() {
    let mut checks = Vec::new();

    let gas = GasParameters::derive(2.0, 1.0).unwrap();
    let grid = Grid::new(&gas, 400).unwrap();
    let h = hardy_check(&vec![1.0; grid.node_count()], &grid, 2.0).unwrap();
    let closed = 3.0 / gas.half_width.powi(2);
    checks.push((
        format!("Hardy ratio (F = 1, k = 2) {:.6} vs 3/L^2 = {closed:.6}", h.ratio),
        (h.ratio - closed).abs() <= tol::HARDY_CLOSED_FORM_TOL,
    ));

    let table = AnsatzTable::integrate(&gas, 2.0, 1e-10).unwrap();
    let traj = run(&gas, &grid, &PerturbationSpec::polynomial(1e-3, 1, 2), RunSettings { t_end: 2.0, cfl: 0.5 }, &[])
        .unwrap();
    let fields = PerturbationFields::from_state(traj.snapshots.last().unwrap(), &grid, &table, &gas).unwrap();
    let all = |f: &PerturbationFields| {
        let mut v: Vec<f64> = (0..=2).map(|j| energy(f, &grid, j).unwrap()).collect();
        v.push(energy_tilde0(f, &grid).unwrap());
        v.extend(MIXED_ORDERS.iter().map(|&(j, i)| energy_mixed(f, &grid, &gas, j, i).unwrap()));
        v.push(sup_bundle(f, &grid).unwrap());
        v
    };
    let base = all(&fields);
    let homogeneous = [2.0, -0.5, 8.0].iter().all(|&c| {
        all(&fields.scaled(c)).iter().zip(&base).all(|(scaled, b)| *scaled == c * c * b)
    });
    checks.push((format!("E(c w) == c^2 E(w) exactly for c in {{2, -1/2, 8}} over {} energies", base.len()), homogeneous));

    let mut runner = TestRunner::new(Config {
        cases: tol::PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (
        1.2f64..3.5,
        8usize..40,
        -2e-2f64..2e-2,
        1u32..4,
        1u32..4,
        -1e-2f64..1e-2,
        0.5f64..3.0,
    );
    let outcome = runner.run(&strategy, |(gamma, n_half, eps, q, r, veps, t_end)| {
        invariants_case(gamma, n_half, eps, q, r, veps, t_end)
    });
    checks.push((
        format!("{} randomized runs keep mass and odd symmetry: {outcome:?}", tol::PROPERTY_CASES),
        outcome.is_ok(),
    ));
    assert!(verdict("A7", &checks));
}
