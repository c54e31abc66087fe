//! Log-log rate fits: an exact power law, one with a logarithmic factor, and
//! the boundary of a short solver run.

use vacuum_lab::ansatz::{log_spaced_times, AnsatzTable};
use vacuum_lab::diagnostics::{fit_rate, snapshot_diagnostics};
use vacuum_lab::solver::{run, Grid, PerturbationSpec, RunSettings};
use vacuum_lab::GasParameters;

fn main() -> vacuum_lab::Result<()> {
    let times = log_spaced_times(1e4, 64);
    let pure: Vec<_> = times.iter().map(|&t| (t, 3.0 * (1.0 + t).powf(-2.0 / 3.0))).collect();
    let logged: Vec<_> = times.iter().map(|&t| (t, (1.0 + t).powf(-2.0 / 3.0) * t.ln_1p())).collect();
    for (name, series) in [("pure", &pure), ("with log", &logged)] {
        let f = fit_rate(series, (1e2, 1e4))?;
        println!("{name:>8}: exponent {:.6}, r^2 {:.6}, {} points", f.exponent, f.r_squared, f.n_points);
    }

    let gas = GasParameters::derive(2.0, 1.0)?;
    let grid = Grid::new(&gas, 100)?;
    let t_end = 200.0;
    let table = AnsatzTable::integrate(&gas, t_end, 1e-10)?;
    let snaps = log_spaced_times(t_end, 40);
    let traj = run(&gas, &grid, &PerturbationSpec::polynomial(1e-3, 1, 1), RunSettings { t_end, cfl: 0.5 }, &snaps)?;
    let mut boundary = Vec::new();
    for s in &traj.snapshots {
        let d = snapshot_diagnostics(&grid, s, &table, &gas)?;
        boundary.push((d.t, d.x_plus));
    }
    let f = fit_rate(&boundary, (10.0, t_end))?;
    println!("x_+ exponent {:.4} (Barenblatt 1/3)", f.exponent);
    Ok(())
}
