//! With zero perturbation the solver should reproduce the separable solution
//! `eta = x eta_x~(t)`; the error falls at second order in the cell width.

use vacuum_lab::ansatz::AnsatzTable;
use vacuum_lab::solver::{run, Grid, PerturbationSpec, RunSettings};
use vacuum_lab::GasParameters;

fn main() -> vacuum_lab::Result<()> {
    let gas = GasParameters::derive(2.0, 1.0)?;
    let t_end = 10.0;
    let table = AnsatzTable::integrate(&gas, t_end, 1e-12)?;
    let exact = table.at(t_end)?.eta_x;

    let mut previous = None;
    for n in [50, 100, 200, 400] {
        let grid = Grid::new(&gas, n)?;
        let traj = run(&gas, &grid, &PerturbationSpec::None, RunSettings { t_end, cfl: 0.5 }, &[])?;
        let last = traj.snapshots.last().expect("t_end is always recorded");
        let err = grid
            .nodes
            .iter()
            .zip(&last.eta)
            .map(|(x, eta)| (eta - x * exact).abs())
            .fold(0.0, f64::max)
            / (gas.half_width * exact);
        match previous {
            Some(p) => println!("n = {n:>4}: relative error {err:.3e}, ratio {:.3}", p / err),
            None => println!("n = {n:>4}: relative error {err:.3e}"),
        }
        previous = Some(err);
    }
    Ok(())
}
