//! Weighted energies of a perturbation along a short run, plus the Hardy
//! inequality ratio of the initial perturbation.

use vacuum_lab::ansatz::AnsatzTable;
use vacuum_lab::diagnostics::{hardy_check, EnergyReport, PerturbationFields};
use vacuum_lab::solver::{run, Grid, PerturbationSpec, RunSettings};
use vacuum_lab::GasParameters;

fn main() -> vacuum_lab::Result<()> {
    let gas = GasParameters::derive(2.0, 1.0)?;
    let grid = Grid::new(&gas, 200)?;
    let spec = PerturbationSpec::polynomial(1e-3, 1, 1);
    let t_end = 50.0;
    let table = AnsatzTable::integrate(&gas, t_end, 1e-10)?;
    let times = [0.0, 1.0, 5.0, 20.0];
    let traj = run(&gas, &grid, &spec, RunSettings { t_end, cfl: 0.5 }, &times)?;

    println!("t, E0, E0~, E1, E2, E01, E11, E02, sup_bundle");
    for state in &traj.snapshots {
        let fields = PerturbationFields::from_state(state, &grid, &table, &gas)?;
        let e = EnergyReport::compute(&fields, &grid, &gas)?;
        println!(
            "{}, {:.3e}, {:.3e}, {:.3e}, {:.3e}, {:.3e}, {:.3e}, {:.3e}, {:.3e}",
            e.t, e.e0, e.e0_tilde, e.e1, e.e2, e.e01, e.e11, e.e02, e.sup_bundle
        );
    }

    let (w0, _) = spec.sample(&grid, &gas)?;
    for k in [2.0, 3.0] {
        let h = hardy_check(&w0, &grid, k)?;
        println!("Hardy k = {k}: lhs {:.4e}, rhs {:.4e}, ratio {:.4}", h.lhs, h.rhs, h.ratio);
    }
    Ok(())
}
