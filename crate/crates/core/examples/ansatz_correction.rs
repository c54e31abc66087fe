//! The ansatz stretch `eta_x~(t)` and its correction `h` against the
//! Barenblatt stretch `(1+t)^{1/(gamma+1)}`.

use vacuum_lab::ansatz::{h_envelope, AnsatzTable};
use vacuum_lab::GasParameters;

fn main() -> vacuum_lab::Result<()> {
    let gas = GasParameters::derive(2.0, 1.0)?;
    let table = AnsatzTable::integrate(&gas, 1e4, 1e-10)?;

    println!("t, eta_x, stretch, h, h / envelope");
    for t in [0.0, 0.5, 1.0, 3.0, 10.0, 100.0, 1e3, 1e4] {
        let p = table.at(t)?;
        let env = h_envelope(gas.gamma, t);
        let ratio = if env > 0.0 { p.h / env } else { f64::NAN };
        println!("{t}, {:.8}, {:.8}, {:.3e}, {ratio:.4}", p.eta_x, gas.stretch(t), p.h);
    }

    let phases = table.phase_portrait()?;
    println!(
        "\nh_t peaks at t0 = {:.4}, h peaks at t1 = {:.4} (h = {:.4e}), h_t bottoms out at t2 = {:.4}",
        phases.t0, phases.t1, phases.h_max, phases.t2
    );
    let env = table.decay_envelope_check(3)?;
    println!("K observed = {:.6}, inf eta_x / stretch = {:.12}", env.k_observed, env.min_stretch_ratio);
    for b in &env.orders {
        println!("  order {}: sup |d^k eta_x| (1+t)^(k - 1/3) = {:.4}", b.order, b.scaled_sup);
    }
    println!("Duhamel residual = {:.2e}", table.duhamel_residual()?);
    Ok(())
}
