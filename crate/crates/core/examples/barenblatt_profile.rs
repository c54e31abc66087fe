//! Barenblatt constants and profiles for a few adiabatic exponents.

use vacuum_lab::GasParameters;

fn main() -> vacuum_lab::Result<()> {
    for gamma in [1.4, 2.0, 3.0] {
        let gas = GasParameters::derive(gamma, 1.0)?;
        println!(
            "gamma = {gamma}: A = {:.6}, B = {:.6}, alpha = {:.4}, L = {:.6}",
            gas.a, gas.b, gas.alpha, gas.half_width
        );
        for t in [0.0, 10.0, 1000.0] {
            let (lo, hi) = gas.barenblatt_boundaries(t);
            println!(
                "  t = {t:>6}: support [{lo:.4}, {hi:.4}], rho(0) = {:.6}, mass = {:.12}",
                gas.barenblatt_density(0.0, t),
                gas.total_mass(t)?
            );
        }
    }

    let gas = GasParameters::derive(2.0, 1.0)?;
    println!("\nx, rho(x, 0), rho(x, 100), u(x, 100)");
    let (_, hi) = gas.barenblatt_boundaries(100.0);
    for k in 0..=10 {
        let x = hi * k as f64 / 10.0;
        println!(
            "{x:.4}, {:.6}, {:.6}, {:.6}",
            gas.barenblatt_density(x, 0.0),
            gas.barenblatt_density(x, 100.0),
            gas.barenblatt_velocity(x, 100.0)
        );
    }
    Ok(())
}
