//! Sweeps three exponents through the harness, one of them invalid, and prints
//! the summary table.

use std::fs;

use vacuum_lab::harness::{sweep, SUMMARY_CSV};

fn main() -> vacuum_lab::Result<()> {
    let dir = std::env::temp_dir().join("vacuum-lab-sweep-example");
    let configs_dir = dir.join("configs");
    fs::create_dir_all(&configs_dir).map_err(|e| vacuum_lab::Error::io(&configs_dir, e))?;
    let mut configs = Vec::new();
    for (name, gamma) in [("gamma_1_5", "1.5"), ("gamma_2", "2"), ("gamma_3", "3"), ("invalid", "0.5")] {
        let path = configs_dir.join(format!("{name}.cfg"));
        let text = format!("gamma = {gamma}\nn_cells = 100\nt_end = 300\nsnapshots = 48\nfit_window = 10, 300\n");
        fs::write(&path, text).map_err(|e| vacuum_lab::Error::io(&path, e))?;
        configs.push(path);
    }

    let out = dir.join("out");
    let rows = sweep(&configs, &out)?;
    for r in &rows {
        println!(
            "{:<12} {:<15} D_u {:>8} x_+ {:>8} {}",
            r.config.rsplit('/').next().unwrap_or(&r.config),
            r.status,
            r.exp_d_u.map_or("-".into(), |v| format!("{v:.3}")),
            r.exp_x_plus.map_or("-".into(), |v| format!("{v:.3}")),
            r.error
        );
    }
    println!("summary at {}", out.join(SUMMARY_CSV).display());
    Ok(())
}
