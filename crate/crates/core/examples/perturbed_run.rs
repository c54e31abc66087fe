//! Runs the default perturbed scenario and writes its artifact bundle.
//!
//! `cargo run --release --example perturbed_run [output_dir]`

use vacuum_lab::harness::{run_scenario, verify, RunConfig};

fn main() -> vacuum_lab::Result<()> {
    let mut config = RunConfig::default();
    if let Some(dir) = std::env::args().nth(1) {
        config.output_dir = dir.into();
    }
    println!("{}", config.to_text());

    let outcome = run_scenario(&config)?;
    println!("bundle in {}: {:?}", outcome.dir.display(), outcome.status.status);
    if let Some(data) = &outcome.data {
        for c in &data.report.checks {
            let measured = c.measured.map_or("-".into(), |m| format!("{m:.4e}"));
            let target = c.target.map_or("-".into(), |m| format!("{m:.4e}"));
            println!("{:<28} {:<13} measured {measured:>11} target {target:>11}", c.name, format!("{:?}", c.verdict));
        }
    }

    let v = verify(&outcome.dir)?;
    println!("verify: {} artifacts, {} mismatches", v.checked.len(), v.mismatches.len());
    Ok(())
}
