use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vacuum_lab::harness::{self, RunConfig, EXIT_PASS, EXIT_STAGE};

#[derive(Parser)]
#[command(name = "vacuum-lab", version, about = "Damped Euler physical-vacuum laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifact bundle.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the ansatz ODE only.
    Ansatz {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a bundle and compare it byte for byte.
    Verify { bundle_dir: PathBuf },
    /// Fit a power law `(1+t)^p` to one column of a CSV with a `t` column.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        column: String,
        /// `lo,hi`
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
    },
    /// Run every config matching a glob and write a summary table.
    Sweep {
        config_glob: String,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
    },
}

// Like `println!`, but a closed pipe (`| head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(lo)?, p(hi)?))
}

fn load(path: &Path, out: Option<PathBuf>) -> vacuum_lab::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| vacuum_lab::Error::io(path, e))?;
    let mut config = harness::parse_config(&text)?;
    if let Some(out) = out {
        config.output_dir = out;
    }
    Ok(config)
}

fn dispatch(command: Command) -> vacuum_lab::Result<i32> {
    match command {
        Command::Run { config, out } => {
            let outcome = harness::run_scenario(&load(&config, out)?)?;
            say!("{}", String::from_utf8_lossy(&harness::render_json(&outcome.status)?));
            if let Some(data) = &outcome.data {
                for c in &data.report.checks {
                    say!("{:<28} {:?}  {}", c.name, c.verdict, c.detail);
                }
            }
            Ok(outcome.status.exit_code)
        }
        Command::Ansatz { config, out } => {
            let summary = harness::run_ansatz(&load(&config, out)?)?;
            say!("{}", String::from_utf8_lossy(&harness::render_json(&summary)?));
            Ok(EXIT_PASS)
        }
        Command::Verify { bundle_dir } => {
            let v = harness::verify(&bundle_dir)?;
            say!("checked {} artifacts, verdict {:?}", v.checked.len(), v.verdict);
            for m in &v.mismatches {
                say!("mismatch: {m}");
            }
            Ok(v.exit_code)
        }
        Command::Fit { csv, column, window } => {
            let f = harness::fit_csv(&csv, &column, window)?;
            say!(
                "exponent {} intercept {} r_squared {} points {}",
                f.exponent, f.intercept, f.r_squared, f.n_points
            );
            Ok(EXIT_PASS)
        }
        Command::Sweep { config_glob, out } => {
            let mut configs: Vec<PathBuf> = glob::glob(&config_glob)
                .map_err(|e| vacuum_lab::Error::config("config-glob", e.to_string()))?
                .filter_map(|p| p.ok())
                .collect();
            configs.sort();
            let rows = harness::sweep(&configs, &out)?;
            for r in &rows {
                say!("{:<40} {:<16} exit {}", r.config, r.status, r.exit_code);
            }
            Ok(rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_PASS))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = dispatch(Cli::parse().command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_STAGE
    });
    ExitCode::from(code as u8)
}
