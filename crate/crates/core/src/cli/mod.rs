//! Command-line front end.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 infeasible design
//! (`design` only), 3 any other runtime failure.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{compare_scenarios, run_scenario, sweep, Estimator, ScenarioConfig};
use crate::sdp::solve_p1;

pub use config::{apply_overrides, emit_config, parse_config};

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "RAMP_SENTINEL_OUT";

#[derive(Debug, Parser)]
#[command(name = "ramp-sentinel", version, about = "Robust on-ramp queue filter synthesis and evaluation")]
pub struct Cli {
    /// Output directory (overridden by RAMP_SENTINEL_OUT).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Config override, e.g. `--set noise.flow_bound=180`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize and certify a filter gain.
    Design {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        /// Cycle length in hours.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run one seed of a scenario and write its trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the configured (alpha, theta, U) grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the five-row estimator comparison.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Validation { .. } | Error::Domain(_) => 1,
        _ => 3,
    }
}

fn output_dir(flag: Option<&Path>) -> Result<PathBuf> {
    let dir = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or_else(|| flag.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    Ok(dir)
}

fn load(path: &Path, overrides: &[String]) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = config::parse_unvalidated(&text)?;
    apply_overrides(&mut cfg, overrides)?;
    Ok(cfg)
}

fn design_cmd(cli: &Cli, alpha: f64, theta: f64, beta: f64, dt: Option<f64>, out: &mut impl Write) -> Result<i32> {
    let mut cfg = ScenarioConfig::default();
    apply_overrides(&mut cfg, &cli.overrides)?;
    let dt = dt.unwrap_or(cfg.solver.delta_t);
    let dir = output_dir(cli.out.as_deref())?;
    match solve_p1(alpha, theta, dt, beta, &cfg.solver.options()) {
        Ok(d) => {
            let path = output::write_design(&dir, output::design_row(alpha, theta, beta, dt, Some(&d)))?;
            let _ = writeln!(
                out,
                "feasible  sqrt_mu1={}  mu2={}  L=({}, {})  -> {}",
                output::fmt6(d.sqrt_mu1()),
                output::fmt6(d.mu2),
                output::fmt6(d.gain[0]),
                output::fmt6(d.gain[1]),
                path.display()
            );
            Ok(0)
        }
        Err(e @ Error::Infeasible { .. }) => {
            let path = output::write_design(&dir, output::design_row(alpha, theta, beta, dt, None))?;
            let _ = writeln!(out, "infeasible: {e}  -> {}", path.display());
            Ok(2)
        }
        Err(e) => Err(e),
    }
}

fn simulate_cmd(cli: &Cli, config: &Path, seed: Option<u64>, out: &mut impl Write) -> Result<i32> {
    let cfg = load(config, &cli.overrides)?;
    let dir = output_dir(cli.out.as_deref())?;
    let design = cfg.design()?;
    let seed = seed.unwrap_or(cfg.harness.seeds[0]);
    let run = run_scenario(&cfg, &design, seed)?;
    output::write_design(
        &dir,
        output::design_row(cfg.plant.alpha, cfg.solver.theta_bound, cfg.solver.beta, cfg.solver.delta_t, Some(&design)),
    )?;
    let trace = output::write_trace(&dir, &run)?;
    let metrics = output::write_metrics(&dir, &run)?;
    for est in Estimator::ALL {
        let m = &run.metrics[est.index()];
        let _ = writeln!(
            out,
            "{:<10} rmse={}  sqrt_mu1_hat={}",
            est.name(),
            output::fmt6(m.rmse),
            output::fmt6(m.sqrt_mu1_hat)
        );
    }
    if let Some(c) = &run.criterion {
        let _ = writeln!(out, "criterion violations: {}", c.violations);
    }
    let _ = writeln!(out, "wrote {} and {}", trace.display(), metrics.display());
    Ok(0)
}

/// Runs the CLI on explicit arguments, writing human-readable output to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(if code == 0 { out as &mut dyn Write } else { err as &mut dyn Write }, "{e}");
            return code;
        }
    };
    let result = match &cli.command {
        Command::Design {
            alpha,
            theta,
            beta,
            dt,
        } => design_cmd(&cli, *alpha, *theta, *beta, *dt, out),
        Command::Simulate { config, seed } => simulate_cmd(&cli, config, *seed, out),
        Command::Sweep { config } => load(config, &cli.overrides).and_then(|cfg| {
            let dir = output_dir(cli.out.as_deref())?;
            let rows = sweep(&cfg)?;
            let path = output::write_sweep(&dir, &rows)?;
            let _ = writeln!(out, "{} cells -> {}", rows.len(), path.display());
            Ok(0)
        }),
        Command::Compare { config } => load(config, &cli.overrides).and_then(|cfg| {
            let dir = output_dir(cli.out.as_deref())?;
            let rows = compare_scenarios(&cfg)?;
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<16} sqrt_mu1_hat={}  rmse={}",
                    r.scenario,
                    output::fmt6(r.mean_sqrt_mu1_hat),
                    output::fmt6(r.mean_rmse)
                );
            }
            let path = output::write_compare(&dir, &rows)?;
            let _ = writeln!(out, "-> {}", path.display());
            Ok(0)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
