//! Experiment driver for the disclination solver: minimizations, parameter
//! sweeps, checkpoint analysis, tangent-map exports, and the oracle suite.
//!
//! Exit codes: 0 success, 1 runtime or verification failure, 2 bad config.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use ldg_core::checkpoint::{load_checkpoint, save_checkpoint};
use ldg_core::energy::energy;
use ldg_core::mesh::build_mesh;
use ldg_core::optimizer::{solve_branch, sweep, SolverConfig};
use ldg_core::verify::{run_suite, Mutation};

use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "ldg", version, about = "axisymmetric disclination solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Flat key=value config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the inner kernels (kernels run sequentially when 1).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seed recorded with the run; solves themselves are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize one branch and dump checkpoint, reports, and the field CSV.
    Minimize,
    /// Warm-started continuation over a monotone parameter list.
    Sweep,
    /// Re-run defect analysis on a saved checkpoint.
    Analyze,
    /// Export tangent-map profiles, energies, and director formula tables.
    Tangent,
    /// Run the oracle suite; exits 1 if any check fails.
    Verify {
        /// Inject a deliberate fault to prove the suite can fail.
        #[arg(long)]
        mutate: bool,
    },
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver: {0}")]
    Solver(#[from] ldg_core::optimizer::OptimError),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] ldg_core::checkpoint::CheckpointError),
    #[error("field: {0}")]
    Field(#[from] ldg_core::fields::FieldError),
    #[error("{0} checks failed")]
    VerifyFailed(usize),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let r = match &cli.cmd {
        Cmd::Minimize => cmd_minimize(&cli, &cfg),
        Cmd::Sweep => cmd_sweep(&cli, &cfg),
        Cmd::Analyze => cmd_analyze(&cli, &cfg),
        Cmd::Tangent => cmd_tangent(&cli, &cfg),
        Cmd::Verify { mutate } => cmd_verify(*mutate),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn solver_config(cfg: &RunConfig) -> SolverConfig {
    let mut sc = SolverConfig::for_grid(cfg.n);
    sc.sector_projection = cfg.sector;
    sc.seed_amplitude = cfg.seed_amplitude;
    if let Some(t) = cfg.grad_tol {
        sc.grad_tol = t;
    }
    if let Some(m) = cfg.max_iters {
        sc.max_iters = m;
    }
    sc
}

fn cmd_minimize(cli: &Cli, cfg: &RunConfig) -> Result<(), RunError> {
    let obs = cfg.obstacle()?;
    let sc = solver_config(cfg);
    std::fs::create_dir_all(&cli.out)?;
    let result = match solve_branch(cfg.n, cfg.mu, &obs, &sc) {
        Ok(r) => r,
        Err(e) => {
            output::write_status(&cli.out, cfg, cli, "failed", 0, Some(&e.to_string()))?;
            return Err(e.into());
        }
    };
    let defects = ldg_core::analysis::analyze_field(&result.field, obs.branch);
    std::fs::write(
        cli.out.join("checkpoint.txt"),
        save_checkpoint(&result.field, cfg.mu, &obs),
    )?;
    output::write_json(&cli.out, "energy.json", &output::versioned(&result.report))?;
    output::write_json(&cli.out, "defects.json", &defects)?;
    std::fs::write(cli.out.join("field.csv"), output::field_csv(&result.field))?;
    output::write_status(
        &cli.out,
        cfg,
        cli,
        output::status_name(result.status),
        result.iterations,
        None,
    )?;
    Ok(())
}

fn cmd_sweep(cli: &Cli, cfg: &RunConfig) -> Result<(), RunError> {
    let (param, values) = cfg.sweep()?;
    let obs = cfg.obstacle()?;
    let sc = solver_config(cfg);
    let mesh = Arc::new(build_mesh(cfg.n).map_err(|e| ConfigError::Invalid(e.to_string()))?);
    std::fs::create_dir_all(&cli.out)?;
    let records = sweep(mesh, param, &values, cfg.mu, &obs, &sc)?;
    std::fs::write(cli.out.join("sweep.csv"), output::sweep_csv(&records))?;
    output::write_status(&cli.out, cfg, cli, "converged", records.len(), None)?;
    Ok(())
}

fn cmd_analyze(cli: &Cli, cfg: &RunConfig) -> Result<(), RunError> {
    let path = cfg.checkpoint.as_ref().ok_or_else(|| {
        ConfigError::Invalid("analyze needs checkpoint=PATH in the config".into())
    })?;
    let text = std::fs::read_to_string(path)?;
    let (field, mu, obs) = load_checkpoint(&text)?;
    std::fs::create_dir_all(&cli.out)?;
    let defects = ldg_core::analysis::analyze_field(&field, obs.branch);
    output::write_json(&cli.out, "energy.json", &output::versioned(&energy(&field, mu)))?;
    output::write_json(&cli.out, "defects.json", &defects)?;
    std::fs::write(cli.out.join("field.csv"), output::field_csv(&field))?;
    Ok(())
}

fn cmd_tangent(cli: &Cli, cfg: &RunConfig) -> Result<(), RunError> {
    std::fs::create_dir_all(&cli.out)?;
    output::write_tangent_exports(&cli.out, cfg)?;
    Ok(())
}

fn cmd_verify(mutate: bool) -> Result<(), RunError> {
    let mutation = if mutate {
        Mutation::EigenvalueFormula
    } else {
        Mutation::None
    };
    let results = run_suite(mutation);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failed = 0usize;
    for r in &results {
        println!(
            "{:width$}  observed {:>12.3e}  tolerance {:>9.1e}  {}",
            r.name,
            r.observed,
            r.tolerance,
            if r.passed { "pass" } else { "FAIL" },
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(RunError::VerifyFailed(failed));
    }
    Ok(())
}
