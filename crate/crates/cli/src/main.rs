use clap::{Parser, Subcommand};
use flowlab_core::kinematics::{grid_sample, trajectory};
use flowlab_core::{preset, run_suite, Complex64, FlowError, PresetOptions, PRESET_NAMES};
use rayon::prelude::*;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

mod manifest;
mod output;

use manifest::Manifest;

/// Closed-form Lagrangian flows: simulate, verify, list presets.
#[derive(Debug, Parser)]
#[command(name = "flowlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write trajectory and/or field CSV files for a manifest.
    Simulate { manifest: PathBuf },
    /// Run the verification suite and write a JSON report.
    Verify { manifest: PathBuf },
    /// List the built-in presets.
    Presets {
        #[arg(long)]
        json: bool,
    },
}

/// A failed run, tagged with its exit code.
#[derive(Debug)]
pub enum Failure {
    ChecksFailed(String),
    Validation(String),
    Outside(String),
    Io(String),
    Compute(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::ChecksFailed(_) | Failure::Compute(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Outside(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::ChecksFailed(m)
            | Failure::Validation(m)
            | Failure::Outside(m)
            | Failure::Io(m)
            | Failure::Compute(m) => m,
        }
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::OutsideValidity { .. } => Failure::Outside(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FLOWLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::Validation(format!("invalid FLOWLAB_THREADS: '{raw}' is not a count"))
    })?;
    if n > 0 {
        // a pool that is already built is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn simulate(m: &Manifest) -> Result<(), Failure> {
    let Manifest {
        flow,
        grid,
        times,
        labels,
        outputs,
        ..
    } = m;
    if outputs.trajectories.is_none() && outputs.fields.is_none() {
        return Err(Failure::Validation(
            "invalid outputs: simulate needs trajectories or fields".into(),
        ));
    }
    if let Some(path) = &outputs.trajectories {
        let trajs = labels
            .par_iter()
            .map(|&(a, b)| trajectory(flow, Complex64::new(a, b), times, 0))
            .collect::<Result<Vec<_>, _>>()?;
        let csv = output::csv(trajs.into_iter().flat_map(|t| t.samples));
        output::write_atomic(path, csv.as_bytes())?;
    }
    if let Some(path) = &outputs.fields {
        let frames = times
            .par_iter()
            .map(|&t| grid_sample(flow, grid, t))
            .collect::<Result<Vec<_>, _>>()?;
        let csv = output::csv(frames.into_iter().flatten());
        output::write_atomic(path, csv.as_bytes())?;
    }
    Ok(())
}

fn verify(m: &Manifest) -> Result<(), Failure> {
    let path = m.outputs.report.as_ref().ok_or_else(|| {
        Failure::Validation("invalid outputs.report: verify needs a report path".into())
    })?;
    if m.times.len() < 2 {
        return Err(Failure::Validation(
            "invalid times: verify needs at least two times".into(),
        ));
    }
    let suite = run_suite(&m.flow, &m.tolerances)?;
    let report = json!({
        "flow": m.flow_echo,
        "family": m.flow.spec().name(),
        "window": m.tolerances.window,
        "seed": m.tolerances.seed,
        "checks": suite.checks,
        "pass": suite.pass,
    });
    let mut text =
        serde_json::to_string_pretty(&report).map_err(|e| Failure::Compute(e.to_string()))?;
    text.push('\n');
    output::write_atomic(path, text.as_bytes())?;
    for c in &suite.checks {
        println!(
            "{:<30} {}  residual {:.3e}  tol {:.1e}",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.max_residual,
            c.tolerance
        );
    }
    if suite.pass {
        Ok(())
    } else {
        let failed: Vec<_> = suite
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::ChecksFailed(format!(
            "checks failed: {}",
            failed.join(", ")
        )))
    }
}

fn presets(as_json: bool) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for name in PRESET_NAMES {
        let p = preset(name, &PresetOptions::default())?;
        rows.push((name, p.spec.name(), p.summary));
    }
    if as_json {
        let arr: Vec<_> = rows
            .iter()
            .map(|(n, f, s)| json!({"name": n, "family": f, "paper_example": s}))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&arr).map_err(|e| Failure::Compute(e.to_string()))?
        );
    } else {
        for (n, f, s) in rows {
            println!("{n:<12} {f:<18} {s}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { manifest } => simulate(&Manifest::load(&manifest)?),
        Command::Verify { manifest } => verify(&Manifest::load(&manifest)?),
        Command::Presets { json } => presets(json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
