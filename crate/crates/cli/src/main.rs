use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fars_cli::commands::course::{cmd_course, CourseArgs};
use fars_cli::commands::eval::{cmd_eval, EvalArgs};
use fars_cli::commands::surface::{cmd_surface, SurfaceArgs};
use fars_cli::commands::train::cmd_train;
use fars_cli::{resolve_output_dir, CliError};
use fars_core::course::Level;
use fars_core::fuzzy::Engine;

/// Fuzzy velocity–distance reward shaping for drone gate racing.
#[derive(Parser)]
#[command(name = "fars", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one policy per configured seed.
    Train {
        /// `key = value` experiment config.
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate checkpoints with the deterministic mean action.
    Eval {
        /// Checkpoint file; repeat to aggregate several seeds.
        #[arg(long, required = true)]
        checkpoint: Vec<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(Level))]
        level: Level,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write a per-step CSV trace of every episode.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value = "eval")]
        output_dir: PathBuf,
    },
    /// Sample a fuzzy reward surface on a square grid.
    Surface {
        #[arg(long, value_parser = clap::value_parser!(Engine))]
        engine: Engine,
        #[arg(long, default_value_t = 51)]
        resolution: usize,
        #[arg(long)]
        svg: bool,
        /// Fuzzy system JSON (default: built-in velocity–distance system).
        #[arg(long)]
        fuzzy: Option<PathBuf>,
        /// Also write the fuzzy system used as `fuzzy_system.json`.
        #[arg(long)]
        export_system: bool,
        #[arg(long, default_value = "surfaces")]
        output_dir: PathBuf,
    },
    /// Generate one course.
    Course {
        #[arg(long, value_parser = clap::value_parser!(Level))]
        level: Level,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value = "courses")]
        output_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config } => {
            let outcome = cmd_train(&config)?;
            println!("trained {} seed(s) into {}", outcome.runs.len(), outcome.dir.display());
        }
        Command::Eval { checkpoint, level, episodes, seed, trace, output_dir } => {
            let output_dir = resolve_output_dir(&output_dir);
            let report = cmd_eval(&EvalArgs { checkpoints: checkpoint, level, episodes, seed, trace, output_dir: output_dir.clone() })?;
            let rates: Vec<String> = report.per_gate_mean.iter().map(|r| format!("{r:.3}")).collect();
            println!("per-gate success (mean over {} run(s)): {}", report.runs.len(), rates.join(" "));
            println!("final gate: {:.3} [{:.3}, {:.3}]", report.final_gate_success_mean, report.final_gate_success_min, report.final_gate_success_max);
            println!("report written to {}", output_dir.display());
        }
        Command::Surface { engine, resolution, svg, fuzzy, export_system, output_dir } => {
            let output_dir = resolve_output_dir(&output_dir);
            let grid = cmd_surface(&SurfaceArgs { engine, resolution, svg, fuzzy_system: fuzzy, export_system, output_dir: output_dir.clone() })?;
            println!("{} surface {}×{} written to {} (max adjacent jump {:.4})", engine, grid.nx, grid.ny, output_dir.display(), grid.max_adjacent_jump());
        }
        Command::Course { level, seed, svg, output_dir } => {
            let output_dir = resolve_output_dir(&output_dir);
            let course = cmd_course(&CourseArgs { level, seed, svg, output_dir: output_dir.clone() })?;
            println!("{level} course with {} gates written to {}", course.n_gates(), output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
