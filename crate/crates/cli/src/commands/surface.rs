//! `fars surface`: samples a fuzzy reward surface on a square grid.

use std::fs;
use std::path::{Path, PathBuf};

use fars_core::fuzzy::{Engine, FuzzySystem, SurfaceGrid};

use crate::config::ConfigError;
use crate::{prepare_output_dir, svg, write_file, CliError};

#[derive(Debug, Clone)]
pub struct SurfaceArgs {
    pub engine: Engine,
    pub resolution: usize,
    pub svg: bool,
    pub fuzzy_system: Option<PathBuf>,
    /// Also write the fuzzy system used, as editable JSON.
    pub export_system: bool,
    pub output_dir: PathBuf,
}

pub fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Mamdani => "mamdani",
        Engine::Sugeno => "sugeno",
    }
}

pub fn load_system(path: Option<&Path>) -> Result<FuzzySystem, CliError> {
    let Some(path) = path else {
        return Ok(FuzzySystem::default_velocity_distance());
    };
    let bad = |m: String| CliError::Config(ConfigError::value("--fuzzy", m));
    let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    FuzzySystem::from_json(&text).map_err(|e| bad(e.to_string()))
}

pub fn cmd_surface(args: &SurfaceArgs) -> Result<SurfaceGrid, CliError> {
    if args.resolution < 2 {
        return Err(CliError::Config(ConfigError::value("--resolution", "must be at least 2")));
    }
    let system = load_system(args.fuzzy_system.as_deref())?;
    prepare_output_dir(&args.output_dir, "--output-dir")?;
    let n = args.resolution;
    let grid = system.surface_grid(args.engine, n, n).map_err(|e| CliError::Config(ConfigError::value("--resolution", e)))?;
    let stem = format!("surface_{}_{n}", engine_name(args.engine));
    write_file(&args.output_dir.join(format!("{stem}.csv")), grid.to_csv())?;
    if args.svg {
        let title = format!("{} velocity–distance reward ({n}×{n})", engine_name(args.engine));
        write_file(&args.output_dir.join(format!("{stem}.svg")), svg::surface_heatmap(&grid, &title))?;
    }
    if args.export_system {
        write_file(&args.output_dir.join("fuzzy_system.json"), system.to_json())?;
    }
    Ok(grid)
}
