//! Library behind the `fars` binary: experiment configs and the four
//! subcommands (train, eval, surface, course).

pub mod commands;
pub mod config;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{ConfigError, ExperimentConfig};

/// Environment variable that overrides every output directory.
pub const OUTPUT_DIR_ENV: &str = "FARS_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for unusable checkpoints, 4 for
    /// aborts while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Checkpoint(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    pub fn runtime(e: impl ToString) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// `FARS_OUTPUT_DIR` when set, otherwise `fallback`.
pub fn resolve_output_dir(fallback: &Path) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| fallback.to_path_buf())
}

/// Creates `dir` and checks that a file can be written inside it; failures
/// are configuration errors naming `key`.
pub fn prepare_output_dir(dir: &Path, key: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Config(ConfigError::value(key, format!("{} is not writable: {e}", dir.display())));
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".write-test");
    fs::write(&probe, b"").map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)?;
    Ok(())
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
