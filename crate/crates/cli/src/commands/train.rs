//! `fars train --config <path>`: one training run per seed, each in its own
//! `seed_<s>/` directory with periodic checkpoints and a stats CSV, plus a
//! merged CSV with the across-seed mean and spread.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use fars_core::export::fmt_g9;
use fars_core::fuzzy::FuzzySystem;
use fars_core::reward::RewardModel;
use fars_core::rl::train::stats_csv;
use fars_core::rl::{Checkpoint, EpochStats, PolicyParams, TrainSetup, Trainer};

use crate::config::{ConfigError, ExperimentConfig};
use crate::{prepare_output_dir, resolve_output_dir, write_file, CliError};

pub const CONFIG_ECHO_FILE: &str = "config.txt";
pub const STATS_FILE: &str = "stats.csv";
pub const MERGED_FILE: &str = "merged_stats.csv";
pub const FINAL_CHECKPOINT: &str = "checkpoint_final.json";

/// Everything a checkpoint needs to be evaluated on its own: the experiment
/// and the fuzzy system it trained with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunEcho {
    pub experiment: ExperimentConfig,
    pub fuzzy_system: Option<FuzzySystem>,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub dir: PathBuf,
    pub runs: Vec<(u64, Vec<EpochStats>)>,
}

pub fn seed_dir(run_dir: &Path, seed: u64) -> PathBuf {
    run_dir.join(format!("seed_{seed}"))
}

pub fn checkpoint_name(epoch: usize) -> String {
    format!("checkpoint_epoch_{epoch:04}.json")
}

/// The fuzzy system of the experiment: the file named by
/// `fuzzy_system_path`, else the default velocity–distance system. Only
/// fuzzy reward modes get one.
pub fn load_fuzzy_system(cfg: &ExperimentConfig) -> Result<Option<FuzzySystem>, CliError> {
    let system = match &cfg.fuzzy_system_path {
        Some(path) => {
            let bad = |m: String| CliError::Config(ConfigError::value("fuzzy_system_path", m));
            let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
            FuzzySystem::from_json(&text).map_err(|e| bad(e.to_string()))?
        }
        None => FuzzySystem::default_velocity_distance(),
    };
    Ok(cfg.reward_mode.engine().map(|_| system))
}

pub fn reward_model(cfg: &ExperimentConfig, fuzzy: Option<FuzzySystem>) -> Result<RewardModel, CliError> {
    RewardModel::new(cfg.reward_config(), fuzzy.map(Arc::new)).map_err(|e| CliError::Config(ConfigError::value("reward", e)))
}

pub fn cmd_train(config_path: &Path) -> Result<TrainOutcome, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(ConfigError::value("--config", format!("cannot read {}: {e}", config_path.display()))))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let dir = resolve_output_dir(&cfg.output_dir);
    run_experiment(&cfg, &dir)
}

/// Trains every seed of `cfg` into `dir`. Seeds run on separate threads;
/// each is deterministic on its own, so the files never depend on timing.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<TrainOutcome, CliError> {
    cfg.validate()?;
    prepare_output_dir(dir, "output_dir")?;
    let fuzzy = load_fuzzy_system(cfg)?;
    let model = reward_model(cfg, fuzzy.clone())?;
    // the echo keeps the configured output_dir so an override does not change file contents
    let echo = serde_json::to_value(RunEcho { experiment: cfg.clone(), fuzzy_system: fuzzy }).expect("echo serializes");
    write_file(&dir.join(CONFIG_ECHO_FILE), cfg.to_text())?;

    let results: Vec<Result<Vec<EpochStats>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .seeds
            .iter()
            .map(|&seed| {
                let (model, echo) = (model.clone(), &echo);
                scope.spawn(move || train_seed(cfg, seed, model, echo, &seed_dir(dir, seed)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::runtime("training thread panicked")))).collect()
    });
    let mut runs = Vec::with_capacity(cfg.seeds.len());
    for (&seed, result) in cfg.seeds.iter().zip(results) {
        runs.push((seed, result?));
    }
    let histories: Vec<&[EpochStats]> = runs.iter().map(|(_, h)| h.as_slice()).collect();
    write_file(&dir.join(MERGED_FILE), merged_csv(&histories))?;
    Ok(TrainOutcome { dir: dir.to_path_buf(), runs })
}

fn save(dir: &Path, name: &str, params: &PolicyParams, epoch: usize, echo: &serde_json::Value) -> Result<(), CliError> {
    Checkpoint::new(params, epoch, echo.clone()).save(&dir.join(name)).map_err(CliError::runtime)
}

fn train_seed(cfg: &ExperimentConfig, seed: u64, reward: RewardModel, echo: &serde_json::Value, dir: &Path) -> Result<Vec<EpochStats>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let ppo = cfg.ppo_for_seed(seed);
    let (epochs, every) = (ppo.epochs, ppo.checkpoint_every);
    let mut trainer = Trainer::new(TrainSetup { level: cfg.level, sim: cfg.sim, reward, ppo }).map_err(CliError::runtime)?;
    save(dir, &checkpoint_name(0), trainer.params(), 0, echo)?;
    write_file(&dir.join(STATS_FILE), stats_csv(&[]))?;
    let start = Instant::now();
    for epoch in 1..=epochs {
        let stats = *trainer.run_epoch().map_err(|e| CliError::Runtime(format!("seed {seed}, epoch {epoch}: {e}")))?;
        let due = every > 0 && epoch % every == 0;
        if due || epoch == epochs {
            save(dir, &checkpoint_name(epoch), trainer.params(), epoch, echo)?;
            write_file(&dir.join(STATS_FILE), stats_csv(trainer.history()))?;
            eprintln!(
                "[seed {seed}] epoch {epoch}/{epochs}: gates {:.2}, reward {:.3}, lr {:.2e} ({:.0} s)",
                stats.mean_gates_passed,
                stats.mean_episode_reward,
                stats.learning_rate,
                start.elapsed().as_secs_f64()
            );
        }
    }
    save(dir, FINAL_CHECKPOINT, trainer.params(), epochs, echo)?;
    Ok(trainer.into_parts().1)
}

/// Columns merged across seeds: the per-episode reward decomposition and
/// gates passed.
const MERGED_METRICS: [(&str, fn(&EpochStats) -> f64); 4] = [
    ("mean_episode_reward", |s| s.mean_episode_reward),
    ("mean_gate_reward", |s| s.mean_gate_reward),
    ("mean_hover_reward", |s| s.mean_hover_reward),
    ("mean_gates_passed", |s| s.mean_gates_passed),
];

/// One row per epoch with mean, population standard deviation, min and max
/// across seeds of every merged metric.
pub fn merged_csv(histories: &[&[EpochStats]]) -> String {
    let mut header = vec!["epoch".to_string(), "n_seeds".to_string()];
    for (name, _) in MERGED_METRICS {
        for stat in ["mean", "std", "min", "max"] {
            header.push(format!("{name}_{stat}"));
        }
    }
    let mut out = header.join(",") + "\n";
    let epochs = histories.iter().map(|h| h.len()).min().unwrap_or(0);
    for e in 0..epochs {
        let mut row = vec![(e + 1).to_string(), histories.len().to_string()];
        for (_, get) in MERGED_METRICS {
            let xs: Vec<f64> = histories.iter().map(|h| get(&h[e])).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.extend([mean, std, min, max].iter().map(|&x| fmt_g9(x)));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
