//! `fars eval`: greedy (mean-action) rollouts of one or more checkpoints on
//! freshly generated courses, reported as per-gate success rates.
//!
//! Episode `i` draws its course and spawn jitter from ChaCha stream `i`
//! under the evaluation seed, so every checkpoint faces the same courses and
//! episodes can run on any number of threads without changing the report.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fars_core::course::{generate_course, CourseSpec, Level};
use fars_core::export::fmt_g9;
use fars_core::reward::{PotentialTracker, RewardBreakdown, RewardModel};
use fars_core::rl::train::greedy_action;
use fars_core::rl::{Checkpoint, PolicyParams};
use fars_core::sim::{observe, reset_with, step, DroneState, SimConfig, StepEvents, ACTION_DIM, OBS_DIM};
use fars_core::Vec3;

use super::train::RunEcho;
use crate::{write_file, CliError};

pub const REPORT_JSON: &str = "eval_report.json";
pub const REPORT_CSV: &str = "eval_report.csv";

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub checkpoints: Vec<PathBuf>,
    pub level: Level,
    pub episodes: usize,
    pub seed: u64,
    pub trace: bool,
    pub output_dir: PathBuf,
}

/// One evaluated checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub checkpoint: String,
    pub per_gate_success: Vec<f64>,
    pub final_gate_success: f64,
    pub mean_gates_passed: f64,
    pub mean_episode_reward: f64,
    pub collisions: usize,
    pub out_of_bounds: usize,
    pub timeouts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub level: Level,
    pub seed: u64,
    pub episodes: usize,
    pub n_gates: usize,
    pub runs: Vec<RunReport>,
    /// Per gate index, across runs.
    pub per_gate_mean: Vec<f64>,
    pub per_gate_min: Vec<f64>,
    pub per_gate_max: Vec<f64>,
    pub final_gate_success_mean: f64,
    pub final_gate_success_min: f64,
    pub final_gate_success_max: f64,
}

/// Outcome of one greedy episode.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpisodeResult {
    pub gates_passed: usize,
    pub total_reward: f64,
    pub collided: bool,
    pub out_of_bounds: bool,
    pub timed_out: bool,
}

pub const TRACE_HEADER: &str = "episode,step,t,px,py,pz,vx,vy,vz,ax,ay,az,active_gate,gate_passed,collided,out_of_bounds,timed_out,gate,final_hover,dist_shaped,center_shaped,vd_fuzzy,collision,total";

/// The course and spawn state of evaluation episode `episode`.
pub fn episode_setup(level: Level, sim: &SimConfig, seed: u64, episode: u64) -> (CourseSpec, DroneState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode);
    let course = generate_course(level, rng.gen());
    let state = reset_with(sim, &mut rng);
    (course, state)
}

/// Rolls out the mean action until the episode ends; with `trace`, appends
/// one CSV row per step.
pub fn run_episode(
    params: &PolicyParams,
    level: Level,
    sim: &SimConfig,
    reward: &RewardModel,
    seed: u64,
    episode: u64,
    mut trace: Option<&mut String>,
) -> Result<EpisodeResult, CliError> {
    let (course, mut state) = episode_setup(level, sim, seed, episode);
    let mut tracker = PotentialTracker::default();
    let mut result = EpisodeResult::default();
    loop {
        let action = greedy_action(params, &observe(&state, &course)).map_err(CliError::runtime)?;
        let (next, events) = step(&state, &action, &course, sim).map_err(|e| CliError::Runtime(format!("episode {episode}: {e}")))?;
        let r = reward.total_reward(&events, &next, &course, &mut tracker);
        result.total_reward += r.total;
        if let Some(out) = trace.as_deref_mut() {
            out.push_str(&trace_row(episode, &next, &action, &events, &r));
        }
        state = next;
        if events.done {
            result.gates_passed = state.active_gate;
            result.collided = events.collided;
            result.out_of_bounds = events.out_of_bounds;
            result.timed_out = events.timed_out;
            return Ok(result);
        }
    }
}

fn trace_row(episode: u64, s: &DroneState, a: &Vec3, ev: &StepEvents, r: &RewardBreakdown) -> String {
    let reals = [s.t, s.p.x, s.p.y, s.p.z, s.v.x, s.v.y, s.v.z, a.x, a.y, a.z];
    let mut cols = vec![episode.to_string(), s.steps.to_string()];
    cols.extend(reals.iter().map(|&x| fmt_g9(x)));
    cols.push(s.active_gate.to_string());
    cols.extend([ev.gate_passed, ev.collided, ev.out_of_bounds, ev.timed_out].iter().map(|&b| u8::from(b).to_string()));
    cols.extend(r.fields().iter().map(|&x| fmt_g9(x)));
    cols.join(",") + "\n"
}

/// A checkpoint's policy plus the simulator and reward it trained with.
pub struct LoadedPolicy {
    pub params: PolicyParams,
    pub sim: SimConfig,
    pub reward: RewardModel,
}

pub fn load_policy(path: &Path) -> Result<LoadedPolicy, CliError> {
    let ck = Checkpoint::load(path).map_err(|e| CliError::Checkpoint(e.to_string()))?;
    let params = ck.policy(OBS_DIM, ACTION_DIM).map_err(|e| CliError::Checkpoint(format!("{}: {e}", path.display())))?;
    let echo: RunEcho = serde_json::from_value(ck.config.clone())
        .map_err(|e| CliError::Checkpoint(format!("{}: unreadable config echo: {e}", path.display())))?;
    let reward = RewardModel::new(echo.experiment.reward_config(), echo.fuzzy_system.map(Arc::new))
        .map_err(|e| CliError::Checkpoint(format!("{}: {e}", path.display())))?;
    Ok(LoadedPolicy { params, sim: echo.experiment.sim, reward })
}

/// Runs `episodes` episodes split over the available cores and returns the
/// results in episode order, with the concatenated trace when requested.
fn run_episodes(policy: &LoadedPolicy, args: &EvalArgs) -> Result<(Vec<EpisodeResult>, Option<String>), CliError> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(args.episodes.max(1));
    let chunk = args.episodes.div_ceil(workers.max(1)).max(1);
    let parts: Vec<Result<(Vec<EpisodeResult>, String), CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..args.episodes)
            .step_by(chunk)
            .map(|lo| {
                scope.spawn(move || {
                    let mut trace = String::new();
                    let mut results = Vec::new();
                    for ep in lo..(lo + chunk).min(args.episodes) {
                        let t = args.trace.then_some(&mut trace);
                        results.push(run_episode(&policy.params, args.level, &policy.sim, &policy.reward, args.seed, ep as u64, t)?);
                    }
                    Ok((results, trace))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::runtime("evaluation thread panicked")))).collect()
    });
    let mut results = Vec::with_capacity(args.episodes);
    let mut trace = args.trace.then(|| String::from(TRACE_HEADER) + "\n");
    for part in parts {
        let (r, t) = part?;
        results.extend(r);
        if let Some(out) = trace.as_mut() {
            out.push_str(&t);
        }
    }
    Ok((results, trace))
}

/// Fraction of episodes that passed each gate; passing gate `k` requires
/// passing every earlier gate, so the rates never increase with `k`.
pub fn per_gate_success(results: &[EpisodeResult], n_gates: usize) -> Vec<f64> {
    let n = results.len().max(1) as f64;
    (0..n_gates).map(|k| results.iter().filter(|r| r.gates_passed > k).count() as f64 / n).collect()
}

pub fn run_report(name: String, results: &[EpisodeResult], n_gates: usize) -> RunReport {
    let per_gate = per_gate_success(results, n_gates);
    let n = results.len().max(1) as f64;
    RunReport {
        checkpoint: name,
        final_gate_success: per_gate.last().copied().unwrap_or(0.0),
        per_gate_success: per_gate,
        mean_gates_passed: results.iter().map(|r| r.gates_passed as f64).sum::<f64>() / n,
        mean_episode_reward: results.iter().map(|r| r.total_reward).sum::<f64>() / n,
        collisions: results.iter().filter(|r| r.collided).count(),
        out_of_bounds: results.iter().filter(|r| r.out_of_bounds).count(),
        timeouts: results.iter().filter(|r| r.timed_out).count(),
    }
}

pub fn assemble_report(level: Level, seed: u64, episodes: usize, runs: Vec<RunReport>) -> EvalReport {
    let n_gates = runs.first().map_or(0, |r| r.per_gate_success.len());
    let across = |k: usize, f: fn(f64, f64) -> f64, init: f64| runs.iter().map(|r| r.per_gate_success[k]).fold(init, f);
    let m = runs.len().max(1) as f64;
    let per_gate_mean: Vec<f64> = (0..n_gates).map(|k| runs.iter().map(|r| r.per_gate_success[k]).sum::<f64>() / m).collect();
    let per_gate_min: Vec<f64> = (0..n_gates).map(|k| across(k, f64::min, f64::INFINITY)).collect();
    let per_gate_max: Vec<f64> = (0..n_gates).map(|k| across(k, f64::max, f64::NEG_INFINITY)).collect();
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    EvalReport {
        level,
        seed,
        episodes,
        n_gates,
        final_gate_success_mean: last(&per_gate_mean),
        final_gate_success_min: last(&per_gate_min),
        final_gate_success_max: last(&per_gate_max),
        per_gate_mean,
        per_gate_min,
        per_gate_max,
        runs,
    }
}

/// `gate,mean,min,max,run_0,…` with one row per gate index.
pub fn report_csv(report: &EvalReport) -> String {
    let mut header = vec!["gate".to_string(), "mean".into(), "min".into(), "max".into()];
    header.extend((0..report.runs.len()).map(|i| format!("run_{i}")));
    let mut out = header.join(",") + "\n";
    for k in 0..report.n_gates {
        let mut row = vec![(k + 1).to_string()];
        row.extend([report.per_gate_mean[k], report.per_gate_min[k], report.per_gate_max[k]].iter().map(|&x| fmt_g9(x)));
        row.extend(report.runs.iter().map(|r| fmt_g9(r.per_gate_success[k])));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport, CliError> {
    if args.episodes == 0 {
        return Err(CliError::Config(crate::ConfigError::value("--episodes", "must be at least 1")));
    }
    if args.checkpoints.is_empty() {
        return Err(CliError::Config(crate::ConfigError::value("--checkpoint", "at least one checkpoint is required")));
    }
    // load everything first so a bad checkpoint fails before any work is done
    let policies = args.checkpoints.iter().map(|p| load_policy(p)).collect::<Result<Vec<_>, _>>()?;
    crate::prepare_output_dir(&args.output_dir, "--output-dir")?;
    let n_gates = fars_core::course::difficulty_params(args.level).n_gates;
    let mut runs = Vec::with_capacity(policies.len());
    for (i, (policy, path)) in policies.iter().zip(&args.checkpoints).enumerate() {
        let (results, trace) = run_episodes(policy, args)?;
        if let Some(trace) = trace {
            write_file(&args.output_dir.join(format!("trace_run_{i}.csv")), trace)?;
        }
        runs.push(run_report(path.display().to_string(), &results, n_gates));
    }
    let report = assemble_report(args.level, args.seed, args.episodes, runs);
    write_file(&args.output_dir.join(REPORT_JSON), serde_json::to_string_pretty(&report).expect("report serializes"))?;
    write_file(&args.output_dir.join(REPORT_CSV), report_csv(&report))?;
    Ok(report)
}
