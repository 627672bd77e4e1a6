//! End-to-end checks of the `fars` binary: file layout, structural report
//! properties, determinism and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fars_core::course::CourseSpec;
use fars_core::fuzzy::{Engine, FuzzySystem};
use fars_core::rl::Checkpoint;
use tempfile::TempDir;

fn fars(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fars")).args(args).current_dir(cwd).env_remove("FARS_OUTPUT_DIR").output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "command failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn data_rows(csv: &str) -> usize {
    csv.lines().count() - 1
}

/// A tiny training config so runs take well under a second.
fn tiny_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("exp.txt");
    let text = format!("ppo.n_envs = 4\nppo.horizon = 16\nppo.hidden = 16, 16\nppo.checkpoint_every = 2\noutput_dir = run\n{extra}");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn course_json_svg_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(&fars(&["course", "--level", "easy", "--seed", "7", "--svg", "--output-dir", "a"], dir));
    ok(&fars(&["course", "--level", "easy", "--seed", "7", "--output-dir", "b"], dir));
    let a = read(dir.join("a/course_easy_7.json"));
    assert_eq!(a, read(dir.join("b/course_easy_7.json")));
    let course = CourseSpec::from_json(&a).unwrap();
    assert_eq!(course.n_gates(), 6);
    assert_eq!(CourseSpec::from_json(&course.to_json()).unwrap(), course);
    assert!(read(dir.join("a/course_easy_7.svg")).starts_with("<svg"));
    assert!(!dir.join("b/course_easy_7.svg").exists());

    ok(&fars(&["course", "--level", "hard", "--seed", "123", "--output-dir", "h"], dir));
    let hard = CourseSpec::from_json(&read(dir.join("h/course_hard_123.json"))).unwrap();
    assert!(hard.gates.iter().all(|g| g.diameter == 0.45));
}

#[test]
fn surface_grid_sizes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(&fars(&["surface", "--engine", "sugeno", "--resolution", "51", "--svg", "--output-dir", "s"], dir));
    let csv = read(dir.join("s/surface_sugeno_51.csv"));
    assert_eq!(csv.lines().next(), Some("v_hat,d_hat,reward"));
    assert_eq!(data_rows(&csv), 2601);
    assert!(read(dir.join("s/surface_sugeno_51.svg")).contains("normalized distance"));

    ok(&fars(&["surface", "--engine", "mamdani", "--resolution", "2", "--export-system", "--output-dir", "s"], dir));
    let corners = read(dir.join("s/surface_mamdani_2.csv"));
    assert_eq!(data_rows(&corners), 4);
    let system = FuzzySystem::from_json(&read(dir.join("s/fuzzy_system.json"))).unwrap();
    for line in corners.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((system.infer(Engine::Mamdani, cols[0], cols[1]) - cols[2]).abs() < 1e-8, "{line}");
    }
    assert!(cols_are_corners(&corners));

    let bad = fars(&["surface", "--engine", "sugeno", "--resolution", "1"], dir);
    assert_eq!(bad.status.code(), Some(2));
}

fn cols_are_corners(csv: &str) -> bool {
    let pts: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').take(2).collect()).collect();
    pts == [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]
}

#[test]
fn train_with_zero_epochs_writes_initial_checkpoint() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = tiny_config(dir, "seeds = 11\nppo.epochs = 0\n");
    ok(&fars(&["train", "--config", cfg.to_str().unwrap()], dir));
    let run = dir.join("run");
    let stats = read(run.join("seed_11/stats.csv"));
    assert_eq!(data_rows(&stats), 0);
    assert!(stats.starts_with("epoch,mean_episode_reward"));
    let ck = Checkpoint::load(&run.join("seed_11/checkpoint_epoch_0000.json")).unwrap();
    assert_eq!(ck.epoch, 0);
    assert_eq!(ck.shapes.hidden, vec![16, 16]);
    assert_eq!(data_rows(&read(run.join("merged_stats.csv"))), 0);
    // the config echo parses back to the same experiment
    let echo = fars_cli::ExperimentConfig::parse(&read(run.join("config.txt"))).unwrap();
    assert_eq!(echo.seeds, vec![11]);
}

#[test]
fn paper_seed_list_gives_five_run_directories() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = tiny_config(dir, "ppo.epochs = 0\n");
    ok(&fars(&["train", "--config", cfg.to_str().unwrap()], dir));
    for seed in [5, 8, 16, 32, 36] {
        assert!(dir.join(format!("run/seed_{seed}/checkpoint_final.json")).exists(), "seed {seed}");
    }
}

#[test]
fn two_seed_merge_and_bit_exact_repeat() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = tiny_config(dir, "seeds = 3, 4\nppo.epochs = 3\nlevel = medium\nreward_mode = fars_mamdani\n");
    ok(&fars(&["train", "--config", cfg.to_str().unwrap()], dir));
    let merged = read(dir.join("run/merged_stats.csv"));
    assert_eq!(data_rows(&merged), 3);
    let header = merged.lines().next().unwrap();
    for col in ["mean_gates_passed_mean", "mean_gates_passed_std", "mean_gates_passed_min", "mean_gates_passed_max", "mean_hover_reward_std"] {
        assert!(header.split(',').any(|c| c == col), "missing {col}");
    }
    for seed in [3, 4] {
        let names: Vec<String> = (0..=3).filter(|e| e % 2 == 0 || *e == 3).map(|e| format!("checkpoint_epoch_{e:04}.json")).collect();
        for n in names {
            assert!(dir.join(format!("run/seed_{seed}/{n}")).exists(), "{n}");
        }
        assert_eq!(data_rows(&read(dir.join(format!("run/seed_{seed}/stats.csv")))), 3);
    }

    // the output directory override sends an identical run elsewhere
    let again = Command::new(env!("CARGO_BIN_EXE_fars"))
        .args(["train", "--config", cfg.to_str().unwrap()])
        .current_dir(dir)
        .env("FARS_OUTPUT_DIR", dir.join("again"))
        .output()
        .unwrap();
    ok(&again);
    for rel in ["merged_stats.csv", "config.txt", "seed_3/stats.csv", "seed_4/checkpoint_final.json", "seed_3/checkpoint_epoch_0002.json"] {
        assert_eq!(fs::read(dir.join("run").join(rel)).unwrap(), fs::read(dir.join("again").join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn eval_reports_are_structural_and_deterministic() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = tiny_config(dir, "seeds = 2\nppo.epochs = 0\n");
    ok(&fars(&["train", "--config", cfg.to_str().unwrap()], dir));
    let ck = dir.join("run/seed_2/checkpoint_final.json");
    let ck = ck.to_str().unwrap();
    for out in ["e1", "e2"] {
        ok(&fars(&["eval", "--checkpoint", ck, "--level", "easy", "--episodes", "100", "--seed", "9", "--trace", "--output-dir", out], dir));
    }
    for f in ["eval_report.json", "eval_report.csv", "trace_run_0.csv"] {
        assert_eq!(fs::read(dir.join("e1").join(f)).unwrap(), fs::read(dir.join("e2").join(f)).unwrap(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&read(dir.join("e1/eval_report.json"))).unwrap();
    assert_eq!(report["episodes"], 100);
    let rates: Vec<f64> = report["runs"][0]["per_gate_success"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(rates.len(), 6);
    assert!(rates.iter().all(|r| (0.0..=1.0).contains(r)));
    assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    let trace = read(dir.join("e1/trace_run_0.csv"));
    assert!(trace.starts_with("episode,step,t,"));
    assert!(trace.lines().any(|l| l.starts_with("99,")));
}

#[test]
fn eval_of_many_episodes_reports_the_count() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = tiny_config(dir, "seeds = 2\nppo.epochs = 0\n");
    ok(&fars(&["train", "--config", cfg.to_str().unwrap()], dir));
    ok(&fars(&["eval", "--checkpoint", "run/seed_2/checkpoint_final.json", "--level", "hard", "--episodes", "5000", "--output-dir", "e"], dir));
    let report: serde_json::Value = serde_json::from_str(&read(dir.join("e/eval_report.json"))).unwrap();
    assert_eq!(report["episodes"], 5000);
    assert_eq!(report["n_gates"], 8);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("bad.txt"), "ppo.clip_eps = 0.2\nreward.c9 = 1\n").unwrap();
    let out = fars(&["train", "--config", "bad.txt"], dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reward.c9"));

    fs::write(dir.join("bad2.txt"), "reward_mode = fars\n").unwrap();
    let out = fars(&["train", "--config", "bad2.txt"], dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reward_mode"));

    // a consistent checkpoint for a different observation size
    let cfg = tiny_config(dir, "seeds = 2\nppo.epochs = 0\n");
    ok(&fars(&["train", "--config", cfg.to_str().unwrap()], dir));
    let ck = Checkpoint::load(&dir.join("run/seed_2/checkpoint_final.json")).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let other = fars_core::rl::PolicyParams::init(12, 3, &[16, 16], 0.01, 0.0, &mut rng);
    Checkpoint::new(&other, 0, ck.config.clone()).save(&dir.join("wrong.json")).unwrap();
    let out = fars(&["eval", "--checkpoint", "wrong.json", "--level", "easy", "--episodes", "3"], dir);
    assert_eq!(out.status.code(), Some(3));
    let out = fars(&["eval", "--checkpoint", "missing.json", "--level", "easy", "--episodes", "3"], dir);
    assert_eq!(out.status.code(), Some(3));
}
