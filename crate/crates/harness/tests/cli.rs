use std::path::Path;
use std::process::{Command, Output};

use unified_ipp::unified::{read_state_raster, UnifiedState};

fn uipp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uipp")).args(args).output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("mission.json");
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{"width": 10, "height": 8, "budget": 12, "seed": 3}"#;

#[test]
fn help_exits_zero_and_bad_usage_exits_one() {
    assert_eq!(uipp(&["--help"]).status.code(), Some(0));
    assert_eq!(uipp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(uipp(&["run", "--planner", "astar"]).status.code(), Some(1));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for json in [r#"{"budget": -3}"#, r#"{"width": 10, "bogus": 1}"#, r#"{"threshold": "#] {
        let cfg = write_config(dir.path(), json);
        let o = uipp(&["run", "--config", &cfg, "--out", out]);
        assert_eq!(o.status.code(), Some(1), "{json}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = uipp(&["run", "--config", "/nonexistent/mission.json", "--out", out]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn run_writes_episode_metrics_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let o = uipp(&["run", "--config", &cfg, "--planner", "mcts", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let episode = std::fs::read_to_string(out.join("episode.csv")).unwrap();
    assert_eq!(episode.lines().count(), 14);
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(written["planner"], "mcts");
    assert_eq!(written["budget"], 12.0);

    let again = dir.path().join("again");
    uipp(&["run", "--config", &cfg, "--planner", "mcts", "--out", again.to_str().unwrap()]);
    assert_eq!(episode, std::fs::read_to_string(again.join("episode.csv")).unwrap());
}

#[test]
fn render_writes_four_images() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "discrete", "width": 9, "height": 7, "budget": 6}"#);
    let out = dir.path().join("img");
    let o = uipp(&["render", "--config", &cfg, "--scale", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["truth.ppm", "belief.ppm", "interest.ppm", "uncertainty.ppm"] {
        let bytes = std::fs::read(out.join(name)).unwrap();
        let header = b"P6\n27 21\n255\n";
        assert!(bytes.starts_with(header), "{name}");
        assert_eq!(bytes.len(), header.len() + 27 * 21 * 3);
    }
}

#[test]
fn export_state_after_steps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let file = dir.path().join("state.csv");
    let o = uipp(&["export-state", "--config", &cfg, "--step", "4", "--out", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let state: UnifiedState<f64> = read_state_raster(&file).unwrap();
    assert_eq!((state.geometry.width(), state.geometry.height()), (10, 8));
    assert_eq!(state.remaining_budget, 8.0);
    assert!(state.uncertainty.iter().all(|u| *u > 0.0));
    assert!(state.interest.iter().all(|p| (0.0..=1.0).contains(p)));
}

#[test]
fn benchmark_writes_summary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bench.json");
    std::fs::write(&p, r#"{"repeats": 1, "mission": {"width": 8, "height": 8, "budget": 5}}"#).unwrap();
    let out = dir.path().join("res");
    let o = uipp(&[
        "benchmark", "--config", p.to_str().unwrap(), "--missions", "2", "--planner", "coverage",
        "--planner", "greedy", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<_> = summary.lines().collect();
    assert_eq!(lines[0], "planner,protocol,II,Unc,MLL,RMSE,mIoU,F1,replan_time_s");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("coverage,static,"));
    assert!(lines[1].ends_with(','));
    assert_eq!(std::fs::read_dir(out.join("episodes")).unwrap().count(), 4);
}
