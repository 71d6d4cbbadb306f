//! Black-box checks of the `plan` binary: the full pipeline on a small
//! instance plus the documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn plan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plan"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn plan")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn pipeline_gen_cluster_solve_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
        kind = "dbs-count-sweep"
        instances_per_point = 2
        base_seed = 3
        d_max_grid = [1500.0]
        n_b_grid = [1]

        [scenario]
        area_side = 3000.0
        parent_intensity = 0.4
        daughters_per_parent = 8.0
        daughter_scatter = 200.0
    "#;
    std::fs::write(dir.path().join("config.toml"), config).unwrap();

    let gen = plan(
        &["gen", "--config", "config.toml", "--seed", "5", "--out", "scenario.txt"],
        dir.path(),
    );
    assert!(gen.status.success(), "gen failed: {}", stdout(&gen));
    assert!(stdout(&gen).contains("ground nodes"));

    let cluster = plan(
        &["cluster", "--scenario", "scenario.txt", "--d-max", "1500", "--out-dir", "run"],
        dir.path(),
    );
    assert!(cluster.status.success(), "cluster failed: {}", stdout(&cluster));
    assert!(dir.path().join("run/linkage.csv").exists());
    assert!(dir.path().join("run/graph.txt").exists());

    let solve = plan(
        &["solve", "--graph", "run/graph.txt", "--setting", "NVP", "--seed", "1"],
        dir.path(),
    );
    // Loads are light at the default demand, so a design must exist.
    assert!(solve.status.success(), "solve failed: {}", stdout(&solve));
    assert!(stdout(&solve).contains("f_node"));

    let experiment = plan(
        &["experiment", "--config", "config.toml", "--out-dir", "out"],
        dir.path(),
    );
    assert!(experiment.status.success(), "experiment failed: {}", stdout(&experiment));

    let summarize = plan(&["summarize", "out/metrics.csv"], dir.path());
    assert!(summarize.status.success());
    assert!(stdout(&summarize).contains("instances 2"));
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "bogus_key = 1").unwrap();
    let out = plan(&["experiment", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(dir.path().join("g.txt"), "dbsnet-graph v1\ndbs_count 1\nmbs_count 1\nnode 0 5\n").unwrap();
    let out = plan(&["solve", "--graph", "g.txt", "--setting", "XYZ"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = plan(&["cluster", "--scenario", "absent.txt", "--out-dir", "x"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
