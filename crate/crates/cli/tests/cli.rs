use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use detsim_cli::{exit, parse_config, run_job, RunOptions};
use detsim_core::{benchmark, NodeFactory, SimDuration, SimTime};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn detsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detsim"))
        .args(args)
        .output()
        .expect("spawn detsim")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_config_is_the_default_benchmark() {
    let text = fs::read_to_string(config("benchmark.toml")).unwrap();
    let job = parse_config(&text, &NodeFactory::with_benchmark_nodes()).unwrap();
    let names: Vec<_> = job.nodes.iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, ["node_a", "node_b", "node_c", "node_d"]);
    let expected = benchmark::default_job(
        SimTime::from_nanos(1_700_000_000_000_000_000),
        SimDuration::from_secs(10),
    );
    assert_eq!(job, expected);
    assert_eq!(job.digest(), expected.digest());
}

#[test]
fn single_run_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = detsim(&[
        "run",
        "--config",
        path_str(&config("benchmark.toml")),
        "--runs",
        "1",
        "--trace-dir",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(exit::OK), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("all_identical=true"), "{stdout}");
    let trace = fs::read_to_string(dir.path().join("run_000.trace")).unwrap();
    assert!(trace.starts_with("#detsim-trace-v1|digest="));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("run_000: finished=true"), "{report}");
}

#[test]
fn livelock_config_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = detsim(&[
        "run",
        "--config",
        path_str(&config("livelock.toml")),
        "--trace-dir",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(exit::LIVELOCK), "{out:?}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("livelock"), "{stderr}");
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "start_time_ns = 0\nnodes = []\nbogus = 1\n").unwrap();
    let out = detsim(&[
        "run",
        "--config",
        path_str(&cfg),
        "--trace-dir",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(exit::CONFIG), "{out:?}");
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let header = "#detsim-trace-v1|digest=00|tool=x|start=0000000000000000\n";
    let row = "0000000000000000|0000000000000001|n|timer|0000000000000000|0000000000000001|0000000000000000|0000000000000002|00\n";
    let a = dir.path().join("a.trace");
    let b = dir.path().join("b.trace");
    let c = dir.path().join("c.trace");
    fs::write(&a, format!("{header}{row}")).unwrap();
    fs::write(&b, format!("{header}{row}")).unwrap();
    fs::write(&c, format!("{header}{}", row.replace("|n|", "|m|"))).unwrap();

    let same = detsim(&["compare", path_str(&a), path_str(&b)]);
    assert_eq!(same.status.code(), Some(exit::OK));
    let diff = detsim(&["compare", path_str(&a), path_str(&c)]);
    assert_eq!(diff.status.code(), Some(exit::DIVERGENCE));
    assert!(String::from_utf8_lossy(&diff.stdout).contains("line 2"));
    let missing = detsim(&["compare", path_str(&a), path_str(&dir.path().join("nope"))]);
    assert_eq!(missing.status.code(), Some(exit::FAILURE));
}

#[test]
fn parallel_runs_match_sequential_runs() {
    let text = fs::read_to_string(config("benchmark.toml")).unwrap();
    let factory = NodeFactory::with_benchmark_nodes();
    let mut job = parse_config(&text, &factory).unwrap();
    job.duration = Some(SimDuration::from_secs(2));

    let seq_dir = tempfile::tempdir().unwrap();
    let par_dir = tempfile::tempdir().unwrap();
    let seq = run_job(&job, &factory, &RunOptions::new("-", 4, seq_dir.path())).unwrap();
    let par = run_job(
        &job,
        &factory,
        &RunOptions {
            parallel: Some(4),
            ..RunOptions::new("-", 4, par_dir.path())
        },
    )
    .unwrap();
    assert!(seq.all_identical && par.all_identical);
    for i in 0..4 {
        let name = format!("run_{i:03}.trace");
        assert_eq!(
            fs::read(seq_dir.path().join(&name)).unwrap(),
            fs::read(par_dir.path().join(&name)).unwrap()
        );
    }
    assert_eq!(seq.runs[0].final_states, par.runs[3].final_states);
}
