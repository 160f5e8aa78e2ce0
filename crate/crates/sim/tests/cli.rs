// SPDX-License-Identifier: Apache-2.0 OR MIT

use std::path::PathBuf;
use std::process::{Command, Output};

fn gramsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SMALL: &[&str] = &[
    "--nodes", "40", "--side", "50", "--groups", "3", "--group_size", "4",
    "--duration_s", "1", "--warmup_s", "0.2",
];

#[test]
fn oracle_passes() {
    let out = gramsim(&["oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("chain5_two_groups: ok"));
    assert!(stdout.contains("chain5_one_group: ok"));
}

#[test]
fn run_writes_outputs_and_a_clean_trace() {
    let dir = scratch("run");
    let trace = dir.join("run.trace");
    let mut args = vec!["run", "--out", dir.to_str().unwrap(), "--trace", trace.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    let out = gramsim(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["tables.csv", "delays.csv", "summary.csv", "topology.txt", "config.txt"] {
        assert!(dir.join(file).exists(), "{file}");
    }
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("protocol,seed,topology_seed,mean_table"));
    assert!(summary.lines().nth(1).unwrap().starts_with("gram,1,"));
    assert!(std::fs::metadata(&trace).unwrap().len() > 0);
}

#[test]
fn run_accepts_its_own_topology_and_config() {
    let dir = scratch("reuse");
    let first = dir.join("first");
    let mut args = vec!["run", "--protocol", "ndn", "--out", first.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    assert!(gramsim(&args).status.success());

    let second = dir.join("second");
    let out = gramsim(&[
        "run",
        "--config", first.join("config.txt").to_str().unwrap(),
        "--topology", first.join("topology.txt").to_str().unwrap(),
        "--out", second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(first.join("topology.txt")).unwrap(),
        std::fs::read(second.join("topology.txt")).unwrap()
    );
}

#[test]
fn sweep_writes_comparison_and_figures() {
    let dir = scratch("sweep");
    let mut args = vec!["sweep", "--param", "rate", "--values", "20,40", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    let out = gramsim(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cmp = std::fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert_eq!(cmp.lines().count(), 3);
    assert!(dir.join("fig_rate.csv").exists());
    assert!(dir.join("fig_delay.csv").exists());
}

#[test]
fn bad_input_fails_with_a_message() {
    let out = gramsim(&["run", "--rate", "fast", "--out", scratch("bad").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rate"));

    let conf = scratch("badconf").join("x.conf");
    std::fs::write(&conf, "nodes = 10\nbogus = 1\n").unwrap();
    let out = gramsim(&["run", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn topology_verb_prints_a_parseable_file() {
    let out = gramsim(&["topology", "--nodes", "30", "--side", "40"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let topo = gram_sim::topology_io::parse_topology(&text).unwrap();
    assert_eq!(topo.len(), 30);
}
