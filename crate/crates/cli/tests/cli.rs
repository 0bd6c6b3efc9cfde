use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sarp_core::instance::Instance;
use sarp_core::io::{read_records, write_records};

fn sarp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sarp")).args(args).env_remove("SARP_DEBUG_AUDIT").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, sites: usize, teams: usize, tmax: f64, layout: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let out = sarp(&[
        "generate",
        "--sites",
        &sites.to_string(),
        "--chars",
        "3",
        "--teams",
        &teams.to_string(),
        "--tmax",
        &tmax.to_string(),
        "--layout",
        layout,
        "--seed",
        &seed.to_string(),
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn solve(instance: &Path, out_dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "--instance", s(instance), "--out", s(out_dir)];
    args.extend_from_slice(extra);
    sarp(&args)
}

#[test]
fn generate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r1.sarp");
    let out = sarp(&[
        "generate",
        "--sites",
        "25",
        "--chars",
        "12",
        "--teams",
        "2",
        "--tmax",
        "2",
        "--layout",
        "r",
        "--seed",
        "1",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&path).unwrap();
    let inst = Instance::parse(&text).unwrap();
    assert_eq!(inst.to_text(), text);
    assert_eq!(inst.name(), "25_R/2/2");
    assert_eq!(inst.num_characteristics(), 12);
}

#[test]
fn generate_largest_class_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "big.sarp", 100, 6, 8.0, "r", 3);
    let inst = Instance::load(&path).unwrap();
    assert_eq!(inst.name(), "100_R/6/8");
    assert_eq!(inst.num_sites(), 100);
}

#[test]
fn generate_usage_errors() {
    let out = sarp(&[
        "generate", "--sites", "5", "--chars", "2", "--teams", "1", "--tmax", "2", "--layout", "r", "--seed", "1",
    ]);
    assert_eq!(code(&out), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad_layout = dir.path().join("x.sarp");
    let out = sarp(&[
        "generate",
        "--sites",
        "5",
        "--chars",
        "2",
        "--teams",
        "1",
        "--tmax",
        "2",
        "--layout",
        "q",
        "--seed",
        "1",
        "--out",
        s(&bad_layout),
    ]);
    assert_eq!(code(&out), 2);
    let out = sarp(&[
        "generate",
        "--sites",
        "0",
        "--chars",
        "2",
        "--teams",
        "1",
        "--tmax",
        "2",
        "--layout",
        "r",
        "--seed",
        "1",
        "--out",
        s(&bad_layout),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!bad_layout.exists());
}

#[test]
fn solve_is_reproducible_in_iteration_mode() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 15, 2, 4.0, "rc", 7);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = solve(&inst, d, &["--config", "all", "--iterations", "1000", "--seed", "5"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes = fs::read(a.join("archive.jsonl")).unwrap();
    assert!(!bytes.is_empty());
    assert_eq!(bytes, fs::read(b.join("archive.jsonl")).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["iterations"], 1000);
    assert_eq!(manifest["config"]["seed"], 5);
    assert_eq!(manifest["config"]["configuration"], "all");
    let hash = manifest["instance_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(fs::read_to_string(a.join("run_log.jsonl")).unwrap().lines().count() >= 10);
}

#[test]
fn solve_with_time_limit() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 25, 2, 3.0, "r", 1);
    let run = dir.path().join("run");
    let out = solve(&inst, &run, &["--config", "max-min", "--time-limit", "1", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    assert!(!read_records(run.join("archive.jsonl")).unwrap().is_empty());
}

#[test]
fn solve_errors() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 6, 1, 3.0, "r", 1);
    let out = solve(&inst, &dir.path().join("x"), &["--config", "bogus", "--iterations", "10"]);
    assert_eq!(code(&out), 2);
    let out = solve(&inst, &dir.path().join("x"), &["--config", "all"]);
    assert_eq!(code(&out), 2);
    let out = solve(&dir.path().join("missing.sarp"), &dir.path().join("x"), &["--iterations", "10"]);
    assert_eq!(code(&out), 1);
    let garbage = dir.path().join("garbage.sarp");
    fs::write(&garbage, "not an instance\n").unwrap();
    let out = solve(&garbage, &dir.path().join("x"), &["--iterations", "10"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn audit_mode_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 12, 2, 4.0, "rc", 2);
    let run = dir.path().join("run");
    let out = Command::new(env!("CARGO_BIN_EXE_sarp"))
        .args(["solve", "--instance", s(&inst), "--iterations", "300", "--out", s(&run)])
        .env("SARP_DEBUG_AUDIT", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["audit"], true);
    assert_eq!(manifest["audit_violations"], 0);
}

#[test]
fn oracle_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 8, 2, 5.0, "rc", 4);
    let exact = dir.path().join("exact.jsonl");
    assert_eq!(code(&sarp(&["oracle", "--instance", s(&inst), "--out", s(&exact)])), 0);

    let same = sarp(&["oracle-verify", "--candidate", s(&exact), "--exact", s(&exact)]);
    assert_eq!(code(&same), 0);
    let report: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(report["missing"], 0);

    // add a copy of the longest exact point with a worse duration
    let mut records = read_records(&exact).unwrap();
    let mut worse = records.last().unwrap().clone();
    worse.duration += 1.0;
    records.push(worse);
    let candidate = dir.path().join("cand.jsonl");
    write_records(fs::File::create(&candidate).unwrap(), &records).unwrap();
    let out = sarp(&["oracle-verify", "--candidate", s(&candidate), "--exact", s(&exact)]);
    assert_ne!(code(&out), 0);

    let partial = dir.path().join("partial.jsonl");
    let records = read_records(&exact).unwrap();
    write_records(fs::File::create(&partial).unwrap(), &records[..records.len() - 1]).unwrap();
    let out = sarp(&["oracle-verify", "--candidate", s(&partial), "--exact", s(&exact)]);
    assert_eq!(code(&out), 4);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["missing"], 1);
}

#[test]
fn oracle_limits_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 11, 2, 3.0, "r", 1);
    let out = sarp(&["oracle", "--instance", s(&inst), "--out", s(&dir.path().join("e.jsonl"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn evaluate_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 12, 2, 4.0, "r", 9);
    let run = dir.path().join("runs/one");
    assert_eq!(code(&solve(&inst, &run, &["--iterations", "500", "--seed", "2"])), 0);
    let csv = dir.path().join("csv");
    let reference = dir.path().join("ref.jsonl");
    let pattern = format!("{}/runs/*/archive.jsonl", s(dir.path()));
    let out = sarp(&[
        "evaluate",
        "--runs",
        &pattern,
        "--reference-out",
        s(&reference),
        "--alphas",
        "0,1,2,3",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(csv.join("coverage_fractions.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",1.000000")));
    assert_eq!(read_records(&reference).unwrap().len(), read_records(run.join("archive.jsonl")).unwrap().len());
    let hist = fs::read_to_string(csv.join("maxmin_hist.csv")).unwrap();
    let total: usize = hist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, read_records(&reference).unwrap().len());
}

#[test]
fn evaluate_sixty_runs_with_published_value() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "i.sarp", 10, 2, 4.0, "rc", 11);
    for config in ["all", "leximin", "max-min"] {
        for (limit, iterations) in [("60", "60"), ("180", "120")] {
            for seed in 0..10 {
                let run = dir.path().join(format!("runs/{config}-{limit}-{seed}"));
                let out = solve(
                    &inst,
                    &run,
                    &[
                        "--config",
                        config,
                        "--time-limit",
                        limit,
                        "--iterations",
                        iterations,
                        "--seed",
                        &seed.to_string(),
                    ],
                );
                assert_eq!(code(&out), 0);
            }
        }
    }
    let reference = dir.path().join("ref.jsonl");
    let csv = dir.path().join("csv");
    let pattern = format!("{}/runs/*/archive.jsonl", s(dir.path()));
    let first = sarp(&["evaluate", "--runs", &pattern, "--reference-out", s(&reference), "--csv", s(&csv)]);
    assert_eq!(code(&first), 0);

    let text = fs::read_to_string(csv.join("coverage_fractions.csv")).unwrap();
    let mut reader = csv_rows(&text);
    assert_eq!(reader.len(), 60 * 4);
    reader.retain(|r| r[1] == "leximin" && r[2] == "180");
    assert_eq!(reader.len(), 10 * 4);

    // pass the best max-min value found as the published one
    let best = fs::read_to_string(csv.join("published_cmp.csv")).unwrap();
    let best = best.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
    let out = sarp(&[
        "evaluate",
        "--runs",
        &pattern,
        "--reference-out",
        s(&reference),
        "--csv",
        s(&csv),
        "--published",
        &best,
    ]);
    assert_eq!(code(&out), 0);
    let cmp = fs::read_to_string(csv.join("published_cmp.csv")).unwrap();
    let row: Vec<&str> = cmp.lines().nth(1).unwrap().split(',').collect();
    assert!(row[2].parse::<usize>().unwrap() >= 1);
    assert_eq!(row[3], "0");
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn evaluate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = format!("{}/nothing/*.jsonl", s(dir.path()));
    let args = ["evaluate", "--runs", &pattern, "--reference-out", "unused.jsonl", "--csv", "unused"];
    assert_eq!(code(&sarp(&args)), 1);

    let a = generate(dir.path(), "a.sarp", 6, 1, 4.0, "r", 1);
    let b = generate(dir.path(), "b.sarp", 7, 1, 4.0, "r", 1);
    assert_eq!(code(&solve(&a, &dir.path().join("runs/a"), &["--iterations", "50"])), 0);
    assert_eq!(code(&solve(&b, &dir.path().join("runs/b"), &["--iterations", "50"])), 0);
    let pattern = format!("{}/runs/*/archive.jsonl", s(dir.path()));
    let reference = dir.path().join("ref.jsonl");
    let csv = dir.path().join("csv");
    let out = sarp(&["evaluate", "--runs", &pattern, "--reference-out", s(&reference), "--csv", s(&csv)]);
    assert_eq!(code(&out), 2);
}
