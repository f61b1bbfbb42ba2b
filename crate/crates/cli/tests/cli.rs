//! End-to-end pipeline through the binary: synthesize a corpus, generate
//! levels with each generator, trace a target, evaluate a group, and check
//! byte-level reproducibility.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scenestitch"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("command runs");
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    assert!(
        output.status.success(),
        "command failed\nstdout:\n{stdout}\nstderr:\n{stderr}"
    );
    stdout
}

fn synth_corpus(dir: &Path) -> std::path::PathBuf {
    let corpus_dir = dir.join("corpus");
    run_ok(bin()
        .arg("corpus-synth")
        .arg("--out")
        .arg(&corpus_dir)
        .args(["--variants", "1"]));
    corpus_dir.join("corpus.json")
}

#[test]
fn full_pipeline_random_trace_greedy_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path());
    assert!(manifest.exists());

    // Random generation needs no target.
    let rand_dir = dir.path().join("random");
    run_ok(bin().args([
        "generate",
        "--corpus",
        manifest.to_str().unwrap(),
        "--generator",
        "random",
        "--count",
        "2",
        "--seed",
        "5",
        "--max-attempts",
        "200",
        "--out",
        rand_dir.to_str().unwrap(),
    ]));
    assert!(rand_dir.join("level_00.lvl").exists());
    assert!(rand_dir.join("level_01.lvl").exists());
    assert!(rand_dir.join("manifest.json").exists());

    // Trace one of the random levels into a target sequence.
    let target = dir.path().join("target.txt");
    let stdout = run_ok(bin().args([
        "trace",
        rand_dir.join("level_00.lvl").to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        target.to_str().unwrap(),
    ]));
    assert!(stdout.contains("total:"));
    assert!(stdout.contains("most frequent:"));
    assert!(target.exists());

    // Greedy generation against that target.
    let greedy_dir = dir.path().join("greedy");
    run_ok(bin().args([
        "generate",
        "--corpus",
        manifest.to_str().unwrap(),
        "--generator",
        "greedy",
        "--target",
        target.to_str().unwrap(),
        "--count",
        "1",
        "--seed",
        "6",
        "--max-attempts",
        "200",
        "--out",
        greedy_dir.to_str().unwrap(),
    ]));
    assert!(greedy_dir.join("level_00.lvl").exists());

    // Evaluate the random group against the target.
    let stdout = run_ok(bin().args([
        "evaluate",
        "--levels",
        rand_dir.to_str().unwrap(),
        "--target",
        target.to_str().unwrap(),
        "--runs",
        "3",
        "--seed",
        "2",
    ]));
    assert!(stdout.contains("playability"));
    assert!(rand_dir.join("report.txt").exists());
    assert!(rand_dir.join("results.csv").exists());
    assert!(rand_dir.join("diversity.csv").exists());
    let diversity = std::fs::read_to_string(rand_dir.join("diversity.csv")).unwrap();
    assert!(diversity.starts_with("level_id,min_div"));
    assert!(diversity.contains("group_mean,"));
}

#[test]
fn generate_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path());
    let make = |out: &Path| {
        run_ok(bin().args([
            "generate",
            "--corpus",
            manifest.to_str().unwrap(),
            "--generator",
            "random",
            "--count",
            "2",
            "--seed",
            "11",
            "--max-attempts",
            "200",
            "--out",
            out.to_str().unwrap(),
        ]));
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    make(&a);
    make(&b);
    for name in ["level_00.lvl", "level_01.lvl"] {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical runs");
    }
}

#[test]
fn evolve_generation_writes_stats_and_manifest_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path());
    // A tiny target keeps the run fast.
    let target = dir.path().join("target.txt");
    std::fs::write(&target, "Jump\nCoinCollect\n").unwrap();
    let evo = dir.path().join("evo");
    run_ok(bin().args([
        "generate",
        "--corpus",
        manifest.to_str().unwrap(),
        "--generator",
        "evolve",
        "--target",
        target.to_str().unwrap(),
        "--count",
        "1",
        "--seed",
        "9",
        "--population",
        "6",
        "--generations",
        "3",
        "--out",
        evo.to_str().unwrap(),
    ]));
    assert!(evo.join("level_00.lvl").exists());
    let stats = std::fs::read_to_string(evo.join("stats_00.csv")).unwrap();
    assert!(stats.starts_with("generation,best_fitness,mean_fitness,mean_constraint,"));
    assert_eq!(stats.lines().count(), 1 + 3 + 1, "header plus generations 0..=3");

    // Re-running from the manifest reproduces the level bytes.
    let evo2 = dir.path().join("evo2");
    run_ok(bin().args([
        "generate",
        "--config",
        evo.join("manifest.json").to_str().unwrap(),
        "--out",
        evo2.to_str().unwrap(),
    ]));
    assert_eq!(
        std::fs::read(evo.join("level_00.lvl")).unwrap(),
        std::fs::read(evo2.join("level_00.lvl")).unwrap()
    );
}

#[test]
fn corpus_check_passes_on_the_synthetic_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path());
    let stdout = run_ok(bin().args([
        "corpus-check",
        "--corpus",
        manifest.to_str().unwrap(),
        "--runs",
        "2",
    ]));
    assert!(stdout.contains("0 failures"), "stdout: {stdout}");
}

#[test]
fn missing_target_for_greedy_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path());
    let out = dir.path().join("x");
    let output = bin()
        .args([
            "generate",
            "--corpus",
            manifest.to_str().unwrap(),
            "--generator",
            "greedy",
            "--count",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("target"), "stderr: {stderr}");
}
