mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tgsched"));
    c.env_remove("TGSCHED_SEED");
    c
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("g.json");
    fs::write(&path, common::small_instance(7).to_native_json()).unwrap();
    path
}

fn stg_fixture(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("g50.stg");
    fs::write(&path, common::synthetic_stg50(3)).unwrap();
    path
}

#[test]
fn run_with_seed_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let g = fixture(&dir);
    for mode in ["hybrid", "ga-only", "la-only"] {
        let a = dir.path().join(format!("{mode}-a.json"));
        let b = dir.path().join(format!("{mode}-b.json"));
        for out in [&a, &b] {
            let o = exec(&["run", "--graph", s(&g), "--mode", mode, "--seed", "11", "--pop", "20", "--out", s(out)]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{mode}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let g = fixture(&dir);
    let flag = dir.path().join("flag.json");
    let env = dir.path().join("env.json");
    assert!(exec(&["run", "--graph", s(&g), "--seed", "5", "--out", s(&flag)]).status.success());
    let o = bin()
        .args(["run", "--graph", s(&g), "--out", s(&env)])
        .env("TGSCHED_SEED", "5")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(&flag).unwrap(), fs::read(&env).unwrap());
}

#[test]
fn report_contents() {
    let dir = TempDir::new().unwrap();
    let g = stg_fixture(&dir);
    let out = dir.path().join("r.json");
    let o = exec(&[
        "run", "--graph", s(&g), "--augment-seed", "4", "--seed", "2", "--pop", "30", "--out", s(&out),
        "--dump-automata",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["task_count"], 52);
    assert_eq!(v["graph"], "g50.stg");
    assert!(v.get("wall_ms").is_none());
    assert!(v["automata"].is_array());
    let trace: Vec<u64> = serde_json::from_value(v["trace"].clone()).unwrap();
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*trace.last().unwrap(), v["best_makespan"].as_u64().unwrap());
    assert!(stdout.contains(&format!("makespan: {}", v["best_makespan"])));
}

#[test]
fn missing_graph_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = exec(&["run", "--graph", s(&dir.path().join("nope.json")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn malformed_graph_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("bad.stg");
    fs::write(&g, "2\n0 0 0\n1 3 1 5\n").unwrap();
    let o = exec(&["run", "--graph", s(&g), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn bad_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let g = fixture(&dir);
    for extra in [
        &["--crossover", "1.5"][..],
        &["--pop", "0"],
        &["--memory-depth", "0"],
        &["--mode", "simulated-annealing"],
        &["--comm-min", "5", "--comm-max", "2", "--augment-seed", "1"],
    ] {
        let mut args = vec!["run", "--graph", s(&g), "--out", "/dev/null"];
        args.extend_from_slice(extra);
        assert_eq!(exec(&args).status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn augment_is_reproducible_and_respects_range() {
    let dir = TempDir::new().unwrap();
    let g = stg_fixture(&dir);
    let a = exec(&["augment", "--graph", s(&g), "--seed", "9"]);
    let b = exec(&["augment", "--graph", s(&g), "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let fixed = exec(&["augment", "--graph", s(&g), "--seed", "9", "--comm-min", "7", "--comm-max", "7"]);
    let parsed = tgsched::parse_native(&String::from_utf8(fixed.stdout).unwrap()).unwrap();
    assert!(!parsed.edges().is_empty());
    assert!(parsed.edges().iter().all(|e| e.comm == 7));
}

#[test]
fn compare_writes_one_row_per_cell() {
    let dir = TempDir::new().unwrap();
    let g = fixture(&dir);
    let out = dir.path().join("t.csv");
    let o = exec(&[
        "compare", "--graph", s(&g), "--modes", "hybrid,ga-only", "--seeds", "1..10", "--pop", "20",
        "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "graph,processors,mode,seed,makespan,ga_gens,la_iters,evals,wall_ms"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 22);
    assert_eq!(rows.iter().filter(|r| r.contains(",summary,")).count(), 2);

    let single = exec(&["compare", "--graph", s(&g), "--modes", "la-only", "--seeds", "3", "--pop", "20"]);
    assert!(single.status.success());
    let body = String::from_utf8(single.stdout).unwrap();
    assert_eq!(body.lines().filter(|l| l.contains(",la-only,3,")).count(), 1);
}

#[test]
fn compare_is_independent_of_thread_count() {
    let dir = TempDir::new().unwrap();
    let g = fixture(&dir);
    let strip = |o: Output| -> Vec<String> {
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let one = exec(&["compare", "--graph", s(&g), "--seeds", "1..4", "--pop", "20", "--jobs", "1"]);
    let four = exec(&["compare", "--graph", s(&g), "--seeds", "1..4", "--pop", "20", "--jobs", "4"]);
    assert_eq!(strip(one), strip(four));
}

#[test]
fn gantt_from_report_and_chromosome() {
    let dir = TempDir::new().unwrap();
    let g = stg_fixture(&dir);
    let report = dir.path().join("r.json");
    let svg = dir.path().join("chart.svg");
    assert!(exec(&["run", "--graph", s(&g), "--augment-seed", "4", "--pop", "20", "--out", s(&report)]).status.success());
    let o = exec(&["gantt", "--graph", s(&g), "--report", s(&report), "--out", s(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let body = fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg") || body.starts_with("<?xml"));

    // Without the augmentation the schedule no longer fits.
    let mismatch = exec(&[
        "gantt", "--graph", s(&g), "--report", s(&report), "--augment-seed", "5", "--out", s(&svg),
    ]);
    assert_ne!(mismatch.status.code(), Some(0));

    let native = fixture(&dir);
    let k = common::small_instance(7).task_count();
    let genes = (0..k).map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    let txt = dir.path().join("chart.txt");
    assert!(exec(&["gantt", "--graph", s(&native), "--chromosome", &genes, "--out", s(&txt)]).status.success());
    assert!(fs::read_to_string(&txt).unwrap().contains("makespan:"));
}

#[test]
fn oracle_reports_optimum() {
    let dir = TempDir::new().unwrap();
    let g = fixture(&dir);
    let o = exec(&["oracle", "--graph", s(&g)]);
    assert!(o.status.success());
    let want = tgsched::brute_force_optimum(&common::small_instance(7), 2).unwrap().optimum_makespan;
    assert!(String::from_utf8(o.stdout).unwrap().contains(&format!("optimum: {want}")));

    let big = stg_fixture(&dir);
    assert_eq!(exec(&["oracle", "--graph", s(&big)]).status.code(), Some(3));
}
