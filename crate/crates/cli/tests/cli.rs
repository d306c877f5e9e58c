use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xormmap::instances::read_instance;
use xormmap::mmap::sample_systems;
use xormmap::oracle::parse_dimacs_xor;
use xormmap::SeedTree;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_xormmap"));
    c.env_remove("XORMMAP_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn gen_2sat(dir: &Path, name: &str, seed: &str) -> PathBuf {
    let p = dir.join(name);
    ok(&[
        "generate",
        "2sat",
        "--n-total",
        "14",
        "--m-count",
        "5",
        "--clauses",
        "16",
        "--seed",
        seed,
        "--out",
        p.to_str().unwrap(),
    ]);
    p
}

#[test]
fn generate_is_deterministic_and_defaults_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate",
        "2sat",
        "--n-total",
        "16",
        "--m-count",
        "6",
        "--clauses",
        "20",
        "--seed",
        "7",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    assert!(a.starts_with("p cnf 16 20\n"));
    let file = dir.path().join("x.cnf");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", file.to_str().unwrap()]);
    assert_eq!(ok(&with_out), "");
    assert_eq!(std::fs::read_to_string(&file).unwrap(), a);
    let other = ok(&[
        "generate",
        "2sat",
        "--n-total",
        "16",
        "--m-count",
        "6",
        "--clauses",
        "20",
        "--seed",
        "8",
    ]);
    assert_ne!(a, other);

    let ising = ok(&[
        "generate",
        "ising",
        "--rows",
        "3",
        "--cols",
        "3",
        "--m-count",
        "3",
        "--seed",
        "1",
    ]);
    assert!(ising.starts_with("ising 3 3\n"));
    assert_eq!(ising.lines().filter(|l| l.ends_with(" max")).count(), 3);
}

#[test]
fn invalid_generator_flags_fail() {
    let out = run(&[
        "generate",
        "2sat",
        "--n-total",
        "4",
        "--m-count",
        "9",
        "--clauses",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["generate", "2sat", "--n-total", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_solve_prints_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_2sat(dir.path(), "a.cnf", "3");
    let out = ok(&["solve", "--instance", f.to_str().unwrap(), "--method", "exact"]);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1);
    let r = &lines[0];
    assert_eq!(r["type"], "result");
    assert_eq!(r["method"], "exact");
    let inst = read_instance(&f).unwrap();
    let opt = xormmap::baselines::exact_mmap(&inst, 26)
        .unwrap()
        .opt
        .log_weight()
        .log10();
    assert!((r["estimate_log10"].as_f64().unwrap() - opt).abs() < 1e-12);
}

#[test]
fn solve_is_reproducible_across_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_2sat(dir.path(), "a.cnf", "11");
    let f = f.to_str().unwrap();
    for method in ["xormmap", "binsearch", "plus", "biased"] {
        let base = [
            "solve",
            "--instance",
            f,
            "--method",
            method,
            "--c",
            "3",
            "--delta",
            "0.1",
            "--seed",
            "1",
        ];
        let once = ok(&base);
        assert_eq!(once, ok(&base), "{method}");
        for p in ["1", "4"] {
            let mut a = base.to_vec();
            a.extend(["--parallel", p]);
            assert_eq!(once, ok(&a), "{method} --parallel {p}");
        }
        let last: serde_json::Value = serde_json::from_str(once.lines().last().unwrap()).unwrap();
        assert_eq!(last["type"], "result");
        assert!(last["lb_log10"].is_number() && last["ub_log10"].is_number());
        assert_eq!(last["status"], "complete");
    }
}

#[test]
fn env_seed_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_2sat(dir.path(), "a.cnf", "4");
    let f = f.to_str().unwrap();
    let flag = ok(&["solve", "--instance", f, "--seed", "42"]);
    let env = bin()
        .args(["solve", "--instance", f])
        .env("XORMMAP_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), flag);
    assert_ne!(ok(&["solve", "--instance", f, "--seed", "43"]), flag);
}

#[test]
fn incompatible_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_2sat(dir.path(), "a.cnf", "5");
    let f = f.to_str().unwrap();
    for bad in [
        vec!["--method", "xormmap", "--q", "3"],
        vec!["--method", "xormmap", "--r", "3"],
        vec!["--method", "exact", "--T", "5"],
        vec!["--method", "saa", "--engine", "joint-dpll"],
        vec!["--method", "xormmap", "--samples", "10"],
        vec!["--method", "xormmap", "--lift", "3"],
    ] {
        let mut a = vec!["solve", "--instance", f];
        a.extend(&bad);
        let out = run(&a);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    let out = run(&["solve", "--instance", "/nonexistent.cnf"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_degraded() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_2sat(dir.path(), "a.cnf", "6");
    let out = run(&["solve", "--instance", f.to_str().unwrap(), "--node-cap", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let last = String::from_utf8(out.stdout).unwrap();
    let last: serde_json::Value = serde_json::from_str(last.lines().last().unwrap()).unwrap();
    assert_eq!(last["status"], "degraded");
}

#[test]
fn bench_rows_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_2sat(dir.path(), "first.cnf", "1");
    let b = gen_2sat(dir.path(), "second.cnf", "2");
    let args = [
        "bench",
        "--instance",
        a.to_str().unwrap(),
        "--instance",
        b.to_str().unwrap(),
        "--methods",
        "xormmap,saa,exact",
        "--seeds",
        "5",
        "--seed",
        "9",
    ];
    let csv = ok(&args);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance_id,seed,method,c,delta,T,k_hat,estimate_log10,lb_log10,ub_log10,score_log10,oracle_calls,nodes,wall_ms,status"
    );
    assert_eq!(lines.count(), 30);
    assert_eq!(csv, ok(&args));
    let mut par = args.to_vec();
    par.extend(["--parallel", "4"]);
    assert_eq!(csv, ok(&par));
    assert!(csv.contains("first,9,xormmap"));
    assert!(csv.contains("second,13,exact"));
}

#[test]
fn bench_keeps_failed_runs() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("grid.ising");
    ok(&[
        "generate",
        "ising",
        "--rows",
        "2",
        "--cols",
        "2",
        "--m-count",
        "1",
        "--seed",
        "3",
        "--out",
        g.to_str().unwrap(),
    ]);
    // the weighted oracle has no joint engine: that row fails, the rest stay
    let csv = ok(&[
        "bench",
        "--instance",
        g.to_str().unwrap(),
        "--methods",
        "xormmap,exact",
        "--seeds",
        "1",
        "--engine",
        "joint-dpll",
    ]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("grid,0,xormmap") && rows[0].ends_with(",error"));
    assert!(rows[1].ends_with(",complete"));
}

#[test]
fn export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_2sat(dir.path(), "a.cnf", "8");
    let inst = read_instance(&f).unwrap();
    let (m, n) = (inst.m(), inst.n());
    let out = dir.path().join("q.cnf");
    ok(&[
        "export",
        "--instance",
        f.to_str().unwrap(),
        "--k",
        "3",
        "--T",
        "4",
        "--seed",
        "5",
        "--threshold",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let p_line = text.lines().find(|l| l.starts_with("p cnf")).unwrap();
    let vars: usize = p_line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert_eq!(vars, m + 4 * n + 4);
    let parsed = parse_dimacs_xor(&text).unwrap();
    assert_eq!(parsed.threshold, 3);
    assert_eq!(
        parsed.problem.systems(),
        sample_systems(&SeedTree::new(5), n, 3, 4, 0).as_slice()
    );

    let bare = ok(&[
        "export",
        "--instance",
        f.to_str().unwrap(),
        "--k",
        "0",
        "--T",
        "1",
    ]);
    assert!(!bare.lines().any(|l| l.starts_with("x ")));
    let vars: usize = bare
        .lines()
        .find(|l| l.starts_with("p cnf"))
        .unwrap()
        .split_whitespace()
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(vars, m + n + 1);
}
