use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fsprivacy::experiment::{SolveReport, SurfaceGrid, UserReport};
use fsprivacy::movielens::load_store;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsprivacy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/movielens")
}

fn example_files(dir: &Path) -> (String, String) {
    let q = dir.join("q.json");
    let p = dir.join("p.csv");
    fs::write(&q, "[0.130, 0.440, 0.430]\n").unwrap();
    fs::write(&p, "p\n0.380\n0.390\n0.230\n").unwrap();
    (q.display().to_string(), p.display().to_string())
}

fn ingest(dir: &Path) -> String {
    let store = dir.join("store.jsonl");
    let f = fixtures();
    let out = run(&[
        "ingest",
        f.join("movies.dat").to_str().unwrap(),
        f.join("ratings.dat").to_str().unwrap(),
        "--output",
        store.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    store.display().to_string()
}

#[test]
fn example_passes_and_is_deterministic() {
    let a = run(&["example"]);
    let b = run(&["example"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("initial risk R(0,0) = 0.2636"));
    assert!(text.contains("self-check"));
}

#[test]
fn solve_low_budget_panel() {
    let dir = tempfile::tempdir().unwrap();
    let (q, p) = example_files(dir.path());
    let out = run(&["solve", &q, &p, "--rho", "0.05", "--sigma", "0.10"]);
    assert!(out.status.success());
    let rep: SolveReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((rep.risk - 0.131).abs() <= 0.002);
    assert!(rep.certificate.valid);

    let zero = run(&["solve", &q, &p, "--rho", "0", "--sigma", "0"]);
    let rep: SolveReport = serde_json::from_str(&stdout(&zero)).unwrap();
    assert!(rep.r.iter().chain(&rep.s).all(|&x| x == 0.0));

    let csv = run(&["solve", &q, &p, "--rho", "0.05", "--sigma", "0.10", "--format", "csv"]);
    assert!(stdout(&csv).starts_with("category,q,p,r,s,t\n"));
}

#[test]
fn solve_keeps_file_order_and_reports_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    let p = dir.path().join("p.json");
    fs::write(&q, "[0.430, 0.440, 0.130]").unwrap();
    fs::write(&p, "[0.230, 0.390, 0.380]").unwrap();
    let (q, p) = (q.to_str().unwrap(), p.to_str().unwrap());
    let out = run(&["solve", q, p, "--rho", "0.05", "--sigma", "0.10"]);
    let rep: SolveReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rep.q, vec![0.430, 0.440, 0.130]);
    assert!((rep.r[2] - 0.05).abs() < 1e-12 && (rep.s[0] - 0.10).abs() < 1e-12);

    let out = run(&["solve", q, p, "--rho", "0", "--sigma", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));

    let out = run(&["solve", q, p, "--rho", "0.1", "--sigma", "0.1", "--interior-policy", "lavish"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "/nonexistent/q.json", p, "--rho", "0", "--sigma", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn economical_policy_reports_unused_forgery() {
    let dir = tempfile::tempdir().unwrap();
    let (q, p) = example_files(dir.path());
    let out = run(&["solve", &q, &p, "--rho", "0.3", "--sigma", "0.3", "--interior-policy", "economical"]);
    let rep: SolveReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rep.risk, 0.0);
    assert!((rep.unused_forgery - (0.3 - rep.rho_crit)).abs() < 1e-12);
    assert!((rep.r.iter().sum::<f64>() - rep.rho_crit).abs() < 1e-9);
}

#[test]
fn surface_csv_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let (q, p) = example_files(dir.path());
    let out = run(&["surface", &q, &p, "--grid", "rho:0:1:11,sigma:0:0.7:8"]);
    assert!(out.status.success());
    let grid = SurfaceGrid::read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!((grid.rho_axis.len(), grid.sigma_axis.len()), (11, 8));
    assert!((grid.value(0, 0) - 0.26356).abs() < 1e-4);
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("rho\\sigma,"));

    let origin = run(&["surface", &q, &p, "--grid", "rho:0:0:1,sigma:0:0:1", "--format", "json"]);
    let grid: SurfaceGrid = serde_json::from_str(&stdout(&origin)).unwrap();
    assert_eq!(grid.values, vec![vec![0.26356172592908395]]);

    let bad = run(&["surface", &q, &p, "--grid", "rho:0:1:3,sigma:0:1:3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn ingest_then_store_commands() {
    let dir = tempfile::tempdir().unwrap();
    let store = ingest(dir.path());
    let set = load_store(Path::new(&store)).unwrap();
    assert_eq!(set.users.iter().map(|u| u.user_id).collect::<Vec<_>>(), vec![1, 2, 3, 4]);

    let out = run(&["percentiles", &store, "--grid", "rho:0:0.1:3,sigma:0:0.1:3", "--percentiles", "10,50,90"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.matches("# percentile").count(), 3);
    let first: String = text.split_inclusive('\n').take(5).collect();
    let grid = SurfaceGrid::read_csv(first.as_bytes()).unwrap();
    assert_eq!(grid.value(0, 0), 0.0);
    assert!(grid.values[0].windows(2).all(|w| w[0] <= w[1]));

    let out_dir = dir.path().join("pct");
    let out = run(&[
        "--jobs", "2", "percentiles", &store, "--grid", "rho:0:0.1:3,sigma:0:0.1:3", "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for pct in [10, 50, 90] {
        assert!(out_dir.join(format!("percentile_{pct}.csv")).exists());
    }

    let hist = dir.path().join("hist");
    let out = run(&["population-stats", &store, "--hist-dir", hist.to_str().unwrap(), "--bin-width", "0.5"]);
    assert!(out.status.success());
    let stats: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(stats["eligible_users"], 2);
    assert_eq!(stats["degenerate_users"], 0);
    for name in ["delta_rho", "delta_sigma", "rho_n", "sigma_1"] {
        assert!(hist.join(format!("{name}.csv")).exists());
    }

    let out = run(&["user-report", &store, "1", "--rates", "0:0,0.05:0.05"]);
    assert!(out.status.success());
    let rep: UserReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rep.entries[0].relative_risk, 1.0);
    assert!(rep.entries[1].relative_risk < 1.0);
    assert_eq!(rep.genres.len(), 19);

    let missing = run(&["user-report", &store, "99"]);
    assert_eq!(missing.status.code(), Some(3));
    // user 3 lacks several genres
    let zero = run(&["user-report", &store, "3"]);
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn unknown_genres_are_rejected_unless_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let movies = dir.path().join("movies.dat");
    let src = fs::read_to_string(fixtures().join("movies.dat")).unwrap();
    fs::write(&movies, format!("{src}21::Nothing (2010)::(no genres listed)\n")).unwrap();
    let ratings = fixtures().join("ratings.dat");
    let store = dir.path().join("s.jsonl");
    let args = |extra: &[&'static str]| {
        let mut v = vec![
            "ingest".to_string(),
            movies.display().to_string(),
            ratings.display().to_string(),
            "-o".to_string(),
            store.display().to_string(),
        ];
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let out = bin().args(args(&[])).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no genres listed"));
    let out = bin().args(args(&["--ignore-unknown-genres", "--genre-weight", "fractional"])).output().unwrap();
    assert!(out.status.success());
    assert_eq!(load_store(&store).unwrap().users.len(), 4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
