use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_conquer");

const CONFIG: &str = r#"
algorithms = ["gnc", "ttg", "banditron"]
k = 4
eta_grid = [0.1, 1.0]
gamma_grid = [0.1]
repetitions = 3
seed = 7

[data]
source = "synthetic-corpus"
reviews = 400
domains = 2
hash_dim = 4096
"#;

fn conquer(args: &[&str]) -> String {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_twice_gives_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    conquer(&["run", "--config", path(&cfg), "--out", path(&a)]);
    conquer(&["--sequential", "run", "--config", path(&cfg), "--out", path(&b)]);

    let summary = fs::read(a.join("summary.csv")).unwrap();
    assert_eq!(summary, fs::read(b.join("summary.csv")).unwrap());
    let text = String::from_utf8(summary).unwrap();
    assert!(text.starts_with("algorithm,K,mean_error,p95_low,p95_high,skip_rate\n"));
    assert_eq!(text.lines().count(), 4);

    let wins = fs::read_to_string(a.join("win_matrix.csv")).unwrap();
    assert_eq!(wins.lines().next().unwrap(), "algorithm,CNQR-GNC,CNQR-TTG,Banditron");
    let trace = fs::read_to_string(a.join("traces").join("CNQR-GNC_K4_rep0.csv")).unwrap();
    assert!(trace.starts_with("t,policy,m,n,y,queried,regret,cum_regret,error,eps_t,q_t\n"));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("o");
    conquer(&[
        "run",
        "--config",
        path(&cfg),
        "--algo",
        "gnu",
        "--k",
        "3",
        "--eta",
        "0.5",
        "--reps",
        "2",
        "--matrix",
        "full",
        "--project",
        "--seed",
        "1",
        "--out",
        path(&out),
    ]);
    let trials = fs::read_to_string(out.join("trials.csv")).unwrap();
    let rows: Vec<&str> = trials.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("CNQR-GNU,3,") && r.contains("eta=0.5")));
    assert!(!out.join("win_matrix.csv").exists());
}

#[test]
fn report_rebuilds_summary_from_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("o");
    conquer(&["run", "--config", path(&cfg), "--out", path(&out)]);
    let original = fs::read(out.join("summary.csv")).unwrap();
    fs::remove_file(out.join("summary.csv")).unwrap();
    fs::remove_file(out.join("win_matrix.csv")).unwrap();
    let stdout = conquer(&["report", "--out", path(&out)]);
    assert!(stdout.contains("CNQR-GNC"));
    assert_eq!(fs::read(out.join("summary.csv")).unwrap(), original);
    assert!(out.join("win_matrix.csv").exists());
}

#[test]
fn tune_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("t");
    conquer(&["tune", "--config", path(&cfg), "--out", path(&out)]);
    let tuning = fs::read_to_string(out.join("tuning.csv")).unwrap();
    // 2 η points each for GNC and TTG, 1 γ point for Banditron.
    assert_eq!(tuning.lines().count(), 1 + 5);
    assert_eq!(tuning.lines().filter(|l| l.ends_with(",true")).count(), 3);
}

#[test]
fn dump_features_round_trips_reviews() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("reviews.tsv");
    fs::write(
        &tsv,
        "#domain books\n5\tGreat read!! Loved it :)\n1\tBoring... <b>awful</b>\n",
    )
    .unwrap();
    let (feats, again) = (dir.path().join("f.txt"), dir.path().join("again.tsv"));
    conquer(&[
        "dump-features",
        "--input",
        path(&tsv),
        "--dim",
        "1024",
        "--out",
        path(&feats),
        "--reviews-out",
        path(&again),
    ]);
    let first = conquer(&["dump-features", "--input", path(&tsv), "--dim", "1024"]);
    let second = conquer(&["dump-features", "--input", path(&again), "--dim", "1024"]);
    assert_eq!(first, second);
    assert_eq!(first, fs::read_to_string(&feats).unwrap());
    assert!(first.starts_with("#dim 1024\n#domain books\n5 "));
    assert_eq!(first.lines().count(), 4);
}

#[test]
fn parse_demo_learns() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("dp.csv");
    let stdout = conquer(&["parse-demo", "--sentences", "600", "--dim", "64", "--out", path(&trace)]);
    let acc: Vec<f64> = stdout
        .lines()
        .filter(|l| l.starts_with("edge accuracy"))
        .map(|l| l.rsplit(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(acc.len(), 2);
    assert!(acc[1] > acc[0], "{stdout}");
    let rows = fs::read_to_string(trace).unwrap();
    assert_eq!(rows.lines().count(), 601);
}

#[test]
fn bad_flags_fail_cleanly() {
    let out = Command::new(BIN).args(["run", "--matrix", "sparse"]).output().unwrap();
    assert!(!out.status.success());
    let out = Command::new(BIN).args(["run", "--algo", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}
