use std::fs;

use groupiq::cli::{run_cli, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_USAGE};
use groupiq::report::{file_digest, read_csv};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["groupiq"];
    full.extend_from_slice(args);
    let code = run_cli(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn run_writes_csv_row_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, stderr) = run(&[
        "run",
        "--group",
        "SL9&O1",
        "--grid",
        "20",
        "--iterations",
        "20",
        "--episodes",
        "20",
        "--seed",
        "7",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    assert!(stdout.contains("SL9&O1: mean"));
    let rows = read_csv(&dir.path().join("run.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(
        (rows[0].m, rows[0].n, rows[0].iterations, rows[0].episodes, rows[0].seed),
        (20, 10, 20, 20, 7)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn identical_arguments_give_identical_csv() {
    let digest = || {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let (code, _, err) = run(&[
            "run",
            "--group",
            "SL3&TL2",
            "--episodes",
            "10",
            "--seed",
            "5",
            "--out",
            out,
            "--chart",
            "false",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(!dir.path().join("run.svg").exists());
        file_digest(&dir.path().join("run.csv")).unwrap()
    };
    assert_eq!(digest(), digest());
}

#[test]
fn complexity_reports_entropy() {
    let (code, stdout, _) = run(&["complexity", "--grid", "20"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("entropy H = 17.29 bits"), "{stdout}");
}

#[test]
fn time_sweep_covers_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run(&[
        "sweep",
        "--axis",
        "time",
        "--group",
        "IL10&O10",
        "--episodes",
        "2",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = fs::read_to_string(dir.path().join("sweep-time.csv")).unwrap();
    assert_eq!(text.lines().count(), 7);
    let values: Vec<f64> = read_csv(&dir.path().join("sweep-time.csv"))
        .unwrap()
        .iter()
        .map(|r| r.axis_value)
        .collect();
    assert_eq!(values, [10.0, 20.0, 50.0, 100.0, 200.0, 500.0]);
    assert!(dir.path().join("sweep-time.svg").exists());
}

#[test]
fn compare_reports_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, err) = run(&[
        "compare",
        "--group",
        "SL2&TL2",
        "--group",
        "SL2&O2",
        "--episodes",
        "4",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(stdout.matches("baseline").count(), 2);
    let rows = read_csv(&dir.path().join("compare.csv")).unwrap();
    assert!(rows.iter().all(|r| r.baseline.is_some()));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        format!(
            "axis = \"size\"\ngroup = [\"SL1&O1\"]\npoints = [2, 4]\nepisodes = 3\nseed = 9\nout = {:?}\n",
            dir.path().to_str().unwrap()
        ),
    )
    .unwrap();
    let (code, _, err) = run(&["sweep", "--config", cfg.to_str().unwrap(), "--episodes", "2"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let rows = read_csv(&dir.path().join("sweep-size.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [2, 4]);
    assert!(rows.iter().all(|r| r.episodes == 2 && r.seed == 9));
}

#[test]
fn errors_map_to_exit_codes() {
    assert_eq!(run(&["run", "--group", "SL0&O1"]).0, EXIT_CONFIG);
    assert_eq!(run(&["run", "--group", "SL2", "--grid", "3"]).0, EXIT_CONFIG);
    assert_eq!(run(&["sweep", "--group", "SL2"]).0, EXIT_CONFIG);
    assert_eq!(
        run(&["sweep", "--axis", "size", "--group", "SL2&O1", "--points", "10"]).0,
        EXIT_CONFIG
    );
    assert_eq!(run(&["run", "--bogus"]).0, EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let (code, _, err) = run(&[
        "run",
        "--group",
        "SL2",
        "--episodes",
        "1",
        "--out",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_IO);
    assert!(err.contains("file"));
}
