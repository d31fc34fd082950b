use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn beast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beast"))
        .args(args)
        .env_remove("BEAST_CACHE_DIR")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small deterministic generator so the fixtures do not depend on a crate.
fn lcg(state: &mut u64) -> f64 {
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn write_table(
    dir: &Path,
    name: &str,
    rows: usize,
    f: impl Fn(&mut u64) -> Vec<f64>,
    header: &str,
) -> PathBuf {
    let mut s = 99u64;
    let mut text = format!("{header}\n");
    for _ in 0..rows {
        let row: Vec<String> = f(&mut s).iter().map(|v| format!("{v}")).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn comonotone(dir: &Path) -> PathBuf {
    write_table(
        dir,
        "co.csv",
        128,
        |s| {
            let x = lcg(s);
            vec![x, x.powi(3) - 2.0]
        },
        "x,y",
    )
}

fn three_columns(dir: &Path) -> PathBuf {
    write_table(
        dir,
        "three.csv",
        60,
        |s| vec![lcg(s), lcg(s), lcg(s)],
        "a,b,c",
    )
}

#[test]
fn comonotone_test_rejects_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = comonotone(dir.path());
    let out = beast(&["test", "--input", input.to_str().unwrap(), "--seed", "4"]);
    let text = stdout(&out);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["result"]["p_value"].as_f64().unwrap() < 0.001);
    let params = &v["parameters"];
    for key in [
        "depth",
        "lambda",
        "m",
        "r",
        "null_sims",
        "seed",
        "subsample_mode",
        "set_kind",
    ] {
        assert!(!params[key].is_null(), "missing {key}");
    }
    assert!((params["lambda"].as_f64().unwrap() - 0.0637).abs() < 1e-4);
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
    let top = &v["result"]["top_interactions"][0];
    assert_eq!(
        top["white"].as_u64().unwrap() + top["blue"].as_u64().unwrap(),
        128
    );
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = three_columns(dir.path());
    let args = [
        "test",
        "--input",
        input.to_str().unwrap(),
        "--seed",
        "9",
        "--null-sims",
        "200",
    ];
    let a = stdout(&beast(&args));
    let b = stdout(&beast(&args));
    assert_eq!(a, b);
    let mut threaded = vec!["--threads", "1"];
    threaded.extend(args);
    assert_eq!(a, stdout(&beast(&threaded)));
}

#[test]
fn joint_set_from_three_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = three_columns(dir.path());
    let out = beast(&[
        "test",
        "--input",
        input.to_str().unwrap(),
        "--x-cols",
        "a,b",
        "--y-cols",
        "3",
        "--method",
        "chi2",
        "--seed",
        "1",
        "--null-sims",
        "50",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["parameters"]["set_kind"], "jointcross3");
    assert_eq!(v["parameters"]["set_size"], 441);
    assert!(v["result"]["lambda"].is_null());
}

#[test]
fn csv_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = comonotone(dir.path());
    let out = beast(&[
        "test",
        "--input",
        input.to_str().unwrap(),
        "--seed",
        "1",
        "--null-sims",
        "30",
        "--format",
        "csv",
        "--top",
        "3",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("schema_version,method,statistic,p_value"));
}

#[test]
fn input_errors_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let rep = report.to_str().unwrap();

    let missing = dir.path().join("nope.csv");
    let o = beast(&[
        "test",
        "--input",
        missing.to_str().unwrap(),
        "--seed",
        "1",
        "--output",
        rep,
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nope.csv"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,y\n1,2\n3,oops\n").unwrap();
    let o = beast(&[
        "test",
        "--input",
        bad.to_str().unwrap(),
        "--seed",
        "1",
        "--output",
        rep,
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("oops"));

    let good = comonotone(dir.path());
    let g = good.to_str().unwrap();
    let o = beast(&[
        "test", "--input", g, "--x-cols", "z", "--seed", "1", "--output", rep,
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no column named 'z'"));
    let o = beast(&[
        "test", "--input", g, "--x-cols", "1", "--y-cols", "1", "--output", rep,
    ]);
    assert!(!o.status.success());
    let o = beast(&["test", "--input", g, "--depth", "7", "--output", rep]);
    assert!(!o.status.success());

    assert!(!report.exists());
    let leftovers = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 2, "only the two inputs remain");
}

#[test]
fn report_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let input = comonotone(dir.path());
    let report = dir.path().join("out.json");
    let o = beast(&[
        "test",
        "--input",
        input.to_str().unwrap(),
        "--seed",
        "2",
        "--null-sims",
        "40",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["command"], "test");
}

#[test]
fn power_grid_shape_and_determinism() {
    let args = [
        "power",
        "--scenario",
        "circle",
        "--kappas",
        "0,0.5,1",
        "--reps",
        "50",
        "--seed",
        "3",
        "--null-sims",
        "200",
        "--n",
        "64",
        "--oracle-k",
        "5000",
    ];
    let a = stdout(&beast(&args));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "scenario,kappa,method,n,replicates,power,se");
    // Default methods: beast, oracle, chi2, maxbet.
    assert_eq!(lines.len(), 1 + 3 * 4);
    for m in ["beast", "oracle", "chi2", "maxbet"] {
        assert_eq!(
            lines
                .iter()
                .filter(|l| l.contains(&format!(",{m},")))
                .count(),
            3
        );
    }
    assert_eq!(a, stdout(&beast(&args)));
    let mut threaded = vec!["--threads", "2"];
    threaded.extend(args);
    assert_eq!(a, stdout(&beast(&threaded)));
}

#[test]
fn unknown_scenario() {
    let o = beast(&["power", "--scenario", "spiral"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("spiral") && err.contains("circle") && err.contains("double_helix"));
}

#[test]
fn null_cache_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let c = cache.to_str().unwrap();
    let base = [
        "null",
        "--n",
        "40",
        "--seed",
        "5",
        "--null-sims",
        "100",
        "--cache-dir",
        c,
    ];
    let status = |o: &Output| -> String {
        let v: Value = serde_json::from_str(&stdout(o)).unwrap();
        v["status"].as_str().unwrap().to_string()
    };

    assert_eq!(status(&beast(&base)), "miss");
    let o = beast(&[&["-v"], &base[..]].concat());
    assert_eq!(status(&o), "hit");
    assert!(stderr(&o).contains("cache hit"));

    let mut changed = base.to_vec();
    changed.extend(["--lambda", "0.2"]);
    assert_eq!(status(&beast(&changed)), "miss");
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 2);

    let v: Value = serde_json::from_str(&stdout(&beast(&base))).unwrap();
    let path = v["path"].as_str().unwrap().to_string();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replacen("beast-null-cache", "garbage", 1)).unwrap();
    assert_eq!(status(&beast(&base)), "regenerated");
    assert_eq!(status(&beast(&base)), "hit");
    assert_eq!(fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn null_cache_env_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_beast"))
        .args([
            "null",
            "--n",
            "30",
            "--seed",
            "1",
            "--null-sims",
            "20",
            "--method",
            "chi2",
        ])
        .env("BEAST_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);

    let file = dir.path().join("plain");
    fs::write(&file, "x").unwrap();
    let sub = file.join("cache");
    let o = beast(&[
        "null",
        "--n",
        "30",
        "--seed",
        "1",
        "--null-sims",
        "20",
        "--cache-dir",
        sub.to_str().unwrap(),
    ]);
    assert!(!o.status.success());

    let o = beast(&["null", "--n", "30", "--seed", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("BEAST_CACHE_DIR"));
}

#[test]
fn test_uses_cache_when_given() {
    let dir = tempfile::tempdir().unwrap();
    let input = comonotone(dir.path());
    let cache = dir.path().join("cache");
    let args = [
        "test",
        "--input",
        input.to_str().unwrap(),
        "--seed",
        "8",
        "--null-sims",
        "60",
        "--cache-dir",
        cache.to_str().unwrap(),
    ];
    let first: Value = serde_json::from_str(&stdout(&beast(&args))).unwrap();
    let second: Value = serde_json::from_str(&stdout(&beast(&args))).unwrap();
    assert_eq!(first["parameters"]["cache"], "miss");
    assert_eq!(second["parameters"]["cache"], "hit");
    assert_eq!(first["result"], second["result"]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = comonotone(dir.path());
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "# defaults\ndepth = 2\nnull_sims = 30\nseed = 6\nmethod = chi2\n",
    )
    .unwrap();
    let c = conf.to_str().unwrap();
    let i = input.to_str().unwrap();

    let v: Value =
        serde_json::from_str(&stdout(&beast(&["--config", c, "test", "--input", i]))).unwrap();
    assert_eq!(v["parameters"]["depth"], 2);
    assert_eq!(v["parameters"]["null_sims"], 30);
    assert_eq!(v["parameters"]["method"], "chi2");
    assert_eq!(v["parameters"]["seed_source"], "flag");

    let v: Value = serde_json::from_str(&stdout(&beast(&[
        "test", "--input", i, "--config", c, "--depth", "3",
    ])))
    .unwrap();
    assert_eq!(v["parameters"]["depth"], 3);
    assert_eq!(v["parameters"]["seed"], 6);
}

#[test]
fn random_seed_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let input = comonotone(dir.path());
    let o = beast(&[
        "test",
        "--input",
        input.to_str().unwrap(),
        "--null-sims",
        "20",
        "--method",
        "maxbet",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["parameters"]["seed_source"], "random");
    assert!(stderr(&o).contains("random seed"));
}

#[test]
fn beauty_table() {
    let out = stdout(&beast(&["beauty", "--depth", "10", "--t", "1", "--t", "0"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,re,im,uniform_re");
    let f: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((f[1] - 1f64.sin()).abs() < 1e-5);
    assert!(f[2].abs() < 1e-12);
    assert!(lines[2].starts_with("0.0,1.0,"));

    let out = stdout(&beast(&[
        "beauty", "--p", "2", "--depth", "3", "--t", "1,2",
    ]));
    assert_eq!(out.lines().count(), 2);
    let o = beast(&["beauty", "--p", "2", "--t", "1"]);
    assert!(!o.status.success());
}

#[test]
fn expand_counts_and_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let input = comonotone(dir.path());
    let out = stdout(&beast(&[
        "expand",
        "--input",
        input.to_str().unwrap(),
        "--depth",
        "1",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["counts"], serde_json::json!([64, 0, 0, 64]));
    let sums: Vec<i64> = v["symmetry"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["sum"].as_i64().unwrap())
        .collect();
    assert_eq!(sums, vec![128, 0, 0, 128]);
}
