use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use renorm_core::Combinatorics;
use serde_json::Value;

fn renorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renorm")).args(args).output().expect("binary runs")
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    let o = out.to_str().unwrap();
    all.extend(["--out", o]);
    renorm(&all)
}

fn report(out: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(out.join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn meta(out: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(out.join(format!("{command}.meta.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn b_of_c(c: f64) -> f64 {
    (-1.0 - (1.0 - 4.0 * c).sqrt()) / 2.0
}

/// Superstable parameters of period 2ⁿ for z² + c, by Newton in c started
/// from a geometric extrapolation of the previous two.
fn superstable_cascade(n_max: usize) -> Vec<f64> {
    let mut c = vec![0.0f64, -1.0];
    for n in 2..=n_max {
        let k = c.len();
        let mut x = c[k - 1] + (c[k - 1] - c[k - 2]) / 4.669;
        for _ in 0..80 {
            let (mut z, mut dz) = (0.0f64, 0.0f64);
            for _ in 0..(1usize << n) {
                dz = 2.0 * z * dz + 1.0;
                z = z * z + x;
            }
            let step = z / dz;
            x -= step;
            if step.abs() < 1e-17 {
                break;
            }
        }
        c.push(x);
    }
    c.into_iter().map(b_of_c).collect()
}

#[test]
fn analyze_golden_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["analyze", "--b=-1.618034"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(dir.path(), "analyze");
    assert_eq!(r["schema"], "v1");
    assert_eq!(r["payload"]["p"], 2);
    assert_eq!(r["payload"]["renormalization"]["combinatorics"], Combinatorics::doubling().canonical());
    assert_eq!(r["error"], Value::Null);
    // Every tolerance the run used is written down.
    let settings = r["provenance"]["settings"].as_object().unwrap();
    assert!(settings.contains_key("max_period") && settings.contains_key("eval_tol"));
    assert_eq!(r["provenance"]["precision_bits"], 53);
}

#[test]
fn delta_csv_matches_independent_cascade() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["delta", "--n-max", "8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("delta.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,value"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (n, v) = l.split_once(',').unwrap();
            (n.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    let b = superstable_cascade(8);
    for &(n, d) in &rows {
        let want = (b[n - 1] - b[n - 2]) / (b[n] - b[n - 1]);
        assert!((d - want).abs() < 1e-5 * want, "n={n}: {d} vs {want}");
    }
    let (n, last) = *rows.last().unwrap();
    assert_eq!(n, 8);
    assert!((last - 4.6692).abs() / 4.6692 < 0.01);
}

#[test]
fn malformed_word_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["tune", "--word", "v1;N=1;m=2;garbage"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("parse: invalid canonical combinatorics"));
    let r = report(dir.path(), "tune");
    assert_eq!(r["error"], "parse: invalid canonical combinatorics");
    assert_eq!(r["payload"], Value::Null);
    assert_eq!(meta(dir.path(), "tune")["exit_code"], 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Chebyshev: a domain failure.
    let o = run_in(dir.path(), &["analyze", "--b=-2"]);
    assert_eq!(code(&o), 1);
    assert!(report(dir.path(), "analyze")["error"].as_str().unwrap().contains("not-renormalizable"));
    for args in [
        &["analyze", "--b=-2.5"][..],
        &["analyze"],
        &["analyze", "--b=-1.7", "--precision-bits", "64"],
        &["tune", "--word", "M5"],
    ] {
        let o = run_in(dir.path(), args);
        assert_ne!(code(&o), 0, "{args:?}");
    }
    let o = run_in(dir.path(), &["analyze", "--b=-1.7", "--precision-bits", "64"]);
    assert_eq!(code(&o), 2);
    let o = renorm(&["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_rejects_unknown_keys_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "b = [-1.7]\nbogus = 3\n").unwrap();
    let o = run_in(dir.path(), &["analyze", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "b = [-1.9]\ndepth = 3\n").unwrap();
    let o = run_in(dir.path(), &["analyze", "--config", good.to_str().unwrap(), "--b=-1.618034"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(dir.path(), "analyze");
    assert_eq!(r["inputs"]["b"][0], -1.618034);
    assert_eq!(r["inputs"]["depth"], 3);
    // Output locations are not part of the inputs.
    assert!(r["inputs"].get("out").is_none() && r["inputs"].get("cache_dir").is_none());
}

#[test]
fn tune_cache_hits_and_misses() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let c = cache.to_str().unwrap();
    let runs: Vec<PathBuf> = (0..4).map(|i| dir.path().join(format!("run{i}"))).collect();

    let o = run_in(&runs[0], &["tune", "--word", "M2^5", "--cache-dir", c]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(meta(&runs[0], "tune")["cache"], "miss");
    let o = run_in(&runs[1], &["tune", "--word", "M2^5", "--cache-dir", c]);
    assert_eq!(code(&o), 0);
    assert_eq!(meta(&runs[1], "tune")["cache"], "hit");
    assert_eq!(report(&runs[0], "tune"), report(&runs[1], "tune"));

    let o = run_in(&runs[2], &["tune", "--word", "M2^5", "--cache-dir", c, "--precision-bits", "106"]);
    assert_eq!(code(&o), 0);
    assert_eq!(meta(&runs[2], "tune")["cache"], "miss");

    // Corrupt every entry: lookups fall back to recomputing.
    for e in std::fs::read_dir(&cache).unwrap() {
        std::fs::write(e.unwrap().path(), "{ not json").unwrap();
    }
    let o = run_in(&runs[3], &["tune", "--word", "M2^5", "--cache-dir", c]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
    assert_eq!(meta(&runs[3], "tune")["cache"], "miss");
    assert_eq!(report(&runs[0], "tune"), report(&runs[3], "tune"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str], &[&str])] = &[
        ("analyze", &["--b=-1.78"], &[]),
        ("tower", &["--depth", "4"], &[]),
        ("nest", &["--b=-1.9", "--depth", "6"], &[]),
        ("julia", &["--b=-1.7"], &["julia.pgm", "julia.csv"]),
        ("external", &["--b=-1.7"], &["external.csv"]),
        ("combinatorics", &["--word", "M2*M3"], &[]),
    ];
    for (command, args, artifacts) in cases {
        let a = dir.path().join(format!("{command}-a"));
        let b = dir.path().join(format!("{command}-b"));
        let mut full = vec![*command];
        full.extend(*args);
        assert_eq!(code(&run_in(&a, &full)), 0, "{command}");
        assert_eq!(code(&run_in(&b, &full)), 0, "{command}");
        for name in std::iter::once(format!("{command}.json")).chain(artifacts.iter().map(|s| s.to_string())) {
            let x = std::fs::read(a.join(&name)).unwrap();
            let y = std::fs::read(b.join(&name)).unwrap();
            assert!(x == y, "{name} differs between runs");
        }
    }
}

#[test]
fn artifact_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["julia", "--b=-2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let pgm = std::fs::read_to_string(dir.path().join("julia.pgm")).unwrap();
    let mut lines = pgm.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("160 160"));
    assert_eq!(lines.next(), Some("201"));
    assert_eq!(lines.count(), 160);
    let csv = std::fs::read_to_string(dir.path().join("julia.csv")).unwrap();
    assert!(csv.starts_with("x,y,escape_time\n"));
    assert_eq!(csv.lines().count(), 1 + 160 * 160);

    let o = run_in(dir.path(), &["external", "--b=-1.5"]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "external");
    assert_eq!(r["payload"]["winding"], 2);
    assert!(r["payload"]["max_deviation"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("external.csv")).unwrap();
    assert_eq!(csv.lines().count(), 257);

    let o = run_in(dir.path(), &["external", "--b=-2.5"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn combinatorics_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["combinatorics", "--word", "M2^2 M3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(dir.path(), "combinatorics");
    let letters = r["payload"]["letters"].as_array().unwrap();
    assert_eq!(letters.len(), 3);
    assert!(letters.iter().all(|l| l["primitive"] == true));
    let product = Combinatorics::parse(r["payload"]["product"].as_str().unwrap()).unwrap();
    assert_eq!(product.m(), 12);
}
