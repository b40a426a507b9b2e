use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chirpest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chirpest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn synth_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    let out = chirpest(&[
        "synth",
        "--model",
        "model1",
        "--n",
        "250",
        "--alpha",
        "1.5",
        "--sigma",
        "0.1",
        "--seed",
        "7",
        "--out",
        path(&y),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&y).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,y"));
    assert_eq!(lines.count(), 250);
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = chirpest(&["synth", "--n", "100", "--seed", "3", "--out", path(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn estimate_blind_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    chirpest(&["synth", "--n", "250", "--seed", "7", "--out", path(&y)]);
    let out = chirpest(&[
        "estimate",
        "--in",
        path(&y),
        "--method",
        "alse",
        "--components",
        "1",
        "--init",
        "blind",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "ALSE");
    let c = &v["components"][0];
    for key in ["A", "B", "theta1", "theta2"] {
        assert!(c[key].is_f64(), "{key}");
    }
    assert!(v["objective"].is_f64());
    assert_eq!(v["diagnostics"]["init_mode"], "blind");
    assert!((c["theta1"].as_f64().unwrap() - 1.5).abs() < 0.02);
}

#[test]
fn noiseless_pipeline_recovers_the_model() {
    let dir = tempfile::tempdir().unwrap();
    for (model, p) in [("model1", "1"), ("model2", "2")] {
        let y = dir.path().join(format!("{model}.csv"));
        let out = chirpest(&[
            "synth",
            "--model",
            model,
            "--n",
            "250",
            "--sigma",
            "0",
            "--out",
            path(&y),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let out = chirpest(&[
            "estimate",
            "--in",
            path(&y),
            "--method",
            "lse",
            "--components",
            p,
            "--init",
            "window",
            "--model",
            model,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let truth = chirpest::ChirpModel::preset(model).unwrap();
        for (c, t) in v["components"]
            .as_array()
            .unwrap()
            .iter()
            .zip(truth.components())
        {
            assert!(
                (c["theta1"].as_f64().unwrap() - t.theta1).abs() < 1e-6,
                "{c}"
            );
            assert!(
                (c["theta2"].as_f64().unwrap() - t.theta2).abs() < 1e-6,
                "{c}"
            );
        }
    }
}

#[test]
fn explicit_window_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    chirpest(&["synth", "--n", "200", "--sigma", "0", "--out", path(&y)]);
    let out = chirpest(&[
        "estimate",
        "--in",
        path(&y),
        "--init",
        "window:1.501,0.10001",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["components"][0]["theta1"].as_f64().unwrap() - 1.5).abs() < 1e-6);
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = chirpest(&["experiment", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("error: usage: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = chirpest(&["synth", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    let out = chirpest(&["synth", "--n", "100", "--alpha", "0.5", "--out", path(&y)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error: invalid-parameter: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[model]\npreset = \"model1\"\n[experiment]\nalphas = [3.0]\nsigmas = [0.1]\nns = [100]\nmethods = [\"lse\"]\n").unwrap();
    let out = chirpest(&["experiment", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: config: "));
}

#[test]
fn experiment_and_rates_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "[model]\npreset = \"model1\"\n[experiment]\nalphas = [1.9]\nsigmas = [0.1]\nns = [100, 200]\nreplications = 20\nmethods = [\"lse\"]\nmaster_seed = 5\n",
    )
    .unwrap();
    let summary = dir.path().join("summary.csv");
    let raw = dir.path().join("raw.csv");
    let again = dir.path().join("again.csv");
    let out = chirpest(&[
        "experiment",
        "--config",
        path(&cfg),
        "--out",
        path(&summary),
        "--raw",
        path(&raw),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = chirpest(&[
        "--threads",
        "1",
        "experiment",
        "--config",
        path(&cfg),
        "--out",
        path(&again),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        std::fs::read(&summary).unwrap(),
        std::fs::read(&again).unwrap()
    );

    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.starts_with("method,alpha,sigma,n,parameter,ave,mad,failures\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert_eq!(
        std::fs::read_to_string(&raw).unwrap().lines().count(),
        1 + 2 * 20
    );

    let out = chirpest(&["rates", "--table", path(&summary)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rates = String::from_utf8(out.stdout).unwrap();
    assert!(rates.starts_with("method,alpha,sigma,parameter,slope\n"));
    assert_eq!(rates.lines().count(), 1 + 4);
}

#[test]
fn validate_noise_prints_cf_table() {
    let out = chirpest(&[
        "validate-noise",
        "--alpha",
        "1.7",
        "--sigma",
        "1",
        "--n",
        "100000",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("t,empirical_re,empirical_im,theoretical,abs_error")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r[4] < 0.05, "{r:?}");
    }
}

#[test]
fn asymptotics_reports_gamma_and_cf() {
    let out = chirpest(&[
        "asymptotics",
        "--model",
        "model1",
        "--alpha",
        "1.5",
        "--sigma",
        "0.1",
        "--n-approx",
        "10000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = &v["components"][0]["gamma"];
    assert_eq!(g[0][0].as_f64(), Some(1.0));
    assert!((g[3][2].as_f64().unwrap() - 3.125).abs() < 1e-12);
    assert!((g[2][2].as_f64().unwrap() - 12.5 / 3.0).abs() < 1e-12);
    assert_eq!(v["cf_points"].as_array().unwrap().len(), 4);
    for p in v["cf_points"].as_array().unwrap() {
        let cf = p["limiting_cf"].as_f64().unwrap();
        assert!(cf > 0.0 && cf < 1.0);
    }
    assert_eq!(v["d2"].as_array().unwrap().len(), 4);
}
