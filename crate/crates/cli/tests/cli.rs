use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

/// Monte Carlo settings small enough for a test run.
const TINY_MC: &str = r#"{
  "mc_window_m": 1200.0,
  "mc_boundary": "torus",
  "mc_topologies": 4,
  "mc_fading_draws": 3,
  "mc_per_case_cap": 10,
  "ctmc_replications": 3
}"#;

fn cachenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cachenet")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = cachenet(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn same_seed_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_MC);
    let outputs: Vec<Vec<u8>> = [("a", false), ("b", false), ("c", true)]
        .iter()
        .map(|&(sub, sequential)| {
            let out = dir.path().join(sub);
            let mut args = vec!["rate", "--alpha", "0.1,0.3", "--with-mc", "--mc-alpha", "0.1,0.3"];
            args.extend(["--config", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]);
            if sequential {
                args.push("--sequential");
            }
            run_ok(&args);
            std::fs::read(out.join("rate.csv")).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2], "sequential and parallel runs differ");
    assert!(!outputs[0].contains(&b'\r'));

    let other = dir.path().join("d");
    run_ok(&[
        "rate",
        "--alpha",
        "0.1",
        "--with-mc",
        "--mc-alpha",
        "0.1",
        "--config",
        &cfg,
        "--seed",
        "8",
        "--out",
        other.to_str().unwrap(),
    ]);
    let (_, rows) = csv_rows(&other.join("rate.csv"));
    let (_, first) = csv_rows(&dir.path().join("a/rate.csv"));
    let mc = |rows: &[Vec<String>]| {
        rows.iter().filter(|r| r[3] == "mc" && r[0] == "0.1").map(|r| r[4].clone()).collect::<Vec<_>>()
    };
    assert_ne!(mc(&rows), mc(&first), "a different seed must change the MC rows");
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_MC);
    let first = dir.path().join("first");
    run_ok(&["simulate", "--config", &cfg, "--seed", "3", "--out", first.to_str().unwrap()]);
    let echo = read_json(&first.join("simulate.json"))["config"].clone();
    let echo_path = dir.path().join("echo.json");
    std::fs::write(&echo_path, serde_json::to_string(&echo).unwrap()).unwrap();
    let second = dir.path().join("second");
    run_ok(&["simulate", "--config", echo_path.to_str().unwrap(), "--seed", "3", "--out", second.to_str().unwrap()]);
    assert_eq!(std::fs::read(first.join("simulate.csv")).unwrap(), std::fs::read(second.join("simulate.csv")).unwrap());
}

#[test]
fn empty_result_gives_header_only_csv_and_valid_envelope() {
    let dir = tempfile::tempdir().unwrap();
    // a horizon shorter than one slot records no slot
    let cfg = write_config(dir.path(), r#"{"ctmc_horizon_s": 0.1, "ctmc_replications": 0}"#);
    let out = dir.path().join("out");
    run_ok(&["queue", "--trace", "relay", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("queue.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("slot,time_s,total,case1_free,") && text.ends_with('\n'));
    let json = read_json(&out.join("queue.json"));
    assert_eq!(json["rows"], Value::Array(vec![]));
    assert_eq!(json["columns"].as_array().unwrap().len(), 11);
}

#[test]
fn json_envelope_round_trips_and_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_MC);
    let out = dir.path().join("out");
    run_ok(&[
        "association",
        "--gamma",
        "0,1.5",
        "--with-mc",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out.join("association.json")).unwrap();
    let json: Value = serde_json::from_str(&text).unwrap();
    let reparsed: Value = serde_json::from_str(&serde_json::to_string(&json).unwrap()).unwrap();
    assert_eq!(reparsed, json);

    for key in [
        "tool",
        "version",
        "command",
        "preset",
        "arguments",
        "seed",
        "wall_clock_s",
        "config",
        "summary",
        "columns",
        "rows",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["seed"], 5);
    assert_eq!(json["command"], "association");
    assert!(json["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));

    let (header, rows) = csv_rows(&out.join("association.csv"));
    let columns: Vec<String> =
        json["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
    assert_eq!(header, columns);
    let json_rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), json_rows.len());
    for (csv_row, json_row) in rows.iter().zip(json_rows) {
        for (c, j) in csv_row.iter().zip(json_row.as_array().unwrap()) {
            match j {
                Value::Number(n) => assert_eq!(c.parse::<f64>().unwrap(), n.as_f64().unwrap()),
                Value::String(s) => assert_eq!(c, s),
                Value::Null => assert!(c.is_empty()),
                other => assert_eq!(c, &other.to_string()),
            }
        }
    }
}

#[test]
fn analytic_rows_have_zero_se_and_mc_rows_positive_se() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_MC);
    let out = dir.path().join("out");
    run_ok(&[
        "outage",
        "--alpha",
        "0.1",
        "--tau-db",
        "-10,-5",
        "--with-mc",
        "--mc-alpha",
        "0.1",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = csv_rows(&out.join("outage.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (source, se, value) = (col("source"), col("se"), col("probability"));
    let mut seen = (0, 0);
    for r in &rows {
        let p: f64 = r[value].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
        let se: f64 = r[se].parse().unwrap();
        match r[source].as_str() {
            "analytic" => {
                assert_eq!(se, 0.0);
                seen.0 += 1;
            }
            "mc" => {
                assert!(se > 0.0, "{r:?}");
                seen.1 += 1;
            }
            s => panic!("unexpected source {s}"),
        }
    }
    assert_eq!(seen.0, 14);
    assert!(seen.1 >= 14);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"alpah": 0.2}"#);
    let out = cachenet(&["d2d-density", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpah"));
    assert!(!dir.path().join("d2d-density.csv").exists());

    let cfg = write_config(dir.path(), r#"{"lambda2_per_m2": 1.0}"#);
    let out = cachenet(&["d2d-density", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn usage_errors_exit_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["--out", d],
        vec!["rate", "--alpha", "0.1,0.1", "--out", d],
        vec!["rate", "--alpha", "0:1:-0.1", "--out", d],
        vec!["--preset", "fig2", "rate", "--out", d],
        vec!["--preset", "fig9", "--out", d],
        vec!["sweep", "--var", "alpha", "--grid", "0.3,0.2,0.25", "--metric", "rate", "--out", d],
    ] {
        let out = cachenet(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = cachenet(&["sweep", "--var", "no_such_key", "--grid", "1,2", "--metric", "rate", "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
}

#[test]
fn sweep_prefixes_the_variable_and_uses_per_point_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_MC);
    let out = dir.path().join("out");
    run_ok(&[
        "sweep",
        "--var",
        "gamma",
        "--grid",
        "0.4:1.2:0.4",
        "--metric",
        "association",
        "--with-mc",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = csv_rows(&out.join("sweep.csv"));
    assert_eq!(header[0], "gamma");
    let gammas: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert!(gammas.contains(&"0.4") && gammas.contains(&"0.8") && gammas.contains(&"1.2"));
    assert!(rows.iter().all(|r| r[0] == r[1]), "the swept key is applied to the config");

    // each point equals a single run with the derived seed; point 0 of seed 1
    let json = read_json(&out.join("sweep.json"));
    assert_eq!(json["command"], "sweep");
    let single = dir.path().join("single");
    let seeded = |gamma: &str, seed: &str| {
        run_ok(&[
            "association",
            "--gamma",
            gamma,
            "--with-mc",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out",
            single.to_str().unwrap(),
        ]);
        csv_rows(&single.join("association.csv")).1
    };
    let point0: Vec<Vec<String>> = rows.iter().filter(|r| r[0] == "0.4").map(|r| r[1..].to_vec()).collect();
    let plain = seeded("0.4", "1");
    assert_eq!(
        point0.iter().filter(|r| r[2] == "analytic").collect::<Vec<_>>(),
        plain.iter().filter(|r| r[2] == "analytic").collect::<Vec<_>>()
    );
    assert_ne!(point0, plain, "sweep points draw from derived seeds, not the master seed");
}

#[test]
fn fig3a_preset_marks_the_critical_caching_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_MC);
    let out = dir.path().join("out");
    run_ok(&["--preset", "fig3a", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let json = read_json(&out.join("fig3a.json"));
    assert_eq!(json["preset"], "fig3a");
    assert_eq!(json["config"]["p1_dbm"], 23.0);
    let s = &json["summary"];
    assert!((s["alpha_star"].as_f64().unwrap() - 0.1378).abs() < 5e-5);
    assert!((s["alpha_hat"].as_f64().unwrap() - 0.2196).abs() < 5e-5);
    let (header, rows) = csv_rows(&out.join("fig3a.csv"));
    let active = header.iter().position(|h| h == "active_d2d_per_disk").unwrap();
    let alphas: std::collections::BTreeSet<&str> =
        rows.iter().filter(|r| r[3] == "analytic").map(|r| r[0].as_str()).collect();
    assert_eq!(alphas.len(), 61);
    // below alpha* every cache-enabled user transmits: 300 * alpha per disk
    let at = rows.iter().find(|r| r[0] == "0.1").unwrap();
    assert!((at[active].parse::<f64>().unwrap() - 30.0).abs() < 1e-9);
}

#[test]
fn steady_preset_reports_gains_next_to_targets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(&["--preset", "steady", "--out", out.to_str().unwrap()]);
    let s = read_json(&out.join("steady.json"))["summary"].clone();
    assert_eq!(s["target_throughput_gain[gamma=0.8]"], 0.133);
    assert_eq!(s["target_throughput_gain[gamma=1.8]"], 0.573);
    let (g08, g18) =
        (s["throughput_gain[gamma=0.8]"].as_f64().unwrap(), s["throughput_gain[gamma=1.8]"].as_f64().unwrap());
    assert!(g08 > 0.0 && g18 > g08);
    assert!((s["varsigma_star_cached[gamma=0.8]"].as_f64().unwrap() - 1.1601).abs() < 1e-3);
}

#[test]
fn fig7_preset_traces_five_hundred_slots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(&["--preset", "fig7", "--out", out.to_str().unwrap()]);
    let (header, rows) = csv_rows(&out.join("fig7.csv"));
    assert_eq!(rows.len(), 500);
    assert_eq!(&header[..3], ["slot", "time_s", "total"]);
    for r in &rows {
        let classes: i64 = r[3..].iter().map(|x| x.parse::<i64>().unwrap()).sum();
        assert_eq!(classes, r[2].parse::<i64>().unwrap());
    }
    let s = read_json(&out.join("fig7.json"))["summary"].clone();
    assert!(s["analytic_mean_requests"].as_f64().unwrap() > 0.0);
    assert!(s["replicated_slot_mean_se"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_writes_raw_samples_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_MC);
    let out = dir.path().join("out");
    run_ok(&["simulate", "--samples", "--alpha", "0.2", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let (header, rows) = csv_rows(&out.join("simulate_samples.csv"));
    assert_eq!(header, ["case", "server", "sinr_db", "rate_nats"]);
    assert!(!rows.is_empty());
    for r in &rows {
        let (db, rate): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((rate - (1.0 + 10f64.powf(db / 10.0)).ln()).abs() < 1e-9 * rate.max(1.0));
    }
    let (header, rows) = csv_rows(&out.join("simulate.csv"));
    let q = header.iter().position(|h| h == "quantity").unwrap();
    assert!(rows.iter().any(|r| r[q] == "rate") && rows.iter().any(|r| r[q] == "association"));
}
