use std::path::Path;
use std::process::Command;

use covenant_core::statics::closed_form_threshold_uniform;
use covenant_core::{ModelParams, ParamName};
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["covenant"];
    argv.extend_from_slice(args);
    let code = covenant_cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_benchmark() {
    let r = run(&["solve"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    let eq = &v["equilibrium"];
    assert!((eq["x_star"].as_f64().unwrap() + 0.255306).abs() < 1e-5);
    assert_eq!(eq["d1"].as_f64().unwrap(), 4.4);
    assert_eq!(eq["corner"], "interior");
    let effort = &v["effort"];
    assert!(effort["p_star"].as_f64().unwrap() > effort["p_fb"].as_f64().unwrap());
    assert!(v["effort_error"].is_null());
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["params", "density", "equilibrium", "effort", "effort_error"]
    );
}

#[test]
fn check_names_the_failed_assumption() {
    let r = run(&["check", "--set", "private_benefit=2.0"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("Assumption 1"), "{}", r.stderr);
    let v = json(&r);
    let failed: Vec<&str> = v["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"assumption1.l_b_positive"));
    assert_eq!(run(&["check"]).code, 0);
}

#[test]
fn solve_refuses_invalid_params() {
    let r = run(&["solve", "--set", "setup_cost=1.5"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("assumption2"));
    assert!(r.stdout.is_empty());
}

#[test]
fn statics_small_kappa_matches() {
    let r = run(&["statics", "--set", "kappa=0.01"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["passed"], true);
    let uniform = v["tables"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["target"] == "x_star_uniform")
        .unwrap();
    let signs: Vec<&str> = uniform["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["observed"].as_str().unwrap())
        .collect();
    assert_eq!(signs, ["-", "+", "-", "+", "-", "-", "-"]);
}

#[test]
fn statics_refuses_large_kappa() {
    let r = run(&["statics", "--set", "kappa=0.3"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("kappa"));
}

#[test]
fn effort_failure_exits_two_with_partial_output() {
    let r = run(&["solve", "--set", "cost_scale=0.01"]);
    assert_eq!(r.code, 2);
    let v = json(&r);
    assert!(v["effort"].is_null());
    assert!(v["effort_error"]
        .as_str()
        .unwrap()
        .contains("no interior crossing"));
    assert!(v["equilibrium"]["x_star"].is_number());
}

#[test]
fn malformed_config_is_line_anchored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "tau = 0.5\n# note\nkapa = 0.1\n");
    let r = run(&["solve", &cfg]);
    assert_eq!(r.code, 1);
    assert!(
        r.stderr.contains(&format!("{cfg}:3: unknown key `kapa`")),
        "{}",
        r.stderr
    );
    let r = run(&["solve", "--set", "tau=abc"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("--set:1:"));
    let r = run(&["solve", "/nonexistent/run.cfg"]);
    assert_eq!(r.code, 1);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run(&["bogus"]).code, 1);
    assert_eq!(run(&["--workers", "0", "solve"]).code, 1);
    let help = run(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("sweep"));
}

#[test]
fn csv_only_for_sweep() {
    let r = run(&["solve", "--set", "output.format=csv"]);
    assert_eq!(r.code, 1);
    assert!(run(&["sweep"]).stderr.contains("sweep."));
}

#[test]
fn sweep_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.cfg",
        "sweep.tau = 0.1, 0.9, 3\nsweep.private_benefit = 1.1, 2.0, 2\nsweep.kappa = 0.05, 0.5, 2\n",
    );
    let r = run(&["sweep", &cfg]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let golden = include_str!("golden/sweep.csv");
    assert_eq!(r.stdout, golden);

    // Every solved row agrees with the closed-form threshold; invalid rows
    // are kept with a status.
    let mut reader = csv::Reader::from_reader(golden.as_bytes());
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mut invalid = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let mut p = ModelParams::benchmark();
        for name in ParamName::ALL {
            p.set(name, rec[col(name.as_str())].parse().unwrap());
        }
        if rec[col("status")].starts_with("invalid:") {
            invalid += 1;
            assert!(rec[col("x_star")].is_empty());
            continue;
        }
        let x: f64 = rec[col("x_star")].parse().unwrap();
        assert!((x - closed_form_threshold_uniform(&p).unwrap()).abs() < 1e-11);
    }
    assert_eq!(invalid, 6);
}

#[test]
fn sweep_json_rows() {
    let r = run(&[
        "sweep",
        "--set",
        "sweep.tau=0.2, 0.4, 2",
        "--set",
        "output.format=json",
    ]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["rows"][1]["params"]["tau"], 0.4);
}

#[test]
fn output_path_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.json");
    let r = run(&["solve", "--set", &format!("output.path={}", out.display())]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["equilibrium"]["d1"], 4.4);
}

#[test]
fn solve_output_feeds_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let solved = run(&["solve"]);
    let eq_path = write(dir.path(), "solve.json", &solved.stdout);
    let r = run(&[
        "simulate",
        "--equilibrium",
        &eq_path,
        "--set",
        "simulate.n=400000",
        "--set",
        "simulate.seed=5",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    let report = &v["report"];
    let k = v["analytic"]["setup_cost"].as_f64().unwrap();
    for key in ["lender_mean_nondisclosure", "lender_mean_disclosure"] {
        let e = &report[key];
        let z = (e["mean"].as_f64().unwrap() - k).abs() / e["std_error"].as_f64().unwrap();
        assert!(z <= 3.0, "{key}: z = {z}");
    }
    let m = &report["manager_mean"];
    let z = (m["mean"].as_f64().unwrap() - v["analytic"]["manager_mean"].as_f64().unwrap()).abs()
        / m["std_error"].as_f64().unwrap();
    assert!(z <= 3.0);

    let other = run(&["simulate", "--equilibrium", &eq_path, "--set", "tau=0.3"]);
    assert_eq!(other.code, 1);
    assert!(other.stderr.contains("different parameters"));
}

#[test]
fn binary_output_is_identical_across_workers() {
    let bin = env!("CARGO_BIN_EXE_covenant");
    let go = |workers: &str| {
        let out = Command::new(bin)
            .args([
                "--workers",
                workers,
                "simulate",
                "--set",
                "simulate.n=50000",
                "--set",
                "simulate.seed=3",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(go("1"), go("4"));
    let status = Command::new(bin)
        .args(["check", "--set", "private_benefit=2.0"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(1));
}
