use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn radnls(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radnls"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RADNLS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn significant_digits(field: &str) -> usize {
    let mantissa = field.split('e').next().unwrap();
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

#[test]
fn exponent_report_for_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["exponents", "--n", "3", "--p", "11/5"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("exponents.txt")).unwrap();
    // s0 = 2/(p-1) - n/2 = 5/3 - 3/2
    assert!(text.contains("s0=1/6 (0.166666667)"));
    assert!(text.contains("q0=132/47 (2.80851064)"));
    assert!(!text.contains("FAILS"));
    let rec = json(&dir.path().join("exponents.json"));
    assert_eq!(rec["exponents"]["s0"]["exact"]["num"], 1);
    assert_eq!(rec["exponents"]["s0"]["exact"]["den"], 6);
    assert_eq!(rec["exponents"]["p"]["exact"]["num"], 11);
    assert_eq!(rec["facts"].as_array().unwrap().len(), 18);
    assert!(text.lines().all(|l| l.contains('=')));
}

#[test]
fn two_dimensions_rejected_with_named_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["exponents", "--n", "2", "--p", "5/2"]);
    assert_eq!(code(&o), 1);
    let text = fs::read_to_string(dir.path().join("exponents.txt")).unwrap();
    assert!(text.contains("status=rejected"));
    assert!(text.contains("window_inequality="));
    assert!(text.contains("FAILS"));
}

#[test]
fn boundary_power_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["exponents", "--n", "3", "--p", "2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("status=rejected"));
}

#[test]
fn empty_family_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[sweep]\nfamilies = []\n").unwrap();
    let o = radnls(dir.path(), &["strichartz-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("families is empty"));
    assert!(!dir.path().join("sweep.csv").exists());
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[solve.solver]\nstep = 0.1\n").unwrap();
    assert_eq!(code(&radnls(dir.path(), &["solve", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&radnls(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&radnls(dir.path(), &["solve", "--tol", "tiny"])), 2);
}

#[test]
fn admissible_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["strichartz-sweep"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "family,param1,param2,mu,q,alpha,s,ratio,tail_bound,verdict");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 10 && r[9] != "fail"));
    for fam in ["gaussian", "bump", "oscillatory-chirp", "annulus"] {
        assert_eq!(rows.iter().filter(|r| r[0] == fam && r[4] != "inf").count() % 5, 0);
        assert!(rows.iter().any(|r| r[0] == fam));
    }
    assert!(rows.iter().any(|r| r[0] == "kernel" && r[9] == "expected-fail"));
    assert!(rows.iter().any(|r| r[4] == "inf"));
    for r in &rows {
        for field in &r[1..9] {
            if let Ok(v) = field.parse::<f64>() {
                if v.is_finite() {
                    assert!(significant_digits(field) <= 9, "{field}");
                }
            }
        }
    }
}

#[test]
fn perturbed_alpha_gives_expected_fail_slope_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(
        dir.path(),
        &["strichartz-sweep", "--alpha-shift", "1/5", "--family", "gaussian", "--no-pointwise", "--no-kernel"],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let slope: Vec<&str> = csv.lines().find(|l| l.contains(",slope,")).unwrap().split(',').collect();
    assert_eq!(slope[9], "expected-fail");
    let fitted: f64 = slope[7].parse().unwrap();
    assert!((fitted - 0.2).abs() < 0.02, "slope {fitted}");
}

#[test]
fn duhamel_check_passes_and_zero_forcing_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["duhamel-check", "--no-refine"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let zero = tempfile::tempdir().unwrap();
    let o = radnls(zero.path(), &["duhamel-check", "--no-refine", "--amplitude", "0"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(zero.path().join("duhamel.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(7) == Some("0")));
}

#[test]
fn zero_data_solve_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["solve", "--data-norm", "0", "-T", "1", "--no-doubling"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let d = json(&dir.path().join("diagnostics.json"));
    assert_eq!(d["converged"], true);
    assert_eq!(d["iterations"], 1);
    assert!(d["global_bound"]["constant"].is_null());
    let ts = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert!(ts.lines().skip(1).all(|l| l.ends_with(",0,0")));
}

#[test]
fn small_data_solve_converges_with_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["solve"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let d = json(&dir.path().join("diagnostics.json"));
    assert_eq!(d["status"], "ok");
    assert!(d["iterations"].as_u64().unwrap() <= 10);
    assert!(d["max_contraction_ratio"].as_f64().unwrap() < 0.5);
    assert!(d["horizon_doubling"]["relative_change"].as_f64().unwrap() < 0.05);
    assert!(d["splitting"]["relative_l2"].as_f64().unwrap() < 1e-3);
    let m = json(&dir.path().join("solve_manifest.json"));
    for key in ["delta", "horizon", "max_iter", "tol", "time_step", "nodes", "radius"] {
        assert!(!m["config"]["solve"]["solver"][key].is_null(), "{key}");
    }
    assert!(m["config"]["output_dir"].is_null());
    assert_eq!(m["grid"]["nodes"], 1024);
    let report = radnls(dir.path(), &["report", dir.path().to_str().unwrap()]);
    assert_eq!(code(&report), 0);
    assert!(stdout(&report).contains("solve.converged=true"));
}

#[test]
fn outputs_identical_across_thread_counts() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, threads) in dirs.iter().zip(["1", "4", "8"]) {
        let o = radnls(dir.path(), &["solve", "--threads", threads, "--no-doubling"]);
        assert_eq!(code(&o), 0);
    }
    for name in ["timeseries.csv", "diagnostics.json", "solve_manifest.json"] {
        let first = fs::read(dirs[0].path().join(name)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(first, fs::read(d.path().join(name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn focusing_data_far_above_working_delta_do_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[solve]\nbisect = true\nbisect_steps = 2\nsplitting_check = false\ndoubling_check = false\n")
        .unwrap();
    let o = radnls(dir.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let delta_star = json(&dir.path().join("diagnostics.json"))["delta_star"].as_f64().unwrap();
    assert!(delta_star > 0.01);
    let big = format!("{}", 100.0 * delta_star);
    let o = radnls(dir.path(), &["solve", "--lambda=-1", "--delta", &big, "--no-splitting", "--no-doubling"]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    let d = json(&dir.path().join("diagnostics.json"));
    assert_eq!(d["status"], "non-convergence");
    assert_eq!(d["converged"], false);
}

#[test]
fn env_var_sets_output_dir_and_flag_wins() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let run = |extra: Option<&Path>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_radnls"));
        c.arg("exponents").env("RADNLS_OUT_DIR", env_dir.path());
        if let Some(p) = extra {
            c.arg("--out").arg(p);
        }
        c.output().unwrap()
    };
    assert_eq!(code(&run(None)), 0);
    assert!(env_dir.path().join("exponents.txt").exists());
    assert_eq!(code(&run(Some(flag_dir.path()))), 0);
    assert!(flag_dir.path().join("exponents.txt").exists());
}

#[test]
fn report_on_empty_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = radnls(dir.path(), &["report", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}
