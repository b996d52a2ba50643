use std::path::Path;
use std::process::{Command, Output};

fn wsfbm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsfbm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WSFBM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn kernel_eval_prints_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = wsfbm(&["kernel-eval", "--a", "0", "--b", "0.5", "--s", "1", "--t", "1"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "0.781049");
    let o = wsfbm(&["kernel-eval", "--a", "0", "--b", "0.5", "--s", "1", "--t", "1", "--digits", "9"], dir.path());
    assert_eq!(stdout(&o).trim(), "0.781048584");
}

#[test]
fn invalid_parameters_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = wsfbm(&["kernel-eval", "--a", "-2", "--b", "0.5", "--s", "1", "--t", "1"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
    assert_eq!(code(&wsfbm(&["no-such-command"], dir.path())), 1);
    assert_eq!(code(&wsfbm(&["verify-all", "--level", "full", "--replicates", "0"], dir.path())), 1);
    assert_eq!(code(&wsfbm(&["--threads", "0", "pd-scan"], dir.path())), 1);
}

#[test]
fn missed_limit_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["rescale-limit", "--a", "1", "--b", "0.5", "--s", "1", "--t", "1"];
    assert_eq!(code(&wsfbm(&args, dir.path())), 0);
    let mut strict = args.to_vec();
    strict.extend(["--tolerance", "1e-9"]);
    assert_eq!(code(&wsfbm(&strict, dir.path())), 2);
}

#[test]
fn failed_criterion_exits_with_acceptance_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = wsfbm(&["verify-all", "--level", "full", "--only", "7", "--replicates", "2"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("FAIL criterion 7"));
    assert!(dir.path().join("verify_report.json").exists());
}

#[test]
fn pd_scan_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = wsfbm(&["pd-scan", "--a-values", "0,1", "--b-values", "0.5,5"], dir.path());
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("a,b,region,min_eig,verdict"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().any(|r| r.starts_with("0,0.5,") && r.ends_with("ConsistentPSD")));
    assert!(rows.iter().any(|r| r.starts_with("0,5,") && r.ends_with("ViolationFound")));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "pd-scan");
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn sampling_is_reproducible_and_thread_independent() {
    let runs: Vec<_> = [("1", "7"), ("1", "7"), ("4", "7"), ("1", "8")]
        .iter()
        .map(|(threads, seed)| {
            let dir = tempfile::tempdir().unwrap();
            let o = wsfbm(
                &["sample", "--a", "0.5", "--b", "1.5", "--paths", "50", "--seed", seed, "--threads", threads],
                dir.path(),
            );
            assert_eq!(code(&o), 0);
            std::fs::read(dir.path().join("paths.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_ne!(runs[0], runs[3]);
}

#[test]
fn simulate_from_config_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    std::fs::write(
        &config,
        r#"{"system": {"horizon": 1.0, "box_halfwidth": 5.0, "seed": 7}, "times": [0.5, 1.0], "replicates": 4}"#,
    )
    .unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("out{threads}"));
        let o = wsfbm(&["--config", config.to_str().unwrap(), "--threads", threads, "simulate"], &out);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out.join("replicates.csv")).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert!(one.starts_with("replicate_id,t,functional,value\n"));
    assert_eq!(one.lines().count(), 1 + 4 * 2 * 2);
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"replicates": 4, "horizon": 3.0}"#).unwrap();
    let o = wsfbm(&["--config", config.to_str().unwrap(), "simulate"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn family_fluctuations_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fl.json");
    std::fs::write(
        &config,
        r#"{"system": {"dimension": 1, "alpha": 0.75, "seed": 3, "occupation_dt": 0.1},
            "time_scale": 2.0, "replicates": 200, "method": "families"}"#,
    )
    .unwrap();
    let o = wsfbm(&["--config", config.to_str().unwrap(), "fluctuations"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("family_moments.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}
