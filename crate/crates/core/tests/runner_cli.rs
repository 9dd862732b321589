use ins_align::config::ExperimentConfig;
use ins_align::runner::{export_run, monte_carlo, run_experiment, Experiment};
use ins_align::shipped;
use std::fs;
use std::process::Command;

const SHORT_STATIC: &str = r#"
name = "short_static"
observers = ["ekf"]
seed = 3
[scenario]
duration_s = 60
[scenario.noise]
gyro_arw_deg_sqrt_h = 0.001
accel_ug_sqrt_hz = 10
seed = 11
[monte_carlo]
runs = 1
base_seed = 3
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ins-align"))
}

#[test]
fn exports_are_byte_identical_across_runs() {
    let cfg = ExperimentConfig::from_toml(SHORT_STATIC, "x").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    export_run(&cfg, &run_experiment(&cfg).unwrap(), &a).unwrap();
    export_run(&cfg, &run_experiment(&cfg).unwrap(), &b).unwrap();
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "summary.json"));
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn single_monte_carlo_run_matches_a_plain_run() {
    let cfg = ExperimentConfig::from_toml(SHORT_STATIC, "x").unwrap();
    let report = monte_carlo(&cfg).unwrap();
    assert_eq!(report.runs, 1);
    let single = report.per_run[0].result.clone().unwrap();
    let plain = run_experiment(&cfg).unwrap().ekf.unwrap();
    assert_eq!(serde_json::to_string(&single).unwrap(), serde_json::to_string(&plain).unwrap());
}

#[test]
fn filter_runs_differ_only_by_seed() {
    let cfg = ExperimentConfig::from_toml(SHORT_STATIC, "x").unwrap();
    let exp = Experiment::new(&cfg).unwrap();
    let (a, _) = exp.ekf(5).unwrap();
    let (b, _) = exp.ekf(5).unwrap();
    let (c, _) = exp.ekf(6).unwrap();
    assert_eq!(a.final_bg_deg_h, b.final_bg_deg_h);
    assert_ne!(a.final_bg_deg_h, c.final_bg_deg_h);
}

#[test]
fn cli_run_writes_into_the_override_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.toml");
    fs::write(&path, SHORT_STATIC).unwrap();
    let out = bin().arg("run").arg(&path).env("INS_ALIGN_OUTPUT_DIR", dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("short_static/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["name"], "short_static");
    assert!(summary.get("wall_time_s").is_none());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |body: &str| {
        let path = dir.path().join("c.toml");
        fs::write(&path, body).unwrap();
        bin().arg("run").arg(&path).env("INS_ALIGN_OUTPUT_DIR", dir.path()).output().unwrap()
    };

    let missing = bin().args(["run", "/nonexistent/x.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));

    let unknown = run("observers = [\"ekf\"]\nbogus = 1\n");
    assert_eq!(unknown.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&unknown.stderr);
    assert!(stderr.contains("bogus"), "{stderr}");
    assert!(stderr.contains("\"error\":\"config\""), "{stderr}");

    // the varying-rate observer cannot see a vertical rotation
    let vertical = run(r#"
observers = ["ideal_nfvr"]
[scenario]
duration_s = 300
[[scenario.segments]]
kind = "varying_rotation"
axis = [0, 1, 0]
bias_deg_s = 10
amplitude_deg_s = 5
angular_frequency_rad_s = 0.2
start_s = 100
end_s = 200
"#);
    assert_eq!(vertical.status.code(), Some(3), "{}", String::from_utf8_lossy(&vertical.stderr));
}

#[test]
fn cli_lists_every_shipped_scenario() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for (name, _) in shipped::CONFIGS {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn cli_dumps_a_segment_with_derivatives() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("seg.csv");
    let out = bin().args(["dump-imu", "updown_600s", "--segment", "0", "--out"]).arg(&out_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.split(',').count() > 7, "{header}");
    assert!(text.lines().count() > 1000);
}
