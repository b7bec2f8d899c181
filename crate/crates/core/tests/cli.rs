use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_backaction-sim"));
    cmd.env_remove("BACKACTION_SIM_THREADS").env("RUST_LOG", "warn");
    cmd
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = bin().arg("--out").arg(dir).args(args).output().unwrap();
    out.status.code().unwrap_or(-1)
}

/// File contents without `# timestamp=` lines.
fn stable(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# timestamp="))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn params_with_empty_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("empty.cfg");
    fs::write(&cfg, "").unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&out, &["--config", cfg.to_str().unwrap(), "params"]), 0);
    let text = fs::read_to_string(out.join("params.csv")).unwrap();
    assert!(text.contains("# command=params"));
    assert!(text.contains("# seed=0"));
    let c_line = text.lines().find(|l| l.starts_with("cooperativity_C,")).unwrap();
    let c: f64 = c_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((c - 52.4).abs() < 0.05, "{c}");
    assert!(out.join("manifest.csv").exists());
}

#[test]
fn missing_config_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let code = run(&out, &["--config", tmp.path().join("nope.cfg").to_str().unwrap(), "params"]);
    assert_eq!(code, 1);
    assert!(!out.exists());
}

#[test]
fn unknown_key_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "kappa_hz = 1.2e6\nnot_a_key = 3\n").unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&out, &["--config", cfg.to_str().unwrap(), "spectrum"]), 1);
    assert!(!out.exists());
}

#[test]
fn reruns_are_byte_identical_apart_from_timestamp() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "duration_s = 0.05\nn_initial = 20000\n").unwrap();
    let out = tmp.path().join("out");
    let args = ["--config", cfg.to_str().unwrap(), "--seed", "9", "simulate"];
    assert_eq!(run(&out, &args), 0);
    let first = (stable(&out.join("trace.csv")), stable(&out.join("manifest.csv")));
    assert_eq!(run(&out, &args), 0);
    let second = (stable(&out.join("trace.csv")), stable(&out.join("manifest.csv")));
    assert_eq!(first, second);
    assert!(first.0.contains("# seed=9"));
    assert!(first.0.contains("# command=simulate"));
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("oracle.cfg");
    fs::write(&cfg, "n_trajectories = 64\n").unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("t{threads}"));
        // a small ensemble may miss the statistical tolerances; only the bytes matter here
        let code = run(&out, &["--config", cfg.to_str().unwrap(), "--threads", threads, "oracle"]);
        assert!(code == 0 || code == 2, "exit {code}");
        outputs.push(fs::read(out.join("estimates.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn threads_fall_back_to_environment() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .env("BACKACTION_SIM_THREADS", "2")
        .arg("--out")
        .arg(&out)
        .arg("params")
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = fs::read_to_string(out.join("manifest.csv")).unwrap();
    assert!(manifest.lines().any(|l| l == "threads,2"), "{manifest}");
}

#[test]
fn simulate_then_analyze() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "duration_s = 0.1\nn_initial = 20000\n").unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&out, &["--config", cfg.to_str().unwrap(), "simulate"]), 0);
    let trace = out.join("trace.csv");
    let an = tmp.path().join("an");
    assert_eq!(run(&an, &["analyze", "--trace", trace.to_str().unwrap()]), 0);
    let text = fs::read_to_string(an.join("analysis.csv")).unwrap();
    assert!(text.contains("t_s,delta_rad_s,N,N_err,dNdt,R_W,ratio,ratio_err"));
    assert!(text.contains("# command=analyze"));
}

#[test]
fn spectrum_and_heating_curve_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&out, &["spectrum"]), 0);
    assert_eq!(run(&out, &["heating-curve"]), 0);
    let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert!(text.contains("# spectrum_source=analytic"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 402);
    let curve = fs::read_to_string(out.join("heating_curve.csv")).unwrap();
    assert!(curve.contains("delta_rad_s,nbar,r_c,r_fs,ratio"));
}
