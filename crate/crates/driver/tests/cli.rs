use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sqg_core::NormSeries;

fn sqg(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sqg"));
    cmd.args(args).env_remove("SQG_OUTPUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const BASE: &str = "\
grid.n = 32
grid.length = 2pi
dynamics.gamma = 1
time.t_end = 1
time.sample_dt = 0.05
time.checkpoint_dt = 0.5
initial.preset = random_h1
initial.seed = 9
";

fn read_norms(dir: &Path) -> NormSeries {
    NormSeries::from_csv(&fs::read_to_string(dir.join("norms.csv")).unwrap()).unwrap()
}

#[test]
fn restart_reproduces_uninterrupted_run() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    let resumed = tmp.path().join("resumed");
    let cfg = write_config(tmp.path(), BASE);

    let out = sqg(&["run", "--config", &cfg], &[("SQG_OUTPUT_DIR", &full)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reference = read_norms(&full);
    assert_eq!(reference.len(), 21);
    assert!(full.join("checkpoint_0.500000.bin").exists());
    assert!(full.join("snap_1.000000.bin").exists());

    // Simulate an interruption: keep the log up to 0.7 and the mid checkpoint.
    fs::create_dir_all(&resumed).unwrap();
    let mut partial = reference.clone();
    partial.truncate_after(0.7);
    fs::write(resumed.join("norms.csv"), partial.to_csv()).unwrap();
    fs::copy(full.join("checkpoint_0.500000.bin"), resumed.join("checkpoint_0.500000.bin")).unwrap();
    let ckpt = resumed.join("checkpoint_0.500000.bin");
    let out = sqg(
        &["run", "--config", &cfg, "--restart", ckpt.to_str().unwrap()],
        &[("SQG_OUTPUT_DIR", &resumed)],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let restarted = read_norms(&resumed);
    assert_eq!(restarted.len(), reference.len());
    for (a, b) in reference.rows().iter().zip(restarted.rows()) {
        assert_eq!(a.t, b.t);
        let pairs = [
            (a.linf, b.linf),
            (a.l2, b.l2),
            (a.h1, b.h1),
            (a.h3_2, b.h3_2),
            (a.h2, b.h2),
            (a.grad_sup, b.grad_sup),
        ];
        for (x, y) in pairs.into_iter().chain(a.extra.iter().copied().zip(b.extra.iter().copied())) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "t = {}: {x} vs {y}", a.t);
        }
    }
}

#[test]
fn equal_configs_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), BASE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&sqg(&["run", "--config", &cfg], &[("SQG_OUTPUT_DIR", &a)])), 0);
    assert_eq!(code(&sqg(&["run", "--config", &cfg], &[("SQG_OUTPUT_DIR", &b)])), 0);
    for name in ["norms.csv", "checkpoint_0.500000.bin", "snap_1.000000.bin"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn analyze_recovers_synthetic_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let mut series = NormSeries::new(vec![]);
    for i in 0..30 {
        let t = 10f64.powf(-1.0 + 2.0 * i as f64 / 29.0);
        let v = 5.0 * t.powi(-2);
        series
            .push(sqg_core::NormRow {
                t,
                linf: v,
                l2: v,
                h1: v,
                h3_2: v,
                h2: v,
                grad_sup: v,
                extra: vec![],
            })
            .unwrap();
    }
    let path = tmp.path().join("norms.csv");
    fs::write(&path, series.to_csv()).unwrap();
    let out = sqg(
        &["analyze", "--norms", path.to_str().unwrap(), "--column", "h1", "--window", "0.1:10"],
        &[],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t_a,t_b,alpha,amplitude,residual_rms,samples");
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    let alpha: f64 = fields[2].parse().unwrap();
    let amplitude: f64 = fields[3].parse().unwrap();
    assert!((alpha + 2.0).abs() < 1e-10, "{alpha}");
    assert!((amplitude - 5.0).abs() < 1e-9);

    let out = sqg(
        &["analyze", "--norms", path.to_str().unwrap(), "--column", "h1", "--window", "0.1:10", "--weight", "2"],
        &[],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let sup: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((sup - 5.0).abs() < 1e-9);
}

#[test]
fn single_mode_oracle_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sqg(&["oracle", "--suite", "single-mode", "--output", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0);
    let report = fs::read_to_string(tmp.path().join("oracle_report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "name,max_abs_error,max_rel_error,tolerance,pass");
    assert!(lines.next().unwrap().ends_with(",true"));
}

#[test]
fn distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.cfg");
    assert_eq!(code(&sqg(&["run", "--config", missing.to_str().unwrap()], &[])), 10);

    let junk = tmp.path().join("junk.bin");
    fs::write(&junk, b"not a snapshot at all").unwrap();
    assert_eq!(code(&sqg(&["modulus-check", "--field", junk.to_str().unwrap(), "--delta3", "0.1"], &[])), 11);

    let cfg = write_config(tmp.path(), "grid.n = 32\ngrid.length = 1\ndynamics.gamma = 2.5\ntime.t_end = 1\n");
    let out = sqg(&["run", "--config", &cfg], &[]);
    assert_eq!(code(&out), 12);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn blow_up_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    // Steps far above the advective limit make the scheme unstable.
    let cfg = write_config(
        tmp.path(),
        "grid.n = 32\ngrid.length = 2pi\ndynamics.gamma = 1\ndynamics.kappa = 0\n\
         dynamics.dt_min = 0.5\ndynamics.dt_max = 0.5\ntime.t_end = 200\ntime.sample_dt = 10\n\
         initial.preset = random_h1\ninitial.amplitude = 1000\n",
    );
    let out = sqg(&["run", "--config", &cfg], &[("SQG_OUTPUT_DIR", &tmp.path().join("out"))]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn strict_breach_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "grid.n = 32\ngrid.length = 2pi\ndynamics.gamma = 1\ntime.t_end = 0.5\n\
         modulus.enabled = true\nmodulus.delta3 = 0.001\n",
    );
    let out_dir = tmp.path().join("out");
    let out = sqg(&["run", "--config", &cfg, "--strict"], &[("SQG_OUTPUT_DIR", &out_dir)]);
    assert_eq!(code(&out), 3);
    let log = fs::read_to_string(out_dir.join("modulus.csv")).unwrap();
    assert!(log.lines().nth(1).unwrap().contains(",true,"));

    // Without --strict the run completes and logs every breach.
    let out = sqg(&["run", "--config", &cfg], &[("SQG_OUTPUT_DIR", &out_dir)]);
    assert_eq!(code(&out), 0);
}

#[test]
fn modulus_check_on_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "grid.n = 32\ngrid.length = 200\ndynamics.gamma = 1\ntime.t_end = 0.1\n\
         initial.preset = cmt\ninitial.amplitude = 0.01\n",
    );
    let out_dir = tmp.path().join("out");
    assert_eq!(code(&sqg(&["run", "--config", &cfg], &[("SQG_OUTPUT_DIR", &out_dir)])), 0);
    let snap = out_dir.join("snap_0.100000.bin");
    let out = sqg(&["modulus-check", "--field", snap.to_str().unwrap(), "--delta3", "0.1"], &[]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "time,worst_ratio,d1,d2,breached");
    assert!(text.lines().nth(1).unwrap().ends_with(",false"));
}
