use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_particle-lbm"));
    c.env_remove("PARTICLE_LBM_OUTPUT").env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--output").arg(out).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bad_values_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["stokes", "--coupling", "XX"][..],
        &["settle", "--resolution", "17"],
        &["calibrate", "--regime", "E"],
        &["stokes", "--nu", "-1"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unknown_key_in_file_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "coupling = \"MR\"\n[stokes]\nlenght = 8\n").unwrap();
    let o = run(&["stokes", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("lenght") && e.contains("line 3"), "{e}");
}

#[test]
fn exhausted_budget_exits_with_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["stokes", "--length", "8", "--max-steps", "10"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn blow_up_exits_with_instability() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["stokes", "--length", "8", "--nu", "0.001", "--forcing", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn flags_override_file_and_config_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "coupling = \"MR\"\n[stokes]\nlength = 8\nnu = 0.3\nwindow = 200\ntolerance = 1e-5\n").unwrap();
    let o = run(&["stokes", "--config", cfg.to_str().unwrap(), "--nu", "0.5", "--seed", "4"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let run_dir = dir.path().join("stokes-MR-4-s4-nu0.5");
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), run_dir.to_str().unwrap());
    let echo = fs::read_to_string(run_dir.join("config.toml")).unwrap();
    assert!(echo.contains("nu = 0.5") && echo.contains("coupling = \"MR\"") && echo.contains("seed = 4"));
    assert!(run_dir.join("stokes.csv").exists());
}

#[test]
fn output_root_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["stokes", "--length", "8", "--nu", "0.5", "--window", "200"])
        .env("PARTICLE_LBM_OUTPUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "unknown flag must be rejected");
    let o = bin()
        .args(["stokes", "--length", "8", "--nu", "0.5"])
        .env("PARTICLE_LBM_OUTPUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("stokes-CLI-4-s1-nu0.5/stokes.csv").exists());
}

#[test]
fn sweep_runs_every_listed_line() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("runs.txt");
    fs::write(
        &list,
        "# viscosity pair\nstokes --coupling BB --nu 0.5\n\nstokes --coupling CLI --nu 0.4  # second\n",
    )
    .unwrap();
    let o = run(&["sweep", "--list", list.to_str().unwrap(), "--length", "8"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["stokes-BB-4-s1-nu0.5", "stokes-CLI-4-s1-nu0.4"] {
        assert!(dir.path().join(name).join("stokes.csv").exists(), "{name}");
    }
}

#[test]
fn sweep_with_invalid_line_runs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("runs.txt");
    fs::write(&list, "stokes --nu 0.5\nstokes --coupling nope\n").unwrap();
    let o = run(&["sweep", "--list", list.to_str().unwrap(), "--length", "8"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("stokes-CLI-4-s1-nu0.5").exists());
}

/// Two short regime-A runs give byte-identical kinematics.
#[test]
fn settle_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "settle",
        "--regime",
        "A",
        "--coupling",
        "CLI",
        "--resolution",
        "18",
        "--seed",
        "1",
        "--calibration-steps",
        "3",
        "--max-steps",
        "4",
    ];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&args, out);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv = |root: &Path| fs::read(root.join("settle-CLI-18-s1/kinematics-s1.csv")).unwrap();
    let (x, y) = (csv(&a), csv(&b));
    assert_eq!(String::from_utf8_lossy(&x).lines().count(), 5);
    assert_eq!(x, y);
}
