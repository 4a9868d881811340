use std::path::Path;
use std::process::{Command, Output};

fn simrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simrad")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn metric(o: &Output, key: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(|v| v.parse().unwrap()))
        .unwrap_or_else(|| panic!("no `{key}` in\n{}", stdout(o)))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn gen_writes_a_headed_volume() {
    let dir = tempfile::tempdir().unwrap();
    let vol = path(dir.path(), "vol.svol");
    let o = simrad(&["gen", "--phantom", "gaussian", "--n", "16", "--h", "0.5", "--out", &vol]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(&vol).unwrap();
    assert!(bytes.starts_with(b"SIMRAD-VOL v1 N=16 h=0.5 origin="));
    assert_eq!(bytes.len(), 64 + 8 * 16usize.pow(3));
    assert_eq!(metric(&o, "n"), 16.0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let vol = path(dir.path(), "v.svol");
    let (a, b) = (path(dir.path(), "a.sgm"), path(dir.path(), "b.sgm"));
    assert!(simrad(&["gen", "--phantom", "two-gaussians", "--n", "24", "--h", "0.35", "--out", &vol]).status.success());
    for out in [&a, &b] {
        let o = simrad(&["radon", "--in", &vol, "--ntheta", "6", "--nphi", "6", "--nt", "41", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn plane_pipeline_reconstructs() {
    let dir = tempfile::tempdir().unwrap();
    let vol = path(dir.path(), "v.svol");
    let sgm = path(dir.path(), "s.sgm");
    let rec = path(dir.path(), "r.svol");
    assert!(simrad(&["gen", "--n", "32", "--h", "0.3", "--out", &vol]).status.success());
    let o = simrad(&["radon", "--in", &vol, "--ntheta", "24", "--nphi", "24", "--nt", "81", "--out", &sgm]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = simrad(&["invert-fbp", "--in", &sgm, "--n", "32", "--h", "0.3", "--reference", &vol, "--out", &rec]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(metric(&o, "rel_error") < 0.06);
    let o = simrad(&["invert-fourier", "--in", &sgm, "--n", "32", "--h", "0.3", "--reference", &vol, "--out", &rec]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(metric(&o, "coverage") > 0.99);
    assert!(metric(&o, "rel_error") < 0.06);
}

#[test]
fn line_pipeline_and_filter() {
    let dir = tempfile::tempdir().unwrap();
    let vol = path(dir.path(), "v.svol");
    let sgm = path(dir.path(), "s.sgm");
    let filt = path(dir.path(), "f.sgm");
    let g = simrad(&["gen", "--n", "32", "--h", "0.3", "--out", &vol]);
    assert!(g.status.success());
    let o = simrad(&["xray", "--in", &vol, "--ntheta", "16", "--nphi", "16", "--nu", "49", "--out", &sgm]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("kind=line"));
    let o = simrad(&["filter", "--in", &sgm, "--out", &filt]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(metric(&o, "exponent"), 0.5);
    // the unitarized transform carries the norm of the volume
    assert!((metric(&o, "norm") / metric(&g, "norm") - 1.0).abs() < 2e-2);
}

#[test]
fn verify_runs_selected_checks_on_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let vol = path(dir.path(), "v.svol");
    assert!(simrad(&["gen", "--n", "32", "--h", "0.3", "--out", &vol]).status.success());
    let o = simrad(&["verify", "--check", "fiber-constancy", "--check", "group-algebra", "--in", &vol, "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("CHECK fiber_constancy"));
    assert_eq!(metric(&o, "failed"), 0.0);
}

#[test]
fn missing_input_is_a_runtime_error() {
    let o = simrad(&["radon", "--in", "/nonexistent/missing.svol", "--out", "/tmp/never-written.sgm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("FileNotFound"));
}

#[test]
fn oversized_support_reports_geometry_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let vol = path(dir.path(), "v.svol");
    let sgm = path(dir.path(), "s.sgm");
    assert!(simrad(&["gen", "--n", "32", "--h", "0.3", "--out", &vol]).status.success());
    let o = simrad(&["radon", "--in", &vol, "--ntheta", "4", "--nphi", "4", "--tmax", "1", "--out", &sgm]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("GeometryMismatch"));
    assert!(!Path::new(&sgm).exists());
}

#[test]
fn argument_errors_exit_with_two() {
    for args in [
        vec!["radon", "--bogus"],
        vec!["gen", "--n", "-3", "--out", "x.svol"],
        vec!["gen", "--h", "0", "--out", "x.svol"],
        vec!["radon", "--in", "same.svol", "--out", "same.svol"],
        vec!["verify", "--check", "nonsense"],
        vec!["invert-wavelet", "--in", "x.sgm"],
    ] {
        let o = simrad(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_exits_zero() {
    let o = simrad(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("invert-wavelet"));
}
