//! End-to-end tests of the `wavetomo` executable: every subcommand runs
//! against a real temporary directory, and the assertions read the files
//! back with the library's own loaders.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use wavetomo::region::GammaSpec;
use wavetomo::{io, phantom, Field, Grid};

fn wavetomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavetomo"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn run_ok(args: &[&str]) -> String {
    let out = wavetomo(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout should be UTF-8")
}

fn path_arg(dir: &Path, key: &str) -> String {
    format!("{key}={}", dir.display())
}

#[test]
fn phantom_writes_a_loadable_dump_and_a_preview() {
    let dir = tempfile::tempdir().unwrap();
    let stdout =
        run_ok(&["phantom", "kind=disks", "grid=51", &path_arg(dir.path(), "out")]);
    assert!(stdout.starts_with("phantom: kind=disks grid=51"), "{stdout}");

    // The dump round-trips through the library loader and matches a direct
    // render bit for bit (the disks sit inside the default omega0, so the
    // support clip changes nothing).
    let loaded: Field = io::load_field(&dir.path().join("phantom.f64")).unwrap();
    let direct = phantom::disks(Grid::square(51).unwrap(), 4).unwrap();
    assert_eq!(loaded.values(), direct.values());

    let pgm = fs::read(dir.path().join("phantom.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n51 51\n255\n"), "unexpected PGM header");
    assert_eq!(pgm.len(), "P5\n51 51\n255\n".len() + 51 * 51);
}

#[test]
fn forward_then_reconstruct_consumes_the_written_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_arg(dir.path(), "out");
    let common = ["kind=gaussian", "grid=51", "t_final=1.2", &out];

    let stdout = run_ok(&[&["forward"], &common[..]].concat());
    assert!(stdout.starts_with("forward: kind=gaussian"), "{stdout}");
    let trace_path = dir.path().join("trace.dat");
    let meta = fs::read_to_string(dir.path().join("trace.meta")).unwrap();
    assert!(meta.contains("gamma = full"), "{meta}");

    // The written trace is loadable against the same grid and gamma.
    let grid = Grid::square(51).unwrap();
    let trace = io::load_trace::<f64>(&trace_path, &grid, &GammaSpec::full_boundary()).unwrap();
    assert!(trace.abs_max() > 0.0);

    let trace_arg = format!("trace={}", trace_path.display());
    let stdout = run_ok(&[
        "reconstruct",
        "kind=gaussian",
        "grid=51",
        "t_final=1.2",
        "n_terms=2",
        &trace_arg,
        &out,
    ]);
    assert!(stdout.contains("rel_l2="), "{stdout}");
    assert!(!stdout.contains("rel_l2=NaN"), "truth should give finite errors: {stdout}");

    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("n,rel_l2,rel_hd,rel_linf,ratio\n"), "{csv}");
    assert_eq!(csv.lines().count(), 3, "header plus one row per term");
    assert!(dir.path().join("reconstruction.f64").exists());
    assert!(dir.path().join("difference.pgm").exists());
}

#[test]
fn identical_configurations_write_byte_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run_ok(&["forward", "kind=disks", "grid=51", "t_final=0.8", &path_arg(dir.path(), "out")]);
    }
    let ta = fs::read(a.path().join("trace.dat")).unwrap();
    let tb = fs::read(b.path().join("trace.dat")).unwrap();
    assert_eq!(ta, tb, "same config must reproduce the trace bytes");
}

#[test]
fn config_file_merges_under_command_line_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, "grid = 51\nkind = shepp_logan\nimages = false\n").unwrap();
    let config_arg = format!("--config={}", cfg_path.display());
    let stdout = run_ok(&["phantom", &config_arg, "kind=disks", &path_arg(dir.path(), "out")]);
    assert!(stdout.contains("kind=disks grid=51"), "{stdout}");

    let loaded: Field = io::load_field(&dir.path().join("phantom.f64")).unwrap();
    let direct = phantom::disks(Grid::square(51).unwrap(), 4).unwrap();
    assert_eq!(loaded.values(), direct.values(), "override should win over the file");
    assert!(!dir.path().join("phantom.pgm").exists(), "file's images=false should hold");
}

#[test]
fn errors_exit_nonzero_with_one_line_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let trace_arg = format!("trace={}/absent.dat", dir.path().display());
    let out = wavetomo(&["reconstruct", "grid=51", &trace_arg]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error: trace"), "{stderr}");

    let out = wavetomo(&["phantom", "gird=201"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error:") && stderr.contains("unknown key"), "{stderr}");
}

#[test]
fn rays_prints_the_verdict_for_stable_and_unstable_setups() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_arg(dir.path(), "out");

    let stdout = run_ok(&["rays", "grid=51", "t_final=5", "ray_samples=40", &out]);
    assert!(stdout.contains("\"stable\": true"), "{stdout}");
    assert!(stdout.contains("verdict=stable"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("visibility.csv")).unwrap();
    assert!(csv.starts_with("x,y,theta,class,p,kappa,n_reflections\n"), "{csv}");
    assert_eq!(csv.lines().count(), 41, "header plus one row per sample");

    let stdout = run_ok(&[
        "rays",
        "grid=51",
        "gamma=left:0:1",
        "t_final=0.5",
        "ray_samples=40",
        &out,
    ]);
    assert!(stdout.contains("verdict=unstable"), "{stdout}");
    assert!(stdout.contains("\"stable\": false"), "{stdout}");
}
