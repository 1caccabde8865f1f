use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cortexk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cortexk")).args(args).env_remove("CORTEXK_THREADS").output().unwrap()
}

fn manifest(dir: &Path) -> String {
    fs::read_to_string(dir.join("manifest.txt")).unwrap()
}

#[test]
fn lists_presets() {
    let out = cortexk(&["--list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig-diffK", "fig-pw", "fig-curvature", "fig-kernel-spt", "fig-sparse-laf", "fig-kernel"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = cortexk(&["--preset", "fig-pw", "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(manifest(&a), manifest(&b));
    assert_eq!(fs::read(a.join("overlay.ppm")).unwrap(), fs::read(b.join("overlay.ppm")).unwrap());
}

#[test]
fn seed_changes_the_pinwheel() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    cortexk(&["--preset", "fig-pw", "--out", a.to_str().unwrap()]);
    cortexk(&["--preset", "fig-pw", "--seed", "7", "--out", b.to_str().unwrap()]);
    assert_ne!(fs::read(a.join("map.ppm")).unwrap(), fs::read(b.join("map.ppm")).unwrap());
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# small kernel\ncommand = kernel\nx_half = 0.5\ny_half = 0.5\nxy_step = 0.1\n").unwrap();
    let out_dir = tmp.path().join("out");
    let out = cortexk(&["--config", cfg.to_str().unwrap(), "--set", "theta_step=0.5", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let resolved = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(resolved.contains("theta_step=0.5") && resolved.contains("x_half=0.5"));
    let m = manifest(&out_dir);
    assert!(m.contains("kernel.kgrid") && m.lines().all(|l| l.split("  ").next().unwrap().len() == 64));
}

#[test]
fn bad_config_reports_line_and_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "command = kernel\n\nno_such_key = 1\n").unwrap();
    let out = cortexk(&["--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    fs::write(&cfg, "command = kernel\nsigma = -1\n").unwrap();
    let out = cortexk(&["--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_override_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cortexk(&["kernel", "--set", "bogus=1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn silenced_operator_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cortexk(&[
        "propagate", "--set", "tau=1e6", "--set", "x_half=0.5", "--set", "y_half=0.5", "--out", tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unreadable_input_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cortexk(&["lift-evolve", "--set", "image=/nonexistent/input.pgm", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));

    let junk = tmp.path().join("junk.pgm");
    fs::write(&junk, b"P5\n4 4\n255\n\x00").unwrap();
    let out = cortexk(&["lift-evolve", "--set", &format!("image={}", junk.display()), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}
