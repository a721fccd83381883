use std::process::Command;

fn sepsing(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sepsing")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn list_names_bundled_scenarios() {
    let (code, out) = sepsing(&["list"]);
    assert_eq!(code, 0);
    for name in ["identity_disk", "lens_mobius", "lens_squared", "critical_point", "continuity_sweep"] {
        assert!(out.contains(name), "{out}");
    }
}

#[test]
fn unknown_inputs_exit_with_two() {
    assert_eq!(sepsing(&["describe", "nope"]).0, 2);
    let dir = std::env::temp_dir().join(format!("sepsing-missing-{}", std::process::id()));
    let (code, _) = sepsing(&["run", "/nonexistent/scenario.json", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2);
    let summary = std::fs::read_to_string(dir.join("summary.json")).unwrap();
    assert!(summary.contains("FileNotFound"), "{summary}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn identity_disk_run_writes_artifacts() {
    let dir = std::env::temp_dir().join(format!("sepsing-identity-{}", std::process::id()));
    let (code, _) = sepsing(&["run", "identity_disk", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    for name in ["summary.json", "admissibility.json", "sigma.csv", "residuals.csv"] {
        assert!(dir.join(name).exists(), "{name} missing");
    }
    std::fs::remove_dir_all(&dir).ok();
}
