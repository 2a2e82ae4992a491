use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-plant"))
}

#[test]
fn run_subcommand_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, "horizon_hours = 4.0\n[demand]\nelectric_mw = 3.0\n").unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--seed", "5", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["samples"], 24);
}

#[test]
fn curve_subcommands_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, file) in [
        ("power-curve", "power_curve.csv"),
        ("electrolyzer-curve", "electrolyzer_curve.csv"),
        ("simulate-weather", "weather.csv"),
    ] {
        let status = bin()
            .arg(cmd)
            .arg("--out")
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success(), "{cmd}");
        assert!(dir.path().join(file).is_file(), "{file}");
    }
}

#[test]
fn failures_exit_nonzero_with_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    fs::write(&cfg, "[battery]\ncapacity_mw = 5.0\n").unwrap();
    let out = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config stage"), "{err}");
    assert!(err.contains("capacity_mw"), "{err}");

    let missing = bin()
        .args(["power-curve", "--config", "/nonexistent/x.toml"])
        .output()
        .unwrap();
    assert!(!missing.status.success());
}
