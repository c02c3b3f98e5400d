use std::process::Command;

fn vqss() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vqss"))
}

#[test]
fn run_with_flags_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    std::fs::write(&scenario, "d = 5\nm = 3\ntrials = 30\nseed = 4\nattack = \"intercept:1\"\n").unwrap();
    let transcript = dir.path().join("t.jsonl");
    let report = dir.path().join("r.json");
    let out = vqss()
        .arg("run")
        .arg(&scenario)
        .args(["--trials", "20", "--check", "2"])
        .arg("--transcript")
        .arg(&transcript)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("trials=20"));
    assert!(stdout.contains("eve basis match"));
    let saved = vqss_harness::RunReport::read(&report).unwrap();
    assert_eq!(saved.trials.len(), 20);
    assert_eq!(saved.config.unwrap().m, 3);

    let again = vqss().arg("report").arg(&transcript).output().unwrap();
    assert!(again.status.success());
    let text = String::from_utf8(again.stdout).unwrap();
    let line = |s: &str| s.lines().find(|l| l.starts_with("detection")).unwrap().to_string();
    assert_eq!(line(&text), line(&stdout));
}

#[test]
fn invalid_scenarios_exit_nonzero() {
    for args in [
        vec!["run", "--d", "9"],
        vec!["run", "--m", "7"],
        vec!["run", "--attack", "teleport:1"],
        vec!["run", "--check", "9"],
    ] {
        let out = vqss().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
    let out = vqss().args(["report", "/nonexistent.jsonl"]).output().unwrap();
    assert!(!out.status.success());
}
