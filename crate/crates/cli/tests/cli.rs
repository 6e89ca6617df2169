use std::process::Command;

fn qke() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qke"))
}

#[test]
fn gen_data_writes_dataset_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = qke()
        .args(["gen-data", "--train-per-class", "3", "--test-per-class", "2", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let train = std::fs::read_to_string(out.join("dataset_train.csv")).unwrap();
    assert_eq!(train.lines().next(), Some("x0,x1,x2,y"));
    assert_eq!(train.lines().count(), 7);
    assert!(out.join("dataset.json").exists());
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "no-such-key = 1\n").unwrap();
    let status = qke().args(["gen-data", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = qke().args(["gen-data", "--shots", "many"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn compile_reports_pair_duration() {
    let output = qke().args(["compile", "--pair", "0.1,0.2,0.3:1.0,2.0,3.0"]).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(report.to_string().contains("85944"), "{report}");
}
