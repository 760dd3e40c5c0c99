//! Drives the built binary and checks the exit-status contract and the
//! report formats end to end.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liouville-lab"))
}

#[test]
fn quantization_defaults_exit_zero_with_quantized_row() {
    let dir = tempdir();
    let out = dir.join("q.csv");
    let status = bin()
        .args(["--experiment", "quantization", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text
        .starts_with("experiment,param_name,param_value,quantity,value,target,tolerance,pass\n"));
    // a row certifying |mass - 8pi| within 3% of 8pi
    let row = text
        .lines()
        .find(|l| l.contains("mass_extrapolated"))
        .expect("extrapolated mass row");
    assert!(row.contains("25.132741"), "{row}");
    assert!(row.ends_with("true"), "{row}");
}

#[test]
fn bad_mu_exits_two() {
    let status = bin()
        .args(["--experiment", "quantization", "--mu", "2.5"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn unknown_experiment_exits_two() {
    let status = bin().args(["--experiment", "nope"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn kernel_fault_injection_exits_one() {
    let dir = tempdir();
    let out = dir.join("vf.csv");
    let output = bin()
        .args([
            "--experiment",
            "verify-core",
            "--inject-kernel-fault",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().find(|l| l.contains("oracle_dev")).unwrap();
    assert!(row.ends_with("false"), "{row}");
}

#[test]
fn injected_nan_exits_three() {
    let output = bin()
        .args([
            "--experiment",
            "quantization",
            "--n",
            "256",
            "--deltas",
            "4,8",
            "--inject-nan",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn unwritable_output_path_exits_two() {
    let output = bin()
        .args([
            "--experiment",
            "quantization",
            "--n",
            "256",
            "--deltas",
            "4,8",
            "--out",
            "/nonexistent-dir-for-sure/report.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn identical_config_gives_byte_identical_csv() {
    let dir = tempdir();
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        "experiment=quantization\nn=256\ndeltas=4,8,16\nseed=9\n",
    )
    .unwrap();
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for out in [&a, &b] {
        let status = bin()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn json_format_mirrors_csv_rows() {
    let dir = tempdir();
    let (csv, json) = (dir.join("r.csv"), dir.join("r.json"));
    let base = [
        "--experiment",
        "quantization",
        "--n",
        "256",
        "--deltas",
        "4,8,16",
    ];
    assert_eq!(
        bin()
            .args(base)
            .args(["--out"])
            .arg(&csv)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    assert_eq!(
        bin()
            .args(base)
            .args(["--format", "json", "--out"])
            .arg(&json)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let csv_rows = std::fs::read_to_string(&csv).unwrap().lines().count() - 1;
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), csv_rows);
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("liouville-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
