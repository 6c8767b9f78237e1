//! End-to-end runs of the `qkd` binary: output stability across runs,
//! float round trips through the CSV text, preset-file loading, the exit
//! code taxonomy, and file output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkd"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Everything below the commented header: the part that must be stable.
fn body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn temp_file(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(name);
    std::fs::write(&path, content).expect("temp file is writable");
    path
}

const GYS_FILE: &str = "# long-haul fiber figures\n\
                        alpha = 0.21\n\
                        etaBob = 0.045\n\
                        eDetector = 0.033\n\
                        pDark = 1.7e-6\n\
                        fEc = 1.22\n";

#[test]
fn identical_runs_produce_identical_bodies() {
    let args = ["fig3", "--protocol", "sarg2", "--max-steps", "4"];
    let first = stdout(&qkd(&args));
    let second = stdout(&qkd(&args));
    assert_eq!(body(&first), body(&second));
    let data = body(&first);
    assert!(data.starts_with("steps,best_sequence,tolerable_ber"));
    // depth zero through four, one row each
    assert_eq!(data.lines().count(), 6);

    let args = ["attack", "--photons", "2", "--grid", "64"];
    let first = stdout(&qkd(&args));
    let second = stdout(&qkd(&args));
    assert_eq!(body(&first), body(&second));
}

#[test]
fn csv_floats_round_trip_exactly() {
    let text = stdout(&qkd(&[
        "rates", "--preset", "gys", "--from", "0", "--to", "20", "--step", "10",
    ]));
    let data = body(&text);
    let mut lines = data.lines();
    let header = lines.next().expect("header line");
    assert_eq!(header.split(',').count(), 16);
    let mut cells = 0;
    for line in lines {
        for cell in line.split(',') {
            let x: f64 = cell.parse().expect("numeric cell");
            assert_eq!(format!("{x:.16e}"), cell, "reprint of {cell} differs");
            cells += 1;
        }
    }
    assert_eq!(cells, 3 * 16);
}

#[test]
fn preset_file_overrides_named_preset() {
    let path = temp_file("qkd-cli-preset.txt", GYS_FILE);
    let text = stdout(&qkd(&[
        "distance",
        "--preset",
        "branciard",
        "--protocol",
        "bb84",
        "--preset-file",
        path.to_str().unwrap(),
    ]));
    let data = body(&text);
    let km_of = |name: &str| -> Option<f64> {
        let row = data
            .lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_else(|| panic!("no row {name}"));
        row.split(',').nth(1).unwrap().parse().ok()
    };
    // the reach of the file's channel, not of the named preset
    let decoy = km_of("decoy_secure_km").expect("decoy reach");
    assert!((decoy - 142.21).abs() < 0.5, "got {decoy}");
    let ceiling = km_of("upper_single_photon_km").expect("ceiling");
    assert!((ceiling - 207.68).abs() < 0.1, "got {ceiling}");
    // standard sifting has no two-photon ceiling to report
    assert_eq!(km_of("upper_two_photon_km"), None);
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    // past the supported search depth
    let out = qkd(&["fig3", "--protocol", "sarg1", "--max-steps", "11"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    // a sweep that runs backwards
    let out = qkd(&["rates", "--from", "10", "--to", "0", "--step", "5"]);
    assert_eq!(out.status.code(), Some(2));

    // a channel that never detects anything
    let dead = temp_file(
        "qkd-cli-dead.txt",
        "alpha = 0.21\netaBob = 0\neDetector = 0.033\npDark = 0\nfEc = 1.22\n",
    );
    let out = qkd(&[
        "rates", "--from", "0", "--to", "0", "--step", "1",
        "--preset-file", dead.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    // a detector so noisy every distance is interceptable
    let noisy = temp_file(
        "qkd-cli-noisy.txt",
        "alpha = 0.21\netaBob = 0.045\neDetector = 0.3\npDark = 1.7e-6\nfEc = 1.22\n",
    );
    let out = qkd(&[
        "distance", "--preset", "gys", "--protocol", "sarg04",
        "--preset-file", noisy.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn out_flag_writes_the_file() {
    let path = std::env::temp_dir().join("qkd-cli-depolarizing.csv");
    let _ = std::fs::remove_file(&path);
    let out = qkd(&["depolarizing", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).expect("file was written");
    assert!(text.starts_with("# command: qkd depolarizing"));
    assert_eq!(body(&text).lines().count(), 6);
}

#[test]
fn json_format_parses_and_carries_the_table() {
    let text = stdout(&qkd(&[
        "attack", "--photons", "1", "--grid", "64", "--format", "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    assert_eq!(v["meta"]["command"], "qkd attack");
    assert_eq!(v["columns"].as_array().unwrap().len(), 3);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let min = rows[0][1].as_f64().expect("numeric minimum");
    assert!((min - 1.0 / 3.0).abs() < 1e-4, "got {min}");
}
