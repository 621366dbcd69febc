use std::process::{Command, Output};

use polar_dts::sim::{parse_json, CSV_COLUMNS};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polar-sim"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

const SMALL: &[&str] = &[
    "--n", "6", "--k", "32", "--crc-bits", "8", "--list-size", "4", "--max-frames", "300", "--min-errors", "20",
    "--workers", "1", "-q",
];

fn with(extra: &[&str]) -> Vec<String> {
    SMALL.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(extra: &[&str]) -> Output {
    let args = with(extra);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    sim(&refs)
}

#[test]
fn help_lists_defaults() {
    let out = sim(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--list-size", "--pruner", "--rt-index", "--frozen-sibling", "--snr", "--format"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    assert!(text.contains("[default: 8]"));
}

#[test]
fn csv_rows_per_point() {
    let out = run(&["--snr", "1,2,3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], CSV_COLUMNS.join(","));
    assert!(text.lines().any(|l| l.starts_with("# config: {")));
}

#[test]
fn runs_are_reproducible() {
    let a = run(&["--snr", "2", "--pruner", "dts"]);
    let b = run(&["--snr", "2", "--pruner", "dts"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_report_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&["--snr", "2,inf", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = parse_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.results.len(), 2);
    assert_eq!(report.results[1].frame_errors, 0);
    assert_eq!(report.config.list_size, 4);
    assert_eq!(report.tool, "polar-sim");
}

#[test]
fn environment_and_file_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 6\nk = 32\ncrc-bits = 8\nlist-size = 2\nseed = 5\nworkers = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polar-sim"))
        .args(["--config", cfg.to_str().unwrap(), "--print-config"])
        .env_clear()
        .env("POLAR_SIM_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["list_size"], 2);
    assert_eq!(v["seed"], 9);
}

#[test]
fn frozen_set_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frozen.txt");
    let frozen: Vec<String> = (0..8).map(|i| i.to_string()).collect();
    std::fs::write(&path, frozen.join("\n")).unwrap();
    let out = sim(&["--n", "4", "--k", "8", "--crc-bits", "0", "--pe-count", "2", "--frozen-file", path.to_str().unwrap(), "--print-config"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(&path, "3\n99\n").unwrap();
    let out = sim(&["--n", "4", "--k", "14", "--crc-bits", "0", "--pe-count", "2", "--frozen-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frozen.txt:2"));
}

#[test]
fn invalid_settings_exit_two() {
    for bad in [&["--list-size", "3"][..], &["--pruner", "heap"], &["--snr", ""], &["--q-pm", "0", "--arith", "fixed"]] {
        let out = run(bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn unwritable_output_exits_one() {
    let out = run(&["--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(1));
}
