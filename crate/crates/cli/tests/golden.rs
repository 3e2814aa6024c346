//! End-to-end runs of the `trhsim` binary against pinned outputs.
//!
//! Set `TRHSIM_BLESS=1` to rewrite the files under `tests/golden`.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> String {
    crate_dir().join("configs").join(name).display().to_string()
}

fn trhsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trhsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = trhsim(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn check_golden(name: &str, actual: &str) {
    let path = crate_dir().join("tests/golden").join(name);
    if std::env::var_os("TRHSIM_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn summary_field(summary: &str, key: &str) -> String {
    let prefix = format!("\"{key}\": ");
    summary
        .lines()
        .find_map(|l| l.trim().strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no field {key}"))
        .trim_end_matches(',')
        .trim_matches('"')
        .to_string()
}

#[test]
fn comparison_table() {
    let csv = stdout_ok(&["mintrh", "--config", &config("comparison.conf")]);
    assert_eq!(column(&csv, "tracker"), ["prct", "parfm", "para", "mint"]);
    let d: Vec<u64> = column(&csv, "min_trh_d").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!((d[0], d[1], d[3]), (623, 4096, 1400));
    assert!((d[2] as f64 / 3732.0 - 1.0).abs() <= 0.01);
    check_golden("comparison.csv", &csv);
}

#[test]
fn postponement_with_dmq() {
    let csv = stdout_ok(&["mintrh", "--config", &config("postponement.conf")]);
    let d: Vec<u64> = column(&csv, "min_trh_d").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!((d[0], d[1]), (769, 4242));
    assert!((d[2] as f64 / 3650.0 - 1.0).abs() <= 0.03);
    assert!((d[3] as f64 / 1482.0 - 1.0).abs() <= 0.01);
    let p2 = stdout_ok(&[
        "mintrh",
        "--config",
        &config("postponement.conf"),
        "--set",
        "trackers=mint",
        "--pattern",
        "p2",
    ]);
    assert_eq!(column(&p2, "min_trh_d"), ["1404"]);
    check_golden("postponement_dmq.csv", &csv);
}

#[test]
fn target_ttf_sweep() {
    let csv = stdout_ok(&["sweep", "--config", &config("target_ttf.conf"), "--jobs", "4"]);
    let mint: Vec<u64> = csv
        .lines()
        .filter(|l| l.split(',').nth(2) == Some("mint"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    for (got, want) in mint.iter().zip([1400.0, 1480.0, 1570.0, 1640.0]) {
        assert!((*got as f64 / want - 1.0).abs() <= 0.02, "{got} vs {want}");
    }
    let serial = stdout_ok(&["sweep", "--config", &config("target_ttf.conf"), "--jobs", "1"]);
    assert_eq!(csv, serial);
    check_golden("target_ttf_sweep.csv", &csv);
}

#[test]
fn single_sided_mp_plateau() {
    let csv = stdout_ok(&["sweep", "--set", "sweep=mp", "--set", "values=3000"]);
    let t: f64 = column(&csv, "min_trh")[0].parse().unwrap();
    assert!((t / 2899.0 - 1.0).abs() <= 0.02);
}

#[test]
fn all_tables() {
    let text = stdout_ok(&["tables"]);
    for name in ["comparison", "postponement", "rfm", "target_ttf"] {
        assert!(text.contains(&format!("# {name}\n")));
    }
    check_golden("tables.txt", &text);

    let dir = std::env::temp_dir().join(format!("trhsim-tables-{}", std::process::id()));
    stdout_ok(&["tables", "--out", dir.to_str().unwrap()]);
    let comparison = fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert!(text.contains(&comparison));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_is_deterministic_and_matches_the_recurrence() {
    let args = ["simulate", "--config", &config("oracle.conf"), "--jobs", "4"];
    let a = stdout_ok(&args);
    let b = stdout_ok(&args);
    assert_eq!(a, b);
    let serial = stdout_ok(&["simulate", "--config", &config("oracle.conf"), "--jobs", "1"]);
    assert_eq!(a, serial);
    assert_eq!(summary_field(&a, "verdict"), "WITHIN 3σ");
    check_golden("oracle_summary.txt", &a);
}

#[test]
fn per_trial_csv() {
    let path = std::env::temp_dir().join(format!("trhsim-trials-{}.csv", std::process::id()));
    let summary = stdout_ok(&[
        "simulate",
        "--config",
        &config("oracle.conf"),
        "--set",
        "trials=50",
        "--set",
        &format!("per_trial_csv={}", path.display()),
    ]);
    let csv = fs::read_to_string(&path).unwrap();
    fs::remove_file(&path).unwrap();
    assert_eq!(csv.lines().count(), 51);
    let failures = column(&csv, "failed").iter().filter(|v| *v == "1").count();
    assert_eq!(failures.to_string(), summary_field(&summary, "failures"));
}

#[test]
fn decoy_postponement_without_dmq() {
    let summary = stdout_ok(&["simulate", "--config", &config("decoy.conf")]);
    assert_eq!(summary_field(&summary, "failures"), "20");
    let open = stdout_ok(&[
        "simulate",
        "--config",
        &config("decoy.conf"),
        "--set",
        "trh=10000000",
        "--set",
        "trials=2",
    ]);
    assert_eq!(summary_field(&open, "failures"), "0");
    let max: f64 = summary_field(&open, "max_disturbance").parse().unwrap();
    assert!((max / 478_000.0 - 1.0).abs() <= 0.01, "{max}");
}

#[test]
fn empty_tracker_list() {
    let csv = stdout_ok(&["mintrh", "--set", "trackers="]);
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn k_of_one_matches_pattern_one() {
    let p1 = stdout_ok(&["mintrh", "--pattern", "p1"]);
    let k1 = stdout_ok(&["sweep", "--set", "sweep=k", "--set", "values=1"]);
    assert_eq!(column(&p1, "min_trh"), column(&k1, "min_trh"));
}

#[test]
fn flags_override_the_config_file() {
    let text = stdout_ok(&["config", "--config", &config("oracle.conf"), "--seed", "99", "--tracker", "parfm"]);
    assert!(text.contains("seed = 99\n"));
    assert!(text.contains("tracker = parfm\n"));
    assert!(text.contains("trh = 20\n"));
}

#[test]
fn printed_config_round_trips() {
    let path = std::env::temp_dir().join(format!("trhsim-config-{}.conf", std::process::id()));
    let first = stdout_ok(&["config", "--config", &config("postponement.conf")]);
    fs::write(&path, &first).unwrap();
    let second = stdout_ok(&["config", "--config", path.to_str().unwrap()]);
    fs::remove_file(&path).unwrap();
    assert_eq!(first, second);
}

fn assert_exit(args: &[&str], code: i32, needle: &str) {
    let out = trhsim(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(needle), "{args:?}: {stderr}");
}

#[test]
fn exit_codes() {
    assert_exit(&["mintrh", "--set", "bogus=1"], 1, "unknown key `bogus`");
    assert_exit(&["frobnicate"], 1, "unrecognized subcommand");
    assert_exit(&["mintrh", "--jobs", "many"], 1, "invalid value");
    assert_exit(&["sweep", "--set", "sweep=q"], 1, "unknown sweep variable");
    assert_exit(&["simulate", "--pattern", "p1"], 1, "needs `trh`");

    let path = std::env::temp_dir().join(format!("trhsim-bad-{}.conf", std::process::id()));
    fs::write(&path, "tracker = mint\nwindows = lots\n").unwrap();
    assert_exit(&["mintrh", "--config", path.to_str().unwrap()], 1, "line 2: invalid value");
    fs::remove_file(&path).unwrap();

    assert!(trhsim(&["--help"]).status.success());
}

#[test]
fn schedule_overflow_is_a_usage_error() {
    assert_exit(
        &[
            "simulate",
            "--pattern",
            "single",
            "--set",
            "trh=100",
            "--set",
            "schedule=postponed",
            "--set",
            "trials=1",
        ],
        1,
        "error",
    );
}

