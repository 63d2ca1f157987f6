use std::path::Path;
use std::process::{Command, Output};

fn sievelab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sievelab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn weights_listing() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["weights", "--w", "2", "--z", "10", "--D", "30", "--side", "plus"], dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("weights.txt")).unwrap();
    let ds: Vec<u64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ds, vec![1, 2, 3, 6]);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn weights_without_levels_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["weights", "--z", "10", "--D", "30"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn sandwich_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["weights", "--w", "2", "--z", "20", "--D", "200", "--nmax", "20000"], dir.path());
    assert_eq!(code(&o), 0);
    let report = std::fs::read_to_string(dir.path().join("sandwich.txt")).unwrap();
    assert!(report.lines().all(|l| l.contains("pass")));
}

#[test]
fn main_term_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["main-term", "--eps-prime", "0"], dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("main_term.txt")).unwrap();
    let kv = sievelab::main_term::parse_kv(&text).unwrap();
    let v: f64 = kv["asymptotic_bound"].parse().unwrap();
    assert!((v - 0.037007618373125).abs() < 1e-11);
}

#[test]
fn budget_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["scan", "--X", "100000000000", "--h", "10"], dir.path());
    assert_eq!(code(&o), 3);
    let o = sievelab(&["main-term", "--w", "2", "--z", "1000", "--D", "1e12"], dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn invalid_scan_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["scan", "--X", "1000", "--h", "40"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn scan_config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"X": 100000, "h": 5, "colour": "red"}"#).unwrap();
    let o = sievelab(&["scan", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code(&o), 2);
}

#[test]
fn failed_check_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["mean-square", "--X", "10000", "--H", "5", "--lambda", "1:1,2:-1,3:-1,6:1", "--max-ratio", "0"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn identities_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = sievelab(&["identities", "--ksum-cmax", "100", "--ksum-hmax", "50", "--bridge-cmax", "20", "--opera-trials", "20"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = sievelab(&["identities", "--ksum-cmax", "5", "--ksum-hmax", "5", "--bridge-cmax", "5", "--opera-trials", "5", "--opera-form", "displayed"], dir.path());
    assert_eq!(code(&o), 1);
}

fn assert_replay_identical(args: &[&str], reports: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&sievelab(args, &a)), 0);
    let manifest = a.join("manifest.json");
    let o = Command::new(env!("CARGO_BIN_EXE_sievelab"))
        .args(["replay", manifest.to_str().unwrap(), "--out", b.to_str().unwrap(), "--workers", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    for r in reports {
        assert_eq!(std::fs::read(a.join(r)).unwrap(), std::fs::read(b.join(r)).unwrap(), "{r}");
    }
}

#[test]
fn replay_scan() {
    assert_replay_identical(&["scan", "--X", "200000", "--h", "8", "--stride", "3"], &["scan.csv", "summary.json"]);
}

#[test]
fn replay_scan_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"X": 100000, "h": 5, "stride": 11}"#).unwrap();
    assert_replay_identical(&["scan", "--config", cfg.to_str().unwrap()], &["scan.csv", "summary.json"]);
}

#[test]
fn replay_mean_square_and_main_term() {
    assert_replay_identical(&["mean-square", "--X", "10000", "--H", "5", "--preset", "lambda-minus"], &["mean_square.txt"]);
    assert_replay_identical(&["main-term", "--w", "2", "--z", "20", "--D", "200"], &["main_term.txt"]);
}

#[test]
fn manifest_records_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sievelab(&["scan", "--X", "100000", "--h", "4"], dir.path())), 0);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"]["subcommand"], "scan");
    assert_eq!(m["command"]["resolved"]["X"], 100000);
    assert_eq!(m["command"]["resolved"]["theta_r"], 0.125);
}
