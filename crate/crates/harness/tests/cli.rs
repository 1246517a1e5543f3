use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hn")).args(args).output().expect("spawn hn")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run_ok(sub: &str, cfg: &str, out: &Path) -> String {
    let o = hn(&[sub, "--config", cfg, "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(o.status.code(), Some(0), "{stdout}\n{}", String::from_utf8_lossy(&o.stderr));
    stdout
}

const SMALL_TIME: &str = r#"
experiment = "time-convergence"
mode = "direct"
N = 6
T = 0.25
dts = [0.0625, 0.03125]
compare_modes = true
[checks]
mode_gap = 1e-10
"#;

#[test]
fn weights_dump_writes_manifest_and_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "w.toml", "experiment = \"weights-dump\"\ndt = 0.01\nK = 200\npanels = [[0.5, 0.5], [0.2, 0.9]]\n");
    let out = dir.path().join("out");
    let stdout = run_ok("weights-dump", &cfg, &out);
    assert!(stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(!stdout.contains("FAIL"));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "weights-dump");
    let csvs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")).count();
    assert!(csvs >= 2, "{csvs}");
}

#[test]
fn direct_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "t.toml", SMALL_TIME);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok("time-convergence", &cfg, &a);
    run_ok("time-convergence", &cfg, &b);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).filter(|n| n.to_string_lossy().ends_with(".csv")).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn mode_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "t.toml", SMALL_TIME);
    let out = dir.path().join("o");
    let o = hn(&["time-convergence", "--config", &cfg, "--out", out.to_str().unwrap(), "--mode", "fast"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["mode"], "fast");
}

#[test]
fn failing_gate_exits_one() {
    let dir = TempDir::new().unwrap();
    // two steps at N = 6 are nowhere near first order
    let cfg = write_config(dir.path(), "t.toml", &format!("{SMALL_TIME}order_range = [5.0, 6.0]\n"));
    let o = hn(&["time-convergence", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn wrong_subcommand_or_bad_file_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "t.toml", SMALL_TIME);
    let out = dir.path().join("o");
    assert_eq!(hn(&["energy", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(2));
    let bad = write_config(dir.path(), "bad.toml", "experiment = \"energy\"\nN = 4\nNt = 3\ndt = 0.1\n[medium]\nbeta = 0.0\n");
    assert_eq!(hn(&["energy", "--config", &bad, "--out", out.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(hn(&["energy", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        hn_harness::RunConfig::load(&p).unwrap_or_else(|err| panic!("{}: {err}", p.display()));
        n += 1;
    }
    assert!(n >= 10);
}
