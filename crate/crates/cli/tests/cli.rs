use std::process::Command;

use helmsweep_cli::read_csv;

fn helmsweep() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helmsweep"))
}

#[test]
fn table_writes_one_row_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let status = helmsweep()
        .args(["table", "--omega", "4,8", "--gamma", "6", "--b", "4", "--threads", "1", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(&dir.path().join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.converged && r.n_iter >= 1));
    assert_eq!(rows[0].config_hash, rows[1].config_hash);
}

#[test]
fn oracle_check_succeeds_on_small_problem() {
    let dir = tempfile::tempdir().unwrap();
    let status = helmsweep()
        .args(["oracle-check", "--omega", "4", "--dim", "2", "--gamma", "6", "--b", "4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn invalid_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "mode = \"table\"\nunknown_key = 1\n").unwrap();
    let out = helmsweep().args(["table", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
