use std::process::Command;

use mpqkd::harness::AggregateReport;

fn mpqkd() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mpqkd"));
    cmd.env_remove("MPQKD_SEED");
    cmd
}

#[test]
fn run_writes_a_verifiable_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    let out = dir.path().join("out.jsonl");
    std::fs::write(&config, "protocol = pm\nparties = 3\nn = 8\nseed = 5\ntrials = 12\n").unwrap();
    let status = mpqkd()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report = AggregateReport::from_json_lines(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.records.len(), 12);
    assert_eq!(report.summary.master_seed, 5);
    assert_eq!(report.summary.key_agreement_rate, Some(1.0));
}

#[test]
fn seed_precedence_is_file_then_env_then_flag() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    std::fs::write(&config, "protocol = css\nn = 4\nseed = 1\ntrials = 2\n").unwrap();
    let seed_of = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = mpqkd();
        cmd.args(["run", "--config"]).arg(&config);
        if let Some(e) = env {
            cmd.env("MPQKD_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        AggregateReport::from_json_lines(&String::from_utf8(out.stdout).unwrap())
            .unwrap()
            .summary
            .master_seed
    };
    assert_eq!(seed_of(None, None), 1);
    assert_eq!(seed_of(Some("7"), None), 7);
    assert_eq!(seed_of(Some("7"), Some("9")), 9);
}

#[test]
fn bad_config_exits_nonzero_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "protocol = pm\nparties = 2\n").unwrap();
    let out = mpqkd().args(["run", "--config"]).arg(&config).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("parties"), "{err}");
}

#[test]
fn oracle_and_codes_subcommands_succeed() {
    assert!(mpqkd().args(["oracle", "--code", "repetition3"]).output().unwrap().status.success());
    let out = mpqkd().arg("codes").output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("css steane: [[7, 1]] corrects 1"));
}
