//! Acceptance criterion 9: `detect` run twice with identical config and seed
//! produces byte-identical score-trace files.

use std::process::Command;

fn okgd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_okgd"))
}

#[test]
fn acceptance_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
[detector]
bp = 30
n_pre = 15
n_post = 10
seed = 42

[stream.synthetic]
kind = "cluster-swap"
clusters = 2
cluster_size = 3
tau = 70
horizon = 140
seed = 5
"#,
    )
    .unwrap();

    let run = |out: &str| {
        let status = okgd()
            .args(["detect", "--config"])
            .arg(&config)
            .args(["--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success(), "detect failed");
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");

    let ok = first == second && !first.is_empty();
    println!(
        "ACCEPTANCE 9 (byte determinism): {} — two seeded detect runs, {} bytes each",
        if ok { "PASS" } else { "FAIL" },
        first.len()
    );
    assert!(ok, "trace files differ between identical runs");
}
