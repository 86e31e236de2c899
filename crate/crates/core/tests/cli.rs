use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn fandom() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fandom"))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/synthetic")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn missing_input_exits_non_zero_with_path() {
    let tmp = TempDir::new().unwrap();
    let out = fandom()
        .args(["ingest", "--posts", "/definitely/not/here.csv", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.csv"));
}

#[test]
fn help_documents_schemas() {
    let out = fandom().args(["burstiness", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("team_id,emotion,n_tau,mu,sigma,r,B,B_n,M,lag"));
    let out = fandom().args(["ingest", "--help"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout)
        .contains("team_id,timestamp,n_comments,joy,anger,sadness,fear"));
}

#[test]
fn stages_chain_through_the_binary() {
    let tmp = TempDir::new().unwrap();
    let dir = |s: &str| tmp.path().join(s).to_string_lossy().into_owned();
    let run = |args: &[&str]| {
        let out = fandom().args(args).output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&[
        "ingest",
        "--posts",
        &fixture("posts.csv"),
        "--out",
        &dir("ingest"),
    ]);
    run(&[
        "burstiness",
        "--series",
        &dir("ingest"),
        "--emotions",
        "all",
        "--out",
        &dir("burst"),
    ]);
    run(&[
        "cluster",
        "--series",
        &dir("ingest"),
        "--metadata",
        &fixture("metadata.csv"),
        "--method",
        "kmeans",
        "--k",
        "3",
        "--seed",
        "7",
        "--out",
        &dir("km"),
    ]);
    run(&[
        "cluster",
        "--series",
        &dir("ingest"),
        "--metadata",
        &fixture("metadata.csv"),
        "--linkage",
        "complete",
        "--geo-target",
        "3,1,0",
        "--out",
        &dir("hc"),
    ]);
    run(&[
        "regress",
        "--metadata",
        &fixture("metadata.csv"),
        "--burstiness",
        &format!("{}/burstiness.csv", dir("burst")),
        "--predictors",
        "heritage,pci,mv,welfare,b_joy",
        "--drop",
        "b_joy",
        "--per-league",
        "--out",
        &dir("reg"),
    ]);
    run(&[
        "simulate",
        "--kind",
        "markov",
        "--n",
        "50",
        "--seed",
        "3",
        "--out",
        &dir("sim"),
    ]);

    let burst = std::fs::read_to_string(tmp.path().join("burst/burstiness.csv")).unwrap();
    assert!(burst.lines().any(|l| l.contains(",sadness,")));
    assert!(tmp.path().join("hc/convention_report.json").is_file());
    assert!(tmp.path().join("reg/regression.json").is_file());
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("sim/events.csv"))
            .unwrap()
            .lines()
            .count(),
        51
    );

    let bad = fandom()
        .args([
            "regress",
            "--metadata",
            &fixture("metadata.csv"),
            "--burstiness",
            &format!("{}/burstiness.csv", dir("burst")),
            "--drop",
            "b_love",
            "--out",
            &dir("x"),
        ])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
