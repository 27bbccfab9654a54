use std::fs;
use std::path::Path;

use assert_cmd::Command;
use predicates::prelude::*;
use tempfile::TempDir;

fn pitsim(dir: &Path) -> Command {
    let mut cmd = Command::cargo_bin("pitsim").unwrap();
    cmd.current_dir(dir).env_remove("PITSIM_LOG");
    cmd
}

fn count_files(dir: &Path) -> usize {
    fs::read_dir(dir).unwrap().count()
}

#[test]
fn run_writes_all_artifacts() {
    let tmp = TempDir::new().unwrap();
    pitsim(tmp.path())
        .args(["run", "-d", "SQDispatcher", "-t", "20", "--frames", "0..4"])
        .assert()
        .success()
        .stdout(predicate::str::contains("produced tons"));
    let dir = tmp.path().join("out/SQDispatcher-seed42");
    for f in [
        "config.json",
        "ticks.ndjson",
        "events.ndjson",
        "run.log",
        "summary.csv",
        "summary.md",
        "production.csv",
        "production.svg",
        "waiting.csv",
        "waiting.svg",
    ] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    assert_eq!(count_files(&dir.join("frames")), 5);
    let ticks = fs::read_to_string(dir.join("ticks.ndjson")).unwrap();
    // header plus ticks at 0..=20
    assert_eq!(ticks.lines().count(), 22);
    let csv = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(csv.starts_with("Name,Produced Tons,Matching Factor,Total Wait Time,Road Jams,ADL\n"));
}

#[test]
fn one_minute_run_has_two_ticks() {
    let tmp = TempDir::new().unwrap();
    pitsim(tmp.path())
        .args(["run", "-d", "NaiveDispatcher", "-t", "1", "--seed", "3"])
        .assert()
        .success();
    let ticks =
        fs::read_to_string(tmp.path().join("out/NaiveDispatcher-seed3/ticks.ndjson")).unwrap();
    assert_eq!(ticks.lines().count(), 3);
}

#[test]
fn repeated_runs_match_except_adl() {
    let tmp = TempDir::new().unwrap();
    for out in ["a", "b"] {
        pitsim(tmp.path())
            .args([
                "run",
                "-d",
                "SPTFDispatcher",
                "-t",
                "45",
                "--seed",
                "9",
                "-o",
                out,
            ])
            .assert()
            .success();
    }
    let a = tmp.path().join("a/SPTFDispatcher-seed9");
    let b = tmp.path().join("b/SPTFDispatcher-seed9");
    for f in [
        "config.json",
        "ticks.ndjson",
        "events.ndjson",
        "run.log",
        "production.csv",
        "waiting.csv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let strip_adl = |p: &Path| -> Vec<String> {
        fs::read_to_string(p.join("summary.csv"))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip_adl(&a), strip_adl(&b));
}

#[test]
fn unknown_dispatcher_lists_registered() {
    let tmp = TempDir::new().unwrap();
    pitsim(tmp.path())
        .args(["run", "-d", "Bogus", "-t", "5"])
        .assert()
        .code(1)
        .stderr(
            predicate::str::contains("Bogus").and(predicate::str::contains("FixedGroupDispatcher")),
        );
}

#[test]
fn compare_writes_report() {
    let tmp = TempDir::new().unwrap();
    pitsim(tmp.path())
        .args(["compare", "-d", "SQDispatcher", "--seed", "1", "-t", "30"])
        .assert()
        .success()
        .stdout(predicate::str::contains("| SQDispatcher |"));
    let dir = tmp.path().join("out/compare");
    for f in [
        "summary.csv",
        "summary.md",
        "per_seed.csv",
        "production.svg",
        "waiting.svg",
    ] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let csv = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn visualize_ranges() {
    let tmp = TempDir::new().unwrap();
    pitsim(tmp.path())
        .args(["run", "-d", "RandomDispatcher", "-t", "240"])
        .assert()
        .success();
    let archive = tmp.path().join("out/RandomDispatcher-seed42/ticks.ndjson");
    let archive = archive.to_str().unwrap();

    pitsim(tmp.path())
        .args(["visualize", archive, "-o", "all"])
        .assert()
        .success();
    assert_eq!(count_files(&tmp.path().join("all")), 241);

    pitsim(tmp.path())
        .args(["visualize", archive, "--frames", "0..0", "-o", "single"])
        .assert()
        .success();
    assert!(tmp.path().join("single/frame_00000.svg").is_file());
    assert_eq!(count_files(&tmp.path().join("single")), 1);

    pitsim(tmp.path())
        .args(["visualize", archive, "--frames", "7..3"])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("inverted"));
    pitsim(tmp.path())
        .args(["visualize", archive, "--frames", "0..241"])
        .assert()
        .code(1);
}

#[test]
fn validate_reports_field_paths() {
    let tmp = TempDir::new().unwrap();
    let emitted = pitsim(tmp.path()).arg("config-emit").output().unwrap();
    assert!(emitted.status.success());
    let mut config: serde_json::Value = serde_json::from_slice(&emitted.stdout).unwrap();
    config["charging_site"]["fleets"][0]["speed"] = (-1.0).into();
    config["load_sites"][1]["shovels"][0]["bucket_size"] = 0.0.into();
    fs::write(tmp.path().join("bad.json"), config.to_string()).unwrap();
    pitsim(tmp.path())
        .args(["validate", "-f", "bad.json"])
        .assert()
        .code(1)
        .stderr(
            predicate::str::contains("charging_site.fleets[0].speed").and(
                predicate::str::contains("load_sites[1].shovels[0].bucket_size"),
            ),
        );
    pitsim(tmp.path())
        .args(["run", "-f", "bad.json", "-d", "SQDispatcher"])
        .assert()
        .code(1);
}

#[test]
fn config_emit_round_trips() {
    let tmp = TempDir::new().unwrap();
    pitsim(tmp.path())
        .args(["config-emit", "-o", "scenario.json"])
        .assert()
        .success();
    pitsim(tmp.path())
        .args(["validate", "-f", "scenario.json"])
        .assert()
        .success()
        .stdout(predicate::str::contains("71 trucks"));
    let again = pitsim(tmp.path())
        .args(["config-emit", "-f", "scenario.json"])
        .output()
        .unwrap();
    let first = fs::read_to_string(tmp.path().join("scenario.json")).unwrap();
    assert_eq!(
        first.trim_end(),
        String::from_utf8(again.stdout).unwrap().trim_end()
    );
}

#[test]
fn schema_and_policies() {
    let tmp = TempDir::new().unwrap();
    let out = pitsim(tmp.path()).arg("schema").output().unwrap();
    let schema: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(schema["title"], "MineConfig");
    pitsim(tmp.path())
        .arg("policies")
        .assert()
        .success()
        .stdout("NaiveDispatcher\nRandomDispatcher\nNearestDispatcher\nSQDispatcher\nSPTFDispatcher\nFixedGroupDispatcher\n");
}
