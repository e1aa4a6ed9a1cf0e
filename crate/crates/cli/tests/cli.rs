use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::tempdir;
use umet_cli::{output_dir, run, ExperimentConfig, Scenario};

fn config(text: &str) -> ExperimentConfig {
    text.parse().unwrap()
}

fn read_table(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    lines.skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn umet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_umet"))
}

#[test]
fn umet_run_sup_reaches_zero() {
    let dir = tempdir().unwrap();
    let cfg = config(
        "scenario = umet-run\nmap = odometer:R=10\nfamily = dyadic_intervals:max_level=8\nn_schedule = [4, 16, 64, 256, 1024]\n",
    );
    let outcome = run(&cfg, "odometer", dir.path()).unwrap();
    assert!(outcome.failures.is_empty());
    let sups = read_table(&dir.path().join("umet-sup.csv"));
    let ns: Vec<&str> = sups.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(ns, ["4", "16", "64", "256", "1024"]);
    assert_eq!(sups[0][2..4], ["1", "8"]);
    assert_eq!(sups.last().unwrap()[2..4], ["0", "1"]);
    let members = read_table(&dir.path().join("umet-run.csv"));
    assert_eq!(members.len(), 5 * 510);
    assert!(members.iter().all(|r| r[0] == "odometer"));
    assert!(dir.path().join("SCHEMAS").exists());
}

#[test]
fn lemma_suite_is_byte_identical_across_runs() {
    let cfg = config("scenario = lemma-suite\nseeds = [3]\n");
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let first = run(&cfg, "lemmas", a.path()).unwrap();
    let second = run(&cfg, "lemmas", b.path()).unwrap();
    assert!(first.failures.is_empty() && second.failures.is_empty());
    for file in ["lemma-suite.csv", "dynamics-suite.csv", "SCHEMAS"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    let rows = read_table(&a.path().join("lemma-suite.csv"));
    assert_eq!(rows.len(), 700);
    let other = tempdir().unwrap();
    run(&config("scenario = lemma-suite\nseeds = [4]\n"), "lemmas", other.path()).unwrap();
    assert_ne!(fs::read(a.path().join("lemma-suite.csv")).unwrap(), fs::read(other.path().join("lemma-suite.csv")).unwrap());
}

#[test]
fn mixing_run_separates_zero_and_positive_entropy() {
    let dir = tempdir().unwrap();
    let cfg = config("scenario = mixing-run\nmap = doubling\nfamily = dyadic_intervals:max_level=4\nn_schedule = [4, 8]\n");
    run(&cfg, "dyadic", dir.path()).unwrap();
    let rows = read_table(&dir.path().join("mixing-run.csv"));
    assert!(rows.iter().filter(|r| r[1] == "strong").all(|r| r[4] == "0"));

    let cfg = config("scenario = mixing-run\nmap = doubling\nfamily = digit_sets:max_index=16\nn_schedule = [8]\n");
    run(&cfg, "digits", dir.path()).unwrap();
    let rows = read_table(&dir.path().join("mixing-run.csv"));
    let sup = rows.iter().find(|r| r[1] == "strong" && r[6] == "true").unwrap();
    assert_eq!(sup[3..6], ["8:0", "1", "4"]);
}

#[test]
fn entropy_and_vc_scenarios() {
    let dir = tempdir().unwrap();
    let cfg = config("scenario = entropy-profile\nfamily = digit_sets:max_index=16\nhorizon = 12\nepsilon = 1/2\n");
    run(&cfg, "digits", dir.path()).unwrap();
    let profile = read_table(&dir.path().join("entropy-profile.csv"));
    assert_eq!(profile.len(), 12);
    for row in &profile {
        let (value, err): (f64, f64) = (row[5].parse().unwrap(), row[6].parse().unwrap());
        assert!((value - 1.0).abs() <= err && err <= 1e-9);
    }
    let cert = read_table(&dir.path().join("entropy-certificate.csv"));
    assert_eq!(cert[0][4], "");

    let cfg = config("scenario = entropy-profile\nfamily = dyadic_intervals:max_level=3\nhorizon = 4\nepsilon = 1/8\nresolution = 5\n");
    run(&cfg, "dyadic", dir.path()).unwrap();
    assert_eq!(read_table(&dir.path().join("entropy-certificate.csv"))[0][4], "3");

    run(&config("scenario = vc-dim\nfamily = digit_sets:max_index=6\nhorizon = 4\n"), "vc", dir.path()).unwrap();
    assert_eq!(read_table(&dir.path().join("vc-dim.csv"))[0][3], "4");
}

#[test]
fn adversary_run_reports_all_claims() {
    let dir = tempdir().unwrap();
    let cfg = config("scenario = adversary-run\nfamily = digit_sets:max_index=16\nepsilon = 1/4\nseeds = [9]\n");
    let outcome = run(&cfg, "adversary", dir.path()).unwrap();
    assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
    let checks = read_table(&dir.path().join("adversary-checks.csv"));
    assert!(checks.iter().filter(|r| r[10] == "true").all(|r| r[9] == "true"));
    for stage in ["tower_conjugacy", "conjugacy_identity", "weak_distance", "bad_average"] {
        assert!(checks.iter().any(|r| r[1] == stage), "{stage}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("adversary-run.json")).unwrap()).unwrap();
    assert_eq!(report["claim1"]["holds"], true);
    assert_eq!(report["trace"]["accepted"], true);
    assert!(!report["trace"]["psi"].is_null() && !report["new_phi"].is_null());
    let trials = read_table(&dir.path().join("adversary-trials.csv"));
    assert_eq!(trials.len(), 1);
    assert_eq!(trials[0][10..12], ["true", "true"]);
}

#[test]
fn config_round_trips() {
    for text in [
        "scenario = adversary-run\nmap = rotation:alpha=1/3\nfamily = digit_sets:max_index=4\nepsilon = 1/4\nresolution = 6\nseeds = [1, 2]\noutput = \"x y\"\n",
        "scenario = mixing-run\nmap = odometer:R=3\nfamily = explicit:[[0/1..1/2], [1/4..3/4]]\nn_schedule = [1, 2, 3]\n",
        "scenario = entropy-profile\nfamily = orbit:horizon=4,seed=[0/1..1/3],map=doubling\nhorizon = 3\n",
    ] {
        let cfg = config(text);
        let again: ExperimentConfig = cfg.to_string().parse().unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_string(), cfg.to_string());
    }
}

#[test]
fn out_dir_override() {
    let mut cfg = ExperimentConfig::new(Scenario::VcDim);
    assert_eq!(output_dir(&cfg, None), Path::new("out/vc-dim"));
    cfg.output = Some("results".into());
    assert_eq!(output_dir(&cfg, None), Path::new("results"));
    assert_eq!(output_dir(&cfg, Some("elsewhere")), Path::new("elsewhere"));
    assert_eq!(output_dir(&cfg, Some("")), Path::new("results"));

    let dir = tempdir().unwrap();
    let conf = dir.path().join("vc.conf");
    fs::write(&conf, "scenario = vc-dim\nfamily = digit_sets:max_index=3\noutput = \"ignored\"\n").unwrap();
    let target = dir.path().join("override");
    let status = umet().arg("run").arg(&conf).env("UMET_OUT_DIR", &target).current_dir(dir.path()).status().unwrap();
    assert!(status.success());
    assert!(target.join("vc-dim.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn binary_reports_positions_and_exit_codes() {
    let dir = tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "scenario = umet-run\nn_schedule = [16, 4]\n").unwrap();
    let out = umet().arg("validate").arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.conf:2:19: n_schedule must be strictly increasing"), "{err}");

    fs::write(&conf, "scenario = umet-run\nfamily = digit_sets:max_index=2\n").unwrap();
    let out = umet().arg("validate").arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("needs `map`"));

    let out = umet().args(["describe", "odometer:R=2"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("invertible: true"));
    let out = umet().args(["describe", "dyadic_intervals:max_level=3"]).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("horizon: 14 members"));
    assert_eq!(umet().args(["describe", "nonsense"]).output().unwrap().status.code(), Some(2));
}
