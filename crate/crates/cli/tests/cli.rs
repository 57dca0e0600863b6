use std::process::{Command, Output};

use ppswap_cli::report::{
    ActionDoc, Crossing, ExitRowDoc, NodeRow, SimulateDoc, SolveDoc, SweepDoc, SweepRowDoc,
    ThresholdRow, ThresholdsDoc, VerifyDoc, VerifyMode, SCHEMA_VERSION,
};
use tempfile::TempDir;

fn ppswap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppswap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_config(dir: &TempDir, body: &str) -> String {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows<T: serde::de::DeserializeOwned>(text: &str) -> Vec<T> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn baseline_solve_stops_after_opening() {
    let o = ppswap(&["solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: SolveDoc = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.schema_version, SCHEMA_VERSION);
    assert_eq!(doc.malicious_stop_steps, vec![1, 2]);
    assert!(!doc.malicious_continue_everywhere);
    assert_eq!(doc.nodes.len(), 2 * 6);
    assert!(doc.strictly_positive_prices);
}

#[test]
fn delta_above_limit_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "p0 = 100\ndelta = 51\nn_packets = 2\n");
    let o = ppswap(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("delta <= p0 / horizon"),
        "{}",
        stderr(&o)
    );
    assert!(o.stdout.is_empty());
}

#[test]
fn collateral_above_minima_keeps_everyone_honest() {
    let dir = TempDir::new().unwrap();
    for disposition in ["burned", "transferred"] {
        let cfg = with_config(
            &dir,
            &format!(
                "collateral_a = 61\ncollateral_b = 56\nmu_a = 0.5\nmu_b = 0.5\n\
                 collateral_disposition = \"{disposition}\"\n"
            ),
        );
        let o = ppswap(&["solve", "--config", &cfg, "--format", "delimited"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let rows: Vec<NodeRow> = csv_rows(&stdout(&o));
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.action == ActionDoc::Continue));
    }
}

#[test]
fn unknown_key_is_named() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "p0 = 100\nmu_c = 0.5\n");
    let o = ppswap(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mu_c"), "{}", stderr(&o));
}

#[test]
fn bad_flag_exits_one() {
    let o = ppswap(&["solve", "--formt", "structured"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ppswap(&["simulate", "--workers", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn thresholds_reference_values() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "alpha_b = 50\nalpha_a = 40\n");
    let o = ppswap(&["thresholds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: ThresholdsDoc = serde_json::from_str(&stdout(&o)).unwrap();
    let cf = doc.closed_form.unwrap();
    assert_eq!(cf.bob_mu_min, 0.689655172414);
    assert_eq!(cf.alice_alpha_min, 30.0);
    assert_eq!(cf.alice_mu_min, 0.384615384615);
    assert_eq!(
        (cf.collateral_bob_min, cf.collateral_alice_min),
        (55.0, 60.0)
    );
    let Crossing::At(x) = doc.numeric.bob_mu_min else {
        panic!("no flip")
    };
    assert!((x - 200.0 / 290.0).abs() < 1e-9);

    let o = ppswap(&["thresholds", "--config", &cfg, "--format", "delimited"]);
    let rows: Vec<ThresholdRow> = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 10);
}

#[test]
fn default_verification_has_no_disagreements() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("verify.json");
    let o = ppswap(&["verify", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("0 disagreements"), "{}", stderr(&o));
    let doc: VerifyDoc = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.mode, VerifyMode::ClosedForm);
    assert!(doc.passed && doc.disagreements.is_empty());
    let summary = doc.summary.unwrap();
    assert_eq!(summary.points, 27225);
    assert_eq!(summary.disagreements, 0);
}

#[test]
fn verify_flags_unsatisfiable_rows_and_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(
        &dir,
        "alpha_b = 0\n[[sweep]]\nparam = \"mu_a\"\nfrom = 0\nto = 1\nsteps = 6\n",
    );
    let o = ppswap(&["verify", "--config", &cfg, "--format", "delimited"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<SweepRowDoc> = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert!(rows
        .iter()
        .all(|r| r.unsatisfiable && r.agree == Some(true)));
}

#[test]
fn verify_numeric_mode_for_other_packet_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "n_packets = 4\ndelta = 5\n");
    let o = ppswap(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("numeric"));
    let doc: VerifyDoc = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.mode, VerifyMode::Numeric);
    assert!(doc.summary.is_none() && doc.numeric.is_some());
}

#[test]
fn simulate_matches_reference() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(
        &dir,
        "mu_a = 0.9\nmu_b = 0.8\nseed = 42\nsamples = 100000\n",
    );
    let o = ppswap(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: SimulateDoc = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.reference.rate, 0.28);
    assert!(doc.reference.applies && doc.reference.within_three_std_errors);
    assert_eq!(doc.exit_histogram.iter().sum::<u64>(), 100_000);
    assert!(doc.exits.iter().all(|r| r.within_bound));
}

#[test]
fn simulate_is_byte_identical_across_workers() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "mu_a = 0.7\nmu_b = 0.6\nn_packets = 3\ndelta = 20\n");
    let run = |workers: &str, format: &str| {
        let o = ppswap(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            "9",
            "--samples",
            "20000",
            "--workers",
            workers,
            "--format",
            format,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        o.stdout
    };
    for format in ["structured", "delimited"] {
        let first = run("1", format);
        for workers in ["4", "1", "4"] {
            assert_eq!(first, run(workers, format));
        }
    }
}

#[test]
fn single_sample_run_is_valid() {
    let o = ppswap(&["simulate", "--samples", "1", "--format", "delimited"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<ExitRowDoc> = csv_rows(&stdout(&o));
    assert_eq!(rows.iter().map(|r| r.count).sum::<u64>(), 1);
    assert!(rows.iter().all(|r| r.schema_version == SCHEMA_VERSION));
}

#[test]
fn sweep_round_trips_in_both_formats() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(
        &dir,
        "[[sweep]]\nparam = \"delta\"\nfrom = 0\nto = 60\nsteps = 4\n\
         [[sweep]]\nparam = \"alpha_b\"\nfrom = 0\nto = 100\nsteps = 3\n",
    );
    let o = ppswap(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<SweepRowDoc> = csv_rows(&stdout(&o));
    // delta = 60 exceeds p0 / 2; those three points are skipped with a note.
    assert_eq!(rows.len(), 9);
    assert_eq!(stderr(&o).lines().count(), 3);

    let o = ppswap(&["sweep", "--config", &cfg, "--format", "structured"]);
    let doc: SweepDoc = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.rows, rows);
    assert_eq!((doc.summary.points, doc.summary.skipped), (12, 3));
}

#[test]
fn out_path_must_be_writable() {
    let o = ppswap(&["solve", "--out", "/nonexistent-dir/report.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent-dir/report.json"));
}
