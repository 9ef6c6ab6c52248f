//! End-to-end checks of the command-line surface: validation exit codes,
//! deterministic scenario and sweep outputs, simulation from a spec file,
//! and calibration smoke runs with resume.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_dir(country: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("data")
        .join(country)
}

fn epinomics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epinomics"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn validate_clean_datasets_exit_zero() {
    for country in ["BE", "SWE"] {
        let out = epinomics(&["validate", data_dir(country).to_str().unwrap()]);
        assert!(out.status.success(), "{}", stdout(&out));
        assert!(stdout(&out).contains("OK"));
    }
}

#[test]
fn validate_corrupted_dataset_reports_row_and_fails() {
    // Corrupt one row of the IO vectors in a copy of the Belgian data.
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(data_dir("BE")).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let path = dir.path().join("io_vectors.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(|l| l.to_string()).collect();
    // Row 3 = second sector: inflate x0 by 10x.
    let fields: Vec<&str> = lines[2].split(',').collect();
    let inflated: f64 = fields[1].parse::<f64>().unwrap() * 10.0;
    lines[2] = format!(
        "{},{},{},{},{}",
        fields[0], inflated, fields[2], fields[3], fields[4]
    );
    fs::write(&path, lines.join("\n") + "\n").unwrap();

    let out = epinomics(&["validate", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("io-accounting-identity") && text.contains("row 3"),
        "diagnostic missing: {text}"
    );
}

#[test]
fn scenario_runs_are_deterministic_and_summarized() {
    let dataset = data_dir("SWE");
    let run = |out_dir: &Path| {
        let out = epinomics(&[
            "scenario",
            "scenario3",
            "--dataset",
            dataset.to_str().unwrap(),
            "--country",
            "SWE",
            "--nu",
            "28",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a);
    run(&b);
    for name in ["summary.csv", "record-scenario3-SWE-nu28.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    assert!(a.join("run-manifest.json").exists());
}

#[test]
fn scenario1_grid_produces_thirty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = epinomics(&[
        "scenario",
        "scenario1",
        "--dataset",
        data_dir("BE").to_str().unwrap(),
        "--country",
        "BE",
        "--workers",
        "4",
        "--fidelity",
        "reduced",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count() - 1, 30, "5 policies x 6 dates");
    let records = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("record-")
        })
        .count();
    assert_eq!(records, 30);
}

#[test]
fn scenario3_grid_runs_three_two_year_variants() {
    let dir = tempfile::tempdir().unwrap();
    let out = epinomics(&[
        "scenario",
        "scenario3",
        "--dataset",
        data_dir("BE").to_str().unwrap(),
        "--country",
        "BE",
        "--workers",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count() - 1, 3);
    // Two simulated years per run.
    let record = fs::read_to_string(dir.path().join("record-scenario3-BE-nu7.csv")).unwrap();
    let mut dates: Vec<&str> = record.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    dates.dedup();
    assert_eq!(dates.len(), 730);
}

#[test]
fn scenario2_grid_runs_four_release_variants() {
    let dir = tempfile::tempdir().unwrap();
    let out = epinomics(&[
        "scenario",
        "scenario2",
        "--dataset",
        data_dir("BE").to_str().unwrap(),
        "--country",
        "BE",
        "--workers",
        "4",
        "--fidelity",
        "reduced",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count() - 1, 4);
}

#[test]
fn sweep_runs_one_record_per_value_and_rejects_empty_lists() {
    let dir = tempfile::tempdir().unwrap();
    let out = epinomics(&[
        "sweep",
        "nu",
        "7,62",
        "--dataset",
        data_dir("BE").to_str().unwrap(),
        "--country",
        "BE",
        "--fidelity",
        "reduced",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("record-sweep-nu-7.csv").exists());
    assert!(dir.path().join("record-sweep-nu-62.csv").exists());

    let out = epinomics(&[
        "sweep",
        "nu",
        "",
        "--dataset",
        data_dir("BE").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());

    let out = epinomics(&[
        "sweep",
        "not_a_parameter",
        "1,2",
        "--dataset",
        data_dir("BE").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}

#[test]
fn summary_rows_are_recomputable_from_record_csvs() {
    // The summary table must be derivable from the per-run records: rebuild
    // the Q2 cumulative IC count and output reduction from the tidy CSV.
    let dir = tempfile::tempdir().unwrap();
    let out = epinomics(&[
        "scenario",
        "scenario1",
        "--dataset",
        data_dir("BE").to_str().unwrap(),
        "--country",
        "BE",
        "--policy",
        "P3",
        "--date",
        "2020-03-15",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let record_path = dir.path().join("record-scenario1-P3-2020-03-15.csv");
    let text = fs::read_to_string(&record_path).unwrap();
    let mut cumulative_incidence = 0.0f64;
    let mut x_by_date: std::collections::BTreeMap<String, f64> = Default::default();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let (date, variable, value) = (fields[0], fields[1], fields[3].parse::<f64>().unwrap());
        let in_q2 = ("2020-04-01".."2020-07-01").contains(&date);
        if variable == "hosp_incidence" && in_q2 {
            cumulative_incidence += value;
        }
        if variable == "x" && in_q2 {
            *x_by_date.entry(date.to_string()).or_insert(0.0) += value;
        }
    }
    let ic_fraction = 0.175;
    let recomputed_ic = cumulative_incidence * ic_fraction;

    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let summary_output: f64 = row[4].parse().unwrap();
    let summary_ic: f64 = row[6].parse().unwrap();
    assert!(
        (recomputed_ic - summary_ic).abs() / summary_ic < 1e-9,
        "recomputed IC {recomputed_ic} vs summary {summary_ic}"
    );
    // National baseline output for the packaged Belgian tables.
    let x0_total = 1_103_179.0;
    let days = x_by_date.len() as f64;
    let mean_x: f64 = x_by_date.values().sum::<f64>() / days;
    let recomputed_output = 100.0 * (mean_x / x0_total - 1.0);
    assert!(
        (recomputed_output - summary_output).abs() < 0.05,
        "recomputed output {recomputed_output} vs summary {summary_output}"
    );
}

#[test]
fn simulate_runs_a_spec_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"
name = "toy"
country = "SWE"
start = "2020-03-01"
end = "2020-05-01"
seasonality = false
holidays = false
exogenous_shocks = false
awareness = "pre-triggered"

[[seeds]]
patch = "Stockholm"
exposed = 1.0

[params]
beta = 0.034
"#;
    let spec_path = dir.path().join("toy.toml");
    fs::write(&spec_path, spec).unwrap();
    let out = epinomics(&[
        "simulate",
        "--spec",
        spec_path.to_str().unwrap(),
        "--dataset",
        data_dir("SWE").to_str().unwrap(),
        "--set",
        "nu=28",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("out/record-toy.csv").exists());
}

#[test]
fn calibrate_smoke_run_writes_chain_and_resumes_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let be_dir = data_dir("BE");
    let base = [
        "calibrate",
        "--dataset",
        be_dir.to_str().unwrap(),
        "--country",
        "BE",
        "--fidelity",
        "reduced",
        "--walkers",
        "24",
        "--steps",
        "3",
        "--seed",
        "7",
        "--skip-initial-condition",
    ];
    let mut args: Vec<&str> = base.to_vec();
    let first_str = first.to_str().unwrap().to_string();
    args.extend(["--out", &first_str]);
    let out = epinomics(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["chain.csv", "best-fit.toml", "diagnostics.csv"] {
        assert!(first.join(name).exists(), "{name} missing");
    }

    // Resuming from the chain twice gives identical continuations.
    let chain = first.join("chain.csv");
    let resume = |out_dir: &Path| {
        let mut args: Vec<String> = base.iter().map(|s| s.to_string()).collect();
        args.extend([
            "--resume".to_string(),
            chain.to_str().unwrap().to_string(),
            "--out".to_string(),
            out_dir.to_str().unwrap().to_string(),
        ]);
        let out = Command::new(env!("CARGO_BIN_EXE_epinomics"))
            .args(&args)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let (ra, rb) = (dir.path().join("ra"), dir.path().join("rb"));
    resume(&ra);
    resume(&rb);
    assert_eq!(
        fs::read(ra.join("chain.csv")).unwrap(),
        fs::read(rb.join("chain.csv")).unwrap(),
        "resumed chains differ"
    );

    // Missing observations file is a clean error.
    let empty = tempfile::tempdir().unwrap();
    let out = epinomics(&[
        "calibrate",
        "--dataset",
        empty.path().to_str().unwrap(),
        "--country",
        "BE",
        "--out",
        dir.path().join("none").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}
