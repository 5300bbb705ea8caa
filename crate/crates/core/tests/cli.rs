//! End-to-end runs of the `qrse` binary against the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use qrse::diagnostics::FitReport;
use qrse::fit::MapResult;
use qrse::ingest::CleanedSample;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn qrse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let out = qrse(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ingest_fixture(name: &str, dir: &Path) -> String {
    run_ok(&[
        "ingest",
        "--input",
        path_str(&fixture(name)),
        "--outdir",
        path_str(dir),
    ])
}

#[test]
fn ingest_prints_exclusions_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = ingest_fixture("districts_small.csv", dir.path());
    assert!(text.contains("records 10  excluded_missing 1  excluded_extreme 0  N 9"), "{text}");
    // Hand-computed from the fixture rows, in thousands.
    let row = |name: &str| {
        text.lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .map(|l| l.split_whitespace().skip(1).collect::<Vec<_>>().join(" "))
            .unwrap()
    };
    assert_eq!(row("x"), "13.49 1.02 11.75 15.00");
    assert_eq!(row("kappa"), "14.67 0.97 13.00 16.00");
    assert_eq!(row("tau"), "1.17 0.22 1.00 1.50");

    let cleaned: CleanedSample = qrse::export::read_json(dir.path().join("cleaned.json")).unwrap();
    assert_eq!(cleaned.n(), 9);
    assert_eq!(cleaned.excluded_missing, 1);
    assert!(dir.path().join("histogram.json").exists());
}

#[test]
fn ingest_extreme_bounds_and_years() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_ok(&[
        "ingest",
        "--input",
        path_str(&fixture("districts_small.csv")),
        "--outdir",
        path_str(dir.path()),
        "--extreme-hi",
        "14",
        "--years",
        "2000",
        "--per-year",
    ]);
    // Year-2000 returns are 14, 14, 13.5, 13 and 11.75; the upper bound is inclusive.
    assert!(text.contains("records 5  excluded_missing 0  excluded_extreme 0  N 5"), "{text}");
    assert!(text.contains("year 2000  N 5"));
    assert!(dir.path().join("years/2000/histogram.json").exists());
}

#[test]
fn ingest_rejects_malformed_input_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "district_id,year,total_local_education_expenditures,total_local_taxes_and_charges,enrollment,population\n\
         a,2000,1,1,1,1\n\
         b,twenty,1,1,1,1\n",
    )
    .unwrap();
    let out = qrse(&["ingest", "--input", path_str(&bad), "--outdir", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let missing = qrse(&["ingest", "--input", "/nonexistent.csv", "--outdir", path_str(dir.path())]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn fit_converges_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    ingest_fixture("districts_synthetic.csv", dir.path());
    let text = run_ok(&["fit", "--outdir", path_str(dir.path())]);
    assert!(text.contains("converged true"), "{text}");
    let first = std::fs::read(dir.path().join("map.json")).unwrap();
    let map: MapResult = serde_json::from_slice(&first).unwrap();
    assert!(map.converged);
    run_ok(&["fit", "--outdir", path_str(dir.path())]);
    assert_eq!(std::fs::read(dir.path().join("map.json")).unwrap(), first);
}

#[test]
fn fit_rejects_malformed_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("histogram.json");
    std::fs::write(&hist, "{\"edges\": [0, 1], \"frequencies\": [0.5]").unwrap();
    let out = qrse(&["fit", "--outdir", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&hist, "{\"edges\": [0, 1, 2], \"frequencies\": [0.5, 0.2], \"counts\": [5, 2]}").unwrap();
    let out = qrse(&["fit", "--outdir", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_validates_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = qrse(&["sample", "--outdir", path_str(dir.path()), "--draws", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qrse(&["sample", "--outdir", path_str(dir.path()), "--chains", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qrse(&["sample", "--outdir", path_str(dir.path()), "--prior-mu-sd", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn smoke_pipeline_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    ingest_fixture("districts_synthetic.csv", dir.path());
    run_ok(&["fit", "--outdir", path_str(dir.path())]);
    let text = run_ok(&[
        "sample",
        "--outdir",
        path_str(dir.path()),
        "--draws",
        "200",
        "--tune",
        "50",
    ]);
    assert!(start.elapsed() < Duration::from_secs(60));
    assert!(text.contains("chains 3  draws 200  tune 50  seed 0"), "{text}");
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 3 * 200);
}

#[test]
fn full_pipeline_reports_converged_chains() {
    let dir = tempfile::tempdir().unwrap();
    let d = path_str(dir.path());
    ingest_fixture("districts_synthetic.csv", dir.path());
    run_ok(&["fit", "--outdir", d]);
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "# mixing fixture\ndraws = 10000\ntune = 2000\nseed = 11\n").unwrap();
    run_ok(&["sample", "--outdir", d, "--config", path_str(&config)]);
    let table = run_ok(&["report", "--outdir", d]);
    assert!(table.starts_with("Posterior Estimates Summary"), "{table}");
    assert!(table.contains("94 % HDI"));

    let report: FitReport = qrse::export::read_json(dir.path().join("report.json")).unwrap();
    let names: Vec<&str> = report.parameters.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["mu", "alpha", "T", "S"]);
    for p in &report.parameters {
        assert!(p.rhat <= 1.01, "{} rhat {}", p.name, p.rhat);
        assert!(p.hdi_low <= p.mean && p.mean <= p.hdi_high);
    }
    assert_eq!((report.chains, report.draws, report.tune, report.seed), (3, 10_000, 2_000, 11));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("report.txt")).unwrap(),
        table
    );
    for file in [
        "fit_histogram.csv",
        "fit_density.csv",
        "quantal_response.csv",
        "parameter_variations.csv",
    ] {
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert!(text.lines().count() > 10, "{file}");
    }
}

#[test]
fn report_of_point_mass_trace_has_zero_sd() {
    let dir = tempfile::tempdir().unwrap();
    ingest_fixture("districts_synthetic.csv", dir.path());
    let map: MapResult = {
        run_ok(&["fit", "--outdir", path_str(dir.path())]);
        qrse::export::read_json(dir.path().join("map.json")).unwrap()
    };
    let point = map.params.to_array();
    let posterior = qrse::PosteriorDraws {
        draws: vec![vec![point; 50]; 2],
        acceptance_rate: vec![0.0, 0.0],
        step_scales: vec![[0.0; 4]; 2],
        seed: 0,
        rng_algorithm: qrse::synthetic::RNG_ALGORITHM.into(),
        config: qrse::ChainConfig {
            chains: 2,
            draws: 50,
            tune: 0,
            ..qrse::ChainConfig::default()
        },
        priors: qrse::PriorSpec::centered_at(&map.params).unwrap(),
    };
    qrse::export::write_trace(dir.path(), &posterior).unwrap();
    run_ok(&["report", "--outdir", path_str(dir.path())]);
    let report: FitReport = qrse::export::read_json(dir.path().join("report.json")).unwrap();
    for p in &report.parameters {
        assert_eq!(p.sd, 0.0);
        assert_eq!(p.rhat, 1.0);
        assert_eq!(p.hdi_low, p.hdi_high);
    }
}

#[test]
fn simulate_round_trips_through_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let text = run_ok(&[
        "simulate",
        "--output",
        path_str(&csv),
        "--n",
        "500",
        "--seed",
        "3",
        "--t",
        "1.5",
        "--s",
        "3",
        "--mu",
        "-2",
        "--alpha",
        "4",
    ]);
    assert!(text.contains("wrote 500 records"));
    let again = dir.path().join("again.csv");
    run_ok(&[
        "simulate", "--output", path_str(&again), "--n", "500", "--seed", "3", "--t", "1.5", "--s", "3", "--mu",
        "-2", "--alpha", "4",
    ]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());

    let out = dir.path().join("ingested");
    let summary = run_ok(&["ingest", "--input", path_str(&csv), "--outdir", path_str(&out)]);
    assert!(summary.contains("N 500"), "{summary}");
}

#[test]
fn unknown_config_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "drawz = 10\n").unwrap();
    let out = qrse(&["report", "--outdir", path_str(dir.path()), "--config", path_str(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}
