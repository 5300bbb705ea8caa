//! Full pipeline on simulated district data: simulate, ingest, fit, sample, summarize and
//! export plot-ready tables.
//!
//! $ cargo run --release --example pipeline -- /tmp/qrse-pipeline

use std::path::PathBuf;

use qrse::cli::simulated_records;
use qrse::diagnostics::{summarize, DEFAULT_HDI_PROB};
use qrse::export::{
    density_curve, histogram_fit, parameter_variations, quantal_response_curves, write_csv, write_json, write_trace,
};
use qrse::fit::{fit_grid, fit_map, FitOptions, ParamBounds};
use qrse::ingest::{build_histogram, clean, Binning, CleanConfig};
use qrse::mcmc::{run_chains, ChainConfig, PriorSpec};
use qrse::model::QrseParams;
use qrse::synthetic::{sample, SampleConfig};

fn main() -> qrse::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "qrse-pipeline".into()));
    std::fs::create_dir_all(&out).expect("output directory");

    let truth = QrseParams::new(2.1, 4.9, 8.66, 17.8)?;
    let records = simulated_records(&sample(&truth, &SampleConfig::new(20_000, 1))?);
    let cleaned = clean(&records, &CleanConfig::default())?;
    let hist = build_histogram(&cleaned.values, Binning::FreedmanDiaconis)?;
    write_json(out.join("cleaned.json"), &cleaned)?;
    write_json(out.join("histogram.json"), &hist)?;

    let map = fit_map(&hist, &FitOptions::default())?;
    write_json(out.join("map.json"), &map)?;

    let config = ChainConfig {
        draws: 5_000,
        tune: 1_000,
        seed: 1,
        ..ChainConfig::default()
    };
    let posterior = run_chains(&cleaned.values, &PriorSpec::centered_at(&map.params)?, &config)?;
    write_trace(&out, &posterior)?;

    let grid = fit_grid(&hist, &ParamBounds::for_histogram(&hist))?;
    let report = summarize(&posterior, &hist, &grid, DEFAULT_HDI_PROB)?;
    write_json(out.join("report.json"), &report)?;
    print!("{}", report.to_table());

    let mean = report.posterior_mean;
    let (lo, hi) = (hist.edges[0], hist.edges[hist.bins()]);
    write_csv(out.join("fit_histogram.csv"), &histogram_fit(&hist, &mean, &grid)?)?;
    write_csv(out.join("fit_density.csv"), &density_curve(&mean, &grid, lo, hi)?)?;
    write_csv(out.join("quantal_response.csv"), &quantal_response_curves(&mean, &grid, lo, hi)?)?;
    write_csv(out.join("parameter_variations.csv"), &parameter_variations()?)?;
    println!("artifacts in {}", out.display());
    Ok(())
}
