//! Reads a district CSV, builds the educational-returns sample and its histogram.
//!
//! $ cargo run --example ingest -- crates/core/tests/fixtures/districts_small.csv

use qrse::ingest::{
    build_histogram, clean, filter_years, read_records_file, Binning, CleanConfig, MoneyUnit, DEFAULT_YEARS,
};

fn main() -> qrse::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/districts_small.csv").to_string()
    });
    let records = filter_years(read_records_file(&path, MoneyUnit::Dollars)?, &DEFAULT_YEARS);
    let sample = clean(&records, &CleanConfig::default())?;
    println!(
        "{} records: {} kept, {} missing or invalid, {} extreme",
        sample.record_count(),
        sample.n(),
        sample.excluded_missing,
        sample.excluded_extreme
    );
    for (name, s) in [("x", sample.x_summary()), ("kappa", sample.kappa), ("tau", sample.tau)] {
        println!("{name:<6} mean {:>7.2}  sd {:>6.2}  min {:>7.2}  max {:>7.2}", s.mean, s.sd, s.min, s.max);
    }

    let hist = build_histogram(&sample.values, Binning::FreedmanDiaconis)?;
    println!("\nFreedman-Diaconis histogram, {} bins", hist.bins());
    for ((edge, count), width) in hist.edges.iter().zip(&hist.counts).zip(hist.widths()) {
        println!("[{edge:>7.2}, {:>7.2})  {}", edge + width, "#".repeat(*count as usize));
    }
    Ok(())
}
