//! Samples the posterior of the four parameters with random-walk Metropolis-Hastings,
//! priors centered at the MAP.
//!
//! $ cargo run --release --example mcmc

use qrse::fit::{fit_map, FitOptions};
use qrse::ingest::{build_histogram, Binning};
use qrse::mcmc::{run_chains, ChainConfig, PriorSpec};
use qrse::model::QrseParams;
use qrse::synthetic::{sample, SampleConfig};

fn main() -> qrse::Result<()> {
    let truth = QrseParams::new(2.1, 4.9, 8.66, 17.8)?;
    let data = sample(&truth, &SampleConfig::new(10_000, 3))?;
    let map = fit_map(&build_histogram(&data, Binning::FreedmanDiaconis)?, &FitOptions::default())?;
    let priors = PriorSpec::centered_at(&map.params)?;
    let config = ChainConfig {
        draws: 3_000,
        tune: 1_000,
        seed: 3,
        ..ChainConfig::default()
    };
    let posterior = run_chains(&data, &priors, &config)?;
    let (chains, draws, _) = posterior.shape();
    println!("{chains} chains x {draws} draws, acceptance {:?}", posterior.acceptance_rate);
    for (idx, name) in QrseParams::NAMES.iter().enumerate() {
        let pooled = posterior.pooled(idx);
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        println!("{name:<6} truth {:>7.3}  posterior mean {mean:>7.3}", truth.to_array()[idx]);
    }
    Ok(())
}
