//! Fits the MAP estimate to a synthetic histogram by KL minimization, in both KL
//! directions.
//!
//! $ cargo run --release --example map_fit

use qrse::fit::{fit_map, FitOptions, KlDirection};
use qrse::ingest::{build_histogram, Binning};
use qrse::model::QrseParams;
use qrse::synthetic::{sample, SampleConfig};

fn main() -> qrse::Result<()> {
    let truth = QrseParams::new(2.1, 4.9, 8.66, 17.8)?;
    let draws = sample(&truth, &SampleConfig::new(100_000, 7))?;
    let hist = build_histogram(&draws, Binning::FreedmanDiaconis)?;
    println!("truth    {:?}", truth.to_array());
    for direction in [KlDirection::ModelFirst, KlDirection::ObservedFirst] {
        let options = FitOptions {
            direction,
            ..FitOptions::default()
        };
        let map = fit_map(&hist, &options)?;
        let p = map.params;
        println!(
            "{direction:?}: T {:.3}  S {:.3}  mu {:.3}  alpha {:.3}  KL {:.3e}  Soofi {:.4}  converged {}",
            p.temperature(),
            p.scale(),
            p.mu(),
            p.alpha(),
            map.kl,
            map.soofi_id,
            map.converged
        );
    }
    Ok(())
}
