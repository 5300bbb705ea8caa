//! Convergence and interval diagnostics on hand-made chains.
//!
//! $ cargo run --release --example diagnostics

use rand::Rng;
use rand_distr::StandardNormal;

use qrse::diagnostics::{classic_split_rhat, hdi, posterior_mode, rank_normalized_split_rhat, split_rhat};
use qrse::synthetic::rng_from_seed;

fn chains(offsets: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    offsets
        .iter()
        .map(|&o| (0..n).map(|_| o + rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

fn main() -> qrse::Result<()> {
    for (label, c) in [
        ("mixed", chains(&[0.0, 0.0, 0.0, 0.0], 5_000, 1)),
        ("slightly apart", chains(&[0.0, 0.0, 0.0, 0.3], 5_000, 2)),
        ("separated", chains(&[0.0, 10.0], 5_000, 3)),
    ] {
        println!(
            "{label:<15} R-hat {:.4}  (rank-normalized {:.4}, classic {:.4})",
            split_rhat(&c)?,
            rank_normalized_split_rhat(&c)?,
            classic_split_rhat(&c)?
        );
    }

    let pooled: Vec<f64> = chains(&[0.0], 200_000, 4).remove(0);
    let (lo, hi) = hdi(&pooled, 0.94)?;
    println!("\nstandard normal: 94% HDI [{lo:.3}, {hi:.3}], mode {:.3}", posterior_mode(&pooled)?);
    let skewed: Vec<f64> = pooled.iter().map(|z| z.exp()).collect();
    let (lo, hi) = hdi(&skewed, 0.94)?;
    let mean = skewed.iter().sum::<f64>() / skewed.len() as f64;
    println!("lognormal:       94% HDI [{lo:.3}, {hi:.3}], mode {:.3}, mean {mean:.3}", posterior_mode(&skewed)?);
    Ok(())
}
