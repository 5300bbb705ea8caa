//! Convergence diagnostics and posterior summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fit::{kl_divergence, soofi_id};
use crate::ingest::{freedman_diaconis_bins, quantile_sorted, HistogramSpec};
use crate::mcmc::PosteriorDraws;
use crate::model::{bin_probabilities, EvalGrid, QrseParams};

pub const DEFAULT_HDI_PROB: f64 = 0.94;

/// Minimum sample count for intervals and modes.
pub const MIN_SUMMARY_SAMPLES: usize = 20;

/// Below this pooled variance, R̂ is defined as 1.
const ZERO_VARIANCE: f64 = 1e-12;

/// Row order of the summary table, as indices into `[T, S, μ, α]`.
pub const REPORT_ORDER: [usize; 4] = [2, 3, 0, 1];

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Arithmetic mean; a constant sequence returns its value exactly.
fn mean(v: &[f64]) -> f64 {
    if is_constant(v) {
        return v[0];
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance; zero for a constant sequence.
fn variance(v: &[f64]) -> f64 {
    if is_constant(v) {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

fn split_halves(chains: &[Vec<f64>]) -> Result<Vec<&[f64]>> {
    if chains.len() < 2 {
        return Err(Error::InsufficientDraws(format!(
            "need >= 2 chains, got {}",
            chains.len()
        )));
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::InsufficientDraws(
            "chains have different lengths".into(),
        ));
    }
    if n < 4 {
        return Err(Error::InsufficientDraws(format!(
            "need >= 4 draws per chain, got {n}"
        )));
    }
    let half = n / 2;
    // The middle draw of an odd-length chain is dropped.
    Ok(chains
        .iter()
        .flat_map(|c| [&c[..half], &c[n - half..]])
        .collect())
}

/// Gelman–Rubin ratio `sqrt(((n-1)/n·W + B/n) / W)` over equal-length sequences.
fn potential_scale_reduction(seqs: &[&[f64]]) -> f64 {
    let pooled: Vec<f64> = seqs.iter().flat_map(|s| s.iter().copied()).collect();
    if variance(&pooled) < ZERO_VARIANCE {
        return 1.0;
    }
    let m = seqs.len() as f64;
    let n = seqs[0].len() as f64;
    let means: Vec<f64> = seqs.iter().map(|s| mean(s)).collect();
    let grand = mean(&means);
    let between = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = seqs.iter().map(|s| variance(s)).sum::<f64>() / m;
    if within <= 0.0 {
        return f64::INFINITY;
    }
    (((n - 1.0) / n * within + between / n) / within).sqrt()
}

/// Normal scores `Φ⁻¹((r - 3/8) / (N + 1/4))` of the pooled fractional ranks.
fn rank_normalize(seqs: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut order: Vec<(f64, usize, usize)> = seqs
        .iter()
        .enumerate()
        .flat_map(|(s, seq)| seq.iter().enumerate().map(move |(i, &x)| (x, s, i)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = order.len() as f64;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out: Vec<Vec<f64>> = seqs.iter().map(|s| vec![0.0; s.len()]).collect();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && order[end].0 == order[start].0 {
            end += 1;
        }
        // Average 1-based rank of the tie block.
        let rank = (start + end + 1) as f64 / 2.0;
        let z = unit.inverse_cdf((rank - 0.375) / (total + 0.25));
        for &(_, s, i) in &order[start..end] {
            out[s][i] = z;
        }
        start = end;
    }
    out
}

/// Split R̂ of the rank-normalized draws.
pub fn rank_normalized_split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let halves = split_halves(chains)?;
    let pooled: Vec<f64> = halves.iter().flat_map(|s| s.iter().copied()).collect();
    if variance(&pooled) < ZERO_VARIANCE {
        return Ok(1.0);
    }
    let z = rank_normalize(&halves);
    let z: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
    Ok(potential_scale_reduction(&z))
}

/// Split R̂ of the raw draws.
pub fn classic_split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let halves = split_halves(chains)?;
    Ok(potential_scale_reduction(&halves))
}

/// Convergence statistic for one parameter: the larger of the rank-normalized and the
/// raw split R̂.
///
/// Rank normalization bounds the statistic (two chains stuck at distinct values give only
/// about 1.8), so the raw ratio is kept to expose gross separation. Returns 1 when the
/// pooled variance is below 1e-12.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let rank = rank_normalized_split_rhat(chains)?;
    let raw = classic_split_rhat(chains)?;
    Ok(rank.max(raw))
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.len() < MIN_SUMMARY_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SUMMARY_SAMPLES,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("samples must be finite".into()));
    }
    Ok(())
}

/// Shortest interval containing `ceil(prob·n)` of the sorted samples.
pub fn hdi(samples: &[f64], prob: f64) -> Result<(f64, f64)> {
    check_samples(samples)?;
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "HDI probability must lie in (0, 1), got {prob}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = ((prob * n as f64).ceil() as usize).clamp(1, n);
    let (lo, _) = (0..=n - k)
        .map(|i| (i, sorted[i + k - 1] - sorted[i]))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        );
    Ok((sorted[lo], sorted[lo + k - 1]))
}

/// Center of the fullest Freedman–Diaconis bin; ties go to the bin nearest the median.
pub fn posterior_mode(samples: &[f64]) -> Result<f64> {
    check_samples(samples)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if max == min {
        return Ok(min);
    }
    let bins = freedman_diaconis_bins(&sorted, max - min);
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        let idx = (((x - min) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let median = quantile_sorted(&sorted, 0.5);
    let center = |i: usize| min + (i as f64 + 0.5) * width;
    let top = *counts.iter().max().expect("at least one bin");
    let best = (0..bins)
        .filter(|&i| counts[i] == top)
        .min_by(|&a, &b| {
            (center(a) - median)
                .abs()
                .total_cmp(&(center(b) - median).abs())
        })
        .expect("a fullest bin exists");
    Ok(center(best))
}

/// One row of the posterior summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub mode: f64,
    pub hdi_low: f64,
    pub hdi_high: f64,
    pub rhat: f64,
}

/// Posterior summary in table order `μ, α, T, S`, plus the fit score of the
/// posterior-mean density against the observed histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub parameters: Vec<ParameterSummary>,
    pub hdi_prob: f64,
    pub posterior_mean: QrseParams,
    pub kl: f64,
    pub soofi_id: f64,
    pub n: u64,
    pub chains: usize,
    pub draws: usize,
    pub tune: usize,
    pub seed: u64,
    pub rng_algorithm: String,
    pub acceptance_rate: Vec<f64>,
}

impl FitReport {
    pub fn parameter(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Aligned plain-text table with columns Parameter, Mean (Sd), Mode, HDI, R-hat.
    pub fn to_table(&self) -> String {
        let hdi_header = format!("{} % HDI", fmt_prob(self.hdi_prob));
        let rows: Vec<[String; 5]> = self
            .parameters
            .iter()
            .map(|p| {
                [
                    p.name.clone(),
                    format!("{:.2} ({:.2})", p.mean, p.sd),
                    format!("{:.2}", p.mode),
                    format!("[{:.2}, {:.2}]", p.hdi_low, p.hdi_high),
                    format!("{:.2}", p.rhat),
                ]
            })
            .collect();
        let header = [
            "Parameter".to_string(),
            "Mean (Sd)".to_string(),
            "Mode".to_string(),
            hdi_header,
            "R-hat".to_string(),
        ];
        let mut widths = header.clone().map(|h| h.chars().count());
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String; 5]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1));
        let mut out = String::from("Posterior Estimates Summary\n");
        out.push_str(&rule);
        out.push('\n');
        out.push_str(&line(&header));
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for row in &rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
        out.push_str(&format!(
            "Soofi ID {:.4}  KL {:.6}  N = {}  ({} chains x {} draws, {} tune, seed {})\n",
            self.soofi_id, self.kl, self.n, self.chains, self.draws, self.tune, self.seed
        ));
        out
    }
}

fn fmt_prob(p: f64) -> String {
    let pct = p * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct:.1}")
    }
}

/// Means, standard deviations, modes, HDIs and split R̂ of every parameter, and the
/// KL/Soofi score of the posterior-mean density against `hist`.
pub fn summarize(
    posterior: &PosteriorDraws,
    hist: &HistogramSpec,
    grid: &EvalGrid,
    hdi_prob: f64,
) -> Result<FitReport> {
    hist.validate()?;
    let mut means = [0.0; 4];
    let mut rows: Vec<ParameterSummary> = Vec::with_capacity(4);
    for &idx in &REPORT_ORDER {
        let pooled = posterior.pooled(idx);
        check_samples(&pooled)?;
        let m = mean(&pooled);
        means[idx] = m;
        let (hdi_low, hdi_high) = hdi(&pooled, hdi_prob)?;
        rows.push(ParameterSummary {
            name: QrseParams::NAMES[idx].to_string(),
            mean: m,
            sd: variance(&pooled).max(0.0).sqrt(),
            mode: posterior_mode(&pooled)?,
            hdi_low,
            hdi_high,
            rhat: split_rhat(&posterior.parameter(idx))?,
        });
    }
    let posterior_mean = QrseParams::from_array(means)?;
    let model = bin_probabilities(&hist.edges, &posterior_mean, grid)?;
    let kl = kl_divergence(&model, &hist.frequencies)?;
    let (chains, draws, _) = posterior.shape();
    Ok(FitReport {
        parameters: rows,
        hdi_prob,
        posterior_mean,
        kl,
        soofi_id: soofi_id(kl)?,
        n: hist.total(),
        chains,
        draws,
        tune: posterior.config.tune,
        seed: posterior.seed,
        rng_algorithm: posterior.rng_algorithm.clone(),
        acceptance_rate: posterior.acceptance_rate.clone(),
    })
}
