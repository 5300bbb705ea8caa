//! Random-walk Metropolis–Hastings over `Γ = [T, S, μ, α]`.
//!
//! Proposals are Gaussian with one scale per coordinate. While tuning, the scales are
//! multiplied by 1.1 after a 100-step window with acceptance above 0.5 and by 0.9 after
//! one below 0.2; they are frozen for the stored draws.
//!
//! Seeds: chain `i` runs ChaCha20 keyed by `seed.wrapping_add(i)` on stream 0; the jitter
//! of its initial point uses stream 1 of the same key.

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{
    log_likelihood, log_partition, EvalGrid, QrseParams, AUTO_GRID_POINTS, AUTO_SPAN_SCALES,
};
use crate::synthetic::{rng_from_seed, RNG_ALGORITHM};

pub const SCALE_LOWER: f64 = 0.1;
pub const SCALE_UPPER: f64 = 8.0;
pub const DEFAULT_SCALE_SD: f64 = 2.0;
pub const DEFAULT_LOCATION_SD: f64 = 10.0;

pub const ADAPT_WINDOW: usize = 100;
const ADAPT_UP: f64 = 1.1;
const ADAPT_DOWN: f64 = 0.9;
const TARGET_LOW: f64 = 0.2;
const TARGET_HIGH: f64 = 0.5;
const STUCK_RATE: f64 = 0.01;

/// Optimal random-walk scaling `2.38 / sqrt(d)` for `d = 4`.
const RW_SCALING: f64 = 1.19;
const JITTER_FRACTION: f64 = 0.1;
const JITTER_STREAM: u64 = 1;
const GRID_MAX_STEP: f64 = 0.05;
/// Prior standard deviations covered by the sampling grid around each location center.
const GRID_LOCATION_REACH: f64 = 3.0;

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Normal prior truncated to `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub center: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedNormal {
    pub fn new(center: f64, sd: f64, lower: f64, upper: f64) -> Result<Self> {
        let prior = TruncatedNormal {
            center,
            sd,
            lower,
            upper,
        };
        prior.validate()?;
        Ok(prior)
    }

    fn validate(&self) -> Result<()> {
        if !(self.center.is_finite() && self.sd.is_finite() && self.sd > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "truncated normal needs finite center and sd > 0 (center={}, sd={})",
                self.center, self.sd
            )));
        }
        if !(self.lower < self.upper) {
            return Err(Error::InvalidConfig(format!(
                "truncation bounds need lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    /// Log density normalized over the truncation interval; `None` outside it.
    pub fn ln_pdf(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let unit = standard_normal();
        let z = (x - self.center) / self.sd;
        let mass = unit.cdf((self.upper - self.center) / self.sd)
            - unit.cdf((self.lower - self.center) / self.sd);
        Some(unit.ln_pdf(z) - self.sd.ln() - mass.ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub center: f64,
    pub sd: f64,
}

impl NormalPrior {
    pub fn new(center: f64, sd: f64) -> Result<Self> {
        if !(center.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "normal prior needs finite center and sd > 0 (center={center}, sd={sd})"
            )));
        }
        Ok(NormalPrior { center, sd })
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        standard_normal().ln_pdf((x - self.center) / self.sd) - self.sd.ln()
    }
}

/// Truncated normal priors on the scales, normal priors on the locations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    #[serde(rename = "T")]
    pub temperature: TruncatedNormal,
    #[serde(rename = "S")]
    pub scale: TruncatedNormal,
    pub mu: NormalPrior,
    pub alpha: NormalPrior,
}

impl PriorSpec {
    /// Default priors centered at `center` (normally the MAP estimate): sd 2 on `T, S`
    /// truncated to `[0.1, 8]`, sd 10 on `μ, α`.
    pub fn centered_at(center: &QrseParams) -> Result<Self> {
        PriorSpec::with_sds(
            center,
            [
                DEFAULT_SCALE_SD,
                DEFAULT_SCALE_SD,
                DEFAULT_LOCATION_SD,
                DEFAULT_LOCATION_SD,
            ],
        )
    }

    /// Priors centered at `center` with standard deviations `[T, S, μ, α]`.
    pub fn with_sds(center: &QrseParams, sds: [f64; 4]) -> Result<Self> {
        Ok(PriorSpec {
            temperature: TruncatedNormal::new(
                center.temperature(),
                sds[0],
                SCALE_LOWER,
                SCALE_UPPER,
            )?,
            scale: TruncatedNormal::new(center.scale(), sds[1], SCALE_LOWER, SCALE_UPPER)?,
            mu: NormalPrior::new(center.mu(), sds[2])?,
            alpha: NormalPrior::new(center.alpha(), sds[3])?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.temperature.validate()?;
        self.scale.validate()?;
        NormalPrior::new(self.mu.center, self.mu.sd)?;
        NormalPrior::new(self.alpha.center, self.alpha.sd)?;
        if self.temperature.lower <= 0.0 || self.scale.lower <= 0.0 {
            return Err(Error::InvalidConfig(
                "scale priors must be truncated above 0".into(),
            ));
        }
        Ok(())
    }

    pub fn centers(&self) -> [f64; 4] {
        [
            self.temperature.center,
            self.scale.center,
            self.mu.center,
            self.alpha.center,
        ]
    }

    pub fn sds(&self) -> [f64; 4] {
        [
            self.temperature.sd,
            self.scale.sd,
            self.mu.sd,
            self.alpha.sd,
        ]
    }

    /// Sum of the four log prior densities at `[T, S, μ, α]`.
    pub fn log_density(&self, point: &[f64; 4]) -> Result<f64> {
        let support = |name, prior: &TruncatedNormal, value: f64| {
            prior.ln_pdf(value).ok_or(Error::OutOfSupport {
                name,
                value,
                lower: prior.lower,
                upper: prior.upper,
            })
        };
        let t = support("T", &self.temperature, point[0])?;
        let s = support("S", &self.scale, point[1])?;
        Ok(t + s + self.mu.ln_pdf(point[2]) + self.alpha.ln_pdf(point[3]))
    }
}

/// Log posterior: QRSE log-likelihood plus log prior. With no data it is the log prior.
pub fn log_posterior(
    params: &QrseParams,
    data: &[f64],
    priors: &PriorSpec,
    grid: &EvalGrid,
) -> Result<f64> {
    let prior = priors.log_density(&params.to_array())?;
    if data.is_empty() {
        return Ok(prior);
    }
    Ok(log_likelihood(data, params, grid)? + prior)
}

/// An unnormalized log density over `[T, S, μ, α]`; `-∞` marks points without support.
pub trait LogTarget: Sync {
    fn log_density(&self, point: &[f64; 4]) -> f64;
}

impl<F> LogTarget for F
where
    F: Fn(&[f64; 4]) -> f64 + Sync,
{
    fn log_density(&self, point: &[f64; 4]) -> f64 {
        self(point)
    }
}

/// The QRSE posterior on a fixed grid.
#[derive(Debug, Clone, Copy)]
pub struct QrsePosterior<'a> {
    pub data: &'a [f64],
    pub priors: &'a PriorSpec,
    pub grid: &'a EvalGrid,
}

impl LogTarget for QrsePosterior<'_> {
    fn log_density(&self, point: &[f64; 4]) -> f64 {
        QrseParams::from_array(*point)
            .and_then(|p| log_posterior(&p, self.data, self.priors, self.grid))
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Fixed grid for sampling `data` under `priors`.
///
/// Covers the data and each location prior center ± 3 sd, padded by `8·max(T_hi, S_hi)`,
/// with spacing at most 0.05. Every corner of that box must pass the edge-mass check.
pub fn sampling_grid(data: &[f64], priors: &PriorSpec) -> Result<EvalGrid> {
    priors.validate()?;
    let reach = |p: &NormalPrior| {
        (
            p.center - GRID_LOCATION_REACH * p.sd,
            p.center + GRID_LOCATION_REACH * p.sd,
        )
    };
    let (mu_lo, mu_hi) = reach(&priors.mu);
    let (alpha_lo, alpha_hi) = reach(&priors.alpha);
    let data_lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let data_hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = AUTO_SPAN_SCALES * priors.temperature.upper.max(priors.scale.upper);
    let lo = data_lo.min(mu_lo).min(alpha_lo) - pad;
    let hi = data_hi.max(mu_hi).max(alpha_hi) + pad;
    let points = (((hi - lo) / GRID_MAX_STEP).ceil() as usize + 1).max(AUTO_GRID_POINTS);
    let grid = EvalGrid::span(lo, hi, points)?;
    for &t in &[priors.temperature.lower, priors.temperature.upper] {
        for &s in &[priors.scale.lower, priors.scale.upper] {
            for &mu in &[mu_lo, mu_hi] {
                for &alpha in &[alpha_lo, alpha_hi] {
                    log_partition(&QrseParams::new(t, s, mu, alpha)?, &grid)?;
                }
            }
        }
    }
    Ok(grid)
}

/// Proposal scales from the curvature of `target` at `at`.
///
/// Uses `1.19·sqrt(diag(H⁻¹))` when the negated finite-difference Hessian is positive
/// definite, otherwise `1.19 / sqrt(-H_ii)` per coordinate; `None` where neither exists.
pub fn laplace_scales<T: LogTarget + ?Sized>(target: &T, at: &[f64; 4]) -> [Option<f64>; 4] {
    let f0 = target.log_density(at);
    let mut out = [None; 4];
    if !f0.is_finite() {
        return out;
    }
    let h: [f64; 4] = std::array::from_fn(|i| 1e-4 * at[i].abs().max(1.0));
    let eval = |di: [f64; 4]| {
        let mut p = *at;
        for k in 0..4 {
            p[k] += di[k];
        }
        target.log_density(&p)
    };
    let unit = |i: usize, s: f64| {
        let mut d = [0.0; 4];
        d[i] = s * h[i];
        d
    };
    let mut neg_hessian = Matrix4::<f64>::zeros();
    let mut complete = true;
    for i in 0..4 {
        let d2 = (eval(unit(i, 1.0)) - 2.0 * f0 + eval(unit(i, -1.0))) / (h[i] * h[i]);
        if d2.is_finite() {
            neg_hessian[(i, i)] = -d2;
            if -d2 > 0.0 {
                out[i] = Some(RW_SCALING / (-d2).sqrt());
            }
        } else {
            complete = false;
        }
    }
    if !complete {
        return out;
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let pp = eval(std::array::from_fn(|k| {
                if k == i {
                    h[i]
                } else if k == j {
                    h[j]
                } else {
                    0.0
                }
            }));
            let pm = eval(std::array::from_fn(|k| {
                if k == i {
                    h[i]
                } else if k == j {
                    -h[j]
                } else {
                    0.0
                }
            }));
            let mp = eval(std::array::from_fn(|k| {
                if k == i {
                    -h[i]
                } else if k == j {
                    h[j]
                } else {
                    0.0
                }
            }));
            let mm = eval(std::array::from_fn(|k| {
                if k == i {
                    -h[i]
                } else if k == j {
                    -h[j]
                } else {
                    0.0
                }
            }));
            let d2 = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            if !d2.is_finite() {
                return out;
            }
            neg_hessian[(i, j)] = -d2;
            neg_hessian[(j, i)] = -d2;
        }
    }
    if let Some(chol) = neg_hessian.cholesky() {
        let cov = chol.inverse();
        for i in 0..4 {
            if cov[(i, i)] > 0.0 {
                out[i] = Some(RW_SCALING * cov[(i, i)].sqrt());
            }
        }
    }
    out
}

/// Settings for a single chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSettings {
    pub draws: usize,
    pub tune: usize,
    pub seed: u64,
    pub initial: [f64; 4],
    pub scales: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    /// Post-tune states, one per iteration.
    pub draws: Vec<[f64; 4]>,
    /// Accepted fraction of the post-tune proposals.
    pub acceptance_rate: f64,
    /// Proposal scales used for every stored draw.
    pub step_scales: [f64; 4],
}

/// Runs one chain of random-walk Metropolis–Hastings on `target`.
///
/// A coordinate with scale 0 never moves. Fails with [`Error::StuckChain`] when fewer
/// than 1% of post-tune proposals are accepted.
pub fn sample_chain<T: LogTarget + ?Sized>(
    target: &T,
    settings: &ChainSettings,
    chain: usize,
) -> Result<ChainOutput> {
    if settings.draws == 0 {
        return Err(Error::InvalidConfig("draws must be >= 1".into()));
    }
    if settings.scales.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidConfig(format!(
            "proposal scales must be finite and >= 0, got {:?}",
            settings.scales
        )));
    }
    let mut rng = rng_from_seed(settings.seed);
    let mut current = settings.initial;
    let mut current_lp = target.log_density(&current);
    if !current_lp.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "chain {chain}: initial point {current:?} has non-finite log posterior"
        )));
    }
    let mut scales = settings.scales;
    let mut window_accepted = 0usize;
    let mut accepted = 0usize;
    let mut draws = Vec::with_capacity(settings.draws);

    for step in 0..settings.tune + settings.draws {
        let mut proposal = current;
        for (x, s) in proposal.iter_mut().zip(&scales) {
            let z: f64 = rng.sample(StandardNormal);
            *x += s * z;
        }
        let u: f64 = rng.random();
        let proposal_lp = target.log_density(&proposal);
        let accept = proposal_lp.is_finite() && u.ln() < proposal_lp - current_lp;
        if accept {
            current = proposal;
            current_lp = proposal_lp;
        }

        if step < settings.tune {
            window_accepted += accept as usize;
            if (step + 1) % ADAPT_WINDOW == 0 {
                let rate = window_accepted as f64 / ADAPT_WINDOW as f64;
                let factor = if rate > TARGET_HIGH {
                    ADAPT_UP
                } else if rate < TARGET_LOW {
                    ADAPT_DOWN
                } else {
                    1.0
                };
                scales.iter_mut().for_each(|s| *s *= factor);
                window_accepted = 0;
            }
        } else {
            accepted += accept as usize;
            draws.push(current);
        }
    }

    let acceptance_rate = accepted as f64 / settings.draws as f64;
    if acceptance_rate < STUCK_RATE {
        return Err(Error::StuckChain {
            chain,
            rate: acceptance_rate,
        });
    }
    Ok(ChainOutput {
        draws,
        acceptance_rate,
        step_scales: scales,
    })
}

/// Proposal scales at `at`: curvature-based where available, else 10% of the prior sd.
fn default_scales<T: LogTarget + ?Sized>(
    target: &T,
    at: &[f64; 4],
    priors: &PriorSpec,
) -> [f64; 4] {
    let curvature = laplace_scales(target, at);
    let sds = priors.sds();
    std::array::from_fn(|i| curvature[i].unwrap_or(0.1 * sds[i]))
}

/// Runs one chain of the QRSE posterior. `scales = None` derives them from the
/// curvature at the initial point.
pub fn run_chain(
    data: &[f64],
    priors: &PriorSpec,
    grid: &EvalGrid,
    draws: usize,
    tune: usize,
    seed: u64,
    initial: &QrseParams,
    scales: Option<[f64; 4]>,
) -> Result<ChainOutput> {
    let target = QrsePosterior { data, priors, grid };
    let at = initial.to_array();
    let settings = ChainSettings {
        draws,
        tune,
        seed,
        initial: at,
        scales: scales.unwrap_or_else(|| default_scales(&target, &at, priors)),
    };
    sample_chain(&target, &settings, 0)
}

/// Multi-chain configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub chains: usize,
    pub draws: usize,
    pub tune: usize,
    pub seed: u64,
    /// One explicit initial point per chain; `None` jitters the prior centers.
    #[serde(default)]
    pub initial: Option<Vec<QrseParams>>,
    /// `None` derives scales from the posterior curvature at the prior centers.
    #[serde(default)]
    pub initial_scales: Option<[f64; 4]>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            chains: 3,
            draws: 30_000,
            tune: 4_000,
            seed: 0,
            initial: None,
            initial_scales: None,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::InvalidConfig(format!(
                "chains must be >= 2, got {}",
                self.chains
            )));
        }
        if self.draws == 0 {
            return Err(Error::InvalidConfig("draws must be >= 1".into()));
        }
        if let Some(initial) = &self.initial {
            if initial.len() != self.chains {
                return Err(Error::InvalidConfig(format!(
                    "{} initial points given for {} chains",
                    initial.len(),
                    self.chains
                )));
            }
        }
        Ok(())
    }

    /// Seed of chain `index`.
    pub fn chain_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

/// Post-tune draws of every chain with the sampler metadata needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    /// `draws[chain][iteration] = [T, S, μ, α]`.
    pub draws: Vec<Vec<[f64; 4]>>,
    pub acceptance_rate: Vec<f64>,
    pub step_scales: Vec<[f64; 4]>,
    pub seed: u64,
    pub rng_algorithm: String,
    pub config: ChainConfig,
    pub priors: PriorSpec,
}

impl PosteriorDraws {
    /// `(chains, draws per chain, 4)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.draws.len(), self.draws.first().map_or(0, Vec::len), 4)
    }

    /// Per-chain traces of parameter `index` (`0..4` in `[T, S, μ, α]` order).
    pub fn parameter(&self, index: usize) -> Vec<Vec<f64>> {
        self.draws
            .iter()
            .map(|c| c.iter().map(|d| d[index]).collect())
            .collect()
    }

    /// All chains of parameter `index` concatenated in chain order.
    pub fn pooled(&self, index: usize) -> Vec<f64> {
        self.draws
            .iter()
            .flat_map(|c| c.iter().map(move |d| d[index]))
            .collect()
    }
}

fn jittered_start(priors: &PriorSpec, key: u64) -> [f64; 4] {
    let mut rng = ChaCha20Rng::seed_from_u64(key);
    rng.set_stream(JITTER_STREAM);
    let centers = priors.centers();
    let sds = priors.sds();
    let mut p: [f64; 4] = std::array::from_fn(|i| {
        let u: f64 = rng.random_range(-1.0..1.0);
        centers[i] + JITTER_FRACTION * sds[i] * u
    });
    let inside = |x: f64, prior: &TruncatedNormal| {
        let margin = 1e-9 * (prior.upper - prior.lower);
        x.clamp(prior.lower + margin, prior.upper - margin)
    };
    p[0] = inside(p[0], &priors.temperature);
    p[1] = inside(p[1], &priors.scale);
    p
}

/// Runs `config.chains` independent chains on the QRSE posterior of `data`.
///
/// The grid is built once by [`sampling_grid`]. Chains may run in parallel; results are
/// assembled by chain index, so the output is deterministic given the inputs.
pub fn run_chains(
    data: &[f64],
    priors: &PriorSpec,
    config: &ChainConfig,
) -> Result<PosteriorDraws> {
    config.validate()?;
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig(
            "data contains non-finite values".into(),
        ));
    }
    let grid = sampling_grid(data, priors)?;
    run_chains_on_grid(data, priors, &grid, config)
}

/// [`run_chains`] with a caller-supplied grid.
pub fn run_chains_on_grid(
    data: &[f64],
    priors: &PriorSpec,
    grid: &EvalGrid,
    config: &ChainConfig,
) -> Result<PosteriorDraws> {
    config.validate()?;
    priors.validate()?;
    let target = QrsePosterior { data, priors, grid };
    let starts: Vec<[f64; 4]> = match &config.initial {
        Some(points) => points.iter().map(QrseParams::to_array).collect(),
        None => (0..config.chains)
            .map(|i| jittered_start(priors, config.chain_seed(i)))
            .collect(),
    };
    let scales = config
        .initial_scales
        .unwrap_or_else(|| default_scales(&target, &priors.centers(), priors));

    let outputs: Vec<Result<ChainOutput>> = (0..config.chains)
        .into_par_iter()
        .map(|i| {
            let settings = ChainSettings {
                draws: config.draws,
                tune: config.tune,
                seed: config.chain_seed(i),
                initial: starts[i],
                scales,
            };
            sample_chain(&target, &settings, i)
        })
        .collect();

    let mut draws = Vec::with_capacity(config.chains);
    let mut acceptance_rate = Vec::with_capacity(config.chains);
    let mut step_scales = Vec::with_capacity(config.chains);
    for out in outputs {
        let out = out?;
        draws.push(out.draws);
        acceptance_rate.push(out.acceptance_rate);
        step_scales.push(out.step_scales);
    }
    Ok(PosteriorDraws {
        draws,
        acceptance_rate,
        step_scales,
        seed: config.seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config: config.clone(),
        priors: *priors,
    })
}
