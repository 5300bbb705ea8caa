//! MAP point estimates by minimizing the KL divergence between model bin probabilities
//! and an observed histogram, and the Soofi information-distinguishability score.
//!
//! The search runs a Nelder–Mead simplex over `[ln T, ln S, μ, α]`, so the scale
//! parameters stay positive, and rejects points outside the configured box.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::HistogramSpec;
use crate::model::{bin_masses, build_density, EvalGrid, QrseParams, AUTO_SPAN_SCALES};
use crate::simplex::{minimize, SimplexOptions};
use crate::synthetic::rng_from_seed;

/// Floor applied to the denominator frequency of each bin.
pub const FREQUENCY_FLOOR: f64 = 1e-10;

/// Latin-hypercube restarts added when the start point is automatic.
pub const DEFAULT_RESTARTS: usize = 8;

/// Finest grid spacing the fitting grid uses, in thousands.
const FIT_GRID_MAX_STEP: f64 = 0.05;
const FIT_GRID_MAX_POINTS: usize = 50_001;

/// Which distribution sits in the first (weighting) slot of the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KlDirection {
    /// `Σ p̂ ln(p̂ / f̄)`: the model weights the log ratio.
    #[default]
    ModelFirst,
    /// `Σ f̄ ln(f̄ / p̂)`: the likelihood-consistent direction.
    ObservedFirst,
}

impl std::str::FromStr for KlDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "model-first" => Ok(KlDirection::ModelFirst),
            "observed-first" => Ok(KlDirection::ObservedFirst),
            other => Err(Error::InvalidConfig(format!(
                "unknown KL direction {other:?} (expected model-first or observed-first)"
            ))),
        }
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > 1e-9 || p.iter().any(|&v| v < 0.0) {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// `Σ a_i ln(a_i / max(b_i, 1e-10))`, zero-weight terms contributing nothing.
fn divergence(weights: &[f64], reference: &[f64]) -> f64 {
    let d: f64 = weights
        .iter()
        .zip(reference)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &r)| w * (w / r.max(FREQUENCY_FLOOR)).ln())
        .sum();
    d.max(0.0)
}

/// `D_KL(model ‖ observed) = Σ p̂ ln(p̂ / max(f̄, 1e-10))`.
pub fn kl_divergence(model_bins: &[f64], observed_bins: &[f64]) -> Result<f64> {
    kl_divergence_directed(model_bins, observed_bins, KlDirection::ModelFirst)
}

pub fn kl_divergence_directed(
    model_bins: &[f64],
    observed_bins: &[f64],
    direction: KlDirection,
) -> Result<f64> {
    if model_bins.len() != observed_bins.len() {
        return Err(Error::LengthMismatch(model_bins.len(), observed_bins.len()));
    }
    check_distribution(model_bins)?;
    check_distribution(observed_bins)?;
    Ok(match direction {
        KlDirection::ModelFirst => divergence(model_bins, observed_bins),
        KlDirection::ObservedFirst => divergence(observed_bins, model_bins),
    })
}

/// Soofi ID `1 - exp(-kl)`.
pub fn soofi_id(kl: f64) -> Result<f64> {
    if kl.is_nan() || kl < 0.0 {
        return Err(Error::NegativeDivergence(kl));
    }
    Ok(-(-kl).exp_m1())
}

/// Closed box on `Γ`, each as `(low, high)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub temperature: (f64, f64),
    pub scale: (f64, f64),
    pub mu: (f64, f64),
    pub alpha: (f64, f64),
}

impl ParamBounds {
    /// `T, S ∈ [0.1, 8]` and locations within one data range beyond the histogram.
    pub fn for_histogram(hist: &HistogramSpec) -> Self {
        let lo = hist.edges[0];
        let hi = hist.edges[hist.edges.len() - 1];
        let range = hi - lo;
        ParamBounds {
            temperature: (0.1, 8.0),
            scale: (0.1, 8.0),
            mu: (lo - range, hi + range),
            alpha: (lo - range, hi + range),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !(ok(self.temperature) && self.temperature.0 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "T bounds must satisfy 0 < lo < hi, got {:?}",
                self.temperature
            )));
        }
        if !(ok(self.scale) && self.scale.0 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "S bounds must satisfy 0 < lo < hi, got {:?}",
                self.scale
            )));
        }
        if !(ok(self.mu) && ok(self.alpha)) {
            return Err(Error::InvalidConfig(
                "location bounds must satisfy lo < hi".into(),
            ));
        }
        Ok(())
    }

    fn contains(&self, p: &[f64; 4]) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(p[0], self.temperature)
            && inside(p[1], self.scale)
            && inside(p[2], self.mu)
            && inside(p[3], self.alpha)
    }

    fn clamp(&self, p: [f64; 4]) -> [f64; 4] {
        [
            p[0].clamp(self.temperature.0, self.temperature.1),
            p[1].clamp(self.scale.0, self.scale.1),
            p[2].clamp(self.mu.0, self.mu.1),
            p[3].clamp(self.alpha.0, self.alpha.1),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Median/mean/spread start plus Latin-hypercube restarts.
    Auto,
    Given(QrseParams),
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub init: Init,
    /// `None` uses [`ParamBounds::for_histogram`].
    pub bounds: Option<ParamBounds>,
    pub direction: KlDirection,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// `None` uses [`fit_grid`].
    pub grid: Option<EvalGrid>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            init: Init::Auto,
            bounds: None,
            direction: KlDirection::ModelFirst,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            max_iter: 5000,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub params: QrseParams,
    pub kl: f64,
    pub soofi_id: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
}

/// Fixed evaluation grid for fitting `hist` under `bounds`.
///
/// Spans the histogram padded by `8·max(T_hi, S_hi)` on both sides; the spacing is at
/// most a quarter of the narrowest bin and at most 0.05.
pub fn fit_grid(hist: &HistogramSpec, bounds: &ParamBounds) -> Result<EvalGrid> {
    let pad = AUTO_SPAN_SCALES * bounds.temperature.1.max(bounds.scale.1);
    let lo = hist.edges[0] - pad;
    let hi = hist.edges[hist.edges.len() - 1] + pad;
    let narrowest = hist.widths().into_iter().fold(f64::INFINITY, f64::min);
    let step = (narrowest / 4.0).min(FIT_GRID_MAX_STEP);
    let points = (((hi - lo) / step).ceil() as usize + 1).clamp(2, FIT_GRID_MAX_POINTS);
    EvalGrid::span(lo, hi, points)
}

fn to_search(p: &[f64; 4]) -> Vec<f64> {
    vec![p[0].ln(), p[1].ln(), p[2], p[3]]
}

fn from_search(theta: &[f64]) -> [f64; 4] {
    [theta[0].exp(), theta[1].exp(), theta[2], theta[3]]
}

struct Objective<'a> {
    hist: &'a HistogramSpec,
    grid: &'a EvalGrid,
    bounds: &'a ParamBounds,
    direction: KlDirection,
}

impl Objective<'_> {
    fn at(&self, p: &[f64; 4]) -> Result<f64> {
        let params = QrseParams::from_array(*p)?;
        let table = build_density(&params, self.grid)?;
        let model = bin_masses(&self.hist.edges, &table)?;
        kl_divergence_directed(&model, &self.hist.frequencies, self.direction)
    }

    /// Objective value for the simplex; infeasible points are `+∞`.
    fn search_value(&self, theta: &[f64]) -> f64 {
        let p = from_search(theta);
        if !self.bounds.contains(&p) {
            return f64::INFINITY;
        }
        self.at(&p).unwrap_or(f64::INFINITY)
    }
}

struct StartOutcome {
    start_value: f64,
    best: [f64; 4],
    value: f64,
    iterations: usize,
    converged: bool,
}

fn run_start(
    objective: &Objective<'_>,
    start: [f64; 4],
    steps: &[f64],
    max_iter: usize,
) -> Result<StartOutcome> {
    let start_value = objective.at(&start)?;
    let options = SimplexOptions {
        max_iter,
        ..SimplexOptions::default()
    };
    let mut theta = to_search(&start);
    let mut value = start_value;
    let mut iterations = 0;
    let mut converged = false;
    // A fresh simplex at the previous optimum guards against premature collapse.
    for pass in 0..3 {
        let out = minimize(|t| objective.search_value(t), &theta, steps, &options);
        iterations += out.iterations;
        converged = out.converged;
        if !(out.value < value) {
            break;
        }
        let gain = value - out.value;
        theta = out.best;
        value = out.value;
        if pass > 0 && gain < 1e-12 {
            break;
        }
    }
    Ok(StartOutcome {
        start_value,
        best: from_search(&theta),
        value,
        iterations,
        converged,
    })
}

fn latin_hypercube(count: usize, ranges: [(f64, f64); 4], seed: u64) -> Vec<[f64; 4]> {
    let mut rng = rng_from_seed(seed);
    let strata: Vec<Vec<usize>> = (0..4)
        .map(|_| {
            let mut s: Vec<usize> = (0..count).collect();
            s.shuffle(&mut rng);
            s
        })
        .collect();
    (0..count)
        .map(|i| {
            let mut p = [0.0; 4];
            for (d, range) in ranges.iter().enumerate() {
                let u = (strata[d][i] as f64 + rng.random::<f64>()) / count as f64;
                p[d] = range.0 + u * (range.1 - range.0);
            }
            p
        })
        .map(|mut p| {
            // Scales were stratified on the log axis.
            p[0] = p[0].exp();
            p[1] = p[1].exp();
            p
        })
        .collect()
}

/// Start points for `hist`: the automatic start followed by the restarts.
fn start_points(hist: &HistogramSpec, bounds: &ParamBounds, options: &FitOptions) -> Vec<[f64; 4]> {
    match options.init {
        Init::Given(p) => vec![p.to_array()],
        Init::Auto => {
            let (mean, sd) = hist.mean_sd();
            let median = hist.median();
            let mut starts = vec![bounds.clamp([sd / 2.0, sd / 2.0, median, mean])];
            let loc = |b: (f64, f64)| ((mean - 2.0 * sd).max(b.0), (mean + 2.0 * sd).min(b.1));
            let ranges = [
                (bounds.temperature.0.ln(), bounds.temperature.1.ln()),
                (bounds.scale.0.ln(), bounds.scale.1.ln()),
                loc(bounds.mu),
                loc(bounds.alpha),
            ];
            starts.extend(latin_hypercube(options.restarts, ranges, options.seed));
            starts
        }
    }
}

/// MAP estimate of `Γ` for an observed histogram.
///
/// Every start is optimized independently (in parallel) and the best final vertex wins,
/// ties going to the earliest start. Fails with [`Error::NoDescent`] when no start
/// improves on its own initial value.
pub fn fit_map(hist: &HistogramSpec, options: &FitOptions) -> Result<MapResult> {
    hist.validate()?;
    let bounds = options
        .bounds
        .unwrap_or_else(|| ParamBounds::for_histogram(hist));
    bounds.validate()?;
    if let Init::Given(p) = options.init {
        if !bounds.contains(&p.to_array()) {
            return Err(Error::InvalidConfig(format!(
                "initial point {p:?} lies outside the bounds"
            )));
        }
    }
    let grid = match &options.grid {
        Some(g) => g.clone(),
        None => fit_grid(hist, &bounds)?,
    };
    let objective = Objective {
        hist,
        grid: &grid,
        bounds: &bounds,
        direction: options.direction,
    };
    let (_, sd) = hist.mean_sd();
    let location_step = (sd / 4.0).max(1e-3);
    let steps = [0.2, 0.2, location_step, location_step];

    let starts = start_points(hist, &bounds, options);
    let outcomes: Vec<Result<StartOutcome>> = starts
        .par_iter()
        .map(|&s| run_start(&objective, s, &steps, options.max_iter))
        .collect();

    let mut best: Option<StartOutcome> = None;
    let mut any_descent = false;
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                any_descent |= o.value < o.start_value;
                if best.as_ref().is_none_or(|b| o.value < b.value) {
                    best = Some(o);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let Some(best) = best else {
        return Err(first_error.unwrap_or(Error::NoDescent));
    };
    if !any_descent {
        return Err(Error::NoDescent);
    }
    Ok(MapResult {
        params: QrseParams::from_array(best.best)?,
        kl: best.value,
        soofi_id: soofi_id(best.value)?,
        iterations: best.iterations,
        converged: best.converged,
        restarts_used: starts.len() - 1,
    })
}
