//! The QRSE density and its building blocks.
//!
//! Households enter a district with logit probability `f_e(x) = 1 / (1 + exp(-2(x - μ)/T))`
//! and exit with the mirrored probability. The competitive feedback on the outcome `x`
//! enters through `tanh((x - μ)/T) (x - α) / S`, and the marginal density is
//!
//! ```text
//! f(x) = exp(H(x) - tanh((x - μ)/T) (x - α)/S) / Z
//! ```
//!
//! with `H(x)` the binary entropy of the entry/exit choice at `x`. `Z` is a Riemann sum
//! on a uniform [`EvalGrid`], so `f` is a proper density on the grid.
//!
//! Every logistic and entropy term is evaluated through `exp(-|z|)` and `ln_1p`, so no
//! exponential of a large positive argument is ever taken.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass limit for either outermost grid cell before the support counts as truncated.
pub const EDGE_MASS_LIMIT: f64 = 1e-4;

/// Half-width of the automatic grid in units of `max(T, S)`.
pub const AUTO_SPAN_SCALES: f64 = 8.0;

/// Point count of the automatic grid.
pub const AUTO_GRID_POINTS: usize = 4001;

/// The parameter vector `Γ = [T, S, μ, α]`, in thousands of dollars.
///
/// `T` and `S` are validated strictly positive at construction, so every function taking
/// a `&QrseParams` can assume a valid parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct QrseParams {
    temperature: f64,
    scale: f64,
    mu: f64,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "T")]
    temperature: f64,
    #[serde(rename = "S")]
    scale: f64,
    mu: f64,
    alpha: f64,
}

impl TryFrom<RawParams> for QrseParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        QrseParams::new(raw.temperature, raw.scale, raw.mu, raw.alpha)
    }
}

impl From<QrseParams> for RawParams {
    fn from(p: QrseParams) -> Self {
        RawParams {
            temperature: p.temperature,
            scale: p.scale,
            mu: p.mu,
            alpha: p.alpha,
        }
    }
}

impl QrseParams {
    /// Parameter names in array order.
    pub const NAMES: [&'static str; 4] = ["T", "S", "mu", "alpha"];

    pub fn new(temperature: f64, scale: f64, mu: f64, alpha: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::InvalidParams(format!(
                "T must be finite and > 0, got {temperature}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParams(format!(
                "S must be finite and > 0, got {scale}"
            )));
        }
        if !mu.is_finite() || !alpha.is_finite() {
            return Err(Error::InvalidParams(format!(
                "mu and alpha must be finite, got mu={mu}, alpha={alpha}"
            )));
        }
        Ok(QrseParams {
            temperature,
            scale,
            mu,
            alpha,
        })
    }

    /// Builds from `[T, S, μ, α]`.
    pub fn from_array(values: [f64; 4]) -> Result<Self> {
        QrseParams::new(values[0], values[1], values[2], values[3])
    }

    /// Behavioral temperature `T`.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Market scale `S = 1/γ`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Household tipping point `μ`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Market barycenter `α`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `[T, S, μ, α]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.temperature, self.scale, self.mu, self.alpha]
    }

    /// Same parameters with both locations moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        QrseParams::new(
            self.temperature,
            self.scale,
            self.mu + shift,
            self.alpha + shift,
        )
    }
}

/// A uniform evaluation grid over the outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    points: Vec<f64>,
    spacing: f64,
}

impl EvalGrid {
    /// `len` points starting at `start`, `spacing` apart.
    pub fn new(start: f64, spacing: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "start and spacing must be finite with spacing > 0 (start={start}, spacing={spacing})"
            )));
        }
        if len < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {len}"
            )));
        }
        let points = (0..len).map(|i| start + i as f64 * spacing).collect();
        Ok(EvalGrid { points, spacing })
    }

    /// `len` points spanning `[lo, hi]` inclusive.
    pub fn span(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidGrid(format!(
                "need finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        if len < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {len}"
            )));
        }
        EvalGrid::new(lo, (hi - lo) / (len - 1) as f64, len)
    }

    /// Validates an explicit point list: strictly increasing and uniform within 1e-9 relative.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("non-finite grid point".into()));
        }
        let spacing = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
        if spacing <= 0.0 {
            return Err(Error::InvalidGrid(
                "points must be strictly increasing".into(),
            ));
        }
        for w in points.windows(2) {
            let step = w[1] - w[0];
            if step <= 0.0 || ((step - spacing) / spacing).abs() > 1e-9 {
                return Err(Error::InvalidGrid(format!(
                    "non-uniform step {step} (expected {spacing})"
                )));
            }
        }
        Ok(EvalGrid { points, spacing })
    }

    /// Default grid for `params`: `[min(μ,α) - 8·max(T,S), max(μ,α) + 8·max(T,S)]`, 4001 points.
    pub fn auto(params: &QrseParams) -> Self {
        let reach = AUTO_SPAN_SCALES * params.temperature.max(params.scale);
        let lo = params.mu.min(params.alpha) - reach;
        let hi = params.mu.max(params.alpha) + reach;
        EvalGrid::span(lo, hi, AUTO_GRID_POINTS).expect("auto grid is valid for valid params")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Same span with the spacing halved (twice as many cells).
    pub fn refined(&self) -> Self {
        EvalGrid::span(self.first(), self.last(), 2 * self.len() - 1)
            .expect("refining a valid grid is valid")
    }
}

/// Log-kernel values, log partition constant and normalized density over a grid.
#[derive(Debug, Clone)]
pub struct DensityTable {
    pub grid: EvalGrid,
    pub log_kernel: Vec<f64>,
    pub log_z: f64,
    pub pdf: Vec<f64>,
}

impl DensityTable {
    /// `Σ pdf·Δx`.
    pub fn total_mass(&self) -> f64 {
        self.pdf.iter().sum::<f64>() * self.grid.spacing
    }

    /// `Σ x·pdf·Δx`.
    pub fn mean(&self) -> f64 {
        self.grid
            .points
            .iter()
            .zip(&self.pdf)
            .map(|(x, p)| x * p)
            .sum::<f64>()
            * self.grid.spacing
    }

    /// Cumulative mass at the cell boundaries: `len + 1` values from 0 to 1.
    ///
    /// Cell `i` is `[x_i - Δx/2, x_i + Δx/2]` and carries `pdf_i·Δx`; the last value is
    /// pinned to exactly 1.
    pub fn cell_cdf(&self) -> Vec<f64> {
        let dx = self.grid.spacing;
        let mut cdf = Vec::with_capacity(self.pdf.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for p in &self.pdf {
            acc += p * dx;
            cdf.push(acc);
        }
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        *cdf.last_mut().expect("non-empty") = 1.0;
        cdf
    }

    /// Piecewise-linear CDF consistent with [`DensityTable::cell_cdf`].
    pub fn cdf_at(&self, x: f64) -> f64 {
        let cdf = self.cell_cdf();
        cdf_lookup(&self.grid, &cdf, x)
    }
}

/// Evaluates the piecewise-linear cell CDF at `x`.
pub(crate) fn cdf_lookup(grid: &EvalGrid, cell_cdf: &[f64], x: f64) -> f64 {
    let dx = grid.spacing;
    let lo = grid.first() - 0.5 * dx;
    let pos = (x - lo) / dx;
    if pos <= 0.0 {
        return 0.0;
    }
    let n = grid.len();
    if pos >= n as f64 {
        return 1.0;
    }
    let i = (pos.floor() as usize).min(n - 1);
    let frac = pos - i as f64;
    cell_cdf[i] + frac * (cell_cdf[i + 1] - cell_cdf[i])
}

/// Difference of entry and exit payoffs under linear symmetric payoffs: `2(x - μ)`.
pub fn payoff_difference(x: f64, mu: f64) -> f64 {
    2.0 * (x - mu)
}

#[inline]
fn logistic(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.max(f64::MIN_POSITIVE)
}

/// Probability of entering a district at outcome `x`: `1 / (1 + exp(-2(x-μ)/T))`.
///
/// Saturates at `f64::MIN_POSITIVE` rather than zero on the far side of the tipping point.
pub fn entry_probability(x: f64, params: &QrseParams) -> f64 {
    logistic(payoff_difference(x, params.mu) / params.temperature)
}

/// Probability of exiting: the mirrored logistic, `1 / (1 + exp(2(x-μ)/T))`.
pub fn exit_probability(x: f64, params: &QrseParams) -> f64 {
    logistic(-payoff_difference(x, params.mu) / params.temperature)
}

/// `tanh((x - μ)/T)`, equal to entry minus exit probability.
pub fn choice_difference(x: f64, params: &QrseParams) -> f64 {
    ((x - params.mu) / params.temperature).tanh()
}

/// Binary entropy and tanh term from one `exp` and one `ln_1p`.
///
/// With `z = 2(x-μ)/T`, `e = exp(-|z|)` and `l = ln(1 + e)`, the likelier action has
/// probability `1/(1+e)` and surprise `l`, the other `e/(1+e)` and `|z| + l`.
#[inline]
fn entropy_and_tanh(x: f64, mu: f64, temperature: f64) -> (f64, f64) {
    let z = 2.0 * (x - mu) / temperature;
    let a = z.abs();
    let e = (-a).exp();
    let l = e.ln_1p();
    let h = ((l + e * (a + l)) / (1.0 + e)).clamp(0.0, LN_2);
    let th = ((1.0 - e) / (1.0 + e)).copysign(z);
    (h, th)
}

/// Binary entropy of the entry/exit choice at `x`, in nats, within `[0, ln 2]`.
pub fn conditional_entropy(x: f64, params: &QrseParams) -> f64 {
    entropy_and_tanh(x, params.mu, params.temperature).0
}

/// Log of the unnormalized density: `H(x) - tanh((x-μ)/T)·(x-α)/S`.
#[inline]
pub fn log_kernel(x: f64, params: &QrseParams) -> f64 {
    let (h, th) = entropy_and_tanh(x, params.mu, params.temperature);
    h - th * (x - params.alpha) / params.scale
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check_edges(log_kernel: &[f64], log_z: f64, spacing: f64) -> Result<()> {
    let ln_dx = spacing.ln();
    let first = (log_kernel[0] - log_z + ln_dx).exp();
    if first > EDGE_MASS_LIMIT {
        return Err(Error::GridTooNarrow {
            side: "lower",
            mass: first,
        });
    }
    let last = (log_kernel[log_kernel.len() - 1] - log_z + ln_dx).exp();
    if last > EDGE_MASS_LIMIT {
        return Err(Error::GridTooNarrow {
            side: "upper",
            mass: last,
        });
    }
    Ok(())
}

fn kernel_and_log_z(params: &QrseParams, grid: &EvalGrid) -> Result<(Vec<f64>, f64)> {
    let lk: Vec<f64> = grid.points.iter().map(|&x| log_kernel(x, params)).collect();
    let log_z = log_sum_exp(&lk) + grid.spacing.ln();
    check_edges(&lk, log_z, grid.spacing)?;
    Ok((lk, log_z))
}

/// `ln Z` with `Z = Σ exp(log_kernel(x_i))·Δx`.
///
/// Fails with [`Error::GridTooNarrow`] when either outermost cell holds more than 1e-4 of
/// the mass.
pub fn log_partition(params: &QrseParams, grid: &EvalGrid) -> Result<f64> {
    kernel_and_log_z(params, grid).map(|(_, log_z)| log_z)
}

/// Tabulates the normalized density on `grid`.
pub fn build_density(params: &QrseParams, grid: &EvalGrid) -> Result<DensityTable> {
    let (log_kernel, log_z) = kernel_and_log_z(params, grid)?;
    let pdf = log_kernel
        .iter()
        .map(|lk| (lk - log_z).exp().max(f64::MIN_POSITIVE))
        .collect();
    Ok(DensityTable {
        grid: grid.clone(),
        log_kernel,
        log_z,
        pdf,
    })
}

/// Sum of `log_kernel` over the observations, without the partition term.
pub(crate) fn sum_log_kernel(data: &[f64], params: &QrseParams) -> f64 {
    data.iter().map(|&x| log_kernel(x, params)).sum()
}

/// QRSE log-likelihood: `Σ_j [log_kernel(x_j) - ln Z]`.
///
/// Each observation's kernel is evaluated exactly; only `Z` comes from the grid.
pub fn log_likelihood(data: &[f64], params: &QrseParams, grid: &EvalGrid) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams(
            "data contains non-finite values".into(),
        ));
    }
    let log_z = log_partition(params, grid)?;
    Ok(sum_log_kernel(data, params) - data.len() as f64 * log_z)
}

/// Model probability of each histogram bin.
///
/// Every grid point owns the cell `[x - Δx/2, x + Δx/2]`; its mass `pdf·Δx` is split
/// between the bins the cell overlaps. Mass outside `[edges[0], edges[last]]` goes to the
/// first or last bin. A bin with no grid point inside it fails with
/// [`Error::EmptyBinGrid`].
pub fn bin_probabilities(edges: &[f64], params: &QrseParams, grid: &EvalGrid) -> Result<Vec<f64>> {
    let table = build_density(params, grid)?;
    bin_masses(edges, &table)
}

pub(crate) fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidEdges(format!(
            "need at least 2 edges, got {}",
            edges.len()
        )));
    }
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidEdges("non-finite edge".into()));
    }
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidEdges(
            "edges must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Bin masses from an already tabulated density.
pub fn bin_masses(edges: &[f64], table: &DensityTable) -> Result<Vec<f64>> {
    validate_edges(edges)?;
    let bins = edges.len() - 1;
    let grid = &table.grid;
    let dx = grid.spacing;
    let mut probs = vec![0.0; bins];
    let mut occupied = vec![false; bins];
    let mut b = 0usize;
    for (&x, &p) in grid.points.iter().zip(&table.pdf) {
        // Point ownership for the coverage check.
        while b < bins - 1 && x >= edges[b + 1] {
            b += 1;
        }
        if x >= edges[0] && x <= edges[bins] {
            occupied[b] = true;
        }

        let density = p;
        let mut lo = x - 0.5 * dx;
        let hi = x + 0.5 * dx;
        if lo < edges[0] {
            let cut = hi.min(edges[0]);
            probs[0] += density * (cut - lo);
            lo = cut;
        }
        if hi > edges[bins] {
            let cut = lo.max(edges[bins]);
            probs[bins - 1] += density * (hi - cut);
        }
        let hi = hi.min(edges[bins]);
        if hi <= lo {
            continue;
        }
        // First bin whose upper edge lies above `lo`.
        let mut k = edges
            .partition_point(|&e| e <= lo)
            .saturating_sub(1)
            .min(bins - 1);
        let mut start = lo;
        while start < hi && k < bins {
            let end = hi.min(edges[k + 1]);
            if end > start {
                probs[k] += density * (end - start);
            }
            start = end;
            k += 1;
        }
    }
    if let Some(bin) = occupied.iter().position(|o| !o) {
        return Err(Error::EmptyBinGrid { bin });
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(probs)
}
