//! Seeded inverse-CDF sampling from a tabulated QRSE density.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::model::{build_density, cdf_lookup, DensityTable, EvalGrid, QrseParams};

/// Identifier of the generator used everywhere a seed appears: ChaCha20 keyed through
/// `SeedableRng::seed_from_u64`, as implemented by `rand_chacha` 0.9.
pub const RNG_ALGORITHM: &str = "chacha20/rand_chacha-0.9/seed_from_u64";

/// Seeded generator for stream `seed`.
pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
    /// `None` uses [`EvalGrid::auto`].
    pub grid: Option<EvalGrid>,
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SampleConfig {
            n,
            seed,
            grid: None,
        }
    }

    pub fn with_grid(mut self, grid: EvalGrid) -> Self {
        self.grid = Some(grid);
        self
    }
}

/// Maps uniforms to draws through the piecewise-linear cell CDF of a [`DensityTable`].
///
/// Grid point `x_i` owns the cell `[x_i - Δx/2, x_i + Δx/2]`; inside a cell the draw is
/// uniform, so the expected draw equals the grid mean `Σ x_i·pdf_i·Δx`.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    table: DensityTable,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new(table: DensityTable) -> Self {
        let cdf = table.cell_cdf();
        InverseCdf { table, cdf }
    }

    pub fn table(&self) -> &DensityTable {
        &self.table
    }

    /// Quantile at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        // Cell i spans cdf[i]..cdf[i + 1].
        let upper = self.cdf.partition_point(|&c| c <= u);
        let i = upper.saturating_sub(1).min(self.cdf.len() - 2);
        let lo = self.cdf[i];
        let width = self.cdf[i + 1] - lo;
        let frac = if width > 0.0 {
            ((u - lo) / width).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let dx = self.table.grid.spacing();
        self.table.grid.points()[i] - 0.5 * dx + frac * dx
    }

    /// The model CDF matching [`InverseCdf::quantile`].
    pub fn cdf(&self, x: f64) -> f64 {
        cdf_lookup(&self.table.grid, &self.cdf, x)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// `config.n` draws from the density at `params`; bit-identical for identical inputs.
pub fn sample(params: &QrseParams, config: &SampleConfig) -> Result<Vec<f64>> {
    if config.n == 0 {
        return Err(Error::InvalidConfig("sample count must be >= 1".into()));
    }
    let grid = match &config.grid {
        Some(g) => g.clone(),
        None => EvalGrid::auto(params),
    };
    let sampler = InverseCdf::new(build_density(params, &grid)?);
    let mut rng = rng_from_seed(config.seed);
    Ok((0..config.n).map(|_| sampler.draw(&mut rng)).collect())
}

/// Moment-based sample skewness `g1 = m3 / m2^{3/2}`.
pub fn sample_skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - mean;
        (a + d * d, b + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    if m2 <= 0.0 {
        return 0.0;
    }
    m3 / m2.powf(1.5)
}
