//! File formats: JSON artifacts, the two-file posterior trace, and plot-ready CSV tables.
//!
//! A trace is a JSON metadata file next to a CSV payload with header
//! `chain,draw,T,S,mu,alpha`. Floats are written in shortest round-trip form, so a trace
//! read back is bit-identical to the one written.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::HistogramSpec;
use crate::mcmc::{ChainConfig, PosteriorDraws, PriorSpec};
use crate::model::{
    bin_masses, build_density, entry_probability, exit_probability, EvalGrid, QrseParams,
};

pub const TRACE_META_FILE: &str = "trace.meta.json";
pub const TRACE_CSV_FILE: &str = "trace.csv";
pub const TRACE_HEADER: [&str; 6] = ["chain", "draw", "T", "S", "mu", "alpha"];

/// Writes `value` as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Everything in a [`PosteriorDraws`] except the draws themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub chains: usize,
    pub draws: usize,
    pub seed: u64,
    pub rng_algorithm: String,
    pub config: ChainConfig,
    pub priors: PriorSpec,
    pub acceptance_rate: Vec<f64>,
    pub step_scales: Vec<[f64; 4]>,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct TraceRow {
    chain: usize,
    draw: usize,
    #[serde(rename = "T")]
    temperature: f64,
    #[serde(rename = "S")]
    scale: f64,
    mu: f64,
    alpha: f64,
}

/// Paths of the metadata and payload files of the trace stored in `dir`.
pub fn trace_paths(dir: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let dir = dir.as_ref();
    (dir.join(TRACE_META_FILE), dir.join(TRACE_CSV_FILE))
}

/// Writes `posterior` as [`TRACE_META_FILE`] and [`TRACE_CSV_FILE`] inside `dir`.
pub fn write_trace(dir: impl AsRef<Path>, posterior: &PosteriorDraws) -> Result<()> {
    let (meta_path, csv_path) = trace_paths(&dir);
    let (chains, draws, _) = posterior.shape();
    let meta = TraceMeta {
        chains,
        draws,
        seed: posterior.seed,
        rng_algorithm: posterior.rng_algorithm.clone(),
        config: posterior.config.clone(),
        priors: posterior.priors,
        acceptance_rate: posterior.acceptance_rate.clone(),
        step_scales: posterior.step_scales.clone(),
        columns: TRACE_HEADER.iter().map(|s| s.to_string()).collect(),
    };
    write_json(&meta_path, &meta)?;

    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut csv = csv::Writer::from_writer(BufWriter::new(file));
    for (chain, rows) in posterior.draws.iter().enumerate() {
        for (draw, d) in rows.iter().enumerate() {
            csv.serialize(TraceRow {
                chain,
                draw,
                temperature: d[0],
                scale: d[1],
                mu: d[2],
                alpha: d[3],
            })?;
        }
    }
    csv.flush().map_err(|e| Error::io(&csv_path, e))
}

/// Reads a trace written by [`write_trace`], checking that the payload matches the
/// declared shape with rows in `(chain, draw)` order.
pub fn read_trace(dir: impl AsRef<Path>) -> Result<PosteriorDraws> {
    let (meta_path, csv_path) = trace_paths(&dir);
    let meta: TraceMeta = read_json(&meta_path)?;
    let file = File::open(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != TRACE_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "trace header must be {}, got {}",
                TRACE_HEADER.join(","),
                header.join(",")
            ),
        });
    }
    let mut draws: Vec<Vec<[f64; 4]>> = (0..meta.chains)
        .map(|_| Vec::with_capacity(meta.draws))
        .collect();
    for (i, row) in reader.deserialize::<TraceRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let expected = (i / meta.draws.max(1), i % meta.draws.max(1));
        if (row.chain, row.draw) != expected || row.chain >= meta.chains {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected chain {} draw {}, got chain {} draw {}",
                    expected.0, expected.1, row.chain, row.draw
                ),
            });
        }
        draws[row.chain].push([row.temperature, row.scale, row.mu, row.alpha]);
    }
    if draws.iter().any(|c| c.len() != meta.draws) {
        return Err(Error::InsufficientDraws(format!(
            "trace declares {} chains x {} draws but the payload is incomplete",
            meta.chains, meta.draws
        )));
    }
    Ok(PosteriorDraws {
        draws,
        acceptance_rate: meta.acceptance_rate,
        step_scales: meta.step_scales,
        seed: meta.seed,
        rng_algorithm: meta.rng_algorithm,
        config: meta.config,
        priors: meta.priors,
    })
}

/// Writes rows as CSV, the header taken from the field names.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut csv = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush().map_err(|e| Error::io(path, e))
}

/// Observed against fitted mass of one histogram bin, both also as densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramFitRow {
    pub left: f64,
    pub right: f64,
    pub center: f64,
    pub observed: f64,
    pub model: f64,
    pub observed_density: f64,
    pub model_density: f64,
}

pub fn histogram_fit(
    hist: &HistogramSpec,
    params: &QrseParams,
    grid: &EvalGrid,
) -> Result<Vec<HistogramFitRow>> {
    hist.validate()?;
    let table = build_density(params, grid)?;
    let model = bin_masses(&hist.edges, &table)?;
    Ok(hist
        .edges
        .windows(2)
        .zip(hist.frequencies.iter().zip(&model))
        .map(|(e, (&observed, &model))| {
            let width = e[1] - e[0];
            HistogramFitRow {
                left: e[0],
                right: e[1],
                center: 0.5 * (e[0] + e[1]),
                observed,
                model,
                observed_density: observed / width,
                model_density: model / width,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: f64,
    pub pdf: f64,
}

/// Fitted density on `grid`, keeping only points inside `[lo, hi]`.
pub fn density_curve(
    params: &QrseParams,
    grid: &EvalGrid,
    lo: f64,
    hi: f64,
) -> Result<Vec<DensityRow>> {
    let table = build_density(params, grid)?;
    Ok(table
        .grid
        .points()
        .iter()
        .zip(&table.pdf)
        .filter(|(&x, _)| lo <= x && x <= hi)
        .map(|(&x, &pdf)| DensityRow { x, pdf })
        .collect())
}

/// Choice probabilities and the joint action/outcome densities at one outcome value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantalResponseRow {
    pub x: f64,
    pub entry: f64,
    pub exit: f64,
    pub pdf: f64,
    /// `f(entry, x) = f(entry | x) f(x)`.
    pub joint_entry: f64,
    pub joint_exit: f64,
}

pub fn quantal_response_curves(
    params: &QrseParams,
    grid: &EvalGrid,
    lo: f64,
    hi: f64,
) -> Result<Vec<QuantalResponseRow>> {
    let table = build_density(params, grid)?;
    Ok(table
        .grid
        .points()
        .iter()
        .zip(&table.pdf)
        .filter(|(&x, _)| lo <= x && x <= hi)
        .map(|(&x, &pdf)| {
            let entry = entry_probability(x, params);
            let exit = exit_probability(x, params);
            QuantalResponseRow {
                x,
                entry,
                exit,
                pdf,
                joint_entry: entry * pdf,
                joint_exit: exit * pdf,
            }
        })
        .collect())
}

/// Baseline of the parameter-variation table: `T = 5, S = 5, μ = α = 0`.
pub const VARIATION_BASELINE: [f64; 4] = [5.0, 5.0, 0.0, 0.0];

/// Values swept for each parameter with the other three at the baseline.
pub const VARIATION_VALUES: [[f64; 3]; 4] = [
    [2.5, 5.0, 7.5],
    [2.5, 5.0, 7.5],
    [-5.0, 0.0, 5.0],
    [-5.0, 0.0, 5.0],
];

/// Half-width of the outcome range of the variation curves.
pub const VARIATION_HALF_WIDTH: f64 = 30.0;
const VARIATION_GRID_HALF_WIDTH: f64 = 100.0;
const VARIATION_GRID_POINTS: usize = 4001;

/// One point of a density curve in which a single parameter departs from the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationRow {
    pub parameter: String,
    pub value: f64,
    pub baseline: bool,
    pub x: f64,
    pub pdf: f64,
}

/// Density curves for every row of [`VARIATION_VALUES`] on a grid symmetric about zero.
pub fn parameter_variations() -> Result<Vec<VariationRow>> {
    let grid = EvalGrid::span(
        -VARIATION_GRID_HALF_WIDTH,
        VARIATION_GRID_HALF_WIDTH,
        VARIATION_GRID_POINTS,
    )?;
    let mut rows = Vec::new();
    for (idx, values) in VARIATION_VALUES.iter().enumerate() {
        for &value in values {
            let mut p = VARIATION_BASELINE;
            p[idx] = value;
            let params = QrseParams::from_array(p)?;
            for point in density_curve(&params, &grid, -VARIATION_HALF_WIDTH, VARIATION_HALF_WIDTH)?
            {
                rows.push(VariationRow {
                    parameter: QrseParams::NAMES[idx].to_string(),
                    value,
                    baseline: p == VARIATION_BASELINE,
                    x: point.x,
                    pdf: point.pdf,
                });
            }
        }
    }
    Ok(rows)
}
