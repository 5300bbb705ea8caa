//! The `qrse` command-line pipeline.
//!
//! Subcommands hand off through files in one output directory:
//!
//! ```text
//! ingest   districts.csv        -> cleaned.json, histogram.json
//! fit      histogram.json       -> map.json
//! sample   map.json, cleaned.json -> trace.meta.json, trace.csv
//! report   trace, histogram.json -> report.json, report.txt, plot CSVs
//! simulate                      -> simulated.csv (district schema)
//! ```
//!
//! Settings resolve as flags, then the `--config` file, then defaults. The config file
//! holds one `key = value` per line using the long flag names (`draws = 3000`,
//! `prior-mu-sd = 5`); `#` starts a comment.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 optimization failure,
//! 4 sampler failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{summarize, DEFAULT_HDI_PROB};
use crate::error::{Error, Result};
use crate::export::{
    density_curve, histogram_fit, parameter_variations, quantal_response_curves, read_json,
    read_trace, write_csv, write_json, write_trace,
};
use crate::fit::{
    fit_grid, fit_map, FitOptions, KlDirection, MapResult, ParamBounds, DEFAULT_RESTARTS,
};
use crate::ingest::{
    build_histogram, clean, filter_years, group_by_year, read_records_file, write_records, Binning,
    CleanConfig, CleanedSample, DistrictRecord, HistogramSpec, MoneyUnit, Summary, DEFAULT_YEARS,
};
use crate::mcmc::{run_chains, ChainConfig, PriorSpec, DEFAULT_LOCATION_SD, DEFAULT_SCALE_SD};
use crate::model::QrseParams;
use crate::synthetic::{sample, SampleConfig};

pub const CLEANED_FILE: &str = "cleaned.json";
pub const HISTOGRAM_FILE: &str = "histogram.json";
pub const MAP_FILE: &str = "map.json";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const FIT_HISTOGRAM_FILE: &str = "fit_histogram.csv";
pub const FIT_DENSITY_FILE: &str = "fit_density.csv";
pub const QUANTAL_RESPONSE_FILE: &str = "quantal_response.csv";
pub const VARIATIONS_FILE: &str = "parameter_variations.csv";
pub const SIMULATED_FILE: &str = "simulated.csv";
pub const DEFAULT_OUTDIR: &str = "qrse-out";

/// Parameters used by `simulate` when none are given: `T = 2.1, S = 4.9, μ = 8.66, α = 17.8`.
pub const DEFAULT_SIMULATION: [f64; 4] = [2.1, 4.9, 8.66, 17.8];
pub const DEFAULT_SIMULATION_N: usize = 10_000;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_OPTIMIZATION: u8 = 3;
pub const EXIT_SAMPLER: u8 = 4;

/// Exit status for a failed command.
pub fn exit_code(error: &Error) -> u8 {
    match error {
        Error::NoDescent => EXIT_OPTIMIZATION,
        Error::StuckChain { .. } => EXIT_SAMPLER,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qrse",
    version,
    about = "QRSE density fitting, posterior sampling and reporting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read district records, clean them and build the observed histogram.
    Ingest(IngestArgs),
    /// MAP estimate by KL minimization against the histogram.
    Fit(FitArgs),
    /// Metropolis–Hastings chains with priors centered at the MAP.
    Sample(SampleArgs),
    /// Posterior summary table and plot-ready CSVs.
    Report(ReportArgs),
    /// Synthetic district records drawn from a QRSE density.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory holding the pipeline artifacts.
    #[arg(long)]
    pub outdir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// District CSV with header `district_id,year,total_local_education_expenditures,...`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `fd` (Freedman–Diaconis) or a bin count.
    #[arg(long)]
    pub bins: Option<Binning>,
    #[arg(long, allow_hyphen_values = true)]
    pub extreme_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub extreme_hi: Option<f64>,
    /// Inclusive year range such as `2000-2016`, or a single year.
    #[arg(long)]
    pub years: Option<YearRange>,
    /// Also write one cleaned sample and histogram per year under `years/<year>/`.
    #[arg(long)]
    pub per_year: bool,
    /// Unit of the money columns: `dollars` or `thousands`.
    #[arg(long)]
    pub units: Option<MoneyUnit>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Histogram JSON; defaults to `<outdir>/histogram.json`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `model-first` or `observed-first`.
    #[arg(long)]
    pub kl_direction: Option<KlDirection>,
    /// Latin-hypercube restarts besides the moment-based start.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PriorArgs {
    /// Prior center of T; defaults to the MAP value.
    #[arg(long)]
    pub prior_t: Option<f64>,
    #[arg(long)]
    pub prior_s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub prior_mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub prior_alpha: Option<f64>,
    #[arg(long)]
    pub prior_t_sd: Option<f64>,
    #[arg(long)]
    pub prior_s_sd: Option<f64>,
    #[arg(long)]
    pub prior_mu_sd: Option<f64>,
    #[arg(long)]
    pub prior_alpha_sd: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub tune: Option<usize>,
    #[command(flatten)]
    pub priors: PriorArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Probability mass of the reported intervals.
    #[arg(long)]
    pub hdi_prob: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Output CSV; defaults to `<outdir>/simulated.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "t")]
    pub temperature: Option<f64>,
    #[arg(long = "s")]
    pub scale: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub units: Option<MoneyUnit>,
}

/// Inclusive range of years.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearRange(pub RangeInclusive<i32>);

impl FromStr for YearRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|e| format!("invalid year {t:?}: {e}"))
        };
        let (lo, hi) = match s.split_once('-') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let y = parse(s)?;
                (y, y)
            }
        };
        if lo > hi {
            return Err(format!("year range {lo}-{hi} is empty"));
        }
        Ok(YearRange(lo..=hi))
    }
}

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 29] = [
    "outdir",
    "seed",
    "input",
    "bins",
    "extreme-lo",
    "extreme-hi",
    "years",
    "per-year",
    "units",
    "kl-direction",
    "restarts",
    "chains",
    "draws",
    "tune",
    "prior-t",
    "prior-s",
    "prior-mu",
    "prior-alpha",
    "prior-t-sd",
    "prior-s-sd",
    "prior-mu-sd",
    "prior-alpha-sd",
    "hdi-prob",
    "output",
    "n",
    "t",
    "s",
    "mu",
    "alpha",
];

/// Parsed config file: key to `(line, value)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (u64, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i as u64 + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            })?;
            let key = key.trim().to_string();
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown config key {key:?}"),
                });
            }
            if entries
                .insert(key.clone(), (line, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate config key {key:?}"),
                });
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, value)) => value.parse().map(Some).map_err(|e| Error::Parse {
                line: *line,
                message: format!("{key}: {e}"),
            }),
        }
    }
}

/// `flag` if given, else the config-file value.
fn layered<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn load_config(common: &CommonArgs) -> Result<ConfigFile> {
    match &common.config {
        Some(path) => ConfigFile::read(path),
        None => Ok(ConfigFile::default()),
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub outdir: PathBuf,
    pub binning: Binning,
    pub clean: CleanConfig,
    pub years: RangeInclusive<i32>,
    pub per_year: bool,
    pub units: MoneyUnit,
    pub kl_direction: KlDirection,
    pub restarts: usize,
    pub chain: ChainConfig,
    /// Overrides of the MAP-based prior centers, `[T, S, μ, α]`.
    pub prior_centers: [Option<f64>; 4],
    pub prior_sds: [f64; 4],
    pub hdi_prob: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            outdir: PathBuf::from(DEFAULT_OUTDIR),
            binning: Binning::FreedmanDiaconis,
            clean: CleanConfig::default(),
            years: DEFAULT_YEARS,
            per_year: false,
            units: MoneyUnit::Dollars,
            kl_direction: KlDirection::ModelFirst,
            restarts: DEFAULT_RESTARTS,
            chain: ChainConfig::default(),
            prior_centers: [None; 4],
            prior_sds: [
                DEFAULT_SCALE_SD,
                DEFAULT_SCALE_SD,
                DEFAULT_LOCATION_SD,
                DEFAULT_LOCATION_SD,
            ],
            hdi_prob: DEFAULT_HDI_PROB,
            seed: 0,
        }
    }
}

impl RunConfig {
    fn with_common(common: &CommonArgs, file: &ConfigFile) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(dir) = layered(common.outdir.clone(), file, "outdir")? {
            cfg.outdir = dir;
        }
        if let Some(seed) = layered(common.seed, file, "seed")? {
            cfg.seed = seed;
        }
        cfg.chain.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn for_ingest(args: &IngestArgs, file: &ConfigFile) -> Result<Self> {
        let mut cfg = Self::with_common(&args.common, file)?;
        cfg.input = layered(args.input.clone(), file, "input")?;
        if let Some(b) = layered(args.bins, file, "bins")? {
            cfg.binning = b;
        }
        if let Some(lo) = layered(args.extreme_lo, file, "extreme-lo")? {
            cfg.clean.extreme_bound_low = lo;
        }
        if let Some(hi) = layered(args.extreme_hi, file, "extreme-hi")? {
            cfg.clean.extreme_bound_high = hi;
        }
        if let Some(y) = layered(args.years.clone(), file, "years")? {
            cfg.years = y.0;
        }
        cfg.per_year = args.per_year || file.get::<bool>("per-year")?.unwrap_or(false);
        if let Some(u) = layered(args.units, file, "units")? {
            cfg.units = u;
        }
        if !(cfg.clean.extreme_bound_low < cfg.clean.extreme_bound_high) {
            return Err(Error::InvalidConfig(format!(
                "extreme bounds must satisfy lo < hi, got [{}, {}]",
                cfg.clean.extreme_bound_low, cfg.clean.extreme_bound_high
            )));
        }
        if let Binning::FixedCount(0) = cfg.binning {
            return Err(Error::InvalidConfig("bins must be >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn for_fit(args: &FitArgs, file: &ConfigFile) -> Result<Self> {
        let mut cfg = Self::with_common(&args.common, file)?;
        cfg.input = layered(args.input.clone(), file, "input")?;
        if let Some(d) = layered(args.kl_direction, file, "kl-direction")? {
            cfg.kl_direction = d;
        }
        if let Some(r) = layered(args.restarts, file, "restarts")? {
            cfg.restarts = r;
        }
        Ok(cfg)
    }

    pub fn for_sample(args: &SampleArgs, file: &ConfigFile) -> Result<Self> {
        let mut cfg = Self::with_common(&args.common, file)?;
        if let Some(c) = layered(args.chains, file, "chains")? {
            cfg.chain.chains = c;
        }
        if let Some(d) = layered(args.draws, file, "draws")? {
            cfg.chain.draws = d;
        }
        if let Some(t) = layered(args.tune, file, "tune")? {
            cfg.chain.tune = t;
        }
        let p = &args.priors;
        cfg.prior_centers = [
            layered(p.prior_t, file, "prior-t")?,
            layered(p.prior_s, file, "prior-s")?,
            layered(p.prior_mu, file, "prior-mu")?,
            layered(p.prior_alpha, file, "prior-alpha")?,
        ];
        let sds = [
            layered(p.prior_t_sd, file, "prior-t-sd")?,
            layered(p.prior_s_sd, file, "prior-s-sd")?,
            layered(p.prior_mu_sd, file, "prior-mu-sd")?,
            layered(p.prior_alpha_sd, file, "prior-alpha-sd")?,
        ];
        for (slot, sd) in cfg.prior_sds.iter_mut().zip(sds) {
            if let Some(sd) = sd {
                if !(sd.is_finite() && sd > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "prior sd must be positive, got {sd}"
                    )));
                }
                *slot = sd;
            }
        }
        if cfg.prior_centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("prior centers must be finite".into()));
        }
        cfg.chain.validate()?;
        Ok(cfg)
    }

    pub fn for_report(args: &ReportArgs, file: &ConfigFile) -> Result<Self> {
        let mut cfg = Self::with_common(&args.common, file)?;
        if let Some(p) = layered(args.hdi_prob, file, "hdi-prob")? {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "hdi-prob must lie in (0, 1), got {p}"
                )));
            }
            cfg.hdi_prob = p;
        }
        Ok(cfg)
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.outdir.join(name)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn summary_table(sample: &CleanedSample) -> String {
    let rows: [(&str, Summary); 3] = [
        ("x", sample.x_summary()),
        ("kappa", sample.kappa),
        ("tau", sample.tau),
    ];
    let mut out = format!(
        "{:<9}{:>10}{:>10}{:>10}{:>10}\n",
        "Variable", "Mean", "Sd", "Min", "Max"
    );
    for (name, s) in rows {
        out.push_str(&format!(
            "{:<9}{:>10.2}{:>10.2}{:>10.2}{:>10.2}\n",
            name, s.mean, s.sd, s.min, s.max
        ));
    }
    out
}

fn ingest_one(
    records: &[DistrictRecord],
    cfg: &RunConfig,
    dir: &Path,
) -> Result<(CleanedSample, HistogramSpec)> {
    let cleaned = clean(records, &cfg.clean)?;
    let hist = build_histogram(&cleaned.values, cfg.binning)?;
    create_dir(dir)?;
    write_json(dir.join(CLEANED_FILE), &cleaned)?;
    write_json(dir.join(HISTOGRAM_FILE), &hist)?;
    Ok((cleaned, hist))
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<CleanedSample> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("ingest needs --input".into()))?;
    let records = filter_years(read_records_file(input, cfg.units)?, &cfg.years);
    if records.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no records in years {}-{}",
            cfg.years.start(),
            cfg.years.end()
        )));
    }
    let (cleaned, hist) = ingest_one(&records, cfg, &cfg.outdir)?;
    println!(
        "records {}  excluded_missing {}  excluded_extreme {}  N {}  bins {}",
        cleaned.record_count(),
        cleaned.excluded_missing,
        cleaned.excluded_extreme,
        cleaned.n(),
        hist.bins()
    );
    print!("{}", summary_table(&cleaned));
    if cfg.per_year {
        for (year, group) in group_by_year(&records) {
            let dir = cfg.outdir.join("years").join(year.to_string());
            let (c, _) = ingest_one(&group, cfg, &dir)?;
            println!(
                "year {year}  N {}  mean {:.2}  sd {:.2}  excluded {}",
                c.n(),
                c.x_mean,
                c.x_sd,
                c.excluded_missing + c.excluded_extreme
            );
        }
    }
    Ok(cleaned)
}

fn print_params(label: &str, p: &QrseParams) {
    println!(
        "{label}  T {:.4}  S {:.4}  mu {:.4}  alpha {:.4}",
        p.temperature(),
        p.scale(),
        p.mu(),
        p.alpha()
    );
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<MapResult> {
    let path = cfg
        .input
        .clone()
        .unwrap_or_else(|| cfg.artifact(HISTOGRAM_FILE));
    let hist: HistogramSpec = read_json(&path)?;
    hist.validate()?;
    let options = FitOptions {
        direction: cfg.kl_direction,
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..FitOptions::default()
    };
    let map = fit_map(&hist, &options)?;
    create_dir(&cfg.outdir)?;
    write_json(cfg.artifact(MAP_FILE), &map)?;
    print_params("MAP", &map.params);
    println!(
        "KL {:.6e}  Soofi ID {:.6}  converged {}  iterations {}",
        map.kl, map.soofi_id, map.converged, map.iterations
    );
    Ok(map)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<crate::mcmc::PosteriorDraws> {
    let map: MapResult = read_json(cfg.artifact(MAP_FILE))?;
    let cleaned: CleanedSample = read_json(cfg.artifact(CLEANED_FILE))?;
    let mut center = map.params.to_array();
    for (c, o) in center.iter_mut().zip(cfg.prior_centers) {
        if let Some(o) = o {
            *c = o;
        }
    }
    let priors = PriorSpec::with_sds(&QrseParams::from_array(center)?, cfg.prior_sds)?;
    println!(
        "chains {}  draws {}  tune {}  seed {}",
        cfg.chain.chains, cfg.chain.draws, cfg.chain.tune, cfg.chain.seed
    );
    let posterior = run_chains(&cleaned.values, &priors, &cfg.chain)?;
    write_trace(&cfg.outdir, &posterior)?;
    let rates: Vec<String> = posterior
        .acceptance_rate
        .iter()
        .map(|a| format!("{a:.3}"))
        .collect();
    println!("acceptance {}", rates.join(" "));
    Ok(posterior)
}

pub fn cmd_report(cfg: &RunConfig) -> Result<crate::diagnostics::FitReport> {
    let posterior = read_trace(&cfg.outdir)?;
    let hist: HistogramSpec = read_json(cfg.artifact(HISTOGRAM_FILE))?;
    hist.validate()?;
    let grid = fit_grid(&hist, &ParamBounds::for_histogram(&hist))?;
    let report = summarize(&posterior, &hist, &grid, cfg.hdi_prob)?;
    let table = report.to_table();
    write_json(cfg.artifact(REPORT_JSON_FILE), &report)?;
    std::fs::write(cfg.artifact(REPORT_TEXT_FILE), &table)
        .map_err(|e| Error::io(cfg.artifact(REPORT_TEXT_FILE), e))?;

    let mean = report.posterior_mean;
    let (lo, hi) = (hist.edges[0], hist.edges[hist.edges.len() - 1]);
    write_csv(
        cfg.artifact(FIT_HISTOGRAM_FILE),
        &histogram_fit(&hist, &mean, &grid)?,
    )?;
    write_csv(
        cfg.artifact(FIT_DENSITY_FILE),
        &density_curve(&mean, &grid, lo, hi)?,
    )?;
    write_csv(
        cfg.artifact(QUANTAL_RESPONSE_FILE),
        &quantal_response_curves(&mean, &grid, lo, hi)?,
    )?;
    write_csv(cfg.artifact(VARIATIONS_FILE), &parameter_variations()?)?;
    print!("{table}");
    Ok(report)
}

/// Per-capita taxes of a simulated record: positive, and large enough that per-pupil
/// spending `x + τ` stays positive.
fn simulated_tau(x: f64) -> f64 {
    1.0 + (-x).max(0.0)
}

const SIMULATED_ENROLLMENT: u64 = 1_000;
const SIMULATED_POPULATION: u64 = 4_000;

/// District records whose educational returns reproduce `values` in order.
pub fn simulated_records(values: &[f64]) -> Vec<DistrictRecord> {
    let years: Vec<i32> = DEFAULT_YEARS.collect();
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let tau = simulated_tau(x);
            DistrictRecord::new(
                format!("SIM{:07}", i / years.len()),
                years[i % years.len()],
                (x + tau) * SIMULATED_ENROLLMENT as f64,
                tau * SIMULATED_POPULATION as f64,
                SIMULATED_ENROLLMENT,
                SIMULATED_POPULATION,
            )
        })
        .collect()
}

pub fn cmd_simulate(args: &SimulateArgs, file: &ConfigFile) -> Result<PathBuf> {
    let cfg = RunConfig::with_common(&args.common, file)?;
    let params = QrseParams::new(
        layered(args.temperature, file, "t")?.unwrap_or(DEFAULT_SIMULATION[0]),
        layered(args.scale, file, "s")?.unwrap_or(DEFAULT_SIMULATION[1]),
        layered(args.mu, file, "mu")?.unwrap_or(DEFAULT_SIMULATION[2]),
        layered(args.alpha, file, "alpha")?.unwrap_or(DEFAULT_SIMULATION[3]),
    )?;
    let n = layered(args.n, file, "n")?.unwrap_or(DEFAULT_SIMULATION_N);
    if n == 0 {
        return Err(Error::InvalidConfig("n must be >= 1".into()));
    }
    let units = layered(args.units, file, "units")?.unwrap_or_default();
    let output = layered(args.output.clone(), file, "output")?
        .unwrap_or_else(|| cfg.artifact(SIMULATED_FILE));
    let values = sample(&params, &SampleConfig::new(n, cfg.seed))?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let out = std::fs::File::create(&output).map_err(|e| Error::io(&output, e))?;
    write_records(
        std::io::BufWriter::new(out),
        &simulated_records(&values),
        units,
    )?;
    print_params("simulated", &params);
    println!("wrote {n} records to {}", output.display());
    Ok(output)
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => {
            let file = load_config(&args.common)?;
            cmd_ingest(&RunConfig::for_ingest(&args, &file)?).map(drop)
        }
        Command::Fit(args) => {
            let file = load_config(&args.common)?;
            cmd_fit(&RunConfig::for_fit(&args, &file)?).map(drop)
        }
        Command::Sample(args) => {
            let file = load_config(&args.common)?;
            cmd_sample(&RunConfig::for_sample(&args, &file)?).map(drop)
        }
        Command::Report(args) => {
            let file = load_config(&args.common)?;
            cmd_report(&RunConfig::for_report(&args, &file)?).map(drop)
        }
        Command::Simulate(args) => {
            let file = load_config(&args.common)?;
            cmd_simulate(&args, &file).map(drop)
        }
    }
}

/// Parses `std::env::args`, runs, and maps failures to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
