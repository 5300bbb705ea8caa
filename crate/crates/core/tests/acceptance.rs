//! Acceptance suite. Every criterion prints exactly one `ACCEPTANCE <id> PASS|FAIL` line
//! and then asserts, so `cargo test --test acceptance -- --nocapture` doubles as a report.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use qrse::diagnostics::{hdi, split_rhat, summarize, FitReport};
use qrse::fit::{fit_map, FitOptions, MapResult};
use qrse::ingest::{
    build_histogram, clean, read_records_file, Binning, CleanConfig, HistogramSpec, MoneyUnit,
};
use qrse::mcmc::{run_chains, ChainConfig, PosteriorDraws, PriorSpec, TruncatedNormal};
use qrse::model::{
    build_density, choice_difference, conditional_entropy, entry_probability, exit_probability,
    log_kernel, payoff_difference, EvalGrid, QrseParams,
};
use qrse::synthetic::{rng_from_seed, sample, sample_skewness, SampleConfig};

const NORMALIZATION_CASES: usize = 200;
const NORMALIZATION_TOL: f64 = 1e-6;
const NORMALIZATION_BUDGET: Duration = Duration::from_secs(10);

const TANH_TOL: f64 = 1e-12;
const ENTRY_EXIT_TOL: f64 = 1e-15;
const ENTROPY_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;

/// Reference parameters `(T, S, μ, α)`.
const TRUTH: [f64; 4] = [2.1, 4.9, 8.66, 17.8];
const ROUND_TRIP_N: usize = 100_000;
const ROUND_TRIP_SEED: u64 = 20_240_601;
const LOCATION_TOL: f64 = 0.5;
const SCALE_REL_TOL: f64 = 0.25;
const MAP_BUDGET: Duration = Duration::from_secs(120);

const MCMC_CHAINS: usize = 3;
const MCMC_DRAWS: usize = 3_000;
const MCMC_TUNE: usize = 500;
const MCMC_HDI_PROB: f64 = 0.94;
const MCMC_RHAT_MAX: f64 = 1.01;
const MCMC_BUDGET: Duration = Duration::from_secs(15 * 60);

const SKEW_GAP: f64 = 9.14;
const SKEW_N: usize = 1_000_000;
const SYMMETRIC_SKEW_MAX: f64 = 0.05;

const RHAT_IID_RANGE: (f64, f64) = (0.999, 1.005);
const RHAT_SEPARATED_MIN: f64 = 3.0;
const HDI_WIDTH: f64 = 0.94;
const HDI_WIDTH_TOL: f64 = 0.01;

const PRIOR_MC_SIGMAS: f64 = 3.0;

const SOOFI_MAX: f64 = 0.02;

fn report(id: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn truth() -> QrseParams {
    QrseParams::from_array(TRUTH).unwrap()
}

struct RoundTrip {
    histogram: HistogramSpec,
    data: Vec<f64>,
    map: MapResult,
    map_elapsed: Duration,
}

fn round_trip() -> &'static RoundTrip {
    static CELL: OnceLock<RoundTrip> = OnceLock::new();
    CELL.get_or_init(|| {
        let data = sample(&truth(), &SampleConfig::new(ROUND_TRIP_N, ROUND_TRIP_SEED)).unwrap();
        let histogram = build_histogram(&data, Binning::FreedmanDiaconis).unwrap();
        let start = Instant::now();
        let map = fit_map(&histogram, &FitOptions::default()).unwrap();
        RoundTrip {
            histogram,
            data,
            map,
            map_elapsed: start.elapsed(),
        }
    })
}

struct McmcRun {
    posterior: PosteriorDraws,
    report: FitReport,
    elapsed: Duration,
}

fn mcmc_run() -> &'static McmcRun {
    static CELL: OnceLock<McmcRun> = OnceLock::new();
    CELL.get_or_init(|| {
        let rt = round_trip();
        let priors = PriorSpec::centered_at(&rt.map.params).unwrap();
        let config = ChainConfig {
            chains: MCMC_CHAINS,
            draws: MCMC_DRAWS,
            tune: MCMC_TUNE,
            seed: ROUND_TRIP_SEED,
            ..ChainConfig::default()
        };
        let start = Instant::now();
        let posterior = run_chains(&rt.data, &priors, &config).unwrap();
        let elapsed = start.elapsed();
        let grid = qrse::fit::fit_grid(
            &rt.histogram,
            &qrse::fit::ParamBounds::for_histogram(&rt.histogram),
        )
        .unwrap();
        let report = summarize(&posterior, &rt.histogram, &grid, MCMC_HDI_PROB).unwrap();
        McmcRun {
            posterior,
            report,
            elapsed,
        }
    })
}

#[test]
fn criterion_1_normalization() {
    let mut rng = rng_from_seed(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..NORMALIZATION_CASES {
        let p = QrseParams::new(
            rng.random_range(0.1..=8.0),
            rng.random_range(0.1..=8.0),
            rng.random_range(-20.0..=40.0),
            rng.random_range(-20.0..=40.0),
        )
        .unwrap();
        let table = build_density(&p, &EvalGrid::auto(&p)).unwrap();
        worst = worst.max((table.total_mass() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst <= NORMALIZATION_TOL && elapsed < NORMALIZATION_BUDGET;
    report(
        "1",
        pass,
        &format!("max |mass - 1| = {worst:.3e} over {NORMALIZATION_CASES} draws in {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_2_identities() {
    let cases = [
        QrseParams::new(2.1, 4.9, 8.66, 17.8).unwrap(),
        QrseParams::new(0.1, 8.0, -20.0, 40.0).unwrap(),
        QrseParams::new(8.0, 0.1, 40.0, -20.0).unwrap(),
        QrseParams::new(1.0, 1.0, 0.0, 0.0).unwrap(),
    ];
    let (mut tanh_err, mut sum_err, mut entropy_err, mut sym_err) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in &cases {
        for i in 0..=400 {
            let x = p.mu() - 30.0 + 0.15 * i as f64;
            let identity = entry_probability(x, p) - exit_probability(x, p);
            tanh_err = tanh_err.max((identity - choice_difference(x, p)).abs());
            sum_err = sum_err.max((entry_probability(x, p) + exit_probability(x, p) - 1.0).abs());
        }
        entropy_err =
            entropy_err.max((conditional_entropy(p.mu(), p) - std::f64::consts::LN_2).abs());
        assert_eq!(payoff_difference(p.mu(), p.mu()), 0.0);

        let sym = QrseParams::new(p.temperature(), p.scale(), p.mu(), p.mu()).unwrap();
        let table = build_density(&sym, &EvalGrid::auto(&sym)).unwrap();
        let pmax = table.pdf.iter().cloned().fold(0.0, f64::max);
        for d in [0.1, 0.5, 1.0, 2.5, 5.0] {
            let a = log_kernel(sym.mu() + d, &sym);
            let b = log_kernel(sym.mu() - d, &sym);
            sym_err = sym_err.max((a - b).abs());
        }
        let n = table.pdf.len();
        for i in 0..n / 2 {
            sym_err = sym_err.max((table.pdf[i] - table.pdf[n - 1 - i]).abs() / pmax);
        }
    }
    let pass = tanh_err <= TANH_TOL
        && sum_err <= ENTRY_EXIT_TOL
        && entropy_err <= ENTROPY_TOL
        && sym_err <= SYMMETRY_TOL;
    report(
        "2",
        pass,
        &format!(
            "tanh {tanh_err:.1e}, entry+exit {sum_err:.1e}, H(mu)-ln2 {entropy_err:.1e}, symmetry {sym_err:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_map_round_trip() {
    let rt = round_trip();
    let fit = rt.map.params;
    let t = truth();
    let errs = [
        (fit.temperature() - t.temperature()).abs() / t.temperature(),
        (fit.scale() - t.scale()).abs() / t.scale(),
        (fit.mu() - t.mu()).abs(),
        (fit.alpha() - t.alpha()).abs(),
    ];
    let pass = errs[0] <= SCALE_REL_TOL
        && errs[1] <= SCALE_REL_TOL
        && errs[2] <= LOCATION_TOL
        && errs[3] <= LOCATION_TOL
        && rt.map_elapsed < MAP_BUDGET;
    report(
        "3",
        pass,
        &format!(
            "MAP T={:.3} S={:.3} mu={:.3} alpha={:.3} (KL {:.2e}) in {:.2?}",
            fit.temperature(),
            fit.scale(),
            fit.mu(),
            fit.alpha(),
            rt.map.kl,
            rt.map_elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_mcmc_coverage() {
    let run = mcmc_run();
    let mut covered = true;
    let mut detail = Vec::new();
    for (idx, name) in QrseParams::NAMES.iter().enumerate() {
        let chains = run.posterior.parameter(idx);
        let (lo, hi) = hdi(&run.posterior.pooled(idx), MCMC_HDI_PROB).unwrap();
        let rhat = split_rhat(&chains).unwrap();
        let inside = lo <= TRUTH[idx] && TRUTH[idx] <= hi;
        covered &= inside && rhat <= MCMC_RHAT_MAX;
        detail.push(format!("{name} [{lo:.3}, {hi:.3}] rhat {rhat:.4}"));
    }
    let pass = covered && run.elapsed < MCMC_BUDGET;
    report(
        "4",
        pass,
        &format!(
            "{}; acceptance {:?}; {:.2?}",
            detail.join(", "),
            run.posterior
                .acceptance_rate
                .iter()
                .map(|a| format!("{a:.2}"))
                .collect::<Vec<_>>(),
            run.elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_skewness_direction() {
    let skewed = QrseParams::new(2.1, 4.9, 8.66, 8.66 + SKEW_GAP).unwrap();
    let symmetric = QrseParams::new(2.1, 4.9, 8.66, 8.66).unwrap();
    let g_skew = sample_skewness(&sample(&skewed, &SampleConfig::new(SKEW_N, 5)).unwrap());
    let g_sym = sample_skewness(&sample(&symmetric, &SampleConfig::new(SKEW_N, 6)).unwrap());
    let pass = g_skew > 0.0 && g_sym.abs() < SYMMETRIC_SKEW_MAX;
    report(
        "5",
        pass,
        &format!("skew(alpha-mu=+{SKEW_GAP}) = {g_skew:.4}, skew(alpha=mu) = {g_sym:.4}"),
    );
    assert!(pass);
}

fn normal_chains(chains: usize, n: usize, seed: u64, offsets: &[f64]) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..chains)
        .map(|c| {
            (0..n)
                .map(|_| offsets[c] + rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect()
}

#[test]
fn criterion_6_diagnostic_oracles() {
    let iid = split_rhat(&normal_chains(4, 5_000, 61, &[0.0; 4])).unwrap();
    let separated = split_rhat(&normal_chains(2, 1_000, 62, &[0.0, 10.0])).unwrap();
    let mut rng = rng_from_seed(63);
    let uniform: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
    let (lo, hi) = hdi(&uniform, 0.94).unwrap();
    let width = hi - lo;
    let pass = (RHAT_IID_RANGE.0..=RHAT_IID_RANGE.1).contains(&iid)
        && separated > RHAT_SEPARATED_MIN
        && (width - HDI_WIDTH).abs() <= HDI_WIDTH_TOL;
    report(
        "6",
        pass,
        &format!("rhat iid {iid:.5}, rhat separated {separated:.3}, uniform HDI width {width:.4}"),
    );
    assert!(pass);
}

/// Batch-means standard error of the mean.
fn mc_standard_error(chains: &[Vec<f64>]) -> f64 {
    let batch = 500;
    let means: Vec<f64> = chains
        .iter()
        .flat_map(|c| {
            c.chunks_exact(batch)
                .map(|b| b.iter().sum::<f64>() / batch as f64)
        })
        .collect();
    let k = means.len() as f64;
    let m = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

#[test]
fn criterion_7_prior_only_sampling() {
    let center = QrseParams::new(1.0, 7.0, 3.0, -4.0).unwrap();
    let priors = PriorSpec::with_sds(&center, [2.0, 2.0, 1.5, 3.0]).unwrap();
    let config = ChainConfig {
        chains: 4,
        draws: 25_000,
        tune: 1_000,
        seed: 71,
        ..ChainConfig::default()
    };
    let posterior = run_chains(&[], &priors, &config).unwrap();

    let expected = [
        truncated_mean(&priors.temperature),
        truncated_mean(&priors.scale),
        priors.mu.center,
        priors.alpha.center,
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (idx, name) in QrseParams::NAMES.iter().enumerate() {
        let pooled = posterior.pooled(idx);
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let se = mc_standard_error(&posterior.parameter(idx));
        let z = (mean - expected[idx]) / se;
        pass &= z.abs() <= PRIOR_MC_SIGMAS;
        detail.push(format!(
            "{name} {mean:.3} vs {:.3} (z {z:+.2})",
            expected[idx]
        ));
    }

    // Zero data: the log-posterior equals the log-prior pointwise.
    let grid = EvalGrid::span(-40.0, 40.0, 4001).unwrap();
    let mut rng = rng_from_seed(72);
    for _ in 0..50 {
        let p = [
            rng.random_range(0.2..7.5),
            rng.random_range(0.2..7.5),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        ];
        let post =
            qrse::mcmc::log_posterior(&QrseParams::from_array(p).unwrap(), &[], &priors, &grid)
                .unwrap();
        let prior = priors.log_density(&p).unwrap();
        pass &= post == prior;
    }
    report(
        "7",
        pass,
        &format!("{}; zero-data posterior == prior", detail.join(", ")),
    );
    assert!(pass);
}

/// Mean of a normal truncated to `[lower, upper]`, by closed form.
fn truncated_mean(prior: &TruncatedNormal) -> f64 {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let unit = Normal::new(0.0, 1.0).unwrap();
    let a = (prior.lower - prior.center) / prior.sd;
    let b = (prior.upper - prior.center) / prior.sd;
    prior.center + prior.sd * (unit.pdf(a) - unit.pdf(b)) / (unit.cdf(b) - unit.cdf(a))
}

#[test]
fn criterion_8_fit_quality() {
    let run = mcmc_run();
    let pass = run.report.soofi_id <= SOOFI_MAX;
    report(
        "8",
        pass,
        &format!(
            "posterior-mean Soofi ID {:.5} (KL {:.3e})",
            run.report.soofi_id, run.report.kl
        ),
    );
    assert!(pass);
}

/// Optional: runs only when `QRSE_DISTRICT_DATA` names a district CSV.
#[test]
fn criterion_9_full_reproduction() {
    let Some(path) = std::env::var_os("QRSE_DISTRICT_DATA").map(PathBuf::from) else {
        report(
            "9",
            true,
            "skipped (set QRSE_DISTRICT_DATA to a district CSV to run)",
        );
        return;
    };
    let records = read_records_file(&path, MoneyUnit::Dollars).unwrap();
    let records = qrse::ingest::filter_years(records, &qrse::ingest::DEFAULT_YEARS);
    let cleaned = clean(&records, &CleanConfig::default()).unwrap();
    let hist = build_histogram(&cleaned.values, Binning::FreedmanDiaconis).unwrap();
    let map = fit_map(&hist, &FitOptions::default()).unwrap();
    report(
        "9",
        true,
        &format!(
            "N = {}, mean {:.2}, sd {:.2}; MAP {:?} (informational, no tolerance)",
            cleaned.n(),
            cleaned.x_mean,
            cleaned.x_sd,
            map.params.to_array()
        ),
    );
}
