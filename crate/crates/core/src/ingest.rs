//! District fiscal records to a cleaned sample of educational returns.
//!
//! Input is a UTF-8 CSV with header
//!
//! ```text
//! district_id,year,total_local_education_expenditures,total_local_taxes_and_charges,enrollment,population
//! ```
//!
//! one row per district-year, `.` as decimal separator and an empty field for a missing
//! value. Monetary columns are converted to thousands of dollars on read.
//!
//! The returns variable is per-pupil expenditure minus per-capita taxes and charges,
//! `x = κ - τ`.

use std::collections::BTreeMap;
use std::io::Read;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = [
    "district_id",
    "year",
    "total_local_education_expenditures",
    "total_local_taxes_and_charges",
    "enrollment",
    "population",
];

pub const DEFAULT_YEARS: RangeInclusive<i32> = 2000..=2016;
pub const DEFAULT_EXTREME_LOW: f64 = -50.0;
pub const DEFAULT_EXTREME_HIGH: f64 = 120.0;

/// Upper limit on automatically chosen bin counts.
pub const MAX_AUTO_BINS: usize = 10_000;

/// One district-year. Monetary fields are in thousands of dollars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictRecord {
    pub district_id: String,
    pub year: i32,
    pub total_local_education_expenditures: Option<f64>,
    pub total_local_taxes_and_charges: Option<f64>,
    pub enrollment: Option<u64>,
    pub population: Option<u64>,
}

impl DistrictRecord {
    /// A complete record; convenient for fixtures.
    pub fn new(
        district_id: impl Into<String>,
        year: i32,
        expenditures: f64,
        taxes: f64,
        enrollment: u64,
        population: u64,
    ) -> Self {
        DistrictRecord {
            district_id: district_id.into(),
            year,
            total_local_education_expenditures: Some(expenditures),
            total_local_taxes_and_charges: Some(taxes),
            enrollment: Some(enrollment),
            population: Some(population),
        }
    }
}

/// Unit of the monetary columns in the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoneyUnit {
    #[default]
    Dollars,
    Thousands,
}

impl MoneyUnit {
    fn to_thousands(self) -> f64 {
        match self {
            MoneyUnit::Dollars => 1e-3,
            MoneyUnit::Thousands => 1.0,
        }
    }
}

impl FromStr for MoneyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dollars" => Ok(MoneyUnit::Dollars),
            "thousands" => Ok(MoneyUnit::Thousands),
            other => Err(Error::InvalidConfig(format!(
                "unknown money unit {other:?} (expected dollars or thousands)"
            ))),
        }
    }
}

/// Reads all rows from a CSV stream, converting money to thousands and sorting by
/// `(district_id, year)`.
pub fn read_records<R: Read>(reader: R, unit: MoneyUnit) -> Result<Vec<DistrictRecord>> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "unexpected header {:?}; expected {}",
                header.iter().collect::<Vec<_>>(),
                CSV_HEADER.join(",")
            ),
        });
    }
    let factor = unit.to_thousands();
    let mut records = Vec::new();
    for row in csv.deserialize::<DistrictRecord>() {
        let mut record = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        for money in [
            &mut record.total_local_education_expenditures,
            &mut record.total_local_taxes_and_charges,
        ] {
            if let Some(v) = money.as_mut() {
                *v *= factor;
            }
        }
        records.push(record);
    }
    records.sort_by(|a, b| (&a.district_id, a.year).cmp(&(&b.district_id, b.year)));
    Ok(records)
}

pub fn read_records_file(path: impl AsRef<Path>, unit: MoneyUnit) -> Result<Vec<DistrictRecord>> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    read_records(std::io::BufReader::new(file), unit)
}

/// Writes records in the input schema. Money is written in `unit`.
pub fn write_records<W: std::io::Write>(
    writer: W,
    records: &[DistrictRecord],
    unit: MoneyUnit,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let factor = 1.0 / unit.to_thousands();
    for r in records {
        let mut out = r.clone();
        for money in [
            &mut out.total_local_education_expenditures,
            &mut out.total_local_taxes_and_charges,
        ] {
            if let Some(v) = money.as_mut() {
                *v *= factor;
            }
        }
        csv.serialize(out)?;
    }
    csv.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Keeps the records whose year lies in `years`.
pub fn filter_years(
    records: Vec<DistrictRecord>,
    years: &RangeInclusive<i32>,
) -> Vec<DistrictRecord> {
    records
        .into_iter()
        .filter(|r| years.contains(&r.year))
        .collect()
}

/// Splits pooled records by year, preserving `(district_id, year)` order within a year.
pub fn group_by_year(records: &[DistrictRecord]) -> BTreeMap<i32, Vec<DistrictRecord>> {
    let mut groups: BTreeMap<i32, Vec<DistrictRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.year).or_default().push(r.clone());
    }
    groups
}

/// Per-pupil expenditure `κ` and per-capita taxes `τ` for a record.
fn per_capita(record: &DistrictRecord) -> Result<(f64, f64)> {
    let expenditures = record
        .total_local_education_expenditures
        .ok_or(Error::MissingField("total_local_education_expenditures"))?;
    let taxes = record
        .total_local_taxes_and_charges
        .ok_or(Error::MissingField("total_local_taxes_and_charges"))?;
    let enrollment = record.enrollment.ok_or(Error::MissingField("enrollment"))?;
    let population = record.population.ok_or(Error::MissingField("population"))?;
    if enrollment == 0 {
        return Err(Error::ZeroDenominator("enrollment"));
    }
    if population == 0 {
        return Err(Error::ZeroDenominator("population"));
    }
    if !(expenditures.is_finite() && expenditures >= 0.0) {
        return Err(Error::InvalidField("total_local_education_expenditures"));
    }
    if !(taxes.is_finite() && taxes >= 0.0) {
        return Err(Error::InvalidField("total_local_taxes_and_charges"));
    }
    Ok((expenditures / enrollment as f64, taxes / population as f64))
}

/// Educational returns `x = expenditures/enrollment - taxes/population`, in thousands.
pub fn compute_returns(record: &DistrictRecord) -> Result<f64> {
    per_capita(record).map(|(kappa, tau)| kappa - tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanConfig {
    pub extreme_bound_low: f64,
    pub extreme_bound_high: f64,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            extreme_bound_low: DEFAULT_EXTREME_LOW,
            extreme_bound_high: DEFAULT_EXTREME_HIGH,
        }
    }
}

/// Mean, standard deviation (n - 1), minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let sd = if values.len() > 1 {
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Summary { mean, sd, min, max }
    }
}

/// Sample of returns surviving the cleaning rules, with exclusion counts and the
/// summary statistics of `x`, `κ` and `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanedSample {
    pub values: Vec<f64>,
    pub excluded_missing: usize,
    pub excluded_extreme: usize,
    pub kappa_mean: f64,
    pub tau_mean: f64,
    pub x_mean: f64,
    pub x_sd: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub kappa: Summary,
    pub tau: Summary,
}

impl CleanedSample {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn record_count(&self) -> usize {
        self.values.len() + self.excluded_missing + self.excluded_extreme
    }

    pub fn x_summary(&self) -> Summary {
        Summary {
            mean: self.x_mean,
            sd: self.x_sd,
            min: self.x_min,
            max: self.x_max,
        }
    }
}

/// Drops incomplete or invalid records and extreme returns.
///
/// Missing fields, zero denominators, negative or non-finite money count as
/// `excluded_missing`; `x` outside the configured bounds counts as `excluded_extreme`.
pub fn clean(records: &[DistrictRecord], config: &CleanConfig) -> Result<CleanedSample> {
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(config.extreme_bound_low < config.extreme_bound_high) {
        return Err(Error::InvalidConfig(format!(
            "extreme bounds must satisfy low < high, got [{}, {}]",
            config.extreme_bound_low, config.extreme_bound_high
        )));
    }
    let mut values = Vec::with_capacity(records.len());
    let mut kappas = Vec::with_capacity(records.len());
    let mut taus = Vec::with_capacity(records.len());
    let (mut excluded_missing, mut excluded_extreme) = (0, 0);
    for record in records {
        let Ok((kappa, tau)) = per_capita(record) else {
            excluded_missing += 1;
            continue;
        };
        let x = kappa - tau;
        if !x.is_finite() {
            excluded_missing += 1;
        } else if x < config.extreme_bound_low || x > config.extreme_bound_high {
            excluded_extreme += 1;
        } else {
            values.push(x);
            kappas.push(kappa);
            taus.push(tau);
        }
    }
    if values.is_empty() {
        return Err(Error::AllExcluded(records.len()));
    }
    let x = Summary::of(&values);
    let kappa = Summary::of(&kappas);
    let tau = Summary::of(&taus);
    Ok(CleanedSample {
        values,
        excluded_missing,
        excluded_extreme,
        kappa_mean: kappa.mean,
        tau_mean: tau.mean,
        x_mean: x.mean,
        x_sd: x.sd,
        x_min: x.min,
        x_max: x.max,
        kappa,
        tau,
    })
}

/// Bin-count rule for [`build_histogram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binning {
    FixedCount(usize),
    FreedmanDiaconis,
}

impl Default for Binning {
    fn default() -> Self {
        Binning::FreedmanDiaconis
    }
}

impl FromStr for Binning {
    type Err = Error;

    /// `fd` / `freedman-diaconis`, or a positive bin count.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "fd" | "freedman-diaconis" | "freedmandiaconis" => Ok(Binning::FreedmanDiaconis),
            _ => match s.parse::<usize>() {
                Ok(k) if k > 0 => Ok(Binning::FixedCount(k)),
                _ => Err(Error::InvalidConfig(format!(
                    "bins must be 'fd' or a positive integer, got {s:?}"
                ))),
            },
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Freedman–Diaconis bin count for sorted data over `range`.
pub(crate) fn freedman_diaconis_bins(sorted: &[f64], range: f64) -> usize {
    let n = sorted.len() as f64;
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let bins = if iqr > 0.0 {
        (range / (2.0 * iqr / n.cbrt())).ceil()
    } else {
        n.sqrt().ceil()
    };
    (bins as usize).clamp(1, MAX_AUTO_BINS)
}

/// Observed histogram: bin edges, raw counts and relative frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub edges: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub counts: Vec<u64>,
}

impl HistogramSpec {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Frequency-weighted mean and standard deviation of the bin centers.
    pub fn mean_sd(&self) -> (f64, f64) {
        let centers = self.centers();
        let mean: f64 = centers
            .iter()
            .zip(&self.frequencies)
            .map(|(c, f)| c * f)
            .sum();
        let var: f64 = centers
            .iter()
            .zip(&self.frequencies)
            .map(|(c, f)| f * (c - mean).powi(2))
            .sum();
        (mean, var.sqrt())
    }

    /// Median from linear interpolation within the bin where the cumulative frequency
    /// crosses one half.
    pub fn median(&self) -> f64 {
        let mut acc = 0.0;
        for (i, &f) in self.frequencies.iter().enumerate() {
            if acc + f >= 0.5 && f > 0.0 {
                let frac = (0.5 - acc) / f;
                return self.edges[i] + frac * (self.edges[i + 1] - self.edges[i]);
            }
            acc += f;
        }
        self.edges[self.edges.len() - 1]
    }

    /// Checks the structural invariants, e.g. after reading a file.
    pub fn validate(&self) -> Result<()> {
        crate::model::validate_edges(&self.edges)?;
        if self.frequencies.len() != self.edges.len() - 1 {
            return Err(Error::LengthMismatch(
                self.frequencies.len(),
                self.edges.len() - 1,
            ));
        }
        if self.counts.len() != self.frequencies.len() {
            return Err(Error::LengthMismatch(
                self.counts.len(),
                self.frequencies.len(),
            ));
        }
        if self.frequencies.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidConfig(
                "histogram frequencies must be finite and >= 0".into(),
            ));
        }
        let sum: f64 = self.frequencies.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(sum));
        }
        Ok(())
    }
}

/// Histogram over `[min, max]` of `values`.
pub fn build_histogram(values: &[f64], binning: Binning) -> Result<HistogramSpec> {
    if values.is_empty() {
        return Err(Error::EmptyData);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "histogram values must be finite".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if max == min {
        return Err(Error::DegenerateRange(min));
    }
    let bins = match binning {
        Binning::FixedCount(0) => {
            return Err(Error::InvalidConfig("bin count must be positive".into()))
        }
        Binning::FixedCount(k) => k,
        Binning::FreedmanDiaconis => freedman_diaconis_bins(&sorted, max - min),
    };
    let width = (max - min) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
    edges[bins] = max;
    let mut counts = vec![0u64; bins];
    for &v in &sorted {
        let idx = edges
            .partition_point(|&e| e <= v)
            .saturating_sub(1)
            .min(bins - 1);
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    let frequencies = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(HistogramSpec {
        edges,
        frequencies,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const HEADER: &str = "district_id,year,total_local_education_expenditures,total_local_taxes_and_charges,enrollment,population\n";

    #[test]
    fn returns_examples() {
        let r = DistrictRecord::new("a", 2005, 15.31 * 200.0, 1.04 * 1000.0, 200, 1000);
        assert_abs_diff_eq!(compute_returns(&r).unwrap(), 14.27, epsilon = 1e-12);
        let r = DistrictRecord::new("b", 2005, 5.0, 2.0, 1, 1);
        assert_eq!(compute_returns(&r).unwrap(), 3.0);
        let r = DistrictRecord::new("c", 2005, 0.0, 0.0, 10, 10);
        assert_eq!(compute_returns(&r).unwrap(), 0.0);
        let r = DistrictRecord::new("d", 2005, 1.0, 1.0, 0, 10);
        assert!(matches!(
            compute_returns(&r),
            Err(Error::ZeroDenominator("enrollment"))
        ));
    }

    #[test]
    fn returns_scale_with_numerators() {
        let r = DistrictRecord::new("a", 2005, 3000.0, 500.0, 120, 900);
        let doubled = DistrictRecord::new("a", 2005, 6000.0, 1000.0, 120, 900);
        assert_abs_diff_eq!(
            compute_returns(&doubled).unwrap(),
            2.0 * compute_returns(&r).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn clean_counts_exclusions() {
        let ok: Vec<_> = (0..3)
            .map(|i| DistrictRecord::new(format!("d{i}"), 2001, 10.0 + i as f64, 1.0, 1, 1))
            .collect();
        let s = clean(&ok, &CleanConfig::default()).unwrap();
        assert_eq!((s.excluded_missing, s.excluded_extreme, s.n()), (0, 0, 3));

        let mut with_zero = ok.clone();
        with_zero.push(DistrictRecord::new("z", 2001, 10.0, 1.0, 1, 0));
        let s = clean(&with_zero, &CleanConfig::default()).unwrap();
        assert_eq!(s.excluded_missing, 1);
        assert_eq!(s.record_count(), 4);
    }

    #[test]
    fn clean_drops_one_extreme_in_ten() {
        // x values 10..18 plus 500.
        let mut records: Vec<_> = (0..9)
            .map(|i| DistrictRecord::new(format!("d{i}"), 2003, 11.0 + i as f64, 1.0, 1, 1))
            .collect();
        records.push(DistrictRecord::new("big", 2003, 501.0, 1.0, 1, 1));
        let s = clean(&records, &CleanConfig::default()).unwrap();
        assert_eq!((s.excluded_missing, s.excluded_extreme, s.n()), (0, 1, 9));
        assert_abs_diff_eq!(s.x_mean, 14.0, epsilon = 1e-12);
        assert_eq!((s.x_min, s.x_max), (10.0, 18.0));
        assert_abs_diff_eq!(s.x_sd, (7.5f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn clean_all_excluded() {
        let records = vec![DistrictRecord::new("z", 2001, 10.0, 1.0, 0, 0)];
        assert!(matches!(
            clean(&records, &CleanConfig::default()),
            Err(Error::AllExcluded(1))
        ));
    }

    #[test]
    fn clean_is_idempotent() {
        let mut records: Vec<_> = (0..20)
            .map(|i| {
                DistrictRecord::new(
                    format!("d{i}"),
                    2003,
                    3.0 * i as f64 - 10.0 + 60.0,
                    60.0,
                    1,
                    1,
                )
            })
            .collect();
        records.push(DistrictRecord::new("big", 2003, 900.0, 1.0, 1, 1));
        let cfg = CleanConfig::default();
        let first = clean(&records, &cfg).unwrap();
        let again: Vec<_> = first
            .values
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                DistrictRecord::new(format!("r{i}"), 2003, x.max(0.0), (-x).max(0.0), 1, 1)
            })
            .collect();
        let second = clean(&again, &cfg).unwrap();
        assert_eq!(second.excluded_missing + second.excluded_extreme, 0);
        assert_eq!(second.values, first.values);
    }

    #[test]
    fn csv_parsing_and_units() {
        let text =
            format!("{HEADER}b,2001,20000,3000,2,3\na,2002,10000,,4,5\na,2001,5000,1000,1,1\n");
        let recs = read_records(text.as_bytes(), MoneyUnit::Dollars).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!((recs[0].district_id.as_str(), recs[0].year), ("a", 2001));
        assert_eq!((recs[1].district_id.as_str(), recs[1].year), ("a", 2002));
        assert_eq!(recs[1].total_local_taxes_and_charges, None);
        assert_abs_diff_eq!(compute_returns(&recs[0]).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(compute_returns(&recs[2]).unwrap(), 9.0, epsilon = 1e-12);

        let thousands = read_records(text.as_bytes(), MoneyUnit::Thousands).unwrap();
        assert_abs_diff_eq!(
            compute_returns(&thousands[0]).unwrap(),
            4000.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = format!("{HEADER}a,2001,1,1,1,1\nb,20x1,1,1,1,1\n");
        match read_records(text.as_bytes(), MoneyUnit::Dollars) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_header = "id,year\n1,2\n";
        assert!(matches!(
            read_records(bad_header.as_bytes(), MoneyUnit::Dollars),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn csv_write_read_round_trip() {
        let recs = vec![
            DistrictRecord::new("a", 2001, 12.5, 0.5, 3, 7),
            DistrictRecord {
                population: None,
                ..DistrictRecord::new("b", 2002, 1.0, 2.0, 3, 4)
            },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &recs, MoneyUnit::Dollars).unwrap();
        let back = read_records(buf.as_slice(), MoneyUnit::Dollars).unwrap();
        assert_eq!(back.len(), 2);
        assert_abs_diff_eq!(
            back[0].total_local_education_expenditures.unwrap(),
            12.5,
            epsilon = 1e-12
        );
        assert_eq!(back[1].population, None);
    }

    #[test]
    fn year_filter_and_grouping() {
        let recs = vec![
            DistrictRecord::new("a", 1999, 1.0, 0.0, 1, 1),
            DistrictRecord::new("a", 2000, 1.0, 0.0, 1, 1),
            DistrictRecord::new("b", 2000, 1.0, 0.0, 1, 1),
            DistrictRecord::new("a", 2017, 1.0, 0.0, 1, 1),
        ];
        let kept = filter_years(recs, &DEFAULT_YEARS);
        assert_eq!(kept.len(), 2);
        let groups = group_by_year(&kept);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[&2000].len(), 2);
    }

    #[test]
    fn histogram_examples() {
        let h = build_histogram(&[0.0, 1.0, 2.0, 3.0], Binning::FixedCount(2)).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.edges, vec![0.0, 1.5, 3.0]);
        assert!(matches!(
            build_histogram(&[2.0, 2.0], Binning::FreedmanDiaconis),
            Err(Error::DegenerateRange(_))
        ));
        assert!(build_histogram(&[], Binning::FreedmanDiaconis).is_err());
        h.validate().unwrap();
    }

    #[test]
    fn binning_parses() {
        assert_eq!("fd".parse::<Binning>().unwrap(), Binning::FreedmanDiaconis);
        assert_eq!("40".parse::<Binning>().unwrap(), Binning::FixedCount(40));
        assert!("0".parse::<Binning>().is_err());
        assert!("many".parse::<Binning>().is_err());
    }

    #[test]
    fn histogram_summaries() {
        let h = build_histogram(&[0.0, 1.0, 2.0, 3.0], Binning::FixedCount(2)).unwrap();
        let (mean, _) = h.mean_sd();
        assert_abs_diff_eq!(mean, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(h.median(), 1.5, epsilon = 1e-12);
    }
}
