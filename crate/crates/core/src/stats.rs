//! Statistical layer: time-of-day cycle-length aggregation, peak detection,
//! two-sample z-tests and box-plot summaries.

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::model::SignalCycleRecord;
use crate::scalar::{count, lit, to_f64, Scalar};

/// Signals run from 08:00 to 21:00.
pub const DAY_START_S: i64 = 8 * 3600;
pub const DAY_END_S: i64 = 21 * 3600;
pub const DEFAULT_WINDOW_S: i64 = 1800;
/// Smallest p-value reported.
pub const P_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayFilter {
    Weekday,
    Saturday,
    Sunday,
    All,
}

impl DayFilter {
    fn admits(self, day: Weekday) -> bool {
        match self {
            DayFilter::All => true,
            DayFilter::Saturday => day == Weekday::Sat,
            DayFilter::Sunday => day == Weekday::Sun,
            DayFilter::Weekday => !matches!(day, Weekday::Sat | Weekday::Sun),
        }
    }
}

impl std::str::FromStr for DayFilter {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "weekday" | "weekdays" => Ok(DayFilter::Weekday),
            "saturday" => Ok(DayFilter::Saturday),
            "sunday" => Ok(DayFilter::Sunday),
            "all" => Ok(DayFilter::All),
            other => Err(format!("unknown day filter '{other}'")),
        }
    }
}

/// Mean cycle length over one time-of-day slice.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedAverage<T> {
    /// Seconds after midnight.
    pub window_start: i64,
    pub window_length: i64,
    /// `None` when no record fell in the window.
    pub mean_cycle_length: Option<T>,
    pub sample_count: usize,
}

/// Formats seconds after midnight as `HH:MM`.
pub fn clock(seconds: i64) -> String {
    format!("{:02}:{:02}", seconds / 3600, (seconds % 3600) / 60)
}

/// Averages cycle lengths into half-open `[start, start + window)` slices
/// anchored at 08:00, pooling every admitted calendar day.
pub fn window_cycle_lengths<T: Scalar>(
    records: &[SignalCycleRecord<T>],
    window: i64,
    day_filter: DayFilter,
) -> Result<Vec<WindowedAverage<T>>> {
    if window <= 0 {
        return Err(AnalysisError::InvalidWindow(window));
    }
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let n_windows = ((DAY_END_S - DAY_START_S) + window - 1) / window;
    let mut sums = vec![(T::zero(), 0usize); n_windows as usize];
    for r in records {
        let ts = r.timestamp().ok_or(AnalysisError::NoTimestamps)?;
        let dt = DateTime::from_timestamp(ts, 0)
            .ok_or_else(|| AnalysisError::InvalidInput(format!("timestamp {ts} out of range")))?
            .naive_utc();
        if !day_filter.admits(dt.weekday()) {
            continue;
        }
        let tod = i64::from(dt.num_seconds_from_midnight());
        if !(DAY_START_S..DAY_END_S).contains(&tod) {
            continue;
        }
        let slot = &mut sums[((tod - DAY_START_S) / window) as usize];
        slot.0 = slot.0 + r.cycle_length;
        slot.1 += 1;
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, (sum, n))| WindowedAverage {
            window_start: DAY_START_S + i as i64 * window,
            window_length: window,
            mean_cycle_length: (n > 0).then(|| sum / count::<T>(n as u64)),
            sample_count: n,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeakWindow {
    /// Index of the first window in the run (0-based).
    pub first: usize,
    /// Index of the last window in the run (inclusive).
    pub last: usize,
    /// Seconds after midnight.
    pub start: i64,
    pub end: i64,
}

impl PeakWindow {
    pub fn label(&self) -> String {
        format!("{}–{}", clock(self.start), clock(self.end))
    }
}

/// Finds the run of `span` consecutive windows with the largest summed mean.
/// Runs touching an empty window are not eligible; ties go to the earliest.
pub fn peak_window<T: Scalar>(averages: &[WindowedAverage<T>], span: usize) -> Result<PeakWindow> {
    if span == 0 {
        return Err(AnalysisError::InvalidInput("span must be >= 1".into()));
    }
    if averages.len() < span {
        return Err(AnalysisError::InsufficientWindows {
            needed: span,
            available: averages.len(),
        });
    }
    let mut best: Option<(usize, T)> = None;
    for first in 0..=averages.len() - span {
        let run = &averages[first..first + span];
        let Some(sum) = run
            .iter()
            .try_fold(T::zero(), |acc, w| w.mean_cycle_length.map(|m| acc + m))
        else {
            continue;
        };
        if best.is_none_or(|(_, b)| sum > b) {
            best = Some((first, sum));
        }
    }
    let (first, _) = best.ok_or(AnalysisError::InsufficientWindows {
        needed: span,
        available: averages
            .iter()
            .filter(|w| w.mean_cycle_length.is_some())
            .count(),
    })?;
    let last = first + span - 1;
    Ok(PeakWindow {
        first,
        last,
        start: averages[first].window_start,
        end: averages[last].window_start + averages[last].window_length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTestResult<T> {
    pub z_statistic: T,
    pub p_value: T,
    pub mean_a: T,
    pub mean_b: T,
    pub n_a: usize,
    pub n_b: usize,
}

/// Two-tailed standard normal tail mass `P(|Z| >= |z|)`.
pub fn two_tailed_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn mean_and_variance<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = count::<T>(xs.len() as u64);
    let mean = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let ss = xs
        .iter()
        .fold(T::zero(), |a, &x| a + (x - mean) * (x - mean));
    (mean, ss / (n - T::one()))
}

fn p_floor<T: Scalar>() -> T {
    T::from_f64(P_FLOOR)
        .filter(|p| *p > T::zero())
        .unwrap_or_else(T::min_positive_value)
}

/// Unequal-variance two-sample z-test.
pub fn z_test<T: Scalar>(sample_a: &[T], sample_b: &[T]) -> Result<ZTestResult<T>> {
    let (n_a, n_b) = (sample_a.len(), sample_b.len());
    if n_a < 2 || n_b < 2 {
        return Err(AnalysisError::TooFewSamples { n_a, n_b });
    }
    if sample_a.iter().chain(sample_b).any(|x| !x.is_finite()) {
        return Err(AnalysisError::InvalidInput(
            "non-finite sample value".into(),
        ));
    }
    let (mean_a, var_a) = mean_and_variance(sample_a);
    let (mean_b, var_b) = mean_and_variance(sample_b);
    let se2 = var_a / count::<T>(n_a as u64) + var_b / count::<T>(n_b as u64);
    let diff = mean_a - mean_b;
    let (z, p) = if se2 > T::zero() {
        let z = diff / se2.sqrt();
        (
            z,
            T::from_f64(two_tailed_p(to_f64(z))).unwrap_or_else(T::zero),
        )
    } else if diff == T::zero() {
        return Err(AnalysisError::ZeroVariance);
    } else {
        let z = if diff > T::zero() {
            T::infinity()
        } else {
            T::neg_infinity()
        };
        (z, T::zero())
    };
    Ok(ZTestResult {
        z_statistic: z,
        p_value: p.max(p_floor()),
        mean_a,
        mean_b,
        n_a,
        n_b,
    })
}

/// One entry of a lower-triangular p-value matrix: `row` is compared
/// against `col`, with `row` after `col` in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry<T> {
    pub row: String,
    pub col: String,
    pub result: ZTestResult<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix<T> {
    pub ids: Vec<String>,
    pub entries: Vec<PairEntry<T>>,
}

impl<T: Scalar> PairwiseMatrix<T> {
    /// p-value for an unordered pair.
    pub fn p_value(&self, a: &str, b: &str) -> Option<T> {
        self.entries
            .iter()
            .find(|e| (e.row == a && e.col == b) || (e.row == b && e.col == a))
            .map(|e| e.result.p_value)
    }
}

/// z-tests every unordered pair of groups.
pub fn pairwise_z_matrix<T: Scalar>(
    samples: &BTreeMap<String, Vec<T>>,
) -> Result<PairwiseMatrix<T>> {
    if samples.len() < 2 {
        return Err(AnalysisError::InvalidInput(
            "pairwise comparison needs at least two groups".into(),
        ));
    }
    let ids: Vec<String> = samples.keys().cloned().collect();
    let mut entries = Vec::with_capacity(ids.len() * (ids.len() - 1) / 2);
    for (i, row) in ids.iter().enumerate().skip(1) {
        for col in &ids[..i] {
            entries.push(PairEntry {
                row: row.clone(),
                col: col.clone(),
                result: z_test(&samples[row], &samples[col])?,
            });
        }
    }
    Ok(PairwiseMatrix { ids, entries })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumberSummary<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
}

fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = lit::<T>(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Box-plot summary with quartiles by inclusive linear interpolation
/// (position `q * (n - 1)` in the sorted values).
pub fn five_number<T: Scalar>(values: &[T]) -> Result<FiveNumberSummary<T>> {
    if values.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(AnalysisError::InvalidInput("NaN in values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(FiveNumberSummary {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}
