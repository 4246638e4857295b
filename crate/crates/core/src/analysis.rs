//! The five byte-level randomness measures of the ENT battery.
//!
//! Conventions follow the ENT tool: byte granularity, 6-byte Monte Carlo
//! points with 24-bit big-endian coordinates and an inclusive circle test,
//! and a circular serial correlation (the last byte pairs with the first).

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IDEAL_ENTROPY: f64 = 8.0;
/// Ideal chi-square used in deviation accounting. The expected value for
/// 255 degrees of freedom is 255; deviation accounting uses 256.
pub const IDEAL_CHI_SQUARE: f64 = 256.0;
pub const IDEAL_MEAN: f64 = 127.5;
pub const IDEAL_PI: f64 = PI;
pub const IDEAL_SERIAL_CORRELATION: f64 = 0.0;

const MONTE_CARLO_BYTES: usize = 6;
const COORD_MAX: u64 = (1 << 24) - 1;

fn require(bytes: &[u8], min: usize, what: &str) -> Result<()> {
    if bytes.len() < min {
        return Err(Error::InsufficientData(format!(
            "{what} needs at least {min} bytes, got {}",
            bytes.len()
        )));
    }
    Ok(())
}

fn histogram(bytes: &[u8]) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    counts
}

fn entropy_of(counts: &[u64; 256], total: u64) -> f64 {
    let total = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

fn chi_square_of(counts: &[u64; 256], total: u64) -> f64 {
    let expected = total as f64 / 256.0;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Shannon entropy in bits per byte.
pub fn shannon_entropy(bytes: &[u8]) -> Result<f64> {
    require(bytes, 1, "entropy")?;
    Ok(entropy_of(&histogram(bytes), bytes.len() as u64))
}

/// Pearson chi-square over the 256 byte bins.
pub fn chi_square(bytes: &[u8]) -> Result<f64> {
    require(bytes, 1, "chi-square")?;
    Ok(chi_square_of(&histogram(bytes), bytes.len() as u64))
}

pub fn arithmetic_mean(bytes: &[u8]) -> Result<f64> {
    require(bytes, 1, "mean")?;
    let sum: u64 = bytes.iter().map(|&b| u64::from(b)).sum();
    Ok(sum as f64 / bytes.len() as f64)
}

fn in_circle(point: &[u8]) -> bool {
    let x = point[..3].iter().fold(0u64, |a, &b| (a << 8) | u64::from(b));
    let y = point[3..].iter().fold(0u64, |a, &b| (a << 8) | u64::from(b));
    x * x + y * y <= COORD_MAX * COORD_MAX
}

/// Monte Carlo estimate of π from non-overlapping 6-byte points. A
/// trailing partial point is ignored.
pub fn monte_carlo_pi(bytes: &[u8]) -> Result<f64> {
    require(bytes, MONTE_CARLO_BYTES, "Monte Carlo pi")?;
    let points = bytes.chunks_exact(MONTE_CARLO_BYTES);
    let total = points.len();
    let inside = points.filter(|p| in_circle(p)).count();
    Ok(4.0 * inside as f64 / total as f64)
}

fn correlation_from_sums(n: u64, sum: u128, sum_sq: u128, sum_lag: u128) -> Option<f64> {
    let n = n as i128;
    let (sum, sum_sq, sum_lag) = (sum as i128, sum_sq as i128, sum_lag as i128);
    let numerator = n * sum_lag - sum * sum;
    let denominator = n * sum_sq - sum * sum;
    if denominator == 0 {
        None
    } else {
        Some(numerator as f64 / denominator as f64)
    }
}

/// Circular lag-1 serial correlation. `Ok(None)` when undefined (all bytes
/// equal).
pub fn serial_correlation(bytes: &[u8]) -> Result<Option<f64>> {
    require(bytes, 2, "serial correlation")?;
    let mut sum = 0u128;
    let mut sum_sq = 0u128;
    let mut sum_lag = 0u128;
    for (i, &b) in bytes.iter().enumerate() {
        let u = u128::from(b);
        let next = u128::from(bytes[(i + 1) % bytes.len()]);
        sum += u;
        sum_sq += u * u;
        sum_lag += u * next;
    }
    Ok(correlation_from_sums(bytes.len() as u64, sum, sum_sq, sum_lag))
}

/// The five measures for one byte sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub byte_count: u64,
    pub entropy: f64,
    pub chi_square: f64,
    pub mean: f64,
    /// `None` for inputs shorter than one 6-byte point.
    pub monte_carlo_pi: Option<f64>,
    /// `None` when undefined or the input has a single byte.
    pub serial_correlation: Option<f64>,
}

impl RandomnessReport {
    /// Relative error of the π estimate, in percent.
    pub fn monte_carlo_error(&self) -> Option<f64> {
        self.monte_carlo_pi.map(|p| 100.0 * (p - PI).abs() / PI)
    }

    /// Stable `key=value` lines, one per field, in declaration order.
    pub fn to_key_value(&self) -> String {
        let opt = |v: Option<f64>, digits: usize| match v {
            Some(v) => format!("{v:.digits$}"),
            None => "undefined".to_string(),
        };
        format!(
            "byte_count={}\nentropy={:.6}\nchi_square={:.2}\nmean={:.4}\nmonte_carlo_pi={}\nserial_correlation={}\n",
            self.byte_count,
            self.entropy,
            self.chi_square,
            self.mean,
            opt(self.monte_carlo_pi, 9),
            opt(self.serial_correlation, 6),
        )
    }
}

impl fmt::Display for RandomnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<32}{:>18}{:>16}", "Parameter", "Value", "Ideal")?;
        writeln!(f, "{:<32}{:>18}{:>16}", "Bytes", self.byte_count, "")?;
        writeln!(f, "{:<32}{:>18.6}{:>16.6}", "Entropy (bits/byte)", self.entropy, IDEAL_ENTROPY)?;
        writeln!(f, "{:<32}{:>18.2}{:>16.2}", "Chi-square", self.chi_square, IDEAL_CHI_SQUARE)?;
        writeln!(f, "{:<32}{:>18.4}{:>16.1}", "Arithmetic mean", self.mean, IDEAL_MEAN)?;
        match self.monte_carlo_pi {
            Some(p) => writeln!(f, "{:<32}{:>18.9}{:>16.9}", "Monte Carlo pi", p, IDEAL_PI)?,
            None => writeln!(f, "{:<32}{:>18}{:>16.9}", "Monte Carlo pi", "n/a", IDEAL_PI)?,
        }
        match self.serial_correlation {
            Some(c) => write!(f, "{:<32}{:>18.6}{:>16.1}", "Serial correlation", c, 0.0),
            None => write!(f, "{:<32}{:>18}{:>16.1}", "Serial correlation", "undefined", 0.0),
        }
    }
}

/// Single-pass accumulator for all five measures. Feed it any number of
/// buffers; results equal those of the standalone functions on the
/// concatenation.
#[derive(Debug, Clone)]
pub struct Analyzer {
    counts: [u64; 256],
    total: u64,
    sum: u128,
    sum_sq: u128,
    sum_lag: u128,
    first: Option<u8>,
    last: u8,
    point: [u8; MONTE_CARLO_BYTES],
    point_len: usize,
    inside: u64,
    points: u64,
}

impl Default for Analyzer {
    fn default() -> Self {
        Self::new()
    }
}

impl Analyzer {
    pub fn new() -> Self {
        Self {
            counts: [0; 256],
            total: 0,
            sum: 0,
            sum_sq: 0,
            sum_lag: 0,
            first: None,
            last: 0,
            point: [0; MONTE_CARLO_BYTES],
            point_len: 0,
            inside: 0,
            points: 0,
        }
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.counts[b as usize] += 1;
            let u = u128::from(b);
            self.sum += u;
            self.sum_sq += u * u;
            match self.first {
                None => self.first = Some(b),
                Some(_) => self.sum_lag += u128::from(self.last) * u,
            }
            self.last = b;
            self.point[self.point_len] = b;
            self.point_len += 1;
            if self.point_len == MONTE_CARLO_BYTES {
                self.points += 1;
                self.inside += u64::from(in_circle(&self.point));
                self.point_len = 0;
            }
        }
        self.total += bytes.len() as u64;
    }

    pub fn byte_count(&self) -> u64 {
        self.total
    }

    pub fn finish(&self) -> Result<RandomnessReport> {
        let Some(first) = self.first else {
            return Err(Error::InsufficientData("cannot analyze empty input".into()));
        };
        let serial_correlation = if self.total >= 2 {
            let wrap = u128::from(self.last) * u128::from(first);
            correlation_from_sums(self.total, self.sum, self.sum_sq, self.sum_lag + wrap)
        } else {
            None
        };
        Ok(RandomnessReport {
            byte_count: self.total,
            entropy: entropy_of(&self.counts, self.total),
            chi_square: chi_square_of(&self.counts, self.total),
            mean: self.sum as f64 / self.total as f64,
            monte_carlo_pi: (self.points > 0).then(|| 4.0 * self.inside as f64 / self.points as f64),
            serial_correlation,
        })
    }
}

/// Full report for one buffer.
pub fn analyze(bytes: &[u8]) -> Result<RandomnessReport> {
    let mut a = Analyzer::new();
    a.update(bytes);
    a.finish()
}

/// Before/after accounting for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub metric: String,
    pub ideal: f64,
    pub before: Option<f64>,
    pub after: Option<f64>,
    pub before_deviation: Option<f64>,
    pub after_deviation: Option<f64>,
    /// For entropy: percent increase relative to the input entropy. For
    /// the rest: percent decrease of `|value - ideal|`.
    pub percent_change: Option<f64>,
}

/// Per-metric improvement from `before` to `after`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metrics: Vec<MetricDelta>,
}

impl Comparison {
    pub fn get(&self, metric: &str) -> Option<&MetricDelta> {
        self.metrics.iter().find(|m| m.metric == metric)
    }
}

fn relative_change(from: f64, to: f64) -> Option<f64> {
    if from == 0.0 {
        (to == 0.0).then_some(0.0)
    } else {
        Some(100.0 * (to - from) / from)
    }
}

fn deviation_delta(metric: &str, ideal: f64, before: Option<f64>, after: Option<f64>) -> MetricDelta {
    let before_deviation = before.map(|v| (v - ideal).abs());
    let after_deviation = after.map(|v| (v - ideal).abs());
    let percent_change = match (before_deviation, after_deviation) {
        (Some(b), Some(a)) => relative_change(b, a).map(|p| -p),
        _ => None,
    };
    MetricDelta {
        metric: metric.to_string(),
        ideal,
        before,
        after,
        before_deviation,
        after_deviation,
        percent_change,
    }
}

pub fn compare(before: &RandomnessReport, after: &RandomnessReport) -> Comparison {
    let entropy = MetricDelta {
        metric: "entropy".into(),
        ideal: IDEAL_ENTROPY,
        before: Some(before.entropy),
        after: Some(after.entropy),
        before_deviation: Some(IDEAL_ENTROPY - before.entropy),
        after_deviation: Some(IDEAL_ENTROPY - after.entropy),
        percent_change: relative_change(before.entropy, after.entropy),
    };
    Comparison {
        metrics: vec![
            entropy,
            deviation_delta("chi_square", IDEAL_CHI_SQUARE, Some(before.chi_square), Some(after.chi_square)),
            deviation_delta("mean", IDEAL_MEAN, Some(before.mean), Some(after.mean)),
            deviation_delta("monte_carlo_pi", IDEAL_PI, before.monte_carlo_pi, after.monte_carlo_pi),
            deviation_delta(
                "serial_correlation",
                IDEAL_SERIAL_CORRELATION,
                before.serial_correlation,
                after.serial_correlation,
            ),
        ],
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
        writeln!(f, "{:<20}{:>18}{:>18}{:>12}", "Metric", "Before", "After", "Change %")?;
        for (i, m) in self.metrics.iter().enumerate() {
            let pct = m.percent_change.map_or("n/a".to_string(), |p| format!("{p:.2}"));
            write!(f, "{:<20}{:>18}{:>18}{:>12}", m.metric, cell(m.before), cell(m.after), pct)?;
            if i + 1 < self.metrics.len() {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}
