use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How a decoherence factor was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Overlap-coefficient closed form, evaluated as printed.
    PaperEq30,
    /// Equal-frequency coherent-state closed form.
    EqualFreqEq34,
    /// Exact Gaussian dynamics in the quadratic models.
    GaussianOracle,
    /// Split-operator propagation on a grid.
    Grid,
}

impl Method {
    pub const ALL: [Method; 4] =
        [Method::EqualFreqEq34, Method::PaperEq30, Method::GaussianOracle, Method::Grid];

    pub fn name(self) -> &'static str {
        match self {
            Method::PaperEq30 => "paper_eq30",
            Method::EqualFreqEq34 => "equal_freq_eq34",
            Method::GaussianOracle => "gaussian_oracle",
            Method::Grid => "grid",
        }
    }

    /// Column suffix used in CSV output.
    pub fn suffix(self) -> &'static str {
        match self {
            Method::PaperEq30 => "eq30",
            Method::EqualFreqEq34 => "eq34",
            Method::GaussianOracle => "oracle",
            Method::Grid => "grid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s || m.suffix() == s)
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
}

/// Time-stamped decoherence factor samples `D(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoherenceSeries {
    times: Vec<f64>,
    values: Vec<Complex64>,
    method: Method,
}

impl DecoherenceSeries {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, method: Method) -> Result<Self, SeriesError> {
        if times.len() != values.len() {
            return Err(SeriesError::LengthMismatch { times: times.len(), values: values.len() });
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(SeriesError::NotIncreasing(i + 1));
        }
        Ok(DecoherenceSeries { times, values, method })
    }

    /// Samples `f` at every time.
    pub fn from_fn(times: &[f64], method: Method, f: impl Fn(f64) -> Complex64) -> Result<Self, SeriesError> {
        DecoherenceSeries::new(times.to_vec(), times.iter().map(|t| f(*t)).collect(), method)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|d| d.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitudes().fold(0.0, f64::max)
    }

    /// Smallest `|D|` and the time it occurs.
    pub fn min_abs(&self) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(self.magnitudes())
            .map(|(t, m)| (m, *t))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Times of interior local maxima of `|D|`.
    pub fn revival_times(&self) -> Vec<f64> {
        let m: Vec<f64> = self.magnitudes().collect();
        (1..m.len().saturating_sub(1))
            .filter(|&i| m[i] > m[i - 1] && m[i] >= m[i + 1])
            .map(|i| self.times[i])
            .collect()
    }

    /// Largest pointwise `||D_a| - |D_b||`; `None` if the time grids differ.
    pub fn max_abs_deviation(&self, other: &DecoherenceSeries) -> Option<f64> {
        self.same_times(other).then(|| {
            self.magnitudes()
                .zip(other.magnitudes())
                .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
        })
    }

    /// Largest pointwise `|D_a - D_b|`; `None` if the time grids differ.
    pub fn max_complex_deviation(&self, other: &DecoherenceSeries) -> Option<f64> {
        self.same_times(other).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).norm()))
        })
    }

    fn same_times(&self, other: &DecoherenceSeries) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }
}
