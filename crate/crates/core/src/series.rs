//! Doubly censored count series.

use crate::error::{Error, Result};

/// A doubly censored time series of packet counts over `P` sub-intervals.
///
/// Each bin `t` carries a pair of bounds `lower[t] <= true count <= upper[t]`.
/// A bin is uncensored when both bounds coincide. Monitor-built series only
/// ever censor downwards to zero (`lower[t]` is either `0` or `upper[t]`);
/// series summed at the collector can carry any `lower <= upper` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensoredSeries {
    lower: Vec<u64>,
    upper: Vec<u64>,
}

impl CensoredSeries {
    /// Builds a series from per-bin bounds, validating `lower[t] <= upper[t]`
    /// and equal lengths.
    pub fn new(lower: Vec<u64>, upper: Vec<u64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "bound sequences differ in length: {} vs {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(t) = (0..lower.len()).find(|&t| lower[t] > upper[t]) {
            return Err(Error::invalid(format!(
                "lower bound {} exceeds upper bound {} at bin {}",
                lower[t], upper[t], t
            )));
        }
        Ok(CensoredSeries { lower, upper })
    }

    /// An entirely uncensored series: both bounds equal the observed counts.
    pub fn uncensored(values: Vec<u64>) -> Self {
        CensoredSeries {
            lower: values.clone(),
            upper: values,
        }
    }

    /// Number of bins `P`.
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[u64] {
        &self.lower
    }

    pub fn upper(&self) -> &[u64] {
        &self.upper
    }

    /// `(lower, upper)` at bin `t` (0-based).
    pub fn bounds(&self, t: usize) -> (u64, u64) {
        (self.lower[t], self.upper[t])
    }

    /// True when bin `t` carries an exact observation.
    pub fn is_exact(&self, t: usize) -> bool {
        self.lower[t] == self.upper[t]
    }

    /// Elementwise sum of bounds with another series of the same length.
    pub fn add_assign(&mut self, other: &CensoredSeries) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::protocol(format!(
                "cannot sum series of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        for t in 0..self.len() {
            self.lower[t] += other.lower[t];
            self.upper[t] += other.upper[t];
        }
        Ok(())
    }
}
