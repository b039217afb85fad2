// SPDX-License-Identifier: MIT OR Apache-2.0

//! Observed data series.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One observed profile: an ordered vector of values with a free-text label.
///
/// Entries are stored as scalars; count-family emission models additionally
/// require every entry to be a non-negative integer, which is validated when
/// the series is paired with a model. Positions are 1-based throughout, so a
/// series of length `n` spans locations `1..=n` and partitions live on
/// `[1, n+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSeries<S> {
    values: Vec<S>,
    label: String,
}

impl<S: Scalar> CountSeries<S> {
    /// Build a series. Requires length ≥ 2 and finite entries.
    pub fn new(values: Vec<S>, label: impl Into<String>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                len: values.len(),
                min: 2,
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value at position {}",
                idx + 1
            )));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    /// Build a series from integer counts.
    pub fn from_counts(counts: &[u64], label: impl Into<String>) -> Result<Self> {
        let values = counts.iter().map(|&c| S::of(c as f64)).collect();
        Self::new(values, label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Check the count-family constraint: every entry a non-negative integer.
    pub fn validate_counts(&self) -> Result<()> {
        for (idx, &v) in self.values.iter().enumerate() {
            if v < S::zero() || v != v.floor() {
                return Err(Error::NonIntegerCount {
                    index: idx + 1,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}
