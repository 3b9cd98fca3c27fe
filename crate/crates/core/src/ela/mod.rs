//! Exploratory landscape analysis from a uniform random sample: value
//! distribution, meta-model fit, dispersion, nearest-better clustering,
//! principal components and information content features, plus the
//! cleaning and PCA projection used to compare problems.

mod features;
mod matrix;

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeding::rng_from_seed;

pub use features::compute_features;
pub use matrix::{clean_features, pca_project, FeatureMatrix, Projection, CORRELATION_THRESHOLD};

/// Samples per dimension used by default.
pub const DEFAULT_SAMPLES_PER_DIM: usize = 250;

#[derive(Debug, Error, PartialEq)]
pub enum ElaError {
    #[error("{set}: degenerate sample ({reason})")]
    Degenerate { set: &'static str, reason: String },
    #[error("sample of {got} points is too small for dimension {dim} (need {needed})")]
    TooFewPoints { got: usize, needed: usize, dim: usize },
    #[error("bounds must be finite with low <= high")]
    InvalidBounds,
    #[error("need at least {needed} {what}, got {got}")]
    TooSmall { what: &'static str, needed: usize, got: usize },
}

/// Which transformation the sample's values went through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueTransform {
    #[default]
    None,
    /// `sign(v - median) * log10(1 + |v - median|)`.
    SignedLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub transform: ValueTransform,
}

impl Sample {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same sample with transformed values.
    pub fn transformed(mut self) -> Self {
        if self.transform == ValueTransform::None {
            self.values = transform_values(&self.values);
            self.transform = ValueTransform::SignedLog;
        }
        self
    }
}

/// Feature name -> value, names in a stable order.
pub type FeatureVector = BTreeMap<String, f64>;

/// `n_per_dim * dim` independent uniform points in the box and their values.
pub fn sample_uniform(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    bounds: &[(f64, f64)],
    n_per_dim: usize,
    seed: u64,
) -> Result<Sample, ElaError> {
    if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(ElaError::InvalidBounds);
    }
    let n = n_per_dim * bounds.len();
    let mut rng = rng_from_seed(seed);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| (lo + rng.random::<f64>() * (hi - lo)).min(hi))
                .collect()
        })
        .collect();
    let values = points.iter().map(|p| f(p)).collect();
    Ok(Sample {
        points,
        values,
        bounds: bounds.to_vec(),
        transform: ValueTransform::None,
    })
}

/// Signed logarithm of the values centred on their median. Monotone
/// (values closer than the float resolution near the median may merge) and
/// compresses values spanning many orders of magnitude.
pub fn transform_values(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    values
        .iter()
        .map(|&v| {
            let c = v - median;
            c.signum() * c.abs().ln_1p() / std::f64::consts::LN_10
        })
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect()
}

/// Samples, transforms and computes features for one problem.
pub fn problem_features(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    bounds: &[(f64, f64)],
    n_per_dim: usize,
    seed: u64,
) -> Result<FeatureVector, ElaError> {
    let sample = sample_uniform(f, bounds, n_per_dim, seed)?.transformed();
    compute_features(&sample)
}
