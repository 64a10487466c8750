//! Randomness and data: per-trajectory random streams, bounded data
//! distributions and finite probability spaces.

mod distribution;
mod rng;
mod space;

pub use distribution::{BoundedDistribution, DiscreteLaw, Moments};
pub use rng::RngStream;
pub use space::{FiniteProbSpace, Partition};

/// Tolerance on probability normalization.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("batch size must be at least 1")]
    InvalidBatch,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid probability space: {0}")]
    InvalidSpace(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("exact moments are only available for discrete distributions")]
    Unsupported,
}

pub(crate) fn validate_probs(probs: &[f64]) -> Result<(), String> {
    if probs.is_empty() {
        return Err("at least one outcome is required".into());
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(format!("probability {i} is {p}, expected a finite value >= 0"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(format!("probabilities sum to {total}, expected 1"));
    }
    Ok(())
}
