//! Closed-form a priori bounds, the constant `D`, the non-convergence lower
//! bound, the AR(1) oracle for constant-rate SGD on quadratics, and pathwise
//! certification of simulated trajectories.

mod ar1;
mod certify;
mod formulas;

pub use ar1::{ar1_lag_gap, ar1_stationary_variance};
pub use certify::{certify_trajectories, BoundKind, BoundReport, CertifyInput, Violation};
pub use formulas::{
    adam_single_step_bound, adaptive_sup_bound, constant_d, momentum_apriori_bound,
    nonconvergence_lower_bound, sgd_apriori_bound, AdaptiveSupInputs, LowerBound,
    LowerBoundInputs,
};

use crate::HypothesisError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error("record of trajectory {0} is incomplete; this bound needs every step")]
    IncompleteRecord(u64),
    #[error("process is not contractive: |phi| = {0} >= 1")]
    NonContractive(f64),
    #[error("{0}")]
    Invalid(String),
}

/// `(eta, rho, c)` of the sandwich condition
/// `(t - c)(eta + (rho - eta) 1[t <= c]) <= g <= (t + c)(eta + (rho - eta) 1[t >= -c])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichConstants {
    pub eta: f64,
    pub rho: f64,
    pub c: f64,
}

impl SandwichConstants {
    pub fn new(eta: f64, rho: f64, c: f64) -> Result<Self, HypothesisError> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(HypothesisError::new("eta > 0", format!("eta = {eta}")));
        }
        if !(rho >= eta && rho.is_finite()) {
            return Err(HypothesisError::new(
                "rho >= eta",
                format!("eta = {eta}, rho = {rho}"),
            ));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(HypothesisError::new("c > 0", format!("c = {c}")));
        }
        Ok(Self { eta, rho, c })
    }

    /// `c >= max{1, |a|, |b|}` for data in `[a, b]`.
    pub fn check_data(&self, a: f64, b: f64) -> Result<(), HypothesisError> {
        let need = 1f64.max(a.abs()).max(b.abs());
        if self.c < need {
            return Err(HypothesisError::new(
                "c >= max{1, |a|, |b|}",
                format!("c = {} but data lie in [{a}, {b}]", self.c),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn lower(&self, t: f64) -> f64 {
        let slope = if t <= self.c { self.rho } else { self.eta };
        (t - self.c) * slope
    }

    #[inline]
    pub fn upper(&self, t: f64) -> f64 {
        let slope = if t >= -self.c { self.rho } else { self.eta };
        (t + self.c) * slope
    }
}
