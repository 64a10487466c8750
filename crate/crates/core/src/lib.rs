//! Adaptive SGD optimizers on bounded stochastic data, the explicit pathwise
//! a priori bounds they satisfy, the non-convergence lower bound for Adam-type
//! recursions with learning rates bounded away from zero, and an exact
//! finite-probability-space laboratory for the conditional-expectation
//! identities the lower bound is built from.
//!
//! Module map:
//!
//! * [`data`]: seeded counter-based random streams, bounded samplers, finite
//!   probability spaces and partitions.
//! * [`objectives`]: stochastic gradient oracles and hypothesis checkers for
//!   the sandwich and two-sided slope conditions.
//! * [`optimizers`]: SGD / momentum / Adam / AdaGrad step engines, trajectory
//!   simulation and the summed representations of the moment recursions.
//! * [`bounds`]: closed-form a priori bounds, the constant `D`, the lower
//!   bound, the AR(1) oracle and pathwise certification.
//! * [`prob_lab`]: exact conditional expectations, factorization and variance
//!   identities, the Cauchy-gap surrogate and brute-force independence.
//! * [`experiment`]: JSON experiment configs, Monte Carlo estimators, reports
//!   and CSV output used by the `sgd-nonconv` binary.

// negated comparisons are used on purpose so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod data;
pub mod experiment;
mod hypothesis;
pub mod objectives;
pub mod optimizers;
pub mod parallel;
pub mod prob_lab;

pub use hypothesis::HypothesisError;
