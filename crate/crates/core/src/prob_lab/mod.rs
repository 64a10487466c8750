//! Exact conditional expectations and the identities built on them, on
//! finite probability spaces with finite real values.
//!
//! On such spaces every sub-sigma-algebra is generated by a partition and
//! every random variable is integrable, so the generalized (possibly
//! improper) conditional expectation is plain block averaging and the
//! integrability criteria hold trivially. Only that degenerate case is
//! implemented; the identities themselves are checked exactly.

mod cauchy;
mod factorization;
mod independence;
pub mod lab_config;
pub mod suite;
mod variance;

pub use cauchy::{cauchy_gap, check_metric};
pub use factorization::{
    conditional_variance_factorization_check, factorization_check, product_setup,
    FactorizationReport, ProductSetup, VarianceFactorizationReport,
};
pub use independence::{independence_check, independence_discrepancy, independent_of_partition};
pub use variance::{scaled_variance_bound_check, variance_representations, ScaledVarianceCheck, VarianceRepresentations};

use crate::data::{DataError, FiniteProbSpace, Partition};
use crate::HypothesisError;

/// Absolute tolerance of every exact identity.
pub const EXACT_TOL: f64 = 1e-12;

/// Blocks up to which all unions of blocks are enumerated.
pub const MAX_ENUMERATED_BLOCKS: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// One finite real value per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self, ProbError> {
        if let Some(w) = values.iter().position(|v| !v.is_finite()) {
            return Err(ProbError::Precondition(format!(
                "value at outcome {w} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self, ProbError> {
        Self::new((0..len).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, w: usize) -> f64 {
        self.values[w]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, ProbError> {
        Self::new(self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn expectation(&self, space: &FiniteProbSpace) -> f64 {
        space.expect(|w| self.values[w])
    }

    /// Exact equality of values within each block.
    pub fn is_block_constant(&self, partition: &Partition) -> bool {
        partition
            .blocks()
            .iter()
            .all(|b| b.iter().all(|&w| self.values[w] == self.values[b[0]]))
    }
}

/// A version of `E[X | sigma(partition)]`: block averages on blocks of
/// positive probability, 0 on null blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalExpectation {
    values: Vec<f64>,
}

impl ConditionalExpectation {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_random_variable(&self) -> RandomVariable {
        RandomVariable {
            values: self.values.clone(),
        }
    }
}

pub(crate) fn check_shapes(
    space: &FiniteProbSpace,
    partition: &Partition,
    vars: &[&RandomVariable],
) -> Result<(), ProbError> {
    if partition.omega_len() != space.len() {
        return Err(DataError::InvalidPartition(format!(
            "partition covers {} outcomes but |Omega| = {}",
            partition.omega_len(),
            space.len()
        ))
        .into());
    }
    for v in vars {
        if v.len() != space.len() {
            return Err(ProbError::Precondition(format!(
                "random variable has {} values but |Omega| = {}",
                v.len(),
                space.len()
            )));
        }
    }
    Ok(())
}

/// `E[X | G]` by block averaging, followed by an exhaustive check that
/// `E[X 1_A] = E[Y 1_A]` for every union `A` of blocks (every block when
/// there are more than [`MAX_ENUMERATED_BLOCKS`]).
pub fn conditional_expectation(
    space: &FiniteProbSpace,
    partition: &Partition,
    x: &RandomVariable,
) -> Result<ConditionalExpectation, ProbError> {
    check_shapes(space, partition, &[x])?;
    let p = space.probs();
    let mut values = vec![0.0; space.len()];
    for block in partition.blocks() {
        let mass: f64 = block.iter().map(|&w| p[w]).sum();
        if mass > 0.0 {
            let avg = block.iter().map(|&w| p[w] * x.at(w)).sum::<f64>() / mass;
            for &w in block {
                values[w] = avg;
            }
        }
    }
    let y = ConditionalExpectation { values };
    let gap = integral_discrepancy(space, partition, x, &y.as_random_variable());
    let scale = 1.0 + x.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(
        gap <= EXACT_TOL * scale,
        "block averages miss the defining integrals by {gap}"
    );
    Ok(y)
}

/// `max_A |E[X 1_A] - E[Y 1_A]|` over unions `A` of blocks (single blocks
/// only when there are too many to enumerate).
pub fn integral_discrepancy(
    space: &FiniteProbSpace,
    partition: &Partition,
    x: &RandomVariable,
    y: &RandomVariable,
) -> f64 {
    let p = space.probs();
    let per_block: Vec<(f64, f64)> = partition
        .blocks()
        .iter()
        .map(|b| {
            (
                b.iter().map(|&w| p[w] * x.at(w)).sum(),
                b.iter().map(|&w| p[w] * y.at(w)).sum(),
            )
        })
        .collect();
    let k = per_block.len();
    if k > MAX_ENUMERATED_BLOCKS {
        return per_block
            .iter()
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    }
    let mut worst = 0.0f64;
    for mask in 1u32..(1u32 << k) {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, (ia, ib)) in per_block.iter().enumerate() {
            if mask & (1 << j) != 0 {
                a += ia;
                b += ib;
            }
        }
        worst = worst.max((a - b).abs());
    }
    worst
}

/// `(E[(X - Z)^2], E[(X - E[X|G])^2], lhs >= rhs - tol)` for block-constant `Z`.
pub fn l2_projection_check(
    space: &FiniteProbSpace,
    partition: &Partition,
    x: &RandomVariable,
    z: &RandomVariable,
) -> Result<(f64, f64, bool), ProbError> {
    check_shapes(space, partition, &[x, z])?;
    if !z.is_block_constant(partition) {
        return Err(ProbError::Precondition(
            "Z must be constant on every block".into(),
        ));
    }
    let y = conditional_expectation(space, partition, x)?;
    let lhs = space.expect(|w| (x.at(w) - z.at(w)).powi(2));
    let rhs = space.expect(|w| (x.at(w) - y.values[w]).powi(2));
    Ok((lhs, rhs, lhs >= rhs - EXACT_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> (FiniteProbSpace, Partition, RandomVariable) {
        (
            FiniteProbSpace::uniform(4).unwrap(),
            Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap(),
            RandomVariable::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
        )
    }

    #[test]
    fn block_averages() {
        let (s, p, x) = four();
        assert_eq!(conditional_expectation(&s, &p, &x).unwrap().values(), &[1.5, 1.5, 3.5, 3.5]);
        let t = conditional_expectation(&s, &Partition::trivial(4), &x).unwrap();
        assert_eq!(t.values(), &[2.5; 4]);
        let f = conditional_expectation(&s, &Partition::singletons(4), &x).unwrap();
        assert_eq!(f.values(), x.values());
    }

    #[test]
    fn null_blocks_get_zero() {
        let s = FiniteProbSpace::from_probs(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let p = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let x = RandomVariable::new(vec![1.0, 3.0, 7.0, 9.0]).unwrap();
        assert_eq!(conditional_expectation(&s, &p, &x).unwrap().values(), &[2.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn mismatched_partition_rejected() {
        let (s, _, x) = four();
        let p = Partition::trivial(3);
        assert!(matches!(
            conditional_expectation(&s, &p, &x),
            Err(ProbError::Data(DataError::InvalidPartition(_)))
        ));
        assert!(RandomVariable::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn projection_examples() {
        let (s, p, x) = four();
        let (lhs, rhs, holds) = l2_projection_check(&s, &p, &x, &RandomVariable::new(vec![0.0; 4]).unwrap()).unwrap();
        assert_eq!((lhs, rhs, holds), (7.5, 0.25, true));
        let y = conditional_expectation(&s, &p, &x).unwrap().as_random_variable();
        let (lhs, rhs, _) = l2_projection_check(&s, &p, &x, &y).unwrap();
        assert_eq!(lhs, rhs);
        assert!(l2_projection_check(&s, &p, &x, &x).is_err());
    }
}
