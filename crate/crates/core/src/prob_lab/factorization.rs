use super::{
    check_shapes, conditional_expectation, independent_of_partition, ProbError, RandomVariable,
};
use crate::data::{FiniteProbSpace, Partition};
use crate::HypothesisError;

/// `Omega = Omega_X x Omega_Y` with `G` generated by the first factor, so
/// that `Y` (a function of the second factor) is independent of `G` by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSetup {
    pub space: FiniteProbSpace,
    pub partition: Partition,
    pub x: RandomVariable,
    pub y: RandomVariable,
}

/// Lifts `x_values` on `space_x` and `y_values` on `space_y` to the product.
/// `G` is the partition induced by the first coordinate.
pub fn product_setup(
    space_x: &FiniteProbSpace,
    x_values: &[f64],
    space_y: &FiniteProbSpace,
    y_values: &[f64],
) -> Result<ProductSetup, ProbError> {
    if x_values.len() != space_x.len() || y_values.len() != space_y.len() {
        return Err(ProbError::Precondition(
            "value vectors must match their factor spaces".into(),
        ));
    }
    let ny = space_y.len();
    let space = space_x.product(space_y);
    let labels: Vec<usize> = (0..space.len()).map(|w| w / ny).collect();
    Ok(ProductSetup {
        partition: Partition::from_labels(&labels),
        x: RandomVariable::from_fn(space.len(), |w| x_values[w / ny])?,
        y: RandomVariable::from_fn(space.len(), |w| y_values[w % ny])?,
        space,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    /// `E[Phi(X, Y) | G]` per outcome.
    pub lhs: Vec<f64>,
    /// `phi(X)` per outcome, `phi(x) = E[Phi(x, Y)]`.
    pub rhs: Vec<f64>,
    /// Over outcomes in blocks of positive probability.
    pub max_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceFactorizationReport {
    /// `E[(Phi - E[Phi | G])^2 | G]` against `psi(X)`, `psi(x) = Var(Phi(x, Y))`.
    pub conditional_discrepancy: f64,
    /// `|E[(Phi - E[Phi | G])^2] - E[psi(X)]|`.
    pub expectation_discrepancy: f64,
    pub expected_psi: f64,
}

fn preconditions(
    space: &FiniteProbSpace,
    partition: &Partition,
    x: &RandomVariable,
    y: &RandomVariable,
) -> Result<(), ProbError> {
    check_shapes(space, partition, &[x, y])?;
    if !x.is_block_constant(partition) {
        return Err(ProbError::Precondition(
            "X must be constant on every block of G".into(),
        ));
    }
    if !independent_of_partition(space, partition, y) {
        return Err(HypothesisError::new(
            "Y independent of G",
            "the factorization lemma does not apply",
        )
        .into());
    }
    Ok(())
}

fn in_positive_block(space: &FiniteProbSpace, partition: &Partition) -> Vec<bool> {
    let mass: Vec<f64> = partition.blocks().iter().map(|b| space.prob_of(b)).collect();
    (0..space.len())
        .map(|w| mass[partition.block_of(w)] > 0.0)
        .collect()
}

/// `phi(x) = E[Phi(x, Y)]`.
fn phi_of<F: Fn(f64, f64) -> f64>(space: &FiniteProbSpace, phi: &F, x: f64, y: &RandomVariable) -> f64 {
    space.expect(|w| phi(x, y.at(w)))
}

/// Checks `E[Phi(X, Y) | G] = phi(X)` on every outcome of positive
/// probability.
pub fn factorization_check<F>(
    space: &FiniteProbSpace,
    partition: &Partition,
    phi: F,
    x: &RandomVariable,
    y: &RandomVariable,
) -> Result<FactorizationReport, ProbError>
where
    F: Fn(f64, f64) -> f64,
{
    preconditions(space, partition, x, y)?;
    let joint = RandomVariable::from_fn(space.len(), |w| phi(x.at(w), y.at(w)))?;
    let lhs = conditional_expectation(space, partition, &joint)?.values().to_vec();
    let rhs: Vec<f64> = (0..space.len()).map(|w| phi_of(space, &phi, x.at(w), y)).collect();
    let live = in_positive_block(space, partition);
    let max_discrepancy = (0..space.len())
        .filter(|w| live[*w])
        .map(|w| (lhs[w] - rhs[w]).abs())
        .fold(0.0, f64::max);
    Ok(FactorizationReport {
        lhs,
        rhs,
        max_discrepancy,
    })
}

/// Checks `E[(Phi(X,Y) - E[Phi(X,Y)|G])^2 | G] = psi(X)` and its expectation
/// `E[(Phi(X,Y) - E[Phi(X,Y)|G])^2] = E[psi(X)]`.
pub fn conditional_variance_factorization_check<F>(
    space: &FiniteProbSpace,
    partition: &Partition,
    phi: F,
    x: &RandomVariable,
    y: &RandomVariable,
) -> Result<VarianceFactorizationReport, ProbError>
where
    F: Fn(f64, f64) -> f64,
{
    preconditions(space, partition, x, y)?;
    let joint = RandomVariable::from_fn(space.len(), |w| phi(x.at(w), y.at(w)))?;
    let cond = conditional_expectation(space, partition, &joint)?;
    let sq = RandomVariable::from_fn(space.len(), |w| (joint.at(w) - cond.values()[w]).powi(2))?;
    let cond_sq = conditional_expectation(space, partition, &sq)?;
    let psi = |xv: f64| {
        let mean = phi_of(space, &phi, xv, y);
        space.expect(|w| (phi(xv, y.at(w)) - mean).powi(2))
    };
    let psi_x: Vec<f64> = (0..space.len()).map(|w| psi(x.at(w))).collect();
    let live = in_positive_block(space, partition);
    let conditional_discrepancy = (0..space.len())
        .filter(|w| live[*w])
        .map(|w| (cond_sq.values()[w] - psi_x[w]).abs())
        .fold(0.0, f64::max);
    let expected_psi = space.expect(|w| psi_x[w]);
    let expectation_discrepancy = (sq.expectation(space) - expected_psi).abs();
    Ok(VarianceFactorizationReport {
        conditional_discrepancy,
        expectation_discrepancy,
        expected_psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(y_values: &[f64]) -> ProductSetup {
        let sx = FiniteProbSpace::from_probs(vec![0.2, 0.5, 0.3]).unwrap();
        let sy = FiniteProbSpace::uniform(y_values.len()).unwrap();
        product_setup(&sx, &[-1.0, 0.5, 2.0], &sy, y_values).unwrap()
    }

    #[test]
    fn factorization_examples() {
        let s = setup(&[-1.0, 1.0]);
        let r = factorization_check(&s.space, &s.partition, |x, y| x * y, &s.x, &s.y).unwrap();
        assert!(r.lhs.iter().chain(&r.rhs).all(|v| v.abs() < 1e-15));
        let s = setup(&[0.0, 1.0]);
        let r = factorization_check(&s.space, &s.partition, |x, y| x + y, &s.x, &s.y).unwrap();
        for w in 0..s.space.len() {
            assert!((r.lhs[w] - (s.x.at(w) + 0.5)).abs() < 1e-15);
            assert!((r.rhs[w] - (s.x.at(w) + 0.5)).abs() < 1e-15);
        }
        let r = factorization_check(&s.space, &s.partition, |x, _| x, &s.x, &s.y).unwrap();
        assert!(r.max_discrepancy < 1e-15);
        assert_eq!(r.rhs, s.x.values());
    }

    #[test]
    fn variance_factorization_examples() {
        let s = setup(&[0.0, 1.0]);
        let r = conditional_variance_factorization_check(&s.space, &s.partition, |x, y| x + y, &s.x, &s.y).unwrap();
        assert!((r.expected_psi - 0.25).abs() < 1e-15);
        assert!(r.conditional_discrepancy < 1e-12 && r.expectation_discrepancy < 1e-12);
        let r = conditional_variance_factorization_check(&s.space, &s.partition, |x, _| x, &s.x, &s.y).unwrap();
        assert_eq!(r.expected_psi, 0.0);
        let s = setup(&[1.0, 2.0, 6.0]);
        let r = conditional_variance_factorization_check(&s.space, &s.partition, |_, y| y, &s.x, &s.y).unwrap();
        assert!((r.expected_psi - 14.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn dependence_is_refused() {
        let s = setup(&[0.0, 1.0]);
        // X itself is G-measurable, hence not independent of G
        let e = factorization_check(&s.space, &s.partition, |x, y| x * y, &s.x, &s.x).unwrap_err();
        match e {
            ProbError::Hypothesis(h) => assert_eq!(h.name, "Y independent of G"),
            other => panic!("{other:?}"),
        }
        let not_constant = s.y.clone();
        assert!(matches!(
            factorization_check(&s.space, &Partition::trivial(s.space.len()), |x, y| x * y, &not_constant, &s.x),
            Err(ProbError::Precondition(_))
        ));
    }
}
