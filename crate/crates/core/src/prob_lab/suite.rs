//! Randomized exact verification of the conditional-expectation calculus on
//! product spaces with at most 64 outcomes.

use super::{
    conditional_expectation, conditional_variance_factorization_check, factorization_check,
    integral_discrepancy, l2_projection_check, product_setup, scaled_variance_bound_check,
    variance_representations, ProbError, RandomVariable, EXACT_TOL,
};
use crate::data::{DiscreteLaw, FiniteProbSpace, Partition, RngStream};

/// Largest factor size; products have at most 64 outcomes.
const MAX_FACTOR: usize = 8;

/// `Phi` families used by the factorization checks.
const PHI_NAMES: [&str; 5] = ["x*y", "x+y", "sin(x)*y^2", "max(x,y)", "(x-y)^2"];

fn phi(k: usize, x: f64, y: f64) -> f64 {
    match k {
        0 => x * y,
        1 => x + y,
        2 => x.sin() * y * y,
        3 => x.max(y),
        _ => (x - y) * (x - y),
    }
}

/// Worst discrepancy per identity; each must stay within [`EXACT_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub instances: usize,
    pub checks: Vec<(&'static str, f64)>,
    /// Instances where the scaled-variance inequality or the projection
    /// inequality failed.
    pub inequality_failures: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.inequality_failures == 0 && self.checks.iter().all(|(_, v)| *v <= EXACT_TOL)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity,max_discrepancy,tolerance\n");
        for (name, v) in &self.checks {
            out.push_str(&format!(
                "{name},{},{}\n",
                crate::experiment::csv::fmt_f64(*v),
                crate::experiment::csv::fmt_f64(EXACT_TOL)
            ));
        }
        out
    }
}

fn random_probs(rng: &mut RngStream, n: usize) -> Vec<f64> {
    // occasional null outcomes exercise the null-block convention
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.unit() < 0.1 { 0.0 } else { rng.unit() + 0.05 })
        .collect();
    if w.iter().all(|v| *v == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

fn random_values(rng: &mut RngStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| 6.0 * rng.unit() - 3.0).collect()
}

fn random_size(rng: &mut RngStream, max: usize) -> usize {
    1 + (rng.unit() * max as f64) as usize % max
}

/// Blocks formed by grouping `labels` into at most `groups` classes.
fn random_labels(rng: &mut RngStream, n: usize, groups: usize) -> Vec<usize> {
    (0..n).map(|_| (rng.unit() * groups as f64) as usize).collect()
}

/// Random bounded discrete law with up to `max_atoms` atoms in `[-3, 3]`.
pub fn random_law(rng: &mut RngStream, max_atoms: usize) -> DiscreteLaw {
    let n = random_size(rng, max_atoms);
    let values = random_values(rng, n);
    let probs = random_probs(rng, n);
    DiscreteLaw::new(values, probs).expect("normalized weights")
}

fn track(slot: &mut f64, v: f64) {
    if !(v <= *slot) {
        *slot = if v.is_nan() { f64::INFINITY } else { v };
    }
}

/// Runs every identity on `instances` random product spaces.
pub fn run_suite(seed: u64, instances: usize) -> Result<SuiteReport, ProbError> {
    let mut rng = RngStream::new(seed, 0);
    let mut tower = 0.0;
    let mut refinement = 0.0;
    let mut uniqueness = 0.0;
    let mut integrals = 0.0;
    let mut fact = 0.0;
    let mut cond_var = 0.0;
    let mut exp_var = 0.0;
    let mut var_repr = 0.0;
    let mut projection_equality = 0.0;
    let mut failures = 0;

    for _ in 0..instances {
        let nx = random_size(&mut rng, MAX_FACTOR);
        let ny = random_size(&mut rng, MAX_FACTOR);
        let sx = FiniteProbSpace::from_probs(random_probs(&mut rng, nx))?;
        let sy = FiniteProbSpace::from_probs(random_probs(&mut rng, ny))?;
        // X depends on the first factor through a random grouping only
        let group = random_labels(&mut rng, nx, 1 + nx / 2);
        let group_values = random_values(&mut rng, nx);
        let x_values: Vec<f64> = (0..nx).map(|a| group_values[group[a]]).collect();
        let y_values = random_values(&mut rng, ny);
        let setup = product_setup(&sx, &x_values, &sy, &y_values)?;
        let (space, g) = (&setup.space, &setup.partition);
        let n = space.len();

        let w = RandomVariable::new(random_values(&mut rng, n))?;
        let y = conditional_expectation(space, g, &w)?.as_random_variable();
        track(&mut tower, (y.expectation(space) - w.expectation(space)).abs());
        track(&mut integrals, integral_discrepancy(space, g, &w, &y));

        // coarser partition: merge blocks of G by a random labelling
        let merge = random_labels(&mut rng, g.blocks().len(), 1 + g.blocks().len() / 2);
        let coarse = Partition::from_labels(&(0..n).map(|o| merge[g.block_of(o)]).collect::<Vec<_>>());
        debug_assert!(g.refines(&coarse));
        let direct = conditional_expectation(space, &coarse, &w)?;
        let nested = conditional_expectation(space, &coarse, &y)?;
        track(
            &mut refinement,
            direct
                .values()
                .iter()
                .zip(nested.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );

        // uniqueness: perturbing one block breaks the integrals exactly when
        // that block carries mass
        let b = (rng.unit() * g.blocks().len() as f64) as usize % g.blocks().len();
        let mut z = y.values().to_vec();
        for &o in &g.blocks()[b] {
            z[o] += 1.0;
        }
        let z = RandomVariable::new(z)?;
        let gap = integral_discrepancy(space, g, &w, &z);
        let mass = space.prob_of(&g.blocks()[b]);
        let expected = if mass > 0.0 { mass } else { 0.0 };
        track(&mut uniqueness, (gap - expected).abs());

        let k = (rng.unit() * PHI_NAMES.len() as f64) as usize % PHI_NAMES.len();
        let f = factorization_check(space, g, |a, b| phi(k, a, b), &setup.x, &setup.y)?;
        track(&mut fact, f.max_discrepancy);
        let v = conditional_variance_factorization_check(space, g, |a, b| phi(k, a, b), &setup.x, &setup.y)?;
        track(&mut cond_var, v.conditional_discrepancy);
        track(&mut exp_var, v.expectation_discrepancy);

        let law = random_law(&mut rng, 64);
        track(&mut var_repr, variance_representations(&law).max_discrepancy());

        let zb_values = random_values(&mut rng, g.blocks().len());
        let zb = RandomVariable::from_fn(n, |o| zb_values[g.block_of(o)])?;
        let (lhs, rhs, holds) = l2_projection_check(space, g, &w, &zb)?;
        if !holds || lhs < rhs - EXACT_TOL {
            failures += 1;
        }
        let (lhs, rhs, _) = l2_projection_check(space, g, &w, &y)?;
        track(&mut projection_equality, (lhs - rhs).abs());

        let eps = 2.0 * (1.0 - rng.unit());
        let r = 4.0 * rng.unit();
        if !scaled_variance_bound_check(&law, eps, r).holds {
            failures += 1;
        }
    }

    Ok(SuiteReport {
        instances,
        checks: vec![
            ("tower", tower),
            ("defining_integrals", integrals),
            ("refinement", refinement),
            ("uniqueness", uniqueness),
            ("factorization", fact),
            ("conditional_variance", cond_var),
            ("conditional_variance_expectation", exp_var),
            ("variance_representations", var_repr),
            ("projection_equality", projection_equality),
        ],
        inequality_failures: failures,
    })
}
