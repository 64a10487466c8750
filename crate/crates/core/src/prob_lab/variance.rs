use super::EXACT_TOL;
use crate::data::DiscreteLaw;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceRepresentations {
    /// `E[(X - E X)^2]`.
    pub var: f64,
    /// `E[(X - Y)^2] / 2` with `Y` an independent copy.
    pub half_sq_diff: f64,
    /// `E[(X - Y)^2 1{X <= Y}]`.
    pub indicator_form: f64,
}

impl VarianceRepresentations {
    pub fn max_discrepancy(&self) -> f64 {
        (self.var - self.half_sq_diff)
            .abs()
            .max((self.var - self.indicator_form).abs())
            .max((self.half_sq_diff - self.indicator_form).abs())
    }
}

/// The three expressions for `Var(X)`, each by exact enumeration (the last
/// two over the product of the law with itself).
pub fn variance_representations(law: &DiscreteLaw) -> VarianceRepresentations {
    let (v, p) = (&law.values, &law.probs);
    let mut half = 0.0;
    let mut ind = 0.0;
    for (x, px) in v.iter().zip(p) {
        for (y, py) in v.iter().zip(p) {
            let d2 = (x - y) * (x - y) * px * py;
            half += d2;
            if x <= y {
                ind += d2;
            }
        }
    }
    VarianceRepresentations {
        var: law.variance(),
        half_sq_diff: 0.5 * half,
        indicator_form: ind,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledVarianceCheck {
    /// `Var(X / (epsilon + (X^2 + r)^{1/2}))`.
    pub lhs: f64,
    /// `epsilon^2 Var(X) / (epsilon + (r + sup|X|^2)^{1/2})^4`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn scaled_variance_bound_check(law: &DiscreteLaw, epsilon: f64, r: f64) -> ScaledVarianceCheck {
    let scaled = law.map(|x| x / (epsilon + (x * x + r).sqrt()));
    let lhs = scaled.variance();
    let sup = law.sup_abs();
    let rhs = epsilon * epsilon * law.variance() / (epsilon + (r + sup * sup).sqrt()).powi(4);
    ScaledVarianceCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - EXACT_TOL,
    }
}
