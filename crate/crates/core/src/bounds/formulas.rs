use crate::HypothesisError;

/// `[1 + sup gamma]^delta (max{c, |theta_0|} + sup |X|)` for the normalized
/// recursion `theta_n = theta_{n-1} - gamma_n (theta_{n-1} - X_n)`.
pub fn sgd_apriori_bound(delta: u32, sup_gamma: f64, c: f64, theta0_abs: f64, sup_x: f64) -> f64 {
    (1.0 + sup_gamma).powi(delta as i32) * (c.max(theta0_abs) + sup_x)
}

/// `max{3(alpha rho + (1-alpha) eta) c / ((1-alpha) eta) + c, 3|theta_{N-1}| + c, history_max}`.
pub fn momentum_apriori_bound(
    alpha: f64,
    eta: f64,
    rho: f64,
    c: f64,
    theta_prev_abs: f64,
    history_max: f64,
) -> f64 {
    let first = 3.0 * (alpha * rho + (1.0 - alpha) * eta) * c / ((1.0 - alpha) * eta) + c;
    first.max(3.0 * theta_prev_abs + c).max(history_max)
}

/// `c + S/(eta kappa_n^{1/2}) + gamma_n alpha^n |m_0| / (epsilon + S)
///  + gamma_n (1-alpha) beta^{1/2} / (kappa_n^{1/2} (beta - alpha^2)^{1/2})`.
#[allow(clippy::too_many_arguments)]
pub fn adam_single_step_bound(
    c: f64,
    eta: f64,
    kappa_n: f64,
    s: f64,
    gamma_n: f64,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    n: u64,
    m0_abs: f64,
) -> f64 {
    c + s / (eta * kappa_n.sqrt())
        + gamma_n * crate::optimizers::pow_n(alpha, n) * m0_abs / (epsilon + s)
        + gamma_n * (1.0 - alpha) * beta.sqrt() / (kappa_n.sqrt() * (beta - alpha * alpha).sqrt())
}

/// Inputs of [`adaptive_sup_bound`]. `inf_kappa` is the infimum of the
/// scaling as it enters the bound; for Adam with `kappa(n, i)` that is
/// `inf_n kappa(n, i) (1 - beta)`. `big_m` is the initial second moment on
/// the same scale, i.e. `kappa M_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSupInputs {
    pub c: f64,
    pub theta0_abs: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub sup_gamma: f64,
    pub inf_kappa: f64,
    pub m0_abs: f64,
    pub big_m: f64,
}

/// `c + 3 max{|theta_0|, (alpha rho + (1-alpha) eta) c / ((1-alpha) eta),
///  c + sup gamma |m| / (epsilon + M^{1/2})
///    + sup gamma max{1, rho} (2 + alpha) beta^{1/2} / (inf kappa^{1/2} eta (beta^{1/2} - alpha))}`.
pub fn adaptive_sup_bound(p: &AdaptiveSupInputs) -> Result<f64, HypothesisError> {
    if !(p.beta > p.alpha * p.alpha) {
        return Err(HypothesisError::new(
            "alpha^2 < beta < 1",
            format!("alpha = {}, beta = {}", p.alpha, p.beta),
        ));
    }
    if !(p.inf_kappa > 0.0) {
        return Err(HypothesisError::new(
            "inf kappa > 0",
            format!("inf kappa = {}", p.inf_kappa),
        ));
    }
    let second = (p.alpha * p.rho + (1.0 - p.alpha) * p.eta) * p.c / ((1.0 - p.alpha) * p.eta);
    let third = p.c
        + p.sup_gamma * p.m0_abs / (p.epsilon + p.big_m.sqrt())
        + p.sup_gamma * p.rho.max(1.0) * (2.0 + p.alpha) * p.beta.sqrt()
            / (p.inf_kappa.sqrt() * p.eta * (p.beta.sqrt() - p.alpha));
    Ok(p.c + 3.0 * p.theta0_abs.max(second).max(third))
}

/// `D = (rho + epsilon)^2 c^3 / min{1, epsilon^3}
///  [max{8 max{1,rho}(3+alpha) beta^{1/2} / (eta (1-beta)(beta^{1/2} - alpha)),
///       5 (alpha rho + (1-alpha) eta) / ((1-alpha)^{3/2} eta)}]^2`.
pub fn constant_d(rho: f64, epsilon: f64, c: f64, alpha: f64, beta: f64, eta: f64) -> Result<f64, HypothesisError> {
    if !(alpha * alpha < beta && beta < 1.0) || !(beta.sqrt() > alpha) {
        return Err(HypothesisError::new(
            "alpha^2 < beta < 1",
            format!("alpha = {alpha}, beta = {beta}"),
        ));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(HypothesisError::new("0 <= alpha < 1", format!("alpha = {alpha}")));
    }
    if !(epsilon > 0.0) {
        return Err(HypothesisError::new("epsilon > 0", format!("epsilon = {epsilon}")));
    }
    if !(eta > 0.0 && rho >= eta) {
        return Err(HypothesisError::new(
            "0 < eta <= rho",
            format!("eta = {eta}, rho = {rho}"),
        ));
    }
    let pre = (rho + epsilon).powi(2) * c.powi(3) / 1f64.min(epsilon.powi(3));
    let t1 = 8.0 * rho.max(1.0) * (3.0 + alpha) * beta.sqrt()
        / (eta * (1.0 - beta) * (beta.sqrt() - alpha));
    let t2 = 5.0 * (alpha * rho + (1.0 - alpha) * eta) / ((1.0 - alpha).powf(1.5) * eta);
    Ok(pre * t1.max(t2).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundInputs {
    pub liminf_gamma: f64,
    pub inf_variance: f64,
    pub d: f64,
    pub limsup_batch: f64,
    pub sup_gamma: f64,
    /// `E[max{1, |theta_0^{(i)}|}]`.
    pub initial_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    /// Set when the value is 0 because an input made the statement empty.
    pub vacuous: Option<&'static str>,
}

/// `liminf gamma (inf Var)^{1/2} / (D (limsup J)^{1/2} (max{1, sup gamma})^2 (E[max{1,|theta_0|}])^2)`,
/// a lower bound on `liminf (E[|theta_n^{(i)} - xi|^2])^{1/2}` for every `xi`.
pub fn nonconvergence_lower_bound(p: &LowerBoundInputs) -> LowerBound {
    let vacuous = if !(p.inf_variance > 0.0) {
        Some("zero gradient variance")
    } else if !(p.liminf_gamma > 0.0) {
        Some("hypothesis liminf gamma > 0 not met")
    } else {
        None
    };
    if vacuous.is_some() {
        return LowerBound { value: 0.0, vacuous };
    }
    let value = p.liminf_gamma * p.inf_variance.sqrt()
        / (p.d * p.limsup_batch.sqrt() * p.sup_gamma.max(1.0).powi(2) * p.initial_scale.powi(2));
    LowerBound { value, vacuous: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_examples() {
        assert_eq!(sgd_apriori_bound(1, 1.0, 1.0, 0.0, 1.0), 4.0);
        assert_eq!(sgd_apriori_bound(2, 0.5, 1.0, 3.0, 1.0), 9.0);
        assert_eq!(sgd_apriori_bound(3, 0.0, 1.0, 0.5, 0.7), 1.7);
    }

    #[test]
    fn momentum_examples() {
        assert_eq!(momentum_apriori_bound(0.0, 1.0, 1.0, 1.0, 0.0, 0.0), 4.0);
        assert_eq!(momentum_apriori_bound(0.5, 1.0, 2.0, 1.0, 0.0, 0.0), 10.0);
        assert_eq!(momentum_apriori_bound(0.0, 1.0, 1.0, 1.0, 100.0, 0.0), 301.0);
    }

    #[test]
    fn single_step_examples() {
        assert_eq!(adam_single_step_bound(1.0, 1.0, 1.0, 2.0, 1.0, 0.0, 0.25, 1.0, 1, 0.0), 4.0);
        assert_eq!(adam_single_step_bound(1.0, 2.0, 4.0, 2.0, 0.0, 0.3, 0.25, 1.0, 5, 7.0), 1.5);
    }

    fn example() -> AdaptiveSupInputs {
        AdaptiveSupInputs {
            c: 1.0,
            theta0_abs: 0.0,
            alpha: 0.0,
            beta: 0.25,
            eta: 1.0,
            rho: 1.0,
            epsilon: 1.0,
            sup_gamma: 1.0,
            inf_kappa: 1.0,
            m0_abs: 0.0,
            big_m: 0.0,
        }
    }

    #[test]
    fn adaptive_examples() {
        assert_eq!(adaptive_sup_bound(&example()).unwrap(), 10.0);
        let zero = AdaptiveSupInputs { sup_gamma: 0.0, ..example() };
        assert_eq!(adaptive_sup_bound(&zero).unwrap(), 4.0);
        let big = AdaptiveSupInputs { theta0_abs: 50.0, ..example() };
        assert_eq!(adaptive_sup_bound(&big).unwrap(), 151.0);
        let bad = AdaptiveSupInputs { alpha: 0.6, beta: 0.3, ..example() };
        assert_eq!(adaptive_sup_bound(&bad).unwrap_err().name, "alpha^2 < beta < 1");
    }

    #[test]
    fn d_examples() {
        assert_eq!(constant_d(1.0, 1.0, 1.0, 0.0, 0.5, 1.0).unwrap(), 9216.0);
        assert_eq!(constant_d(2.0, 1.0, 1.0, 0.0, 0.5, 2.0).unwrap(), 20736.0);
        assert!(constant_d(1.0, 1.0, 1.5, 0.0, 0.5, 1.0).unwrap() > 9216.0);
        assert!(constant_d(1.0, 1.0, 1.0, 0.8, 0.5, 1.0).is_err());
        assert!(constant_d(1.0, 0.0, 1.0, 0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let base = LowerBoundInputs {
            liminf_gamma: 1.0,
            inf_variance: 4.0,
            d: 20736.0,
            limsup_batch: 1.0,
            sup_gamma: 1.0,
            initial_scale: 1.0,
        };
        let lb = nonconvergence_lower_bound(&base);
        assert_eq!(lb.value, 2.0 / 20736.0);
        assert!((lb.value - 9.645e-5).abs() < 1e-8);
        assert_eq!(lb.vacuous, None);
        let zero = nonconvergence_lower_bound(&LowerBoundInputs { inf_variance: 0.0, ..base });
        assert_eq!((zero.value, zero.vacuous.is_some()), (0.0, true));
        let doubled = nonconvergence_lower_bound(&LowerBoundInputs { sup_gamma: 2.0, ..base });
        assert_eq!(doubled.value, lb.value / 4.0);
        let decaying = nonconvergence_lower_bound(&LowerBoundInputs { liminf_gamma: 0.0, ..base });
        assert_eq!(decaying.vacuous, Some("hypothesis liminf gamma > 0 not met"));
    }
}
