use super::{OptimError, OptimizerKind, Schedule, TrajectoryRecord};
use crate::HypothesisError;

/// Effective rates `gamma'_n^{(i)}`, `n = 1..=N`, that put a simple-quadratic
/// trajectory into the normalized form
/// `theta_n = theta_{n-1} - gamma'_n (theta_{n-1} - xbar_n)`.
///
/// * SGD: `gamma' = 2 gamma_n` (the factor 2 of the gradient `2(theta - x)`).
/// * Adam with `alpha = 0` (RMSprop, possibly bias corrected):
///   `gamma' = 2 gamma_n / (epsilon + sqrt(kappa(n) M_n))`.
/// * AdaGrad: `gamma' = 2 gamma_n / (epsilon + sqrt(M_n))`.
///
/// Momentum and Adam with `alpha > 0` do not have this form. The adaptive
/// rates are read off the record, which must therefore hold every step.
/// Result is indexed `[n - 1][i]`.
pub fn normalized_rates(
    kind: OptimizerKind,
    hyper: Option<&super::HyperParams>,
    schedule: &Schedule,
    record: &TrajectoryRecord,
) -> Result<Vec<Vec<f64>>, OptimError> {
    let steps = record.steps;
    let p = record.dim();
    match kind {
        OptimizerKind::Sgd => Ok((1..=steps)
            .map(|n| vec![2.0 * schedule.gamma.at(n); p])
            .collect()),
        OptimizerKind::Adam | OptimizerKind::AdaGrad => {
            let h = hyper.ok_or_else(|| OptimError::Invalid("hyperparameters required".into()))?;
            if kind == OptimizerKind::Adam && (h.alpha != 0.0 || h.first_moment_correction) {
                return Err(HypothesisError::new(
                    "alpha = 0",
                    format!(
                        "normalized recursion needs a memoryless first moment, got alpha = {}",
                        h.alpha
                    ),
                )
                .into());
            }
            if !record.complete {
                return Err(OptimError::Invalid(
                    "adaptive normalized rates need a record of every step".into(),
                ));
            }
            Ok(record.rows[1..]
                .iter()
                .map(|row| {
                    let kappa = match kind {
                        OptimizerKind::Adam => h.kappa.at(row.n, h.beta),
                        _ => 1.0,
                    };
                    row.second
                        .iter()
                        .map(|big_m| 2.0 * row.gamma / (h.epsilon + (kappa * big_m).sqrt()))
                        .collect()
                })
                .collect())
        }
        OptimizerKind::Momentum => Err(OptimError::Invalid(
            "momentum has no normalized single-rate form".into(),
        )),
    }
}
