use super::ProbError;

/// Triples checked by [`check_metric`] per index axis.
const METRIC_PROBES: usize = 12;

/// Checks symmetry, nonnegativity and the triangle inequality of `d` on a
/// spread of index triples from `[k, horizon]`.
pub fn check_metric<D>(d: &D, k: usize, horizon: usize) -> Result<(), ProbError>
where
    D: Fn(usize, usize) -> f64,
{
    let span = horizon.saturating_sub(k) + 1;
    let stride = (span / METRIC_PROBES).max(1);
    let idx: Vec<usize> = (k..=horizon).step_by(stride).collect();
    for &a in &idx {
        for &b in &idx {
            let ab = d(a, b);
            if !(ab >= 0.0) || (ab - d(b, a)).abs() > 1e-12 * (1.0 + ab.abs()) {
                return Err(ProbError::Precondition(format!(
                    "d is not a symmetric nonnegative function at ({a}, {b})"
                )));
            }
            for &c in &idx {
                let slack = d(a, c) + d(c, b) - ab;
                if slack < -1e-12 * (1.0 + ab.abs()) {
                    return Err(ProbError::Precondition(format!(
                        "triangle inequality fails at ({a}, {c}, {b})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `1/2 max_{k <= k' < K} min_{k' <= m < n <= K} d(n, m)`, the finite-horizon
/// surrogate of `1/2 sup_k inf_{m, n >= k, m != n} d(x_n, x_m)`.
///
/// Only a lower estimate of the asymptotic quantity when the tail is
/// stationary. `d` is checked to be a metric on sampled triples first.
pub fn cauchy_gap<D>(d: D, k: usize, horizon: usize) -> Result<f64, ProbError>
where
    D: Fn(usize, usize) -> f64,
{
    if horizon <= k {
        return Err(ProbError::Precondition(format!(
            "window [{k}, {horizon}] holds fewer than two indices"
        )));
    }
    check_metric(&d, k, horizon)?;
    // sweep k' downwards, maintaining the pair minimum over [k', K]
    let mut inner = f64::INFINITY;
    let mut best = 0.0f64;
    for start in (k..horizon).rev() {
        for n in start + 1..=horizon {
            inner = inner.min(d(n, start));
        }
        best = best.max(inner);
    }
    Ok(0.5 * best)
}
