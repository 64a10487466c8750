use super::BoundError;

/// Stationary variance `(1 - phi)^2 sigma^2 / (1 - phi^2)` of
/// `theta_n = phi theta_{n-1} + (1 - phi) xbar_n` with `Var(xbar_n) = sigma^2`.
/// Constant-rate SGD on `|theta - x|^2` is this recursion with
/// `phi = 1 - 2 gamma`.
pub fn ar1_stationary_variance(phi: f64, sigma2: f64) -> Result<f64, BoundError> {
    if !(phi.abs() < 1.0) {
        return Err(BoundError::NonContractive(phi.abs()));
    }
    Ok((1.0 - phi).powi(2) * sigma2 / (1.0 - phi * phi))
}

/// Stationary `E[(theta_n - theta_{n+lag})^2] = 2 var (1 - phi^lag)`.
pub fn ar1_lag_gap(phi: f64, sigma2: f64, lag: u32) -> Result<f64, BoundError> {
    let var = ar1_stationary_variance(phi, sigma2)?;
    Ok(2.0 * var * (1.0 - phi.powi(lag as i32)))
}
