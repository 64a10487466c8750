use super::pow_n;

/// Closed forms
///
/// ```text
/// m_n = alpha^n m_0 + sum_{k=1}^n (1 - alpha) alpha^{n-k} G_k
/// M_n = beta^n M_0 + sum_{k=1}^n (1 - beta) beta^{n-k} G_k^2
/// ```
///
/// evaluated term by term, per coordinate. `gradients[k - 1]` is `G_k`.
pub fn moments_summed_form(
    m0: &[f64],
    big_m0: &[f64],
    alpha: f64,
    beta: f64,
    gradients: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>) {
    let n = gradients.len() as u64;
    let p = m0.len();
    let mut m: Vec<f64> = m0.iter().map(|v| pow_n(alpha, n) * v).collect();
    let mut big_m: Vec<f64> = big_m0.iter().map(|v| pow_n(beta, n) * v).collect();
    for (k, g) in gradients.iter().enumerate() {
        let lag = n - (k as u64 + 1);
        let (wa, wb) = ((1.0 - alpha) * pow_n(alpha, lag), (1.0 - beta) * pow_n(beta, lag));
        for i in 0..p {
            m[i] += wa * g[i];
            big_m[i] += wb * g[i] * g[i];
        }
    }
    (m, big_m)
}

/// The same moments through the recursions.
pub fn moments_recursive(
    m0: &[f64],
    big_m0: &[f64],
    alpha: f64,
    beta: f64,
    gradients: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>) {
    let mut m = m0.to_vec();
    let mut big_m = big_m0.to_vec();
    for g in gradients {
        for i in 0..m.len() {
            m[i] = alpha * m[i] + (1.0 - alpha) * g[i];
            big_m[i] = beta * big_m[i] + (1.0 - beta) * g[i] * g[i];
        }
    }
    (m, big_m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_and_memoryless() {
        let (m, big_m) = moments_summed_form(&[0.3], &[0.2], 0.7, 0.9, &[vec![2.0]]);
        assert!((m[0] - (0.7 * 0.3 + 0.3 * 2.0)).abs() < 1e-15);
        assert!((big_m[0] - (0.9 * 0.2 + 0.1 * 4.0)).abs() < 1e-15);
        let gs = vec![vec![1.0], vec![-4.0], vec![2.5]];
        let (m, _) = moments_summed_form(&[9.0], &[0.0], 0.0, 0.5, &gs);
        assert_eq!(m[0], 2.5);
    }
}
