use super::{pow_n, HyperParams, KappaMode, OptimizerState};

/// `theta_n = theta_{n-1} - gamma G_n`; the moments are left untouched.
#[inline]
pub fn sgd_step(state: &mut OptimizerState, gamma: f64, grad: &[f64]) {
    state.n += 1;
    for (t, g) in state.theta.iter_mut().zip(grad) {
        *t -= gamma * g;
    }
}

/// Momentum SGD: `m_n = alpha m_{n-1} + (1 - alpha) G_n`, then
/// `theta_n = theta_{n-1} - gamma m_n`.
#[inline]
pub fn momentum_step(state: &mut OptimizerState, alpha: f64, gamma: f64, grad: &[f64]) {
    state.n += 1;
    for ((t, m), g) in state.theta.iter_mut().zip(&mut state.m).zip(grad) {
        *m = alpha * *m + (1.0 - alpha) * g;
        *t -= gamma * *m;
    }
}

/// One Adam step with second-moment scaling `kappa(n, i)`:
///
/// ```text
/// m_n = alpha m_{n-1} + (1 - alpha) G_n
/// M_n = beta M_{n-1} + (1 - beta) G_n^2
/// theta_n = theta_{n-1} - gamma m_n / (epsilon + sqrt(kappa(n, i) M_n))
/// ```
///
/// Both moments are updated before `theta`, so the denominator sees `M_n`.
#[inline]
pub fn adam_step(state: &mut OptimizerState, hyper: &HyperParams, gamma: f64, grad: &[f64]) {
    state.n += 1;
    let n = state.n;
    let HyperParams {
        alpha,
        beta,
        epsilon,
        kappa,
        first_moment_correction,
    } = *hyper;
    let kappa_n = kappa.at(n, beta);
    let m_scale = if first_moment_correction {
        1.0 / (1.0 - pow_n(alpha, n))
    } else {
        1.0
    };
    for (((t, m), big_m), g) in state
        .theta
        .iter_mut()
        .zip(&mut state.m)
        .zip(&mut state.second)
        .zip(grad)
    {
        *m = alpha * *m + (1.0 - alpha) * g;
        *big_m = beta * *big_m + (1.0 - beta) * g * g;
        *t -= gamma * (*m * m_scale) / (epsilon + (kappa_n * *big_m).sqrt());
    }
}

/// Adam with `kappa(n, i) = (1 - beta^n)^{-1}`.
#[inline]
pub fn bias_corrected_adam_step(
    state: &mut OptimizerState,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    gamma: f64,
    grad: &[f64],
) {
    let hyper = HyperParams::new(alpha, beta, epsilon, KappaMode::BiasCorrected);
    adam_step(state, &hyper, gamma, grad);
}

/// AdaGrad: `M_n = M_{n-1} + G_n^2`, `theta_n = theta_{n-1} - gamma G_n / (epsilon + sqrt(M_n))`.
/// `m` holds the latest gradient.
#[inline]
pub fn adagrad_step(state: &mut OptimizerState, epsilon: f64, gamma: f64, grad: &[f64]) {
    state.n += 1;
    for (((t, m), big_m), g) in state
        .theta
        .iter_mut()
        .zip(&mut state.m)
        .zip(&mut state.second)
        .zip(grad)
    {
        *m = *g;
        *big_m += g * g;
        *t -= gamma * g / (epsilon + big_m.sqrt());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(theta: f64) -> OptimizerState {
        OptimizerState::new(vec![theta])
    }

    #[test]
    fn sgd_examples() {
        let mut s = state(0.0);
        sgd_step(&mut s, 1.0, &[5.0]);
        assert_eq!(s.theta, vec![-5.0]);
        assert_eq!(s.n, 1);
        let mut s = state(2.0);
        sgd_step(&mut s, 0.0, &[5.0]);
        assert_eq!(s.theta, vec![2.0]);
        // simple quadratic with x = 1, gamma = 1/4: 0 - 0.25 * 2 (0 - 1) = 0.5
        let mut s = state(0.0);
        sgd_step(&mut s, 0.25, &[2.0 * (0.0 - 1.0)]);
        assert_eq!(s.theta, vec![0.5]);
        assert_eq!((s.m[0], s.second[0]), (0.0, 0.0));
    }

    #[test]
    fn adam_zero_gradient_fixed_point() {
        let h = HyperParams::new(0.9, 0.99, 1e-8, KappaMode::Constant(1.0));
        let mut s = state(1.5);
        for _ in 0..100 {
            adam_step(&mut s, &h, 0.1, &[0.0]);
        }
        assert_eq!(s.theta, vec![1.5]);
    }

    #[test]
    fn adam_hand_evaluation() {
        // alpha = 0, beta = 1/4, kappa = 1, epsilon = 1, gamma = 1, G_1 = 2:
        // m_1 = 2, M_1 = (1 - 1/4) 4 = 3, theta_1 = -2 / (1 + sqrt 3)
        let h = HyperParams::new(0.0, 0.25, 1.0, KappaMode::Constant(1.0));
        let mut s = state(0.0);
        adam_step(&mut s, &h, 1.0, &[2.0]);
        assert_eq!(s.m, vec![2.0]);
        assert_eq!(s.second, vec![3.0]);
        assert!((s.theta[0] + 2.0 / (1.0 + 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn adam_constant_gradient_limit() {
        let (g, gamma, eps, kappa) = (0.7, 0.3, 0.5, 1.7);
        let h = HyperParams::new(0.0, 0.6, eps, KappaMode::Constant(kappa));
        let mut s = state(0.0);
        for _ in 0..199 {
            adam_step(&mut s, &h, gamma, &[g]);
        }
        let before = s.theta[0];
        adam_step(&mut s, &h, gamma, &[g]);
        let step = before - s.theta[0];
        assert!((s.m[0] - g).abs() < 1e-9);
        assert!((s.second[0] - g * g).abs() < 1e-9);
        assert!((step - gamma * g / (eps + (kappa * g * g).sqrt())).abs() < 1e-9);
    }

    #[test]
    fn bias_correction_examples() {
        // n = 1: M_1 / (1 - beta) = G_1^2
        let mut s = state(0.0);
        bias_corrected_adam_step(&mut s, 0.0, 0.9, 1.0, 1.0, &[3.0]);
        assert!((s.second[0] / (1.0 - 0.9) - 9.0).abs() < 1e-12);
        // beta = 1/2, n = 2, G = 1, 1: M_2 = 0.75 and the corrected value is 1
        let mut s = state(0.0);
        bias_corrected_adam_step(&mut s, 0.0, 0.5, 1.0, 1.0, &[1.0]);
        bias_corrected_adam_step(&mut s, 0.0, 0.5, 1.0, 1.0, &[1.0]);
        assert_eq!(s.second[0], 0.75);
        assert_eq!(KappaMode::BiasCorrected.at(2, 0.5) * s.second[0], 1.0);
    }

    #[test]
    fn bias_correction_fades() {
        let gs: Vec<f64> = (0..100).map(|k| ((k * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let plain = HyperParams::new(0.5, 0.9, 1.0, KappaMode::Constant(1.0));
        let (mut a, mut b) = (state(0.2), state(0.2));
        let mut last = (0.0, 0.0);
        for g in &gs {
            let (ta, tb) = (a.theta[0], b.theta[0]);
            adam_step(&mut a, &plain, 0.1, &[*g]);
            bias_corrected_adam_step(&mut b, 0.5, 0.9, 1.0, 0.1, &[*g]);
            last = (a.theta[0] - ta, b.theta[0] - tb);
        }
        // beta^100 < 3e-5
        assert!((last.0 - last.1).abs() < 1e-9 + 3e-5 * last.0.abs());
    }

    #[test]
    fn reductions_to_sgd_and_sign_steps() {
        // kappa M forced to zero and epsilon = 1 with alpha = 0: exactly SGD
        let h = HyperParams::new(0.0, 0.5, 1.0, KappaMode::Constant(0.0));
        let (mut a, mut b) = (state(0.3), state(0.3));
        for g in [1.0, -2.0, 0.5, 4.0] {
            adam_step(&mut a, &h, 0.2, &[g]);
            sgd_step(&mut b, 0.2, &[g]);
            assert_eq!(a.theta, b.theta);
        }
        // alpha = beta = 0: |step| = gamma |G| / (eps + |G|) <= gamma
        let h = HyperParams::new(0.0, 0.0, 1e-3, KappaMode::Constant(1.0));
        let mut s = state(0.0);
        for g in [100.0, -3.0, 1e-4, 7.0] {
            let before = s.theta[0];
            adam_step(&mut s, &h, 0.5, &[g]);
            assert!((s.theta[0] - before).abs() <= 0.5);
        }
    }

    #[test]
    fn momentum_and_adagrad() {
        let mut s = state(1.0);
        momentum_step(&mut s, 0.5, 1.0, &[2.0]);
        assert_eq!((s.m[0], s.theta[0]), (1.0, 0.0));
        let mut s = state(0.0);
        adagrad_step(&mut s, 0.0, 1.0, &[3.0]);
        adagrad_step(&mut s, 0.0, 1.0, &[4.0]);
        assert_eq!(s.second[0], 25.0);
        assert!((s.theta[0] - (-1.0 - 0.8)).abs() < 1e-15);
    }
}
