//! Step engines for SGD, momentum SGD, Adam (with a general second-moment
//! scaling `kappa(n, i)`, covering RMSprop and bias-corrected Adam) and
//! AdaGrad, plus trajectory simulation.

mod normalized;
mod step;
mod summed;
mod trajectory;

pub use normalized::normalized_rates;
pub use step::{adagrad_step, adam_step, bias_corrected_adam_step, momentum_step, sgd_step};
pub use summed::{moments_recursive, moments_summed_form};
pub use trajectory::{
    run_many, run_trajectory, RecordPolicy, Simulation, StepRow, TrajectoryRecord,
};

use crate::HypothesisError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimError {
    #[error("trajectory {trajectory} diverged at step {step}: non-finite {quantity}")]
    Divergence {
        trajectory: u64,
        step: u64,
        quantity: &'static str,
    },
    #[error("invalid simulation input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
}

/// Which recursion drives the iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    /// `theta_n = theta_{n-1} - gamma_n G_n`.
    Sgd,
    /// `m_n = alpha m_{n-1} + (1 - alpha) G_n`, `theta_n = theta_{n-1} - gamma_n m_n`.
    Momentum,
    /// Adam with second-moment scaling `kappa(n, i)`.
    Adam,
    /// Unbounded accumulator `M_n = M_{n-1} + G_n^2`; simulation only.
    AdaGrad,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::Momentum => "momentum",
            Self::Adam => "adam",
            Self::AdaGrad => "adagrad",
        }
    }
}

/// The scaling `kappa(n, i)` applied to the second moment inside the
/// square root of the Adam denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaMode {
    Constant(f64),
    /// `kappa(n, i) = (1 - beta^n)^{-1}`, the usual second-moment bias
    /// correction.
    BiasCorrected,
}

/// `base^n` for step indices.
#[inline]
pub(crate) fn pow_n(base: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        base.powi(n as i32)
    } else {
        base.powf(n as f64)
    }
}

impl KappaMode {
    #[inline]
    pub fn at(&self, n: u64, beta: f64) -> f64 {
        match *self {
            Self::Constant(k) => k,
            Self::BiasCorrected => 1.0 / (1.0 - pow_n(beta, n)),
        }
    }

    /// `inf_{n >= 1} kappa(n, i)`.
    pub fn infimum(&self, _beta: f64) -> f64 {
        match *self {
            Self::Constant(k) => k,
            Self::BiasCorrected => 1.0,
        }
    }

    /// `sup_{n >= 1} kappa(n, i)`.
    pub fn supremum(&self, beta: f64) -> f64 {
        match *self {
            Self::Constant(k) => k,
            Self::BiasCorrected => 1.0 / (1.0 - beta),
        }
    }
}

/// Moment-decay parameters of the adaptive methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub kappa: KappaMode,
    /// Divide `m_n` by `1 - alpha^n` before stepping. Never bound-certified.
    pub first_moment_correction: bool,
}

impl HyperParams {
    pub fn new(alpha: f64, beta: f64, epsilon: f64, kappa: KappaMode) -> Self {
        Self {
            alpha,
            beta,
            epsilon,
            kappa,
            first_moment_correction: false,
        }
    }

    /// Hypotheses shared by every bound on adaptive methods: `alpha in [0, 1)`,
    /// `alpha^2 < beta < 1`, `epsilon > 0`, and, when `c` is given, `kappa`
    /// confined to `[1/c, c]`.
    pub fn validate(&self, c: Option<f64>) -> Result<(), HypothesisError> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(HypothesisError::new(
                "0 <= alpha < 1",
                format!("alpha = {}", self.alpha),
            ));
        }
        if !(self.alpha * self.alpha < self.beta && self.beta < 1.0) {
            return Err(HypothesisError::new(
                "alpha^2 < beta < 1",
                format!("alpha = {}, beta = {}", self.alpha, self.beta),
            ));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(HypothesisError::new(
                "epsilon > 0",
                format!("epsilon = {}", self.epsilon),
            ));
        }
        if let Some(c) = c {
            let (lo, hi) = (self.kappa.infimum(self.beta), self.kappa.supremum(self.beta));
            if !(lo >= 1.0 / c && hi <= c) {
                return Err(HypothesisError::new(
                    "kappa(n, i) in [1/c, c]",
                    format!("kappa ranges over [{lo}, {hi}] but c = {c}"),
                ));
            }
        }
        Ok(())
    }

    /// `max{[(1-beta)^{-1} M_0]^{1/2}, (1-alpha)^{-1} |m_0|} <= rho (|theta_0| + c)`
    /// for coordinate values `theta0`, `m0`, `big_m0`.
    pub fn validate_initial_moments(
        &self,
        theta0: f64,
        m0: f64,
        big_m0: f64,
        rho: f64,
        c: f64,
    ) -> Result<(), HypothesisError> {
        if big_m0 < 0.0 {
            return Err(HypothesisError::new("M_0 >= 0", format!("M_0 = {big_m0}")));
        }
        let lhs = (big_m0 / (1.0 - self.beta))
            .sqrt()
            .max(m0.abs() / (1.0 - self.alpha));
        let rhs = rho * (theta0.abs() + c);
        if lhs > rhs {
            return Err(HypothesisError::new(
                "max{((1-beta)^-1 M_0)^(1/2), (1-alpha)^-1 |m_0|} <= rho (|theta_0| + c)",
                format!("{lhs} > {rhs}"),
            ));
        }
        Ok(())
    }
}

/// Learning rates `gamma_n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSchedule {
    Constant(f64),
    /// `gamma_n = values[n - 1]`; the last value repeats forever.
    Table(Vec<f64>),
    /// `gamma_0 / (1 + rate n)`.
    Inverse { gamma0: f64, rate: f64 },
    /// `gamma_0 / sqrt(n)`.
    InverseSqrt { gamma0: f64 },
}

impl RateSchedule {
    #[inline]
    pub fn at(&self, n: u64) -> f64 {
        match self {
            Self::Constant(g) => *g,
            Self::Table(v) => v[(n.max(1) as usize - 1).min(v.len() - 1)],
            Self::Inverse { gamma0, rate } => gamma0 / (1.0 + rate * n as f64),
            Self::InverseSqrt { gamma0 } => gamma0 / (n.max(1) as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let ok = match self {
            Self::Constant(g) => g.is_finite() && *g >= 0.0,
            Self::Table(v) => !v.is_empty() && v.iter().all(|g| g.is_finite() && *g >= 0.0),
            Self::Inverse { gamma0, rate } => {
                gamma0.is_finite() && *gamma0 >= 0.0 && rate.is_finite() && *rate >= 0.0
            }
            Self::InverseSqrt { gamma0 } => gamma0.is_finite() && *gamma0 >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(OptimError::Invalid(format!(
                "learning rates must be finite and >= 0: {self:?}"
            )))
        }
    }

    /// `sup_{n >= 1} gamma_n`.
    pub fn sup(&self) -> f64 {
        match self {
            Self::Constant(g) => *g,
            Self::Table(v) => v.iter().copied().fold(0.0, f64::max),
            Self::Inverse { gamma0, rate } => gamma0 / (1.0 + rate),
            Self::InverseSqrt { gamma0 } => *gamma0,
        }
    }

    /// Maximum over the finite horizon `1..=steps`.
    pub fn max_over(&self, steps: u64) -> f64 {
        match self {
            Self::Table(v) => v
                .iter()
                .take(steps.max(1) as usize)
                .copied()
                .fold(0.0, f64::max),
            _ => self.sup(),
        }
    }

    pub fn liminf(&self) -> f64 {
        match self {
            Self::Constant(g) => *g,
            Self::Table(v) => *v.last().unwrap(),
            Self::Inverse { gamma0, rate } => {
                if *rate == 0.0 {
                    *gamma0
                } else {
                    0.0
                }
            }
            Self::InverseSqrt { .. } => 0.0,
        }
    }

    pub fn limsup(&self) -> f64 {
        self.liminf()
    }
}

/// Mini-batch sizes `J_n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum BatchSchedule {
    Constant(usize),
    /// `J_n = values[n - 1]`; the last value repeats forever.
    Table(Vec<usize>),
}

impl BatchSchedule {
    #[inline]
    pub fn at(&self, n: u64) -> usize {
        match self {
            Self::Constant(j) => *j,
            Self::Table(v) => v[(n.max(1) as usize - 1).min(v.len() - 1)],
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let ok = match self {
            Self::Constant(j) => *j >= 1,
            Self::Table(v) => !v.is_empty() && v.iter().all(|j| *j >= 1),
        };
        if ok {
            Ok(())
        } else {
            Err(OptimError::Invalid("batch sizes must be >= 1".into()))
        }
    }

    pub fn limsup(&self) -> usize {
        match self {
            Self::Constant(j) => *j,
            Self::Table(v) => *v.last().unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub gamma: RateSchedule,
    pub batch: BatchSchedule,
}

impl Schedule {
    pub fn constant(gamma: f64, batch: usize) -> Self {
        Self {
            gamma: RateSchedule::Constant(gamma),
            batch: BatchSchedule::Constant(batch),
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        self.gamma.validate()?;
        self.batch.validate()
    }
}

/// `(n, theta_n, m_n, M_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub n: u64,
    pub theta: Vec<f64>,
    pub m: Vec<f64>,
    pub second: Vec<f64>,
}

impl OptimizerState {
    pub fn new(theta: Vec<f64>) -> Self {
        let p = theta.len();
        Self {
            n: 0,
            theta,
            m: vec![0.0; p],
            second: vec![0.0; p],
        }
    }

    pub fn with_moments(theta: Vec<f64>, m: Vec<f64>, second: Vec<f64>) -> Result<Self, OptimError> {
        if m.len() != theta.len() || second.len() != theta.len() {
            return Err(OptimError::Invalid(
                "theta, m and M must have equal length".into(),
            ));
        }
        if second.iter().any(|v| !(*v >= 0.0)) {
            return Err(OptimError::Invalid("M_0 must be >= 0".into()));
        }
        Ok(Self {
            n: 0,
            theta,
            m,
            second,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyper_validation_names_hypothesis() {
        let h = HyperParams::new(0.9, 0.8, 1e-8, KappaMode::Constant(1.0));
        let e = h.validate(None).unwrap_err();
        assert_eq!(e.name, "alpha^2 < beta < 1");
        assert!(e.to_string().contains("alpha^2 < beta < 1"));
        let h = HyperParams::new(0.9, 0.99, 0.0, KappaMode::Constant(1.0));
        assert_eq!(h.validate(None).unwrap_err().name, "epsilon > 0");
        let h = HyperParams::new(0.9, 0.99, 0.1, KappaMode::Constant(3.0));
        assert_eq!(h.validate(Some(2.0)).unwrap_err().name, "kappa(n, i) in [1/c, c]");
        assert!(h.validate(Some(3.0)).is_ok());
    }

    #[test]
    fn bias_corrected_kappa_needs_large_offset() {
        let h = HyperParams::new(0.0, 0.5, 1.0, KappaMode::BiasCorrected);
        assert!(h.validate(Some(1.5)).is_err());
        assert!(h.validate(Some(2.0)).is_ok());
        assert_eq!(h.kappa.at(1, 0.5), 2.0);
        assert_eq!(h.kappa.at(2, 0.5), 1.0 / 0.75);
    }

    #[test]
    fn initial_moment_condition() {
        let h = HyperParams::new(0.5, 0.5, 1.0, KappaMode::Constant(1.0));
        assert!(h.validate_initial_moments(0.0, 0.0, 0.0, 2.0, 1.0).is_ok());
        // (1 - alpha)^{-1} |m_0| = 6 > 2 (0 + 1)
        let e = h.validate_initial_moments(0.0, 3.0, 0.0, 2.0, 1.0).unwrap_err();
        assert!(e.name.contains("rho (|theta_0| + c)"));
        // ((1 - beta)^{-1} M_0)^{1/2} = 4 > 2
        assert!(h.validate_initial_moments(0.0, 0.0, 8.0, 2.0, 1.0).is_err());
        assert!(h.validate_initial_moments(1.0, 0.0, 8.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn schedules() {
        let t = RateSchedule::Table(vec![0.5, 0.25]);
        assert_eq!((t.at(1), t.at(2), t.at(100)), (0.5, 0.25, 0.25));
        assert_eq!((t.sup(), t.liminf()), (0.5, 0.25));
        let inv = RateSchedule::Inverse { gamma0: 1.0, rate: 1.0 };
        assert_eq!((inv.at(1), inv.sup(), inv.liminf()), (0.5, 0.5, 0.0));
        assert!(RateSchedule::Constant(-1.0).validate().is_err());
        assert!(BatchSchedule::Constant(0).validate().is_err());
        assert_eq!(BatchSchedule::Table(vec![4, 2]).at(7), 2);
    }
}
