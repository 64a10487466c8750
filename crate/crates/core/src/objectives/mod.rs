//! Stochastic gradient oracles and checks of the structural hypotheses the
//! non-convergence results place on them.

mod fd;
mod hypotheses;
mod quadratic;

pub use fd::central_difference;
pub use hypotheses::{
    check_sandwich, check_two_sided_slope, default_theta_grid, SandwichReport, SlopeReport,
};
pub use quadratic::{eigcoord_partial, grad_matrix_quadratic, grad_simple_quadratic, MatrixQuadratic};

use crate::bounds::SandwichConstants;
use crate::data::BoundedDistribution;

/// Central finite-difference step for gradient checks.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Hypothesis(#[from] crate::HypothesisError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// The loss families the experiments use.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleKind {
    /// `l(theta, x) = |theta - x|^2`, gradient `2 (theta - x)`.
    SimpleQuadratic { dim: usize },
    /// `l(theta, x) = |A theta - x|^2`.
    MatrixQuadratic(MatrixQuadratic),
    /// Coordinatewise `g_i = (theta_i - x_i)(eta + (rho - eta) 1[theta_i <= x_i])`,
    /// a gradient field with different slopes on either side of the data.
    CustomSandwich { dim: usize, eta: f64, rho: f64 },
}

/// A stochastic gradient `g(theta, x)` together with the sandwich constants
/// it declares, so bound formulas downstream see consistent constants.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientOracle {
    kind: OracleKind,
    declared: Option<SandwichConstants>,
}

impl GradientOracle {
    pub fn new(kind: OracleKind) -> Self {
        Self {
            kind,
            declared: None,
        }
    }

    pub fn simple_quadratic(dim: usize) -> Self {
        Self::new(OracleKind::SimpleQuadratic { dim })
    }

    pub fn matrix_quadratic(a: MatrixQuadratic) -> Self {
        Self::new(OracleKind::MatrixQuadratic(a))
    }

    pub fn custom_sandwich(dim: usize, eta: f64, rho: f64) -> Self {
        Self::new(OracleKind::CustomSandwich { dim, eta, rho })
    }

    pub fn with_declared(mut self, constants: SandwichConstants) -> Self {
        self.declared = Some(constants);
        self
    }

    pub fn declared(&self) -> Option<&SandwichConstants> {
        self.declared.as_ref()
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OracleKind::SimpleQuadratic { .. } => "simple_quadratic",
            OracleKind::MatrixQuadratic(_) => "matrix_quadratic",
            OracleKind::CustomSandwich { .. } => "custom_sandwich",
        }
    }

    pub fn param_dim(&self) -> usize {
        match &self.kind {
            OracleKind::SimpleQuadratic { dim } | OracleKind::CustomSandwich { dim, .. } => *dim,
            OracleKind::MatrixQuadratic(a) => a.cols(),
        }
    }

    pub fn data_dim(&self) -> usize {
        match &self.kind {
            OracleKind::SimpleQuadratic { dim } | OracleKind::CustomSandwich { dim, .. } => *dim,
            OracleKind::MatrixQuadratic(a) => a.rows(),
        }
    }

    /// Unchecked evaluation into `out`; the hot path of the simulators.
    #[inline]
    pub fn gradient_into(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        match &self.kind {
            OracleKind::SimpleQuadratic { .. } => {
                for ((o, t), x) in out.iter_mut().zip(theta).zip(x) {
                    *o = 2.0 * (t - x);
                }
            }
            OracleKind::MatrixQuadratic(a) => a.gradient_into(theta, x, out),
            OracleKind::CustomSandwich { eta, rho, .. } => {
                for ((o, t), x) in out.iter_mut().zip(theta).zip(x) {
                    let slope = if t <= x { *rho } else { *eta };
                    *o = (t - x) * slope;
                }
            }
        }
    }

    pub fn gradient(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.check_dims(theta, x)?;
        let mut out = vec![0.0; self.param_dim()];
        self.gradient_into(theta, x, &mut out);
        Ok(out)
    }

    /// Coordinate `i` of the gradient.
    pub fn coordinate(&self, i: usize) -> impl Fn(&[f64], &[f64]) -> f64 + '_ {
        move |theta, x| {
            let mut out = vec![0.0; self.param_dim()];
            self.gradient_into(theta, x, &mut out);
            out[i]
        }
    }

    /// The loss, when the oracle is a gradient field of one.
    pub fn loss(&self, theta: &[f64], x: &[f64]) -> Option<f64> {
        match &self.kind {
            OracleKind::SimpleQuadratic { .. } => {
                Some(theta.iter().zip(x).map(|(t, x)| (t - x) * (t - x)).sum())
            }
            OracleKind::MatrixQuadratic(a) => Some(a.loss(theta, x)),
            OracleKind::CustomSandwich { eta, rho, .. } => Some(
                theta
                    .iter()
                    .zip(x)
                    .map(|(t, x)| {
                        let slope = if t <= x { *rho } else { *eta };
                        0.5 * slope * (t - x) * (t - x)
                    })
                    .sum(),
            ),
        }
    }

    pub fn check_dims(&self, theta: &[f64], x: &[f64]) -> Result<(), OracleError> {
        if theta.len() != self.param_dim() || x.len() != self.data_dim() {
            return Err(OracleError::Dimension(format!(
                "{} expects theta in R^{} and x in R^{}, got {} and {}",
                self.name(),
                self.param_dim(),
                self.data_dim(),
                theta.len(),
                x.len()
            )));
        }
        Ok(())
    }

    /// Sandwich constants the oracle satisfies on data in `[a, b]^d`.
    ///
    /// For the matrix quadratic this needs eigen data and covers only the
    /// eigen coordinate.
    pub fn natural_sandwich(&self, dist: &BoundedDistribution) -> Result<SandwichConstants, OracleError> {
        let c = 1f64.max(dist.sup_abs());
        let sc = match &self.kind {
            OracleKind::SimpleQuadratic { .. } => SandwichConstants::new(2.0, 2.0, c),
            OracleKind::CustomSandwich { eta, rho, .. } => SandwichConstants::new(*eta, *rho, c),
            OracleKind::MatrixQuadratic(a) => {
                let e = a.eigen().ok_or_else(|| {
                    OracleError::Unsupported("matrix_quadratic without eigen data".into())
                })?;
                let av = a.column(e.coordinate);
                let norm = av.iter().map(|v| v * v).sum::<f64>().sqrt();
                let offset = norm * (a.rows() as f64).sqrt() * dist.sup_abs() / e.lambda;
                SandwichConstants::new(2.0 * e.lambda, 2.0 * e.lambda, c.max(offset))
            }
        };
        Ok(sc?)
    }

    /// `inf_theta Var(g_i(theta, X))` for `X ~ dist`.
    pub fn inf_variance(&self, i: usize, dist: &BoundedDistribution) -> Result<f64, OracleError> {
        if i >= self.param_dim() || dist.dim() != self.data_dim() {
            return Err(OracleError::Dimension(format!(
                "coordinate {i} / data dimension {} do not fit {}",
                dist.dim(),
                self.name()
            )));
        }
        let unit = |j: usize, n: usize| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        };
        match &self.kind {
            // the gradient is affine in x with theta-free slope
            OracleKind::SimpleQuadratic { dim } => Ok(4.0 * dist.linear_variance(&unit(i, *dim))),
            OracleKind::MatrixQuadratic(a) => Ok(4.0 * dist.linear_variance(&a.column(i))),
            OracleKind::CustomSandwich { dim, eta, rho } => {
                let law = dist.linear_law(&unit(i, *dim)).ok_or_else(|| {
                    OracleError::Unsupported("custom_sandwich variance needs discrete data".into())
                })?;
                Ok(piecewise_inf_variance(&law.values, &law.probs, *eta, *rho))
            }
        }
    }
}

/// Exact `inf_t Var((t - X) s(t, X))` with `s = rho` for `t <= X`, `eta`
/// otherwise. The variance is a quadratic in `t` between consecutive atoms,
/// so the minimum is at an atom or at a piece's vertex.
fn piecewise_inf_variance(values: &[f64], probs: &[f64], eta: f64, rho: f64) -> f64 {
    let var_at = |t: f64| {
        let mean: f64 = values
            .iter()
            .zip(probs)
            .map(|(x, p)| p * (t - x) * if t <= *x { rho } else { eta })
            .sum();
        values
            .iter()
            .zip(probs)
            .map(|(x, p)| {
                let g = (t - x) * if t <= *x { rho } else { eta };
                p * (g - mean) * (g - mean)
            })
            .sum::<f64>()
    };
    let mut knots: Vec<f64> = values.to_vec();
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    let mut candidates = knots.clone();
    candidates.push(knots[0] - 1.0);
    candidates.push(knots[knots.len() - 1] + 1.0);
    for w in knots.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let (mut a2, mut s1, mut s1x, mut s2x) = (0.0, 0.0, 0.0, 0.0);
        for (x, p) in values.iter().zip(probs) {
            let s = if mid <= *x { rho } else { eta };
            a2 += p * s * s;
            s1 += p * s;
            s1x += p * s * x;
            s2x += p * s * s * x;
        }
        let quad = a2 - s1 * s1;
        if quad > 0.0 {
            let lin = -2.0 * s2x + 2.0 * s1 * s1x;
            let vertex = -lin / (2.0 * quad);
            candidates.push(vertex.clamp(w[0], w[1]));
        }
    }
    candidates.into_iter().map(var_at).fold(f64::INFINITY, f64::min)
}
