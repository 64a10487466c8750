use super::OracleError;
use crate::HypothesisError;

/// Tolerance on the eigen relation `A^T A v = lambda v`.
pub const EIGEN_TOL: f64 = 1e-10;

/// `2 (theta - x)`, the gradient of `|theta - x|^2`.
pub fn grad_simple_quadratic(theta: &[f64], x: &[f64]) -> Result<Vec<f64>, OracleError> {
    if theta.len() != x.len() {
        return Err(OracleError::Dimension(format!(
            "theta has {} entries, x has {}",
            theta.len(),
            x.len()
        )));
    }
    Ok(theta.iter().zip(x).map(|(t, x)| 2.0 * (t - x)).collect())
}

/// `2 A^T (A theta - x)`, the gradient of `|A theta - x|^2`.
pub fn grad_matrix_quadratic(
    a: &MatrixQuadratic,
    theta: &[f64],
    x: &[f64],
) -> Result<Vec<f64>, OracleError> {
    if theta.len() != a.cols() || x.len() != a.rows() {
        return Err(OracleError::Dimension(format!(
            "A is {}x{}, theta has {} entries, x has {}",
            a.rows(),
            a.cols(),
            theta.len(),
            x.len()
        )));
    }
    let mut out = vec![0.0; a.cols()];
    a.gradient_into(theta, x, &mut out);
    Ok(out)
}

/// `2 lambda theta_i - 2 <A v, x>`: the eigen-coordinate partial derivative
/// of `|A theta - x|^2`, valid when `v = e_i` and `A^T A v = lambda v`.
pub fn eigcoord_partial(a: &MatrixQuadratic, theta: &[f64], x: &[f64]) -> Result<f64, OracleError> {
    let e = a.eigen().ok_or_else(|| {
        HypothesisError::new("A^T A v = lambda v", "matrix carries no eigen data")
    })?;
    if theta.len() != a.cols() || x.len() != a.rows() {
        return Err(OracleError::Dimension(format!(
            "A is {}x{}, theta has {} entries, x has {}",
            a.rows(),
            a.cols(),
            theta.len(),
            x.len()
        )));
    }
    let av_x: f64 = (0..a.rows()).map(|r| a.at(r, e.coordinate) * x[r]).sum();
    Ok(2.0 * e.lambda * theta[e.coordinate] - 2.0 * av_x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub coordinate: usize,
    pub lambda: f64,
}

/// A `rows x cols` matrix (row-major) defining `|A theta - x|^2`, optionally
/// with a coordinate eigenvector of `A^T A`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixQuadratic {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    eigen: Option<EigenData>,
}

impl MatrixQuadratic {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, OracleError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(OracleError::Dimension(format!(
                "{} entries cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::Dimension("matrix entries must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            data,
            eigen: None,
        })
    }

    /// Declares `v` as an eigenvector of `A^T A` with eigenvalue `lambda`.
    /// `v` must select a coordinate (`<x, v> = x_i` for all `x`), i.e. be a
    /// standard basis vector.
    pub fn with_eigen(mut self, v: &[f64], lambda: f64) -> Result<Self, OracleError> {
        if v.len() != self.cols {
            return Err(OracleError::Dimension(format!(
                "v has {} entries, A has {} columns",
                v.len(),
                self.cols
            )));
        }
        let ones: Vec<usize> = (0..v.len()).filter(|&j| v[j] == 1.0).collect();
        if ones.len() != 1 || v.iter().filter(|x| **x != 0.0).count() != 1 {
            return Err(HypothesisError::new(
                "<x, v> = x_i",
                "v is not a standard basis vector",
            )
            .into());
        }
        if !(lambda > 0.0) {
            return Err(HypothesisError::new("lambda > 0", format!("lambda = {lambda}")).into());
        }
        let i = ones[0];
        let residual = (0..self.cols)
            .map(|j| {
                let ata = (0..self.rows).map(|r| self.at(r, j) * self.at(r, i)).sum::<f64>();
                let r = ata - lambda * v[j];
                r * r
            })
            .sum::<f64>()
            .sqrt();
        if residual > EIGEN_TOL {
            return Err(HypothesisError::new(
                "A^T A v = lambda v",
                format!("residual {residual:e} exceeds {EIGEN_TOL:e}"),
            )
            .into());
        }
        self.eigen = Some(EigenData {
            coordinate: i,
            lambda,
        });
        Ok(self)
    }

    /// The block matrix `diag(mu, B)`; `e_1` is an eigenvector of `A^T A`
    /// with eigenvalue `mu^2`.
    pub fn block(mu: f64, b_rows: usize, b_cols: usize, b: &[f64]) -> Result<Self, OracleError> {
        if b.len() != b_rows * b_cols {
            return Err(OracleError::Dimension(format!(
                "{} entries cannot form a {b_rows}x{b_cols} block",
                b.len()
            )));
        }
        let (rows, cols) = (b_rows + 1, b_cols + 1);
        let mut data = vec![0.0; rows * cols];
        data[0] = mu;
        for r in 0..b_rows {
            for c in 0..b_cols {
                data[(r + 1) * cols + c + 1] = b[r * b_cols + c];
            }
        }
        let mut e1 = vec![0.0; cols];
        e1[0] = 1.0;
        Self::new(rows, cols, data)?.with_eigen(&e1, mu * mu)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn eigen(&self) -> Option<&EigenData> {
        self.eigen.as_ref()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.at(r, c)).collect()
    }

    pub fn loss(&self, theta: &[f64], x: &[f64]) -> f64 {
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                let res = row.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>() - x[r];
                res * res
            })
            .sum()
    }

    #[inline]
    pub fn gradient_into(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let res = row.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>() - x[r];
            for (o, a) in out.iter_mut().zip(row) {
                *o += 2.0 * a * res;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RngStream;
    use crate::objectives::{central_difference, FD_STEP};

    #[test]
    fn identity_reduces_to_simple() {
        let a = MatrixQuadratic::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let theta = [0.3, -1.2];
        let x = [1.0, 0.5];
        assert_eq!(
            grad_matrix_quadratic(&a, &theta, &x).unwrap(),
            grad_simple_quadratic(&theta, &x).unwrap()
        );
    }

    #[test]
    fn zero_matrix_gives_zero() {
        let a = MatrixQuadratic::new(3, 2, vec![0.0; 6]).unwrap();
        assert_eq!(grad_matrix_quadratic(&a, &[5.0, -4.0], &[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn random_matrix_matches_finite_difference() {
        let mut rng = RngStream::new(21, 0);
        for _ in 0..20 {
            let a = MatrixQuadratic::new(3, 2, (0..6).map(|_| 4.0 * rng.unit() - 2.0).collect()).unwrap();
            let theta: Vec<f64> = (0..2).map(|_| 4.0 * rng.unit() - 2.0).collect();
            let x: Vec<f64> = (0..3).map(|_| 2.0 * rng.unit() - 1.0).collect();
            let g = grad_matrix_quadratic(&a, &theta, &x).unwrap();
            let fd = central_difference(|t| a.loss(t, &x), &theta, FD_STEP);
            for (g, f) in g.iter().zip(&fd) {
                assert!((g - f).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn eigen_coordinate_identity_matrix() {
        let a = MatrixQuadratic::new(2, 2, vec![1.0, 0.0, 0.0, 1.0])
            .unwrap()
            .with_eigen(&[1.0, 0.0], 1.0)
            .unwrap();
        assert_eq!(eigcoord_partial(&a, &[3.0, 0.0], &[1.0, 2.0]).unwrap(), 4.0);
        assert_eq!(eigcoord_partial(&a, &[3.0, 7.0], &[0.0, 0.0]).unwrap(), 6.0);
    }

    #[test]
    fn block_matrix_eigen_coordinate() {
        let a = MatrixQuadratic::block(1.5, 2, 2, &[0.3, -1.0, 2.0, 0.7]).unwrap();
        assert_eq!(a.eigen().unwrap().lambda, 2.25);
        let theta = [0.4, -0.2, 1.1];
        let x = [0.5, -0.5, 1.0];
        let full = grad_matrix_quadratic(&a, &theta, &x).unwrap();
        assert!((eigcoord_partial(&a, &theta, &x).unwrap() - full[0]).abs() < 1e-10);
    }

    #[test]
    fn eigen_preconditions_enforced() {
        let a = MatrixQuadratic::new(2, 2, vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        // A^T A e1 = (1, 1) is not parallel to e1
        assert!(matches!(a.clone().with_eigen(&[1.0, 0.0], 1.0), Err(OracleError::Hypothesis(_))));
        assert!(a.clone().with_eigen(&[0.6, 0.8], 1.0).is_err());
        let id = MatrixQuadratic::new(1, 1, vec![1.0]).unwrap();
        assert!(id.with_eigen(&[1.0], -1.0).is_err());
        let plain = MatrixQuadratic::new(1, 1, vec![1.0]).unwrap();
        assert!(eigcoord_partial(&plain, &[1.0], &[1.0]).is_err());
    }
}
