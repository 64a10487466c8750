use crate::bounds::SandwichConstants;

/// Grid points per tested coordinate.
pub const GRID_POINTS: usize = 401;

/// Outcome of a sandwich-condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub holds: bool,
    /// Smallest of `g - lower` and `upper - g` over all tested points;
    /// negative when violated.
    pub worst_margin: f64,
    pub worst_theta: Vec<f64>,
    pub worst_x: Vec<f64>,
    pub evaluated: usize,
}

/// Outcome of a two-sided slope check.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    pub holds: bool,
    pub worst_margin: f64,
    /// `rho (x_i - c) <= g <= rho (x_i + c)` at `theta_i = x_i`.
    pub pointwise_holds: bool,
    /// Set when both conditions passed and the data satisfy `|x_i| <= c`:
    /// the sandwich check was then run on the same grid and passed.
    pub sandwich_implied: Option<bool>,
    pub evaluated: usize,
}

fn tolerance(g: f64) -> f64 {
    1e-12 * (1.0 + g.abs())
}

/// `GRID_POINTS` equally spaced values on `[-5c, 5c]` for coordinate `i`
/// plus the breakpoints `+-c`, all other coordinates taken from `base`.
pub fn default_theta_grid(base: &[f64], i: usize, c: f64) -> Vec<Vec<f64>> {
    let mut values: Vec<f64> = (0..GRID_POINTS)
        .map(|k| -5.0 * c + 10.0 * c * k as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    values.extend([-c, c]);
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    values
        .into_iter()
        .map(|t| {
            let mut theta = base.to_vec();
            theta[i] = t;
            theta
        })
        .collect()
}

/// Checks
/// `(t_i - c)(eta + (rho - eta) 1[t_i <= c]) <= g(t, x) <= (t_i + c)(eta + (rho - eta) 1[t_i >= -c])`
/// on every pair of `thetas x samples`.
pub fn check_sandwich<G>(
    g: G,
    i: usize,
    constants: &SandwichConstants,
    thetas: &[Vec<f64>],
    samples: &[Vec<f64>],
) -> SandwichReport
where
    G: Fn(&[f64], &[f64]) -> f64,
{
    let mut report = SandwichReport {
        holds: true,
        worst_margin: f64::INFINITY,
        worst_theta: Vec::new(),
        worst_x: Vec::new(),
        evaluated: 0,
    };
    for theta in thetas {
        let lower = constants.lower(theta[i]);
        let upper = constants.upper(theta[i]);
        for x in samples {
            let v = g(theta, x);
            let margin = (v - lower).min(upper - v);
            report.evaluated += 1;
            if margin < -tolerance(v) || !v.is_finite() {
                report.holds = false;
            }
            if margin < report.worst_margin || !v.is_finite() {
                report.worst_margin = if v.is_finite() { margin } else { f64::NEG_INFINITY };
                report.worst_theta = theta.clone();
                report.worst_x = x.clone();
            }
        }
    }
    report
}

/// Checks `eta |t_i - x_i|^2 <= (t_i - x_i) g(t, x) <= rho |t_i - x_i|^2` on
/// the grid, and the pointwise condition `|g(t, x) - rho x_i| <= rho c` at
/// points with `t_i = x_i`. When both pass and every sample has
/// `|x_i| <= c`, the sandwich condition follows; that implication is
/// re-checked here and a failure panics, since it would mean the checkers
/// disagree with each other.
pub fn check_two_sided_slope<G>(
    g: G,
    i: usize,
    constants: &SandwichConstants,
    thetas: &[Vec<f64>],
    samples: &[Vec<f64>],
) -> SlopeReport
where
    G: Fn(&[f64], &[f64]) -> f64,
{
    let (eta, rho, c) = (constants.eta, constants.rho, constants.c);
    let mut holds = true;
    let mut worst = f64::INFINITY;
    let mut evaluated = 0;
    for theta in thetas {
        for x in samples {
            let d = theta[i] - x[i];
            let v = g(theta, x);
            let prod = d * v;
            let margin = (prod - eta * d * d).min(rho * d * d - prod);
            evaluated += 1;
            if margin < -tolerance(prod) || !v.is_finite() {
                holds = false;
            }
            worst = worst.min(margin);
        }
    }
    let mut pointwise_holds = true;
    for theta in thetas {
        for x in samples {
            let mut at = theta.clone();
            at[i] = x[i];
            let v = g(&at, x);
            if (v - rho * x[i]).abs() > rho * c + tolerance(v) {
                pointwise_holds = false;
            }
        }
    }
    let data_inside = samples.iter().all(|x| x[i].abs() <= c);
    let sandwich_implied = (holds && pointwise_holds && data_inside).then(|| {
        let s = check_sandwich(&g, i, constants, thetas, samples);
        assert!(
            s.holds,
            "slope conditions passed but the sandwich failed with margin {}",
            s.worst_margin
        );
        s.holds
    });
    SlopeReport {
        holds,
        worst_margin: worst,
        pointwise_holds,
        sandwich_implied,
        evaluated,
    }
}
