//! Monte Carlo estimators over trajectories, each with a standard error.

use super::config::XiMode;
use super::ExperimentError;
use crate::bounds::LowerBound;
use crate::data::BoundedDistribution;
use crate::optimizers::TrajectoryRecord;
use crate::prob_lab::cauchy_gap;

/// Sample mean with its standard error `s / sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = if samples.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
        Self {
            mean,
            stderr: sd / n.sqrt(),
        }
    }

    /// `(sqrt(mean), stderr / (2 sqrt(mean)))`, the delta-method estimate of
    /// the root.
    pub fn root(&self) -> (f64, f64) {
        let r = self.mean.max(0.0).sqrt();
        if r > 0.0 {
            (r, self.stderr / (2.0 * r))
        } else {
            (0.0, 0.0)
        }
    }
}

fn probe_rows(records: &[TrajectoryRecord], n: u64) -> Result<Vec<&[f64]>, ExperimentError> {
    if records.len() < 2 {
        return Err(ExperimentError::Config(
            "at least 2 trajectories are needed".into(),
        ));
    }
    records
        .iter()
        .map(|r| {
            r.row_at(n).map(|row| row.theta.as_slice()).ok_or_else(|| {
                ExperimentError::Config(format!(
                    "step {n} was not recorded for trajectory {}",
                    r.trajectory_id
                ))
            })
        })
        .collect()
}

/// Per coordinate, `mean over trajectories of (theta_n^{(i)} - xi^{(i)})^2`.
/// For `BestConstant`, `xi^{(i)}` is the sample mean of `theta_n^{(i)}`, the
/// constant minimizing the estimate.
pub fn estimate_second_moment_distance(
    records: &[TrajectoryRecord],
    xi: &XiMode,
    dist: &BoundedDistribution,
    n: u64,
) -> Result<Vec<Estimate>, ExperimentError> {
    let rows = probe_rows(records, n)?;
    let p = rows[0].len();
    (0..p)
        .map(|i| {
            let values: Vec<f64> = rows.iter().map(|t| t[i]).collect();
            let center = match xi {
                XiMode::Zero => 0.0,
                XiMode::DataMean => dist.mean()[i],
                XiMode::BestConstant => values.iter().sum::<f64>() / values.len() as f64,
                XiMode::Constant(v) => v[i],
            };
            let sq: Vec<f64> = values.iter().map(|v| (v - center) * (v - center)).collect();
            Ok(Estimate::from_samples(&sq))
        })
        .collect()
}

/// Per coordinate, `mean over trajectories of (theta_n^{(i)} - theta_m^{(i)})^2`.
pub fn estimate_pairwise_gap(
    records: &[TrajectoryRecord],
    n: u64,
    m: u64,
) -> Result<Vec<Estimate>, ExperimentError> {
    if n == m {
        return Err(ExperimentError::Config(format!(
            "pairwise gap needs distinct steps, got ({n}, {m})"
        )));
    }
    let a = probe_rows(records, n)?;
    let b = probe_rows(records, m)?;
    let p = a[0].len();
    Ok((0..p)
        .map(|i| {
            let sq: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x[i] - y[i]).powi(2)).collect();
            Estimate::from_samples(&sq)
        })
        .collect())
}

/// Cauchy-gap surrogate for one coordinate over the probe steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyEstimate {
    pub coordinate: usize,
    /// `1/2 max_k min_{pairs >= k} (E[(theta_n - theta_m)^2])^{1/2}` over probes.
    pub value: f64,
    /// Delta-method error at the attaining pair.
    pub stderr: f64,
    pub pair: (u64, u64),
}

/// `gaps[(a, b)]` holds the estimate for probes `a < b` (indices into `probes`).
pub fn cauchy_surrogate(
    probes: &[u64],
    gaps: &[((usize, usize), Vec<Estimate>)],
    coordinate: usize,
) -> Result<CauchyEstimate, ExperimentError> {
    let k = probes.len();
    let mut dist = vec![vec![0.0; k]; k];
    let mut se = vec![vec![0.0; k]; k];
    for ((a, b), est) in gaps {
        let (r, s) = est[coordinate].root();
        dist[*a][*b] = r;
        dist[*b][*a] = r;
        se[*a][*b] = s;
        se[*b][*a] = s;
    }
    let value = cauchy_gap(|n, m| dist[n][m], 0, k - 1)
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    // the attaining pair: a pair whose half-distance equals the surrogate
    let mut pair = (0, 1);
    'outer: for a in 0..k {
        for b in a + 1..k {
            if 0.5 * dist[a][b] == value {
                pair = (a, b);
                break 'outer;
            }
        }
    }
    Ok(CauchyEstimate {
        coordinate,
        value,
        stderr: 0.5 * se[pair.0][pair.1],
        pair: (probes[pair.0], probes[pair.1]),
    })
}

/// One measured root distance compared against the lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictRow {
    pub candidate: String,
    pub coordinate: usize,
    pub step: Option<u64>,
    pub root: f64,
    pub root_stderr: f64,
    /// `root - 2 stderr - bound`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundVerdict {
    pub d: f64,
    pub inf_variance: Vec<f64>,
    pub bounds: Vec<LowerBound>,
    pub rows: Vec<VerdictRow>,
    pub pass: bool,
    /// Smallest `root / bound` over rows (infinite for vacuous bounds).
    pub slack: f64,
    pub flags: Vec<String>,
}

/// PASS iff every row satisfies `root - 2 stderr >= bound` for its coordinate.
pub fn compare_to_lower_bound(
    d: f64,
    inf_variance: Vec<f64>,
    bounds: Vec<LowerBound>,
    rows: Vec<VerdictRow>,
) -> LowerBoundVerdict {
    let pass = !rows.is_empty() && rows.iter().all(|r| r.margin >= 0.0);
    let slack = rows
        .iter()
        .map(|r| {
            let b = bounds[r.coordinate].value;
            if b > 0.0 {
                r.root / b
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min);
    let flags = bounds
        .iter()
        .filter_map(|b| b.vacuous.map(str::to_string))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    LowerBoundVerdict {
        d,
        inf_variance,
        bounds,
        rows,
        pass,
        slack,
        flags,
    }
}

/// Builds a verdict row from an estimate of a squared distance.
pub fn verdict_row(candidate: String, coordinate: usize, step: Option<u64>, root: f64, root_stderr: f64, bound: f64) -> VerdictRow {
    VerdictRow {
        candidate,
        coordinate,
        step,
        root,
        root_stderr,
        margin: root - 2.0 * root_stderr - bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::StepRow;

    fn constant_records(value: f64, count: u64) -> Vec<TrajectoryRecord> {
        (0..count)
            .map(|k| TrajectoryRecord {
                trajectory_id: k,
                master_seed: 0,
                steps: 2,
                complete: true,
                rows: (0..=2)
                    .map(|n| StepRow {
                        n,
                        gamma: 0.0,
                        batch: 1,
                        theta: vec![value],
                        m: vec![0.0],
                        second: vec![0.0],
                    })
                    .collect(),
                sup_abs_theta: vec![value.abs()],
                argsup_step: vec![0],
            })
            .collect()
    }

    #[test]
    fn constant_trajectories() {
        let recs = constant_records(0.7, 5);
        let d = BoundedDistribution::uniform_box(0.0, 1.0, 1).unwrap();
        let e = estimate_second_moment_distance(&recs, &XiMode::Constant(vec![0.7]), &d, 2).unwrap();
        assert_eq!(e[0], Estimate { mean: 0.0, stderr: 0.0 });
        let g = estimate_pairwise_gap(&recs, 1, 2).unwrap();
        assert_eq!(g[0].mean, 0.0);
        assert!(estimate_pairwise_gap(&recs, 2, 2).is_err());
        assert!(estimate_second_moment_distance(&recs[..1], &XiMode::Zero, &d, 2).is_err());
    }

    #[test]
    fn bias_variance_split() {
        // two-point values 0.5 +- 0.1: zero-centered estimate 0.25 + 0.01
        let mut recs = constant_records(0.4, 4);
        for r in recs.iter_mut().skip(2) {
            for row in r.rows.iter_mut() {
                row.theta[0] = 0.6;
            }
        }
        let d = BoundedDistribution::uniform_box(0.0, 1.0, 1).unwrap();
        let z = estimate_second_moment_distance(&recs, &XiMode::Zero, &d, 1).unwrap();
        assert!((z[0].mean - 0.26).abs() < 1e-15);
        let b = estimate_second_moment_distance(&recs, &XiMode::BestConstant, &d, 1).unwrap();
        assert!((b[0].mean - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zeroed_gaps_fail_the_verdict() {
        let lb = LowerBound { value: 1e-4, vacuous: None };
        let rows = vec![verdict_row("best_constant".into(), 0, Some(10), 0.0, 0.0, lb.value)];
        let v = compare_to_lower_bound(20736.0, vec![4.0], vec![lb], rows);
        assert!(!v.pass);
        let vac = LowerBound { value: 0.0, vacuous: Some("hypothesis liminf gamma > 0 not met") };
        let rows = vec![verdict_row("best_constant".into(), 0, Some(10), 0.0, 0.0, 0.0)];
        let v = compare_to_lower_bound(1.0, vec![4.0], vec![vac], rows);
        assert!(v.pass);
        assert_eq!(v.flags, vec!["hypothesis liminf gamma > 0 not met".to_string()]);
    }
}
