use super::{
    adam_single_step_bound, adaptive_sup_bound, momentum_apriori_bound, sgd_apriori_bound,
    AdaptiveSupInputs, BoundError, SandwichConstants,
};
use crate::data::BoundedDistribution;
use crate::experiment::csv::fmt_f64;
use crate::objectives::{check_sandwich, default_theta_grid, GradientOracle, OracleKind};
use crate::optimizers::{normalized_rates, HyperParams, OptimizerKind, Schedule, TrajectoryRecord};
use crate::parallel::{map_indexed, Execution};
use crate::HypothesisError;

/// Which a priori bound to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Normalized-recursion bound with look-back `delta`, for SGD, RMSprop
    /// (Adam with `alpha = 0`) and AdaGrad on the simple quadratic.
    SgdApriori { delta: u32 },
    /// Momentum SGD, in the global form started at `N = 1`.
    MomentumApriori,
    /// Step-by-step Adam bound; needs complete records.
    AdamSingleStep,
    /// Uniform-in-time bound for Adam.
    AdaptiveSup,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SgdApriori { .. } => "sgd_apriori",
            Self::MomentumApriori => "momentum_apriori",
            Self::AdamSingleStep => "adam_single_step",
            Self::AdaptiveSup => "adaptive_sup",
        }
    }
}

/// The setting the trajectories were produced under.
#[derive(Debug, Clone, Copy)]
pub struct CertifyInput<'a> {
    pub kind: OptimizerKind,
    pub oracle: &'a GradientOracle,
    pub dist: &'a BoundedDistribution,
    pub schedule: &'a Schedule,
    pub hyper: &'a HyperParams,
    pub sandwich: &'a SandwichConstants,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub trajectory: u64,
    pub step: u64,
    pub coordinate: usize,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kind: &'static str,
    /// Largest bound value used (bounds may differ per trajectory and
    /// coordinate through the initial state).
    pub bound: f64,
    pub trajectories_checked: usize,
    pub values_checked: u64,
    /// Steps whose local precondition did not hold and were not compared
    /// (single-step bound only).
    pub steps_skipped: u64,
    pub violations: Vec<Violation>,
}

impl BoundReport {
    pub fn certified(&self) -> bool {
        self.violations.is_empty()
    }

    /// Columns `trajectory, step, coordinate, observed, bound`, one row per
    /// violation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trajectory,step,coordinate,observed,bound\n");
        for v in &self.violations {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                v.trajectory,
                v.step,
                v.coordinate,
                fmt_f64(v.observed),
                fmt_f64(v.bound)
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "bound: {}\nbound value: {}\ntrajectories checked: {}\nvalues checked: {}\nsteps skipped: {}\nviolations: {}\nverdict: {}\n",
            self.kind,
            fmt_f64(self.bound),
            self.trajectories_checked,
            self.values_checked,
            self.steps_skipped,
            self.violations.len(),
            if self.certified() { "CERTIFIED" } else { "VIOLATED" }
        )
    }
}

fn validate_common(input: &CertifyInput<'_>) -> Result<(), HypothesisError> {
    let sc = input.sandwich;
    let (a, b) = input.dist.bounds();
    sc.check_data(a, b)?;
    let p = input.oracle.param_dim();
    let samples = input.dist.support_probe();
    for i in 0..p {
        let grid = default_theta_grid(&vec![0.0; p], i, sc.c);
        let r = check_sandwich(input.oracle.coordinate(i), i, sc, &grid, &samples);
        if !r.holds {
            return Err(HypothesisError::new(
                "sandwich condition",
                format!(
                    "coordinate {i} fails at theta = {:?}, x = {:?} (margin {})",
                    r.worst_theta, r.worst_x, r.worst_margin
                ),
            ));
        }
    }
    Ok(())
}

fn require_kind(input: &CertifyInput<'_>, allowed: &[OptimizerKind], bound: BoundKind) -> Result<(), BoundError> {
    if allowed.contains(&input.kind) {
        Ok(())
    } else {
        Err(BoundError::Invalid(format!(
            "bound {} does not apply to optimizer {}",
            bound.name(),
            input.kind.name()
        )))
    }
}

fn no_first_moment_correction(hyper: &HyperParams) -> Result<(), HypothesisError> {
    if hyper.first_moment_correction {
        return Err(HypothesisError::new(
            "no first-moment bias correction",
            "certified recursions correct the second moment only",
        ));
    }
    Ok(())
}

/// Per trajectory: bound per coordinate, plus any steps to skip.
struct Outcome {
    bound: f64,
    checked: u64,
    skipped: u64,
    violations: Vec<Violation>,
}

fn compare_uniform(rec: &TrajectoryRecord, bounds: &[f64]) -> Outcome {
    let mut out = Outcome {
        bound: bounds.iter().copied().fold(0.0, f64::max),
        checked: 0,
        skipped: 0,
        violations: Vec::new(),
    };
    if rec.complete {
        for row in &rec.rows {
            for (i, t) in row.theta.iter().enumerate() {
                out.checked += 1;
                if !(t.abs() <= bounds[i]) {
                    out.violations.push(Violation {
                        trajectory: rec.trajectory_id,
                        step: row.n,
                        coordinate: i,
                        observed: t.abs(),
                        bound: bounds[i],
                    });
                }
            }
        }
    } else {
        for (i, s) in rec.sup_abs_theta.iter().enumerate() {
            out.checked += rec.steps + 1;
            if !(*s <= bounds[i]) {
                out.violations.push(Violation {
                    trajectory: rec.trajectory_id,
                    step: rec.argsup_step[i],
                    coordinate: i,
                    observed: *s,
                    bound: bounds[i],
                });
            }
        }
    }
    out
}

fn sgd_outcome(
    input: &CertifyInput<'_>,
    rec: &TrajectoryRecord,
    delta: u32,
) -> Result<Outcome, BoundError> {
    let sc = input.sandwich;
    let sup_x = input.dist.sup_abs();
    let delta_n = delta as usize;
    let rates: Vec<Vec<f64>> = if rec.complete || input.kind != OptimizerKind::Sgd {
        normalized_rates(input.kind, Some(input.hyper), input.schedule, rec)
            .map_err(|e| BoundError::Invalid(e.to_string()))?
    } else {
        let max = 2.0 * input.schedule.gamma.max_over(rec.steps);
        if max > 1.0 {
            return Err(BoundError::IncompleteRecord(rec.trajectory_id));
        }
        Vec::new()
    };
    let p = rec.dim();
    let mut sup_rate = vec![0.0f64; p];
    if rates.is_empty() {
        sup_rate.fill(2.0 * input.schedule.gamma.max_over(rec.steps));
    }
    for (k, r) in rates.iter().enumerate() {
        let n = k + 1;
        for i in 0..p {
            sup_rate[i] = sup_rate[i].max(r[i].abs());
            // look-back window theta_{n-1}, ..., theta_{n-delta}
            let far = n >= delta_n
                && (1..=delta_n).all(|m| rec.rows[n - m].theta[i].abs() >= sc.c);
            if far && !(0.0..=1.0).contains(&r[i]) {
                return Err(HypothesisError::new(
                    "0 <= gamma_n <= 1 after delta iterates beyond c",
                    format!(
                        "trajectory {}, step {n}, coordinate {i}: normalized rate {}",
                        rec.trajectory_id, r[i]
                    ),
                )
                .into());
            }
        }
    }
    let theta0 = &rec.initial().theta;
    let bounds: Vec<f64> = (0..p)
        .map(|i| sgd_apriori_bound(delta, sup_rate[i], sc.c, theta0[i].abs(), sup_x))
        .collect();
    Ok(compare_uniform(rec, &bounds))
}

fn momentum_outcome(input: &CertifyInput<'_>, rec: &TrajectoryRecord) -> Result<Outcome, BoundError> {
    let (sc, h) = (input.sandwich, input.hyper);
    let init = rec.initial();
    let bounds: Vec<f64> = (0..rec.dim())
        .map(|i| {
            let m_cap = sc.rho * (1.0 - h.alpha) * (init.theta[i].abs() + sc.c);
            if init.m[i].abs() > m_cap {
                return Err(HypothesisError::new(
                    "|m_0| <= rho (1 - alpha)(|theta_0| + c)",
                    format!("coordinate {i}: |m_0| = {} > {m_cap}", init.m[i].abs()),
                ));
            }
            let t0 = init.theta[i].abs();
            Ok(momentum_apriori_bound(h.alpha, sc.eta, sc.rho, sc.c, t0, t0))
        })
        .collect::<Result<_, _>>()?;
    Ok(compare_uniform(rec, &bounds))
}

fn adaptive_outcome(input: &CertifyInput<'_>, rec: &TrajectoryRecord) -> Result<Outcome, BoundError> {
    let (sc, h) = (input.sandwich, input.hyper);
    let init = rec.initial();
    // the uniform bound is applied with kappa_n <- kappa(n, i)(1 - beta)
    let kappa_inf = h.kappa.infimum(h.beta);
    let bounds: Vec<f64> = (0..rec.dim())
        .map(|i| {
            h.validate_initial_moments(init.theta[i], init.m[i], init.second[i], sc.rho, sc.c)?;
            adaptive_sup_bound(&AdaptiveSupInputs {
                c: sc.c,
                theta0_abs: init.theta[i].abs(),
                alpha: h.alpha,
                beta: h.beta,
                eta: sc.eta,
                rho: sc.rho,
                epsilon: h.epsilon,
                sup_gamma: input.schedule.gamma.sup(),
                inf_kappa: kappa_inf * (1.0 - h.beta),
                m0_abs: init.m[i].abs(),
                big_m: kappa_inf * init.second[i],
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(compare_uniform(rec, &bounds))
}

fn single_step_outcome(input: &CertifyInput<'_>, rec: &TrajectoryRecord) -> Result<Outcome, BoundError> {
    if !rec.complete {
        return Err(BoundError::IncompleteRecord(rec.trajectory_id));
    }
    let (sc, h) = (input.sandwich, input.hyper);
    let mut out = Outcome {
        bound: 0.0,
        checked: 0,
        skipped: 0,
        violations: Vec::new(),
    };
    let m0 = &rec.initial().m;
    for w in rec.rows.windows(2) {
        let (prev, row) = (&w[0], &w[1]);
        let kappa = h.kappa.at(row.n, h.beta);
        for i in 0..rec.dim() {
            let g = (row.m[i] - h.alpha * prev.m[i]) / (1.0 - h.alpha);
            if !(prev.theta[i].abs() <= sc.c + g.abs() / sc.eta) {
                out.skipped += 1;
                continue;
            }
            let s = (kappa * row.second[i]).sqrt();
            let bound = adam_single_step_bound(
                sc.c,
                sc.eta,
                kappa * (1.0 - h.beta),
                s,
                row.gamma,
                h.alpha,
                h.beta,
                h.epsilon,
                row.n,
                m0[i].abs(),
            );
            out.bound = out.bound.max(bound);
            out.checked += 1;
            if !(row.theta[i].abs() <= bound) {
                out.violations.push(Violation {
                    trajectory: rec.trajectory_id,
                    step: row.n,
                    coordinate: i,
                    observed: row.theta[i].abs(),
                    bound,
                });
            }
        }
    }
    Ok(out)
}

/// Validates the hypotheses of `bound` for `input`, then compares every
/// recorded `|theta_n^{(i)}|` (or the tracked running suprema, for records
/// that do not hold every step) against it. Refuses with an error when a
/// hypothesis fails.
pub fn certify_trajectories(
    records: &[TrajectoryRecord],
    bound: BoundKind,
    input: &CertifyInput<'_>,
) -> Result<BoundReport, BoundError> {
    validate_common(input)?;
    match bound {
        BoundKind::SgdApriori { delta } => {
            require_kind(input, &[OptimizerKind::Sgd, OptimizerKind::Adam, OptimizerKind::AdaGrad], bound)?;
            if delta == 0 {
                return Err(BoundError::Invalid("delta must be >= 1".into()));
            }
            if !matches!(input.oracle.kind(), OracleKind::SimpleQuadratic { .. }) {
                return Err(HypothesisError::new(
                    "normalized recursion",
                    "the normalized form needs the simple quadratic oracle",
                )
                .into());
            }
            if input.dist.sup_abs() > input.sandwich.c {
                return Err(HypothesisError::new(
                    "|X_n| <= c",
                    format!("sup |X| = {} > c = {}", input.dist.sup_abs(), input.sandwich.c),
                )
                .into());
            }
        }
        BoundKind::MomentumApriori => {
            require_kind(input, &[OptimizerKind::Momentum], bound)?;
            let h = input.hyper;
            if !(0.0..1.0).contains(&h.alpha) {
                return Err(HypothesisError::new("0 <= alpha < 1", format!("alpha = {}", h.alpha)).into());
            }
            let cap = (1.0 - h.alpha) / ((1.0 + 2.0 * h.alpha) * input.sandwich.rho.max(1.0));
            let steps = records.iter().map(|r| r.steps).max().unwrap_or(0);
            let g = input.schedule.gamma.max_over(steps);
            if g > cap {
                return Err(HypothesisError::new(
                    "gamma_n <= (1 - alpha) / ((1 + 2 alpha) max{1, rho})",
                    format!("gamma reaches {g} > {cap}"),
                )
                .into());
            }
        }
        BoundKind::AdamSingleStep | BoundKind::AdaptiveSup => {
            require_kind(input, &[OptimizerKind::Adam], bound)?;
            no_first_moment_correction(input.hyper)?;
            input.hyper.validate(Some(input.sandwich.c))?;
        }
    }

    let outcomes = map_indexed(records.len() as u64, Execution::default(), |k| {
        let rec = &records[k as usize];
        match bound {
            BoundKind::SgdApriori { delta } => sgd_outcome(input, rec, delta),
            BoundKind::MomentumApriori => momentum_outcome(input, rec),
            BoundKind::AdaptiveSup => adaptive_outcome(input, rec),
            BoundKind::AdamSingleStep => single_step_outcome(input, rec),
        }
    });
    let mut report = BoundReport {
        kind: bound.name(),
        bound: 0.0,
        trajectories_checked: 0,
        values_checked: 0,
        steps_skipped: 0,
        violations: Vec::new(),
    };
    for o in outcomes {
        let o = o?;
        report.bound = report.bound.max(o.bound);
        report.trajectories_checked += 1;
        report.values_checked += o.checked;
        report.steps_skipped += o.skipped;
        report.violations.extend(o.violations);
    }
    Ok(report)
}
