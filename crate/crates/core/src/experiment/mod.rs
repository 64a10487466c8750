//! Config-driven experiments: simulate trajectories, estimate distances to
//! limit candidates and pairwise gaps, compare them with the lower bound,
//! certify a priori bounds, and write deterministic CSV reports.

pub mod config;
pub mod csv;
pub mod estimators;

use std::fmt::Write as _;
use std::path::Path;

pub use config::{ExperimentConfig, Setup, XiMode};
pub use estimators::{
    cauchy_surrogate, compare_to_lower_bound, estimate_pairwise_gap,
    estimate_second_moment_distance, CauchyEstimate, Estimate, LowerBoundVerdict, VerdictRow,
};

use crate::bounds::{
    certify_trajectories, constant_d, nonconvergence_lower_bound, BoundError, BoundKind,
    BoundReport, CertifyInput, LowerBound, LowerBoundInputs,
};
use crate::optimizers::{
    run_many, OptimError, OptimizerKind, RecordPolicy, Simulation, TrajectoryRecord,
};
use crate::parallel::Execution;
use crate::HypothesisError;
use csv::{fmt_f64, line};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Hypothesis(HypothesisError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Bound(BoundError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<BoundError> for ExperimentError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Hypothesis(h) => Self::Hypothesis(h),
            other => Self::Bound(other),
        }
    }
}

impl ExperimentError {
    /// 2 for configs that fail validation (including theorem hypotheses),
    /// 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Hypothesis(_) => 2,
            Self::Optim(OptimError::Hypothesis(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentRow {
    pub xi: String,
    pub step: u64,
    pub coordinate: usize,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub n: u64,
    pub m: u64,
    pub coordinate: usize,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub trajectories: u64,
    pub steps: u64,
    pub seed: u64,
    pub second_moments: Vec<SecondMomentRow>,
    pub gaps: Vec<GapRow>,
    pub cauchy: Vec<CauchyEstimate>,
    pub lower_bound: Option<LowerBoundVerdict>,
    pub certification: Option<BoundReport>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    /// 1 on a failed lower-bound verdict or any certification violation.
    pub fn exit_code(&self) -> i32 {
        let lb_fail = self.lower_bound.as_ref().is_some_and(|v| !v.pass);
        let cert_fail = self.certification.as_ref().is_some_and(|c| !c.certified());
        if lb_fail || cert_fail {
            1
        } else {
            0
        }
    }

    pub fn second_moments_csv(&self) -> String {
        let mut out = line(["xi", "step", "coordinate", "estimate", "stderr", "root", "root_stderr"]);
        for r in &self.second_moments {
            let (root, rse) = r.estimate.root();
            out += &line([
                r.xi.clone(),
                r.step.to_string(),
                r.coordinate.to_string(),
                fmt_f64(r.estimate.mean),
                fmt_f64(r.estimate.stderr),
                fmt_f64(root),
                fmt_f64(rse),
            ]);
        }
        out
    }

    pub fn pairwise_gaps_csv(&self) -> String {
        let mut out = line(["n", "m", "coordinate", "estimate", "stderr"]);
        for r in &self.gaps {
            out += &line([
                r.n.to_string(),
                r.m.to_string(),
                r.coordinate.to_string(),
                fmt_f64(r.estimate.mean),
                fmt_f64(r.estimate.stderr),
            ]);
        }
        out
    }

    pub fn cauchy_csv(&self) -> String {
        let mut out = line(["coordinate", "gap", "stderr", "n", "m"]);
        for c in &self.cauchy {
            out += &line([
                c.coordinate.to_string(),
                fmt_f64(c.value),
                fmt_f64(c.stderr),
                c.pair.0.to_string(),
                c.pair.1.to_string(),
            ]);
        }
        out
    }

    /// Lower-bound comparison, one row per (candidate, coordinate, step).
    pub fn bounds_csv(&self) -> Option<String> {
        let v = self.lower_bound.as_ref()?;
        let mut out = line([
            "candidate", "coordinate", "step", "root", "root_stderr", "bound", "margin", "d",
            "inf_variance",
        ]);
        for r in &v.rows {
            out += &line([
                r.candidate.clone(),
                r.coordinate.to_string(),
                r.step.map(|s| s.to_string()).unwrap_or_default(),
                fmt_f64(r.root),
                fmt_f64(r.root_stderr),
                fmt_f64(v.bounds[r.coordinate].value),
                fmt_f64(r.margin),
                fmt_f64(v.d),
                fmt_f64(v.inf_variance[r.coordinate]),
            ]);
        }
        Some(out)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "trajectories: {}", self.trajectories);
        let _ = writeln!(s, "steps: {}", self.steps);
        let _ = writeln!(s, "seed: {}", self.seed);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        if let Some(last) = self.second_moments.iter().map(|r| r.step).max() {
            for r in self.second_moments.iter().filter(|r| r.step == last) {
                let _ = writeln!(
                    s,
                    "second moment [{} step {} coord {}]: {} +- {}",
                    r.xi,
                    r.step,
                    r.coordinate,
                    fmt_f64(r.estimate.mean),
                    fmt_f64(r.estimate.stderr)
                );
            }
        }
        for c in &self.cauchy {
            let _ = writeln!(
                s,
                "cauchy gap [coord {}]: {} +- {}",
                c.coordinate,
                fmt_f64(c.value),
                fmt_f64(c.stderr)
            );
        }
        if let Some(v) = &self.lower_bound {
            let _ = writeln!(s, "D: {}", fmt_f64(v.d));
            for (i, b) in v.bounds.iter().enumerate() {
                let _ = writeln!(s, "lower bound [coord {i}]: {}", fmt_f64(b.value));
            }
            for f in &v.flags {
                let _ = writeln!(s, "flag: {f}");
            }
            let _ = writeln!(s, "slack (min root / bound): {}", fmt_f64(v.slack));
            let _ = writeln!(s, "lower bound verdict: {}", if v.pass { "PASS" } else { "FAIL" });
        }
        if let Some(c) = &self.certification {
            s.push_str(&c.summary());
        }
        s
    }

    /// Writes every CSV plus `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path, dumps: &[TrajectoryRecord]) -> Result<(), ExperimentError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("second_moments.csv"), self.second_moments_csv())?;
        std::fs::write(dir.join("pairwise_gaps.csv"), self.pairwise_gaps_csv())?;
        std::fs::write(dir.join("cauchy_gap.csv"), self.cauchy_csv())?;
        if let Some(b) = self.bounds_csv() {
            std::fs::write(dir.join("bounds.csv"), b)?;
        }
        if let Some(c) = &self.certification {
            std::fs::write(dir.join("certification.csv"), c.to_csv())?;
        }
        for r in dumps {
            std::fs::write(dir.join(format!("trajectory_{}.csv", r.trajectory_id)), r.to_csv())?;
        }
        std::fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

/// `D` and the per-coordinate lower bound for an Adam setup. Requires the
/// hypotheses to hold even when `strict` is off.
pub fn lower_bound_for(setup: &Setup) -> Result<(f64, Vec<f64>, Vec<LowerBound>), ExperimentError> {
    if setup.kind != OptimizerKind::Adam {
        return Err(ExperimentError::Config(
            "the lower bound applies to Adam-type recursions only".into(),
        ));
    }
    let (sc, h) = (&setup.sandwich, &setup.hyper);
    h.validate(Some(sc.c)).map_err(ExperimentError::Hypothesis)?;
    let d = constant_d(sc.rho, h.epsilon, sc.c, h.alpha, h.beta, sc.eta).map_err(ExperimentError::Hypothesis)?;
    let p = setup.oracle.param_dim();
    let mut vars = Vec::with_capacity(p);
    let mut bounds = Vec::with_capacity(p);
    for i in 0..p {
        let v = setup
            .oracle
            .inf_variance(i, &setup.dist)
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        bounds.push(nonconvergence_lower_bound(&LowerBoundInputs {
            liminf_gamma: setup.schedule.gamma.liminf(),
            inf_variance: v,
            d,
            limsup_batch: setup.schedule.batch.limsup() as f64,
            sup_gamma: setup.schedule.gamma.sup(),
            initial_scale: 1f64.max(setup.initial.theta[i].abs()),
        }));
        vars.push(v);
    }
    Ok((d, vars, bounds))
}

fn needs_full_record(setup: &Setup, bound: BoundKind) -> bool {
    match bound {
        BoundKind::AdamSingleStep => true,
        BoundKind::SgdApriori { .. } => {
            setup.kind != OptimizerKind::Sgd
                || 2.0 * setup.schedule.gamma.max_over(setup.config.steps) > 1.0
        }
        _ => false,
    }
}

/// What a run should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub estimates: bool,
    pub certify: bool,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            estimates: true,
            certify: true,
            execution: Execution::default(),
        }
    }
}

/// Runs the configured experiment. Returns the report and the fully
/// recorded dump trajectories.
pub fn run_experiment(
    setup: &Setup,
    options: RunOptions,
) -> Result<(ExperimentReport, Vec<TrajectoryRecord>), ExperimentError> {
    let cfg = &setup.config;
    let certify = if options.certify { cfg.certify } else { None };
    let policy = match certify {
        Some(c) if needs_full_record(setup, c.kind()) => RecordPolicy::All,
        _ => RecordPolicy::Steps(setup.probes.clone()),
    };
    let sim = Simulation {
        kind: setup.kind,
        oracle: &setup.oracle,
        dist: &setup.dist,
        schedule: &setup.schedule,
        hyper: &setup.hyper,
        initial: &setup.initial,
        steps: cfg.steps,
        policy: &policy,
    };
    let records = run_many(&sim, cfg.seed, cfg.trajectories, options.execution)?;

    let mut report = ExperimentReport {
        trajectories: cfg.trajectories,
        steps: cfg.steps,
        seed: cfg.seed,
        second_moments: Vec::new(),
        gaps: Vec::new(),
        cauchy: Vec::new(),
        lower_bound: None,
        certification: None,
        warnings: setup.warnings.clone(),
    };

    if options.estimates {
        estimate_all(setup, &records, &mut report)?;
    }

    if let Some(c) = certify {
        let input = CertifyInput {
            kind: setup.kind,
            oracle: &setup.oracle,
            dist: &setup.dist,
            schedule: &setup.schedule,
            hyper: &setup.hyper,
            sandwich: &setup.sandwich,
        };
        report.certification = Some(certify_trajectories(&records, c.kind(), &input)?);
    }

    let dump_policy = RecordPolicy::All;
    let dump_sim = Simulation {
        policy: &dump_policy,
        ..sim
    };
    let dumps = run_many(&dump_sim, cfg.seed, cfg.dump_trajectories.min(cfg.trajectories), options.execution)?;
    Ok((report, dumps))
}

fn estimate_all(
    setup: &Setup,
    records: &[TrajectoryRecord],
    report: &mut ExperimentReport,
) -> Result<(), ExperimentError> {
    let p = setup.oracle.param_dim();
    let probes = &setup.probes;
    for xi in &setup.config.xi_modes {
        for &n in probes {
            let est = estimate_second_moment_distance(records, xi, &setup.dist, n)?;
            for (i, e) in est.into_iter().enumerate() {
                report.second_moments.push(SecondMomentRow {
                    xi: xi.label(),
                    step: n,
                    coordinate: i,
                    estimate: e,
                });
            }
        }
    }
    let mut pair_estimates = Vec::new();
    for a in 0..probes.len() {
        for b in a + 1..probes.len() {
            let est = estimate_pairwise_gap(records, probes[a], probes[b])?;
            for (i, e) in est.iter().enumerate() {
                report.gaps.push(GapRow {
                    n: probes[a],
                    m: probes[b],
                    coordinate: i,
                    estimate: *e,
                });
            }
            pair_estimates.push(((a, b), est));
        }
    }
    if probes.len() >= 2 {
        for i in 0..p {
            report.cauchy.push(cauchy_surrogate(probes, &pair_estimates, i)?);
        }
    }

    if setup.kind == OptimizerKind::Adam && setup.warnings.iter().all(|w| !w.contains("violated")) {
        let (d, vars, bounds) = lower_bound_for(setup)?;
        let mut rows = Vec::new();
        for r in report
            .second_moments
            .iter()
            .filter(|r| r.step >= setup.burn_in)
        {
            let (root, rse) = r.estimate.root();
            rows.push(estimators::verdict_row(
                r.xi.clone(),
                r.coordinate,
                Some(r.step),
                root,
                rse,
                bounds[r.coordinate].value,
            ));
        }
        for c in &report.cauchy {
            rows.push(estimators::verdict_row(
                "cauchy_gap".into(),
                c.coordinate,
                None,
                c.value,
                c.stderr,
                bounds[c.coordinate].value,
            ));
        }
        report.lower_bound = Some(compare_to_lower_bound(d, vars, bounds, rows));
    }
    Ok(())
}

/// Convenience wrapper: load, validate and run a JSON config.
pub fn run_json(text: &str, options: RunOptions) -> Result<(ExperimentReport, Vec<TrajectoryRecord>), ExperimentError> {
    let setup = ExperimentConfig::from_json(text)?.setup()?;
    run_experiment(&setup, options)
}
