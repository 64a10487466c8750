use super::{
    adagrad_step, adam_step, momentum_step, sgd_step, HyperParams, OptimError, OptimizerKind,
    OptimizerState, Schedule,
};
use crate::data::{BoundedDistribution, RngStream};
use crate::experiment::csv::fmt_f64;
use crate::objectives::GradientOracle;
use crate::parallel::{map_indexed, Execution};

/// Which steps a trajectory keeps. Step 0 and step `N` are always kept;
/// running suprema of `|theta_n^{(i)}|` are tracked regardless.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordPolicy {
    All,
    /// The listed steps (plus the endpoints).
    Steps(Vec<u64>),
    Endpoints,
}

impl RecordPolicy {
    fn keeps(&self, n: u64, last: u64) -> bool {
        n == 0
            || n == last
            || match self {
                Self::All => true,
                Self::Steps(v) => v.binary_search(&n).is_ok(),
                Self::Endpoints => false,
            }
    }

    fn normalized(&self) -> Self {
        match self {
            Self::Steps(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                Self::Steps(v)
            }
            other => other.clone(),
        }
    }
}

/// `(n, gamma_n, J_n, theta_n, m_n, M_n)`; `gamma_0 = 0` and `J_0 = 0` by
/// convention.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub n: u64,
    pub gamma: f64,
    pub batch: usize,
    pub theta: Vec<f64>,
    pub m: Vec<f64>,
    pub second: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub trajectory_id: u64,
    pub master_seed: u64,
    pub steps: u64,
    /// True when every step `0..=N` is in `rows`.
    pub complete: bool,
    pub rows: Vec<StepRow>,
    /// `max_{0 <= n <= N} |theta_n^{(i)}|` per coordinate.
    pub sup_abs_theta: Vec<f64>,
    /// A step attaining `sup_abs_theta`.
    pub argsup_step: Vec<u64>,
}

impl TrajectoryRecord {
    pub fn dim(&self) -> usize {
        self.sup_abs_theta.len()
    }

    pub fn row_at(&self, n: u64) -> Option<&StepRow> {
        self.rows
            .binary_search_by_key(&n, |r| r.n)
            .ok()
            .map(|k| &self.rows[k])
    }

    pub fn initial(&self) -> &StepRow {
        &self.rows[0]
    }

    pub fn last(&self) -> &StepRow {
        self.rows.last().unwrap()
    }

    pub fn csv_header(p: usize) -> String {
        let mut cols = vec!["n".to_string(), "gamma".to_string()];
        for prefix in ["theta", "m", "M"] {
            cols.extend((0..p).map(|i| format!("{prefix}_{i}")));
        }
        cols.join(",")
    }

    /// Columns `n, gamma, theta_0.., m_0.., M_0..`.
    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.dim());
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.n.to_string());
            out.push(',');
            out.push_str(&fmt_f64(row.gamma));
            for v in row.theta.iter().chain(&row.m).chain(&row.second) {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Everything needed to run one trajectory except its random stream.
#[derive(Debug, Clone, Copy)]
pub struct Simulation<'a> {
    pub kind: OptimizerKind,
    pub oracle: &'a GradientOracle,
    pub dist: &'a BoundedDistribution,
    pub schedule: &'a Schedule,
    pub hyper: &'a HyperParams,
    pub initial: &'a OptimizerState,
    pub steps: u64,
    pub policy: &'a RecordPolicy,
}

impl Simulation<'_> {
    pub fn validate(&self) -> Result<(), OptimError> {
        self.schedule.validate()?;
        let p = self.oracle.param_dim();
        if self.initial.dim() != p {
            return Err(OptimError::Invalid(format!(
                "initial state has dimension {} but the oracle expects {p}",
                self.initial.dim()
            )));
        }
        if self.dist.dim() != self.oracle.data_dim() {
            return Err(OptimError::Invalid(format!(
                "data dimension {} but the oracle expects {}",
                self.dist.dim(),
                self.oracle.data_dim()
            )));
        }
        if self.initial.n != 0 {
            return Err(OptimError::Invalid("initial state must have n = 0".into()));
        }
        Ok(())
    }
}

fn row(state: &OptimizerState, gamma: f64, batch: usize) -> StepRow {
    StepRow {
        n: state.n,
        gamma,
        batch,
        theta: state.theta.clone(),
        m: state.m.clone(),
        second: state.second.clone(),
    }
}

fn first_non_finite(state: &OptimizerState) -> Option<&'static str> {
    if state.theta.iter().any(|v| !v.is_finite()) {
        Some("theta")
    } else if state.m.iter().any(|v| !v.is_finite()) {
        Some("m")
    } else if state.second.iter().any(|v| !v.is_finite()) {
        Some("M")
    } else {
        None
    }
}

/// Runs `sim.steps` steps. Step `n` draws `J_n` samples from `rng`, averages
/// their gradients at `theta_{n-1}` and applies one optimizer step.
pub fn run_trajectory(sim: &Simulation<'_>, rng: &mut RngStream) -> Result<TrajectoryRecord, OptimError> {
    sim.validate()?;
    let policy = sim.policy.normalized();
    let p = sim.oracle.param_dim();
    let mut state = sim.initial.clone();
    let mut x = vec![0.0; sim.dist.dim()];
    let mut g = vec![0.0; p];
    let mut mean = vec![0.0; p];
    let mut sup: Vec<f64> = state.theta.iter().map(|t| t.abs()).collect();
    let mut argsup = vec![0u64; p];
    let mut rows = vec![row(&state, 0.0, 0)];

    for n in 1..=sim.steps {
        let gamma = sim.schedule.gamma.at(n);
        let batch = sim.schedule.batch.at(n);
        mean.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..batch {
            sim.dist.sample_into(rng, &mut x);
            sim.oracle.gradient_into(&state.theta, &x, &mut g);
            for (a, b) in mean.iter_mut().zip(&g) {
                *a += b;
            }
        }
        if batch > 1 {
            let inv = 1.0 / batch as f64;
            mean.iter_mut().for_each(|v| *v *= inv);
        }
        match sim.kind {
            OptimizerKind::Sgd => sgd_step(&mut state, gamma, &mean),
            OptimizerKind::Momentum => momentum_step(&mut state, sim.hyper.alpha, gamma, &mean),
            OptimizerKind::Adam => adam_step(&mut state, sim.hyper, gamma, &mean),
            OptimizerKind::AdaGrad => adagrad_step(&mut state, sim.hyper.epsilon, gamma, &mean),
        }
        if let Some(quantity) = first_non_finite(&state) {
            return Err(OptimError::Divergence {
                trajectory: rng.stream_id(),
                step: n,
                quantity,
            });
        }
        for (i, t) in state.theta.iter().enumerate() {
            if t.abs() > sup[i] {
                sup[i] = t.abs();
                argsup[i] = n;
            }
        }
        if policy.keeps(n, sim.steps) {
            rows.push(row(&state, gamma, batch));
        }
    }

    Ok(TrajectoryRecord {
        trajectory_id: rng.stream_id(),
        master_seed: rng.master_seed(),
        steps: sim.steps,
        complete: rows.len() as u64 == sim.steps + 1,
        rows,
        sup_abs_theta: sup,
        argsup_step: argsup,
    })
}

/// Trajectories `0..count`, trajectory `k` on stream `(master_seed, k)`.
/// Output is ordered by trajectory id whatever the execution mode; on
/// failure the error of the lowest failing id is returned.
pub fn run_many(
    sim: &Simulation<'_>,
    master_seed: u64,
    count: u64,
    execution: Execution,
) -> Result<Vec<TrajectoryRecord>, OptimError> {
    sim.validate()?;
    map_indexed(count, execution, |k| {
        run_trajectory(sim, &mut RngStream::new(master_seed, k))
    })
    .into_iter()
    .collect()
}
