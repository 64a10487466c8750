//! Versioned JSON experiment schema. Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::bounds::{BoundKind, SandwichConstants};
use crate::data::BoundedDistribution;
use crate::objectives::{GradientOracle, MatrixQuadratic};
use crate::optimizers::{
    BatchSchedule, HyperParams, KappaMode, OptimizerKind, OptimizerState, RateSchedule, Schedule,
};
use crate::HypothesisError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    /// Reject configs that violate a theorem hypothesis (default). With
    /// `false` violations become warnings, except under certification.
    #[serde(default = "yes")]
    pub strict: bool,
    pub optimizer: OptimizerSpec,
    pub oracle: OracleSpec,
    /// Defaults to the constants the oracle satisfies on the data box.
    #[serde(default)]
    pub sandwich: Option<SandwichSpec>,
    pub distribution: DistributionSpec,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    pub trajectories: u64,
    pub steps: u64,
    /// First step counted as "late" for the lower-bound verdict; default `steps / 2`.
    #[serde(default)]
    pub burn_in: Option<u64>,
    /// Probe steps for the estimators; default is a geometric tail design.
    #[serde(default)]
    pub probes: Option<Vec<u64>>,
    #[serde(default = "default_xi")]
    pub xi_modes: Vec<XiMode>,
    #[serde(default)]
    pub certify: Option<CertifySpec>,
    /// Trajectories `0..dump_trajectories` are written out in full.
    #[serde(default)]
    pub dump_trajectories: u64,
}

fn yes() -> bool {
    true
}

fn default_xi() -> Vec<XiMode> {
    vec![XiMode::BestConstant]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerName {
    Sgd,
    Momentum,
    Adam,
    Adagrad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub kind: OptimizerName,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "half")]
    pub beta: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub kappa: KappaSpec,
    #[serde(default)]
    pub first_moment_correction: bool,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    Constant { value: f64 },
    BiasCorrected,
}

impl Default for KappaSpec {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    SimpleQuadratic {
        dim: usize,
    },
    MatrixQuadratic {
        rows: usize,
        cols: usize,
        /// Row-major entries.
        data: Vec<f64>,
        #[serde(default)]
        eigen: Option<EigenSpec>,
    },
    CustomSandwich {
        dim: usize,
        eta: f64,
        rho: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    pub coordinate: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichSpec {
    pub eta: f64,
    pub rho: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    UniformBox { a: f64, b: f64, dim: usize },
    Discrete {
        a: f64,
        b: f64,
        atoms: Vec<Vec<f64>>,
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub gamma: RateSpec,
    #[serde(default)]
    pub batch: BatchSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    Constant { value: f64 },
    Table { values: Vec<f64> },
    Inverse { gamma0: f64, rate: f64 },
    InverseSqrt { gamma0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BatchSpec {
    Constant { value: usize },
    Table { values: Vec<usize> },
}

impl Default for BatchSpec {
    fn default() -> Self {
        Self::Constant { value: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub theta: Vec<f64>,
    #[serde(default)]
    pub m: Option<Vec<f64>>,
    #[serde(default, rename = "M")]
    pub big_m: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiMode {
    Zero,
    DataMean,
    BestConstant,
    Constant(Vec<f64>),
}

impl XiMode {
    pub fn label(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::DataMean => "data_mean".into(),
            Self::BestConstant => "best_constant".into(),
            Self::Constant(v) => format!(
                "constant[{}]",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    SgdApriori,
    MomentumApriori,
    AdamSingleStep,
    AdaptiveSup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    pub bound: BoundName,
    #[serde(default = "one_u32")]
    pub delta: u32,
}

fn one_u32() -> u32 {
    1
}

impl CertifySpec {
    pub fn kind(&self) -> BoundKind {
        match self.bound {
            BoundName::SgdApriori => BoundKind::SgdApriori { delta: self.delta },
            BoundName::MomentumApriori => BoundKind::MomentumApriori,
            BoundName::AdamSingleStep => BoundKind::AdamSingleStep,
            BoundName::AdaptiveSup => BoundKind::AdaptiveSup,
        }
    }
}

/// A validated config turned into runtime objects.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: ExperimentConfig,
    pub kind: OptimizerKind,
    pub oracle: GradientOracle,
    pub dist: BoundedDistribution,
    pub sandwich: SandwichConstants,
    pub schedule: Schedule,
    pub hyper: HyperParams,
    pub initial: OptimizerState,
    pub probes: Vec<u64>,
    pub burn_in: u64,
    /// Hypothesis violations tolerated because `strict` is off.
    pub warnings: Vec<String>,
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

/// `N/2, 3N/4, 7N/8, ...` up to `N`, plus `N - 1` so that lag-one gaps are
/// always probed.
pub fn default_probes(steps: u64) -> Vec<u64> {
    let mut probes = Vec::new();
    let mut s = steps / 2;
    loop {
        probes.push(s);
        let next = steps - (steps - s) / 2;
        if next == s {
            break;
        }
        s = next;
    }
    probes.push(steps);
    probes.push(steps.saturating_sub(1));
    probes.sort_unstable();
    probes.dedup();
    probes
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the runtime objects and validates every hypothesis that applies
    /// to the chosen optimizer.
    pub fn setup(&self) -> Result<Setup, ExperimentError> {
        if self.version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        if self.trajectories < 2 {
            return Err(invalid("at least 2 trajectories are needed for standard errors"));
        }
        let kind = match self.optimizer.kind {
            OptimizerName::Sgd => OptimizerKind::Sgd,
            OptimizerName::Momentum => OptimizerKind::Momentum,
            OptimizerName::Adam => OptimizerKind::Adam,
            OptimizerName::Adagrad => OptimizerKind::AdaGrad,
        };
        let oracle = match &self.oracle {
            OracleSpec::SimpleQuadratic { dim } => GradientOracle::simple_quadratic(*dim),
            OracleSpec::MatrixQuadratic {
                rows,
                cols,
                data,
                eigen,
            } => {
                let mut a = MatrixQuadratic::new(*rows, *cols, data.clone())
                    .map_err(|e| invalid(e.to_string()))?;
                if let Some(e) = eigen {
                    let mut v = vec![0.0; *cols];
                    if e.coordinate >= *cols {
                        return Err(invalid("eigen coordinate out of range"));
                    }
                    v[e.coordinate] = 1.0;
                    a = a.with_eigen(&v, e.lambda).map_err(|e| invalid(e.to_string()))?;
                }
                GradientOracle::matrix_quadratic(a)
            }
            OracleSpec::CustomSandwich { dim, eta, rho } => {
                if !(*eta > 0.0 && rho >= eta) {
                    return Err(invalid("custom_sandwich needs 0 < eta <= rho"));
                }
                GradientOracle::custom_sandwich(*dim, *eta, *rho)
            }
        };
        let dist = match &self.distribution {
            DistributionSpec::UniformBox { a, b, dim } => BoundedDistribution::uniform_box(*a, *b, *dim),
            DistributionSpec::Discrete { a, b, atoms, probs } => {
                BoundedDistribution::discrete(*a, *b, atoms.clone(), probs.clone())
            }
        }
        .map_err(|e| invalid(e.to_string()))?;
        if dist.dim() != oracle.data_dim() {
            return Err(invalid(format!(
                "distribution has dimension {} but the oracle expects {}",
                dist.dim(),
                oracle.data_dim()
            )));
        }
        let schedule = Schedule {
            gamma: match &self.schedule.gamma {
                RateSpec::Constant { value } => RateSchedule::Constant(*value),
                RateSpec::Table { values } => RateSchedule::Table(values.clone()),
                RateSpec::Inverse { gamma0, rate } => RateSchedule::Inverse {
                    gamma0: *gamma0,
                    rate: *rate,
                },
                RateSpec::InverseSqrt { gamma0 } => RateSchedule::InverseSqrt { gamma0: *gamma0 },
            },
            batch: match &self.schedule.batch {
                BatchSpec::Constant { value } => BatchSchedule::Constant(*value),
                BatchSpec::Table { values } => BatchSchedule::Table(values.clone()),
            },
        };
        schedule.validate().map_err(|e| invalid(e.to_string()))?;

        let p = oracle.param_dim();
        let initial = match &self.initial {
            None => OptimizerState::new(vec![0.0; p]),
            Some(i) => OptimizerState::with_moments(
                i.theta.clone(),
                i.m.clone().unwrap_or_else(|| vec![0.0; i.theta.len()]),
                i.big_m.clone().unwrap_or_else(|| vec![0.0; i.theta.len()]),
            )
            .map_err(|e| invalid(e.to_string()))?,
        };
        if initial.dim() != p {
            return Err(invalid(format!(
                "initial theta has dimension {} but the oracle expects {p}",
                initial.dim()
            )));
        }

        let kappa = match self.optimizer.kappa {
            KappaSpec::Constant { value } => KappaMode::Constant(value),
            KappaSpec::BiasCorrected => KappaMode::BiasCorrected,
        };
        let hyper = HyperParams {
            alpha: self.optimizer.alpha,
            beta: self.optimizer.beta,
            epsilon: self.optimizer.epsilon,
            kappa,
            first_moment_correction: self.optimizer.first_moment_correction,
        };

        let probes = match &self.probes {
            Some(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                if v.iter().any(|s| *s > self.steps) {
                    return Err(invalid("probe step beyond the horizon"));
                }
                v
            }
            None => default_probes(self.steps),
        };
        let burn_in = self.burn_in.unwrap_or(self.steps / 2);
        if burn_in > self.steps {
            return Err(invalid("burn_in beyond the horizon"));
        }
        if self.steps == 0 {
            return Err(invalid("steps must be >= 1"));
        }
        for mode in &self.xi_modes {
            match mode {
                XiMode::Constant(v) if v.len() != p => {
                    return Err(invalid("constant xi must have the parameter dimension"))
                }
                XiMode::DataMean if dist.dim() != p => {
                    return Err(invalid("data_mean xi needs equal data and parameter dimensions"))
                }
                _ => {}
            }
        }

        let mut warnings = Vec::new();
        let sandwich = match self.sandwich {
            Some(s) => SandwichConstants::new(s.eta, s.rho, s.c).map_err(ExperimentError::Hypothesis)?,
            None => oracle.natural_sandwich(&dist).map_err(|e| invalid(e.to_string()))?,
        };
        let mut hypotheses: Vec<HypothesisError> = Vec::new();
        let (a, b) = dist.bounds();
        if let Err(e) = sandwich.check_data(a, b) {
            hypotheses.push(e);
        }
        match kind {
            OptimizerKind::Adam => {
                if let Err(e) = hyper.validate(Some(sandwich.c)) {
                    hypotheses.push(e);
                }
                for i in 0..p {
                    if let Err(e) = hyper.validate_initial_moments(
                        initial.theta[i],
                        initial.m[i],
                        initial.second[i],
                        sandwich.rho,
                        sandwich.c,
                    ) {
                        hypotheses.push(HypothesisError::new(e.name, format!("coordinate {i}: {}", e.detail)));
                    }
                }
            }
            OptimizerKind::Momentum => {
                if !(0.0..1.0).contains(&hyper.alpha) {
                    hypotheses.push(HypothesisError::new("0 <= alpha < 1", format!("alpha = {}", hyper.alpha)));
                }
            }
            OptimizerKind::AdaGrad => {
                if !(hyper.epsilon > 0.0) {
                    hypotheses.push(HypothesisError::new("epsilon > 0", format!("epsilon = {}", hyper.epsilon)));
                }
            }
            OptimizerKind::Sgd => {}
        }
        if schedule.gamma.liminf() <= 0.0 {
            warnings.push("hypothesis liminf gamma > 0 not met; lower bound is vacuous".to_string());
        }
        if let Some(first) = hypotheses.first() {
            if self.strict {
                return Err(ExperimentError::Hypothesis(first.clone()));
            }
            warnings.extend(hypotheses.iter().map(|h| h.to_string()));
        }

        Ok(Setup {
            config: self.clone(),
            kind,
            oracle,
            dist,
            sandwich,
            schedule,
            hyper,
            initial,
            probes,
            burn_in,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SGD: &str = r#"{
        "version": 1, "seed": 7,
        "optimizer": {"kind": "sgd"},
        "oracle": {"kind": "simple_quadratic", "dim": 1},
        "distribution": {"kind": "uniform_box", "a": 0, "b": 1, "dim": 1},
        "schedule": {"gamma": {"kind": "constant", "value": 0.25}},
        "trajectories": 10, "steps": 64
    }"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_json(SGD).unwrap();
        let s = c.setup().unwrap();
        assert_eq!(s.sandwich, SandwichConstants::new(2.0, 2.0, 1.0).unwrap());
        assert_eq!(s.burn_in, 32);
        assert_eq!(s.probes, vec![32, 48, 56, 60, 62, 63, 64]);
        assert_eq!(c.xi_modes, vec![XiMode::BestConstant]);
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SGD.replace("\"seed\": 7", "\"seed\": 7, \"sede\": 1");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(ExperimentError::Config(_))));
        let bad = SGD.replace("\"kind\": \"sgd\"", "\"kind\": \"sgd\", \"lr\": 1");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn hypothesis_gating() {
        let adam = SGD.replace(
            r#"{"kind": "sgd"}"#,
            r#"{"kind": "adam", "alpha": 0.9, "beta": 0.5, "epsilon": 1}"#,
        );
        let c = ExperimentConfig::from_json(&adam).unwrap();
        match c.setup() {
            Err(ExperimentError::Hypothesis(h)) => assert_eq!(h.name, "alpha^2 < beta < 1"),
            other => panic!("{other:?}"),
        }
        let relaxed = ExperimentConfig { strict: false, ..c };
        let s = relaxed.setup().unwrap();
        assert!(s.warnings.iter().any(|w| w.contains("alpha^2 < beta < 1")));
    }

    #[test]
    fn probe_design_is_logarithmic() {
        let p = default_probes(10_000);
        assert!(p.len() < 20);
        assert_eq!(p.first(), Some(&5000));
        assert!(p.contains(&9999) && p.contains(&10_000));
    }
}
