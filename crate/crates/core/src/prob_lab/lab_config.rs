//! User-supplied finite spaces for the `prob-lab` subcommand.
//!
//! ```json
//! {
//!   "probs": [0.25, 0.25, 0.25, 0.25],
//!   "labels": [0, 0, 1, 1],
//!   "coarse_labels": [0, 0, 0, 0],
//!   "variables": { "X": [1, 2, 3, 4] }
//! }
//! ```
//!
//! `labels` generate `G`; the optional `coarse_labels` must generate a
//! coarser partition and enable the tower check.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{
    conditional_expectation, integral_discrepancy, l2_projection_check,
    variance_representations, ProbError, RandomVariable, EXACT_TOL,
};
use crate::data::{DiscreteLaw, FiniteProbSpace, Partition};
use crate::experiment::csv::fmt_f64;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub probs: Vec<f64>,
    pub labels: Vec<usize>,
    #[serde(default)]
    pub coarse_labels: Option<Vec<usize>>,
    pub variables: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabReport {
    /// `variable,outcome,prob,block,value,cond_exp`
    pub values_csv: String,
    /// `(variable, identity, discrepancy)`
    pub checks: Vec<(String, &'static str, f64)>,
}

impl LabReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, _, d)| *d <= EXACT_TOL)
    }

    pub fn checks_csv(&self) -> String {
        let mut out = String::from("variable,identity,discrepancy,tolerance\n");
        for (v, id, d) in &self.checks {
            out.push_str(&format!("{v},{id},{},{}\n", fmt_f64(*d), fmt_f64(EXACT_TOL)));
        }
        out
    }
}

impl LabConfig {
    pub fn from_json(text: &str) -> Result<Self, ProbError> {
        serde_json::from_str(text).map_err(|e| ProbError::Precondition(format!("lab config: {e}")))
    }

    pub fn run(&self) -> Result<LabReport, ProbError> {
        let space = FiniteProbSpace::from_probs(self.probs.clone())?;
        if self.labels.len() != space.len() {
            return Err(ProbError::Precondition(format!(
                "{} labels for {} outcomes",
                self.labels.len(),
                space.len()
            )));
        }
        let g = Partition::from_labels(&self.labels);
        let coarse = match &self.coarse_labels {
            Some(l) if l.len() != space.len() => {
                return Err(ProbError::Precondition("coarse_labels length mismatch".into()))
            }
            Some(l) => {
                let h = Partition::from_labels(l);
                if !g.refines(&h) {
                    return Err(ProbError::Precondition(
                        "coarse_labels must generate a partition coarser than labels".into(),
                    ));
                }
                Some(h)
            }
            None => None,
        };

        let mut values_csv = String::from("variable,outcome,prob,block,value,cond_exp\n");
        let mut checks = Vec::new();
        for (name, vals) in &self.variables {
            let x = RandomVariable::new(vals.clone())?;
            let y = conditional_expectation(&space, &g, &x)?;
            for w in 0..space.len() {
                values_csv.push_str(&format!(
                    "{name},{w},{},{},{},{}\n",
                    fmt_f64(space.probs()[w]),
                    g.block_of(w),
                    fmt_f64(x.at(w)),
                    fmt_f64(y.values()[w])
                ));
            }
            let yv = y.as_random_variable();
            checks.push((name.clone(), "defining_integrals", integral_discrepancy(&space, &g, &x, &yv)));
            checks.push((name.clone(), "expectation", (yv.expectation(&space) - x.expectation(&space)).abs()));
            if let Some(h) = &coarse {
                let a = conditional_expectation(&space, h, &yv)?;
                let b = conditional_expectation(&space, h, &x)?;
                let worst = (0..space.len())
                    .filter(|w| space.probs()[*w] > 0.0)
                    .map(|w| (a.values()[w] - b.values()[w]).abs())
                    .fold(0.0, f64::max);
                checks.push((name.clone(), "tower", worst));
            }
            // no block-constant candidate, zero included, beats E[X|G] in L2
            let zero = RandomVariable::new(vec![0.0; space.len()])?;
            let (lhs, rhs, _) = l2_projection_check(&space, &g, &x, &zero)?;
            checks.push((name.clone(), "projection_vs_zero", (rhs - lhs).max(0.0)));
            let law = DiscreteLaw::new(vals.clone(), self.probs.clone())?;
            checks.push((name.clone(), "variance_representations", variance_representations(&law).max_discrepancy()));
        }
        Ok(LabReport { values_csv, checks })
    }
}
