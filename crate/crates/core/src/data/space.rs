use super::{validate_probs, DataError};

/// A finite probability space `(Omega, 2^Omega, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbSpace {
    outcomes: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteProbSpace {
    pub fn new(outcomes: Vec<String>, probs: Vec<f64>) -> Result<Self, DataError> {
        if outcomes.len() != probs.len() {
            return Err(DataError::InvalidSpace(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        validate_probs(&probs).map_err(DataError::InvalidSpace)?;
        Ok(Self { outcomes, probs })
    }

    /// Space with outcomes labelled `0..n`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, DataError> {
        let outcomes = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new(outcomes, probs)
    }

    pub fn uniform(n: usize) -> Result<Self, DataError> {
        Self::from_probs(vec![1.0 / n as f64; n])
    }

    /// Product space `self x other` with outcome `(i, j)` at index
    /// `i * other.len() + j`.
    pub fn product(&self, other: &Self) -> Self {
        let mut outcomes = Vec::with_capacity(self.len() * other.len());
        let mut probs = Vec::with_capacity(self.len() * other.len());
        for (a, p) in self.outcomes.iter().zip(&self.probs) {
            for (b, q) in other.outcomes.iter().zip(&other.probs) {
                outcomes.push(format!("({a},{b})"));
                probs.push(p * q);
            }
        }
        Self { outcomes, probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn prob_of(&self, event: &[usize]) -> f64 {
        event.iter().map(|&w| self.probs[w]).sum()
    }

    /// `E[f(omega)]`.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().map(|(w, p)| p * f(w)).sum()
    }
}

/// A partition of `Omega` into disjoint nonempty blocks; on a finite space
/// every sub-sigma-algebra is generated by exactly one such partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, omega_len: usize) -> Result<Self, DataError> {
        let mut block_of = vec![usize::MAX; omega_len];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(DataError::InvalidPartition(format!("block {b} is empty")));
            }
            for &w in block {
                if w >= omega_len {
                    return Err(DataError::InvalidPartition(format!(
                        "outcome {w} out of range for |Omega| = {omega_len}"
                    )));
                }
                if block_of[w] != usize::MAX {
                    return Err(DataError::InvalidPartition(format!(
                        "outcome {w} appears in blocks {} and {b}",
                        block_of[w]
                    )));
                }
                block_of[w] = b;
            }
        }
        if let Some(w) = block_of.iter().position(|b| *b == usize::MAX) {
            return Err(DataError::InvalidPartition(format!(
                "outcome {w} is not covered"
            )));
        }
        Ok(Self { blocks, block_of })
    }

    /// The trivial partition `{Omega}`.
    pub fn trivial(omega_len: usize) -> Self {
        Self {
            blocks: vec![(0..omega_len).collect()],
            block_of: vec![0; omega_len],
        }
    }

    /// The discrete partition into singletons.
    pub fn singletons(omega_len: usize) -> Self {
        Self {
            blocks: (0..omega_len).map(|w| vec![w]).collect(),
            block_of: (0..omega_len).collect(),
        }
    }

    /// Level sets of `labels`, blocks ordered by first occurrence.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut reps: Vec<&T> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of = Vec::with_capacity(labels.len());
        for (w, l) in labels.iter().enumerate() {
            let b = match reps.iter().position(|r| *r == l) {
                Some(b) => b,
                None => {
                    reps.push(l);
                    blocks.push(Vec::new());
                    reps.len() - 1
                }
            };
            blocks[b].push(w);
            block_of.push(b);
        }
        Self { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, w: usize) -> usize {
        self.block_of[w]
    }

    pub fn omega_len(&self) -> usize {
        self.block_of.len()
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.omega_len() == coarser.omega_len()
            && self.blocks.iter().all(|block| {
                let b = coarser.block_of(block[0]);
                block.iter().all(|&w| coarser.block_of(w) == b)
            })
    }
}
