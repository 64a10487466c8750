
use super::{validate_probs, DataError, RngStream, PROB_TOL};

/// A distribution on the box `[a, b]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundedDistribution {
    /// Independent uniform coordinates on `[a, b]`.
    UniformBox { a: f64, b: f64, dim: usize },
    /// Finitely many atoms in `[a, b]^dim`.
    Discrete {
        a: f64,
        b: f64,
        dim: usize,
        atoms: Vec<Vec<f64>>,
        probs: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

/// Exact first and second moments of a discrete distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub variances: Vec<f64>,
    pub covariance_trace: f64,
}

impl BoundedDistribution {
    pub fn uniform_box(a: f64, b: f64, dim: usize) -> Result<Self, DataError> {
        check_box(a, b, dim)?;
        Ok(Self::UniformBox { a, b, dim })
    }

    pub fn discrete(
        a: f64,
        b: f64,
        atoms: Vec<Vec<f64>>,
        probs: Vec<f64>,
    ) -> Result<Self, DataError> {
        let dim = atoms.first().map(Vec::len).unwrap_or(0);
        check_box(a, b, dim)?;
        if atoms.len() != probs.len() {
            return Err(DataError::InvalidDistribution(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        validate_probs(&probs).map_err(DataError::InvalidDistribution)?;
        for (k, atom) in atoms.iter().enumerate() {
            if atom.len() != dim {
                return Err(DataError::InvalidDistribution(format!(
                    "atom {k} has dimension {}, expected {dim}",
                    atom.len()
                )));
            }
            if let Some(x) = atom.iter().find(|x| !(a..=b).contains(*x)) {
                return Err(DataError::InvalidDistribution(format!(
                    "atom {k} coordinate {x} outside [{a}, {b}]"
                )));
            }
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self::Discrete {
            a,
            b,
            dim,
            atoms,
            probs,
            cumulative,
        })
    }

    /// Scalar discrete distribution from `(value, probability)` pairs; the
    /// box is the hull of the values.
    pub fn discrete_scalar(points: &[(f64, f64)]) -> Result<Self, DataError> {
        let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        Self::discrete(
            lo,
            hi,
            points.iter().map(|p| vec![p.0]).collect(),
            points.iter().map(|p| p.1).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::UniformBox { dim, .. } | Self::Discrete { dim, .. } => *dim,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Self::UniformBox { a, b, .. } | Self::Discrete { a, b, .. } => (*a, *b),
        }
    }

    /// `max{|a|, |b|}`.
    pub fn sup_abs(&self) -> f64 {
        let (a, b) = self.bounds();
        a.abs().max(b.abs())
    }

    /// Writes one draw into `out` (length `dim`).
    #[inline]
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            Self::UniformBox { a, b, .. } => {
                for x in out.iter_mut() {
                    *x = (a + (b - a) * rng.unit()).min(*b);
                }
            }
            Self::Discrete {
                atoms, cumulative, ..
            } => {
                let k = if atoms.len() == 1 {
                    0
                } else if atoms.len() == 2 {
                    // two-atom laws dominate the experiments; skip the search
                    usize::from(rng.unit() >= cumulative[0])
                } else {
                    let u = rng.unit();
                    cumulative
                        .partition_point(|c| *c <= u)
                        .min(atoms.len() - 1)
                };
                out.copy_from_slice(&atoms[k]);
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    /// `batch` i.i.d. draws.
    pub fn sample_batch(
        &self,
        batch: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<Vec<f64>>, DataError> {
        if batch == 0 {
            return Err(DataError::InvalidBatch);
        }
        Ok((0..batch).map(|_| self.sample(rng)).collect())
    }

    pub fn exact_moments(&self) -> Result<Moments, DataError> {
        let Self::Discrete {
            atoms, probs, dim, ..
        } = self
        else {
            return Err(DataError::Unsupported);
        };
        let mut mean = vec![0.0; *dim];
        for (atom, p) in atoms.iter().zip(probs) {
            for (m, x) in mean.iter_mut().zip(atom) {
                *m += p * x;
            }
        }
        let mut variances = vec![0.0; *dim];
        for (atom, p) in atoms.iter().zip(probs) {
            for ((v, x), m) in variances.iter_mut().zip(atom).zip(&mean) {
                *v += p * (x - m) * (x - m);
            }
        }
        let covariance_trace = variances.iter().sum();
        Ok(Moments {
            mean,
            variances,
            covariance_trace,
        })
    }

    /// Mean vector; exact for both kinds.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            Self::UniformBox { a, b, dim } => vec![0.5 * (a + b); *dim],
            Self::Discrete { .. } => self.exact_moments().expect("discrete").mean,
        }
    }

    /// Law of the linear functional `x -> <w, x>`; `None` for the uniform box.
    pub fn linear_law(&self, w: &[f64]) -> Option<DiscreteLaw> {
        let Self::Discrete { atoms, probs, .. } = self else {
            return None;
        };
        let values = atoms
            .iter()
            .map(|x| x.iter().zip(w).map(|(x, w)| x * w).sum())
            .collect();
        Some(DiscreteLaw {
            values,
            probs: probs.clone(),
        })
    }

    /// Variance of `<w, X>`, exact for both kinds (uniform coordinates are
    /// independent with variance `(b - a)^2 / 12`).
    pub fn linear_variance(&self, w: &[f64]) -> f64 {
        match self {
            Self::UniformBox { a, b, .. } => {
                let unit = (b - a) * (b - a) / 12.0;
                w.iter().map(|w| w * w * unit).sum()
            }
            Self::Discrete { .. } => self.linear_law(w).expect("discrete").variance(),
        }
    }

    /// Atoms of a discrete law, or the box corners and centre for the
    /// uniform box; used as conclusive sample sets by hypothesis checks
    /// whose conditions are linear in the data.
    pub fn support_probe(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Discrete { atoms, .. } => atoms.clone(),
            Self::UniformBox { a, b, dim } => {
                let mut pts: Vec<Vec<f64>> = Vec::new();
                if *dim <= 10 {
                    for mask in 0..(1usize << dim) {
                        pts.push(
                            (0..*dim)
                                .map(|j| if mask >> j & 1 == 1 { *b } else { *a })
                                .collect(),
                        );
                    }
                } else {
                    pts.push(vec![*a; *dim]);
                    pts.push(vec![*b; *dim]);
                }
                pts.push(vec![0.5 * (a + b); *dim]);
                pts
            }
        }
    }
}

fn check_box(a: f64, b: f64, dim: usize) -> Result<(), DataError> {
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(DataError::InvalidDistribution(format!(
            "bounds [{a}, {b}] must be finite with a <= b"
        )));
    }
    if dim == 0 {
        return Err(DataError::InvalidDistribution(
            "dimension must be positive".into(),
        ));
    }
    Ok(())
}

/// A real-valued discrete law: finitely many values with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl DiscreteLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self, DataError> {
        if values.len() != probs.len() {
            return Err(DataError::InvalidDistribution(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        validate_probs(&probs).map_err(DataError::InvalidDistribution)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DataError::InvalidDistribution(
                "values must be finite".into(),
            ));
        }
        Ok(Self { values, probs })
    }

    pub fn uniform(values: Vec<f64>) -> Self {
        let p = 1.0 / values.len() as f64;
        let probs = vec![p; values.len()];
        Self { values, probs }
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| p * f(*v))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|v| (v - m) * (v - m))
    }

    pub fn sup_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }

    /// Pushforward under `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|v| f(*v)).collect(),
            probs: self.probs.clone(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= PROB_TOL
    }
}
