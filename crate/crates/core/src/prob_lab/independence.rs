use super::{RandomVariable, EXACT_TOL};
use crate::data::{FiniteProbSpace, Partition};

/// Level sets of a random vector, as a partition of `Omega`.
fn preimages(vector: &[RandomVariable], len: usize) -> Partition {
    let labels: Vec<Vec<u64>> = (0..len)
        .map(|w| vector.iter().map(|v| v.at(w).to_bits()).collect())
        .collect();
    Partition::from_labels(&labels)
}

/// `max |P(V_1 = v_1, ..., V_k = v_k) - prod_j P(V_j = v_j)|` over all value
/// combinations of the random vectors `V_j` (each a list of coordinates).
/// Equality on these atoms is equivalent to the product rule on the whole
/// lattice of value-level events, since every such event is a disjoint union
/// of atoms and every sub-family is obtained by summing out the others.
pub fn independence_discrepancy(space: &FiniteProbSpace, vectors: &[Vec<RandomVariable>]) -> f64 {
    let parts: Vec<Partition> = vectors.iter().map(|v| preimages(v, space.len())).collect();
    let p = space.probs();
    let marginals: Vec<Vec<f64>> = parts
        .iter()
        .map(|part| part.blocks().iter().map(|b| space.prob_of(b)).collect())
        .collect();
    // joint mass of each combination of level sets that actually occurs
    let mut joint: std::collections::HashMap<Vec<usize>, f64> = std::collections::HashMap::new();
    for (w, pw) in p.iter().enumerate() {
        let key: Vec<usize> = parts.iter().map(|part| part.block_of(w)).collect();
        *joint.entry(key).or_insert(0.0) += pw;
    }
    let mut worst = 0.0f64;
    let mut idx = vec![0usize; parts.len()];
    loop {
        let product: f64 = idx.iter().zip(&marginals).map(|(k, m)| m[*k]).product();
        let j = joint.get(&idx).copied().unwrap_or(0.0);
        worst = worst.max((j - product).abs());
        // odometer over all combinations
        let mut d = 0;
        loop {
            if d == idx.len() {
                return worst;
            }
            idx[d] += 1;
            if idx[d] < marginals[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Mutual independence of the random vectors, up to [`EXACT_TOL`].
pub fn independence_check(space: &FiniteProbSpace, vectors: &[Vec<RandomVariable>]) -> bool {
    vectors.len() < 2 || independence_discrepancy(space, vectors) <= EXACT_TOL
}

/// Independence of `y` from `sigma(partition)`.
pub fn independent_of_partition(space: &FiniteProbSpace, partition: &Partition, y: &RandomVariable) -> bool {
    let labels = RandomVariable::from_fn(space.len(), |w| partition.block_of(w) as f64)
        .expect("block indices are finite");
    independence_check(space, &[vec![labels], vec![y.clone()]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: Vec<f64>) -> RandomVariable {
        RandomVariable::new(v).unwrap()
    }

    #[test]
    fn product_coordinates_independent() {
        let a = FiniteProbSpace::from_probs(vec![0.2, 0.3, 0.5]).unwrap();
        let b = FiniteProbSpace::from_probs(vec![0.6, 0.4]).unwrap();
        let ab = a.product(&b);
        let first = rv((0..6).map(|w| (w / 2) as f64).collect());
        let second = rv((0..6).map(|w| (w % 2) as f64).collect());
        assert!(independence_check(&ab, &[vec![first.clone()], vec![second]]));
        assert!(!independence_check(&ab, &[vec![first.clone()], vec![first]]));
        let constant = rv(vec![1.0; 6]);
        assert!(independence_check(&ab, &[vec![constant.clone()], vec![constant]]));
    }

    #[test]
    fn grouping() {
        // three independent bits on the uniform cube
        let s = FiniteProbSpace::uniform(8).unwrap();
        let bit = |k: usize| rv((0..8).map(|w| ((w >> k) & 1) as f64).collect());
        let (v1, v2, v3) = (bit(0), bit(1), bit(2));
        assert!(independence_check(&s, &[vec![v1.clone()], vec![v2.clone()], vec![v3.clone()]]));
        assert!(independence_check(&s, &[vec![v1.clone(), v2.clone()], vec![v3.clone()]]));
        // V1 xor V2 is pairwise independent of V1 but not of (V1, V2)
        let x = rv((0..8).map(|w| ((w & 1) ^ ((w >> 1) & 1)) as f64).collect());
        assert!(independence_check(&s, &[vec![v1.clone()], vec![x.clone()]]));
        assert!(!independence_check(&s, &[vec![v1, v2], vec![x]]));
    }
}
