//! Swap rounding: merge a convex combination of independent sets into one
//! random independent set whose inclusion probabilities equal the
//! fractional marginals.
//!
//! Each independent set is padded with dummy elements to a base of the
//! truncated matroid `M' = trunc_r(M ⊕ free(r))`, where `r` is the rank of
//! `M`. Bases are then merged pairwise with strong-exchange swaps.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::matroid::Constraint;
use crate::rng;

struct Padded<'a> {
    c: &'a Constraint,
    n: usize,
    rank: usize,
}

impl Padded<'_> {
    fn pad(&self, set: &[usize]) -> Vec<usize> {
        let mut base = set.to_vec();
        base.extend((0..self.rank - set.len()).map(|d| self.n + d));
        base.sort_unstable();
        base
    }

    fn independent(&self, base: &[usize]) -> bool {
        if base.len() > self.rank {
            return false;
        }
        let real: Vec<usize> = base.iter().copied().filter(|&i| i < self.n).collect();
        self.c.is_independent(&real)
    }

    fn exchange(base: &[usize], out: usize, inn: usize) -> Vec<usize> {
        let mut b: Vec<usize> = base.iter().copied().filter(|&i| i != out).collect();
        b.push(inn);
        b.sort_unstable();
        b
    }
}

/// Round a convex combination `Σ β_j 1_{S_j}` of independent sets.
pub fn swap_round_combination(
    parts: &[(Vec<usize>, f64)],
    c: &Constraint,
    n: usize,
    rng: &mut rng::Rng,
) -> Result<Vec<usize>> {
    let parts: Vec<&(Vec<usize>, f64)> = parts.iter().filter(|p| p.1 > 0.0).collect();
    if parts.is_empty() {
        return Err(Error::input("empty convex combination"));
    }
    for (set, _) in &parts {
        if set.iter().any(|&i| i >= n) || !c.is_independent(set) {
            return Err(Error::input(format!("{set:?} is not an independent set")));
        }
    }
    let rank = c.rank(n);
    let padded = Padded { c, n, rank };
    let mut merged = padded.pad(&parts[0].0);
    let mut weight = parts[0].1;
    for (set, w) in &parts[1..] {
        let mut other = padded.pad(set);
        while merged != other {
            let i = *merged
                .iter()
                .find(|i| other.binary_search(i).is_err())
                .expect("bases differ");
            let j = other
                .iter()
                .copied()
                .filter(|j| merged.binary_search(j).is_err())
                .find(|&j| {
                    padded.independent(&Padded::exchange(&merged, i, j))
                        && padded.independent(&Padded::exchange(&other, j, i))
                })
                .ok_or_else(|| Error::Internal("no strong exchange found; constraint is not a matroid".into()))?;
            if rng.gen::<f64>() * (weight + w) < weight {
                other = Padded::exchange(&other, j, i);
            } else {
                merged = Padded::exchange(&merged, i, j);
            }
        }
        weight += w;
    }
    Ok(merged.into_iter().filter(|&i| i < n).collect())
}

/// Round a fractional point of the matroid polytope to an independent set
/// with `Pr[i ∈ S] = x_i`.
pub fn swap_round(x: &[f64], c: &Constraint, rng_seed: u64) -> Result<Vec<usize>> {
    let parts = c.decompose(x)?;
    swap_round_combination(&parts, c, x.len(), &mut rng::rng_from_seed(rng_seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_point_is_fixed() {
        let c = Constraint::Cardinality(2);
        for seed in 0..20 {
            assert_eq!(swap_round(&[1.0, 0.0, 1.0, 0.0], &c, seed).unwrap(), vec![0, 2]);
        }
    }

    #[test]
    fn single_part_passthrough() {
        let c = Constraint::Cardinality(3);
        let out = swap_round_combination(&[(vec![1, 4], 1.0)], &c, 5, &mut rng::rng_from_seed(0)).unwrap();
        assert_eq!(out, vec![1, 4]);
    }

    #[test]
    fn rejects_dependent_parts() {
        let c = Constraint::Cardinality(1);
        assert!(swap_round_combination(&[(vec![0, 1], 1.0)], &c, 2, &mut rng::rng_from_seed(0)).is_err());
        assert!(swap_round(&[0.9, 0.9], &c, 0).is_err());
    }
}
