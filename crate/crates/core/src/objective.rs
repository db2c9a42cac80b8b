//! Set-function interface and two reference objectives.

use crate::multilinear;

/// A normalized set function on the ground set `0..ground_size()`.
///
/// Sets are passed as sorted, duplicate-free slices. Objectives whose value
/// is a Monte Carlo estimate fix their randomness at construction, so
/// `value` is a deterministic function of the set.
pub trait SetObjective: Send + Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &[usize]) -> f64;

    /// Exact value where the objective can provide one; `value` is assumed
    /// exact unless overridden.
    fn exact_value(&self, set: &[usize]) -> Option<f64> {
        Some(self.value(set))
    }

    fn is_monotone(&self) -> bool {
        true
    }

    fn is_submodular(&self) -> bool {
        true
    }

    /// `out[i] = f(S ∪ {i}) - f(S \ {i})` for every item.
    fn marginal_gains(&self, set: &[usize], out: &mut [f64]) {
        marginal_gains_by_value(self, set, out)
    }

    /// Closed-form multilinear extension, when the objective has one.
    fn closed_form_multilinear(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    fn closed_form_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Largest singleton value, `max_j f({j})`.
    fn singleton_bound(&self) -> f64 {
        (0..self.ground_size())
            .map(|j| self.value(&[j]))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn marginal_gains_by_value<F: SetObjective + ?Sized>(f: &F, set: &[usize], out: &mut [f64]) {
    let base = f.value(set);
    let mut buf = Vec::with_capacity(set.len() + 1);
    for (i, slot) in out.iter_mut().enumerate() {
        buf.clear();
        match set.binary_search(&i) {
            Ok(pos) => {
                buf.extend_from_slice(&set[..pos]);
                buf.extend_from_slice(&set[pos + 1..]);
                *slot = base - f.value(&buf);
            }
            Err(pos) => {
                buf.extend_from_slice(&set[..pos]);
                buf.push(i);
                buf.extend_from_slice(&set[pos..]);
                *slot = f.value(&buf) - base;
            }
        }
    }
}

/// Insert `i` into a sorted set, returning a new vector.
pub fn with_item(set: &[usize], i: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(set.len() + 1);
    let pos = set.partition_point(|&x| x < i);
    out.extend_from_slice(&set[..pos]);
    out.push(i);
    out.extend_from_slice(&set[pos..]);
    out
}

/// Normalize an arbitrary item list to a sorted, duplicate-free set.
pub fn normalize_set(mut items: Vec<usize>) -> Vec<usize> {
    items.sort_unstable();
    items.dedup();
    items
}

/// `f(S) = Σ_{i ∈ S} w_i` with nonnegative weights.
#[derive(Debug, Clone)]
pub struct ModularObjective {
    weights: Vec<f64>,
}

impl ModularObjective {
    pub fn new(weights: Vec<f64>) -> Self {
        assert!(weights.iter().all(|&w| w >= 0.0), "modular weights must be nonnegative");
        ModularObjective { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetObjective for ModularObjective {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.weights[i]).sum()
    }

    fn marginal_gains(&self, _set: &[usize], out: &mut [f64]) {
        out.copy_from_slice(&self.weights);
    }

    fn closed_form_multilinear(&self, x: &[f64]) -> Option<f64> {
        Some(x.iter().zip(&self.weights).map(|(a, b)| a * b).sum())
    }

    fn closed_form_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.weights.clone())
    }

    fn singleton_bound(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

/// Weighted coverage: item `i` covers the elements `covers[i]`, and
/// `f(S)` is the total weight of elements covered by at least one item.
#[derive(Debug, Clone)]
pub struct CoverageObjective {
    covers: Vec<Vec<usize>>,
    element_weights: Vec<f64>,
    covered_by: Vec<Vec<usize>>,
}

impl CoverageObjective {
    pub fn new(covers: Vec<Vec<usize>>, element_weights: Vec<f64>) -> Self {
        assert!(element_weights.iter().all(|&w| w >= 0.0), "element weights must be nonnegative");
        let mut covered_by = vec![Vec::new(); element_weights.len()];
        let covers: Vec<Vec<usize>> = covers.into_iter().map(normalize_set).collect();
        for (i, list) in covers.iter().enumerate() {
            for &e in list {
                assert!(e < element_weights.len(), "covered element {e} out of range");
                covered_by[e].push(i);
            }
        }
        CoverageObjective {
            covers,
            element_weights,
            covered_by,
        }
    }

    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }

    pub fn element_weights(&self) -> &[f64] {
        &self.element_weights
    }
}

impl SetObjective for CoverageObjective {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &[usize]) -> f64 {
        let mut hit = vec![false; self.element_weights.len()];
        for &i in set {
            for &e in &self.covers[i] {
                hit[e] = true;
            }
        }
        hit.iter()
            .zip(&self.element_weights)
            .filter(|(h, _)| **h)
            .map(|(_, w)| w)
            .sum()
    }

    fn marginal_gains(&self, set: &[usize], out: &mut [f64]) {
        let mut count = vec![0usize; self.element_weights.len()];
        for &i in set {
            for &e in &self.covers[i] {
                count[e] += 1;
            }
        }
        let mut member = vec![false; self.covers.len()];
        for &i in set {
            member[i] = true;
        }
        for (i, slot) in out.iter_mut().enumerate() {
            // Elements that i alone covers (in S) or that nothing covers (not in S).
            let lonely = if member[i] { 1 } else { 0 };
            *slot = self.covers[i]
                .iter()
                .filter(|&&e| count[e] == lonely)
                .map(|&e| self.element_weights[e])
                .sum();
        }
    }

    fn closed_form_multilinear(&self, x: &[f64]) -> Option<f64> {
        Some(
            self.covered_by
                .iter()
                .zip(&self.element_weights)
                .map(|(items, w)| w * (1.0 - items.iter().map(|&i| 1.0 - x[i]).product::<f64>()))
                .sum(),
        )
    }

    fn closed_form_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.covers.len()];
        for (items, w) in self.covered_by.iter().zip(&self.element_weights) {
            for &i in items {
                let others: f64 = items.iter().filter(|&&j| j != i).map(|&j| 1.0 - x[j]).product();
                g[i] += w * others;
            }
        }
        Some(g)
    }
}

/// `scale · f`, with `scale > 0`.
#[derive(Clone)]
pub struct ScaledObjective {
    inner: std::sync::Arc<dyn SetObjective>,
    scale: f64,
}

impl ScaledObjective {
    pub fn new(inner: std::sync::Arc<dyn SetObjective>, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        ScaledObjective { inner, scale }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl SetObjective for ScaledObjective {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, set: &[usize]) -> f64 {
        self.scale * self.inner.value(set)
    }

    fn exact_value(&self, set: &[usize]) -> Option<f64> {
        self.inner.exact_value(set).map(|v| self.scale * v)
    }

    fn is_monotone(&self) -> bool {
        self.inner.is_monotone()
    }

    fn is_submodular(&self) -> bool {
        self.inner.is_submodular()
    }

    fn marginal_gains(&self, set: &[usize], out: &mut [f64]) {
        self.inner.marginal_gains(set, out);
        for o in out {
            *o *= self.scale;
        }
    }

    fn closed_form_multilinear(&self, x: &[f64]) -> Option<f64> {
        self.inner.closed_form_multilinear(x).map(|v| self.scale * v)
    }

    fn closed_form_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner
            .closed_form_gradient(x)
            .map(|g| g.into_iter().map(|v| self.scale * v).collect())
    }

    fn singleton_bound(&self) -> f64 {
        self.scale * self.inner.singleton_bound()
    }
}

/// Multilinear value, closed form when available and Monte Carlo otherwise.
pub fn multilinear_or_estimate<F: SetObjective + ?Sized>(f: &F, x: &[f64], samples: usize, seed: u64) -> f64 {
    match f.closed_form_multilinear(x) {
        Some(v) => v,
        None => multilinear::multilinear_value(f, x, samples, seed).unwrap_or(f64::NAN),
    }
}

/// Multilinear gradient, closed form when available and Monte Carlo otherwise.
pub fn gradient_or_estimate<F: SetObjective + ?Sized>(f: &F, x: &[f64], samples: usize, seed: u64) -> Vec<f64> {
    match f.closed_form_gradient(x) {
        Some(g) => g,
        None => multilinear::multilinear_grad(f, x, samples, seed).unwrap_or_else(|_| vec![f64::NAN; x.len()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_value_and_gains() {
        let f = CoverageObjective::new(vec![vec![0, 1], vec![1, 2], vec![3]], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.value(&[]), 0.0);
        assert_eq!(f.value(&[0]), 3.0);
        assert_eq!(f.value(&[0, 1]), 6.0);
        let mut fast = vec![0.0; 3];
        let mut slow = vec![0.0; 3];
        for set in [vec![], vec![0], vec![1, 2], vec![0, 1, 2]] {
            f.marginal_gains(&set, &mut fast);
            marginal_gains_by_value(&f, &set, &mut slow);
            assert_eq!(fast, slow, "set {set:?}");
        }
    }

    #[test]
    fn coverage_closed_form_at_vertices() {
        let f = CoverageObjective::new(vec![vec![0, 1], vec![1, 2], vec![3]], vec![1.0, 2.0, 3.0, 4.0]);
        for mask in 0..8usize {
            let set: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            let x: Vec<f64> = (0..3).map(|i| (mask >> i & 1) as f64).collect();
            assert!((f.closed_form_multilinear(&x).unwrap() - f.value(&set)).abs() < 1e-12);
        }
    }

    #[test]
    fn modular_basics() {
        let f = ModularObjective::new(vec![3.0, 1.0, 2.0]);
        assert_eq!(f.value(&[0, 2]), 5.0);
        assert_eq!(f.singleton_bound(), 3.0);
        assert_eq!(with_item(&[0, 2], 1), vec![0, 1, 2]);
    }
}
