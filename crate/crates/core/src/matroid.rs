//! Matroid constraints: independence tests, linear optimization over the
//! matroid polytope, and convex decomposition of fractional points.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Slack allowed when checking polytope membership.
pub const POLYTOPE_TOL: f64 = 1e-9;

/// Independence oracle for a user-supplied matroid.
pub trait IndependenceOracle: Send + Sync {
    fn ground_size(&self) -> usize;
    fn is_independent(&self, set: &[usize]) -> bool;
}

#[derive(Clone)]
pub enum Constraint {
    /// At most `k` items (uniform matroid).
    Cardinality(usize),
    /// Item `i` belongs to part `part_of[i]`; at most `caps[p]` items from part `p`.
    Partition { part_of: Vec<usize>, caps: Vec<usize> },
    Oracle(Arc<dyn IndependenceOracle>),
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Cardinality(k) => write!(f, "Cardinality({k})"),
            Constraint::Partition { caps, .. } => write!(f, "Partition(caps = {caps:?})"),
            Constraint::Oracle(o) => write!(f, "Oracle(n = {})", o.ground_size()),
        }
    }
}

impl Constraint {
    pub fn is_independent(&self, set: &[usize]) -> bool {
        match self {
            Constraint::Cardinality(k) => set.len() <= *k,
            Constraint::Partition { part_of, caps } => {
                let mut used = vec![0usize; caps.len()];
                for &i in set {
                    let Some(&p) = part_of.get(i) else { return false };
                    used[p] += 1;
                    if used[p] > caps[p] {
                        return false;
                    }
                }
                true
            }
            Constraint::Oracle(o) => o.is_independent(set),
        }
    }

    /// Whether `set ∪ {i}` is independent (`set` sorted, `i ∉ set`).
    pub fn can_add(&self, set: &[usize], i: usize) -> bool {
        match self {
            Constraint::Cardinality(k) => set.len() < *k,
            _ => self.is_independent(&crate::objective::with_item(set, i)),
        }
    }

    /// Rank of the matroid restricted to `0..n`.
    pub fn rank(&self, n: usize) -> usize {
        match self {
            Constraint::Cardinality(k) => (*k).min(n),
            _ => {
                let mut set = Vec::new();
                for i in 0..n {
                    if self.can_add(&set, i) {
                        set.push(i);
                    }
                }
                set.len()
            }
        }
    }

    /// Maximize `w·x` over the matroid polytope: matroid greedy over items
    /// with positive weight, heaviest first, lowest id on ties. For a
    /// cardinality constraint this is top-`k` selection.
    pub fn linear_opt(&self, weights: &[f64]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let mut set: Vec<usize> = Vec::new();
        for i in order {
            if let Constraint::Cardinality(k) = self {
                if set.len() >= *k {
                    break;
                }
            }
            if self.can_add(&sorted(&set), i) {
                set.push(i);
            }
        }
        set.sort_unstable();
        set
    }

    /// Check that `x` lies in the matroid polytope. Oracle matroids are only
    /// checked for box bounds.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if let Some((i, v)) = x
            .iter()
            .enumerate()
            .find(|(_, v)| !(-POLYTOPE_TOL..=1.0 + POLYTOPE_TOL).contains(*v))
        {
            return Err(Error::input(format!("x[{i}] = {v} outside [0, 1]")));
        }
        match self {
            Constraint::Cardinality(k) => {
                let s: f64 = x.iter().sum();
                if s > *k as f64 + POLYTOPE_TOL * (1.0 + x.len() as f64) {
                    return Err(Error::input(format!("sum(x) = {s} exceeds k = {k}")));
                }
            }
            Constraint::Partition { part_of, caps } => {
                let mut sums = vec![0.0; caps.len()];
                for (i, v) in x.iter().enumerate() {
                    let p = *part_of
                        .get(i)
                        .ok_or_else(|| Error::input(format!("item {i} has no part")))?;
                    sums[p] += v;
                }
                for (p, (s, &c)) in sums.iter().zip(caps).enumerate() {
                    if *s > c as f64 + POLYTOPE_TOL * (1.0 + x.len() as f64) {
                        return Err(Error::input(format!("part {p} sum {s} exceeds cap {c}")));
                    }
                }
            }
            Constraint::Oracle(_) => {}
        }
        Ok(())
    }

    /// Write `x` as a convex combination of independent sets.
    ///
    /// Uses systematic sampling: items are laid end to end on `[0, Σx)` and a
    /// comb of unit-spaced teeth with offset `u ∈ [0, 1)` picks the items it
    /// hits. Each item is hit with probability `x_i`, and each part of a
    /// partition matroid gets its own line so per-part counts stay within caps.
    /// Not available for oracle matroids.
    pub fn decompose(&self, x: &[f64]) -> Result<Vec<(Vec<usize>, f64)>> {
        self.check_point(x)?;
        let lines: Vec<(Vec<usize>, usize)> = match self {
            Constraint::Cardinality(k) => vec![((0..x.len()).collect(), *k)],
            Constraint::Partition { part_of, caps } => {
                let mut lines: Vec<(Vec<usize>, usize)> = caps.iter().map(|&c| (Vec::new(), c)).collect();
                for i in 0..x.len() {
                    lines[part_of[i]].0.push(i);
                }
                lines
            }
            Constraint::Oracle(_) => {
                return Err(Error::Unsupported(
                    "decomposition of points in an oracle matroid polytope; pass an explicit convex combination".into(),
                ))
            }
        };
        let x: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        // Cumulative intervals per line.
        let mut cuts = vec![0.0, 1.0];
        let mut layout: Vec<(usize, f64, f64, f64)> = Vec::new(); // (item, start, end, line limit)
        for (items, cap) in &lines {
            let mut c = 0.0;
            let mut cum = Vec::with_capacity(items.len());
            for &i in items {
                let start = c;
                c += x[i];
                cum.push((i, start, c));
            }
            let limit = c.min(*cap as f64);
            for (i, s, e) in cum {
                if e > s {
                    layout.push((i, s, e, limit));
                    cuts.push(s.fract());
                    cuts.push(e.fract());
                }
            }
            cuts.push(limit.fract());
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut parts = Vec::new();
        for w in cuts.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let u = 0.5 * (w[0] + w[1]);
            let mut set: Vec<usize> = layout
                .iter()
                .filter(|&&(_, s, e, limit)| {
                    let tooth = u + (s - u).ceil();
                    tooth < e && tooth < limit
                })
                .map(|&(i, ..)| i)
                .collect();
            set.sort_unstable();
            parts.push((set, len));
        }
        Ok(merge_duplicate_sets(parts))
    }

    /// Exhaustively check downward closure on a small ground set.
    pub fn is_downward_closed(&self, n: usize) -> bool {
        assert!(n <= 16, "exhaustive check limited to 16 items");
        for mask in 0u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if !self.is_independent(&set) {
                continue;
            }
            for j in 0..set.len() {
                let mut sub = set.clone();
                sub.remove(j);
                if !self.is_independent(&sub) {
                    return false;
                }
            }
        }
        true
    }
}

fn sorted(set: &[usize]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s
}

pub(crate) fn merge_duplicate_sets(mut parts: Vec<(Vec<usize>, f64)>) -> Vec<(Vec<usize>, f64)> {
    parts.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Vec<usize>, f64)> = Vec::with_capacity(parts.len());
    for (set, w) in parts {
        match out.last_mut() {
            Some((last, lw)) if *last == set => *lw += w,
            _ => out.push((set, w)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marginals(parts: &[(Vec<usize>, f64)], n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (set, w) in parts {
            for &i in set {
                m[i] += w;
            }
        }
        m
    }

    #[test]
    fn linear_opt_is_top_k() {
        let c = Constraint::Cardinality(2);
        assert_eq!(c.linear_opt(&[3.0, 1.0, 2.0]), vec![0, 2]);
        assert_eq!(c.linear_opt(&[1.0, 1.0, 1.0]), vec![0, 1]);
        assert_eq!(c.linear_opt(&[0.0, -1.0, 0.5]), vec![2]);
    }

    #[test]
    fn partition_linear_opt_respects_caps() {
        let c = Constraint::Partition {
            part_of: vec![0, 0, 1, 1],
            caps: vec![1, 1],
        };
        assert_eq!(c.linear_opt(&[5.0, 4.0, 1.0, 2.0]), vec![0, 3]);
        assert!(c.is_downward_closed(4));
    }

    #[test]
    fn decomposition_preserves_marginals() {
        let x = [0.5, 0.25, 0.75, 0.5, 0.0, 1.0];
        let c = Constraint::Cardinality(3);
        let parts = c.decompose(&x).unwrap();
        let total: f64 = parts.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (set, _) in &parts {
            assert!(c.is_independent(set));
        }
        for (a, b) in marginals(&parts, x.len()).iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_decomposition() {
        let c = Constraint::Partition {
            part_of: vec![0, 0, 0, 1, 1],
            caps: vec![1, 2],
        };
        let x = [0.3, 0.3, 0.4, 0.9, 0.6];
        let parts = c.decompose(&x).unwrap();
        for (set, _) in &parts {
            assert!(c.is_independent(set), "{set:?}");
        }
        for (a, b) in marginals(&parts, x.len()).iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_polytope_rejected() {
        let c = Constraint::Cardinality(1);
        assert!(c.decompose(&[0.7, 0.7]).is_err());
        assert!(c.decompose(&[1.2, 0.0]).is_err());
    }
}
