//! Greedy maximization under a matroid constraint and the brute-force
//! optimum used to check it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matroid::Constraint;
use crate::objective::{with_item, SetObjective};

/// Default cap on the number of independent sets [`exhaustive_opt`] visits.
pub const EXHAUSTIVE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    pub set: Vec<usize>,
    pub value: f64,
    /// Items in the order they were added.
    pub order: Vec<usize>,
}

/// Greedy: repeatedly add the feasible item of largest marginal gain, lowest
/// id on ties. Submodular objectives use lazy evaluation, which returns the
/// same set as the plain scan.
pub fn greedy_maximize<F: SetObjective + ?Sized>(f: &F, c: &Constraint) -> Result<GreedyResult> {
    if !f.is_monotone() {
        return Err(Error::NotMonotone);
    }
    if f.is_submodular() {
        Ok(lazy_greedy(f, c))
    } else {
        Ok(plain_greedy(f, c))
    }
}

/// Full scan of every candidate at every step.
pub fn plain_greedy<F: SetObjective + ?Sized>(f: &F, c: &Constraint) -> GreedyResult {
    let n = f.ground_size();
    let mut set: Vec<usize> = Vec::new();
    let mut order = Vec::new();
    let mut value = f.value(&set);
    let mut alive: Vec<usize> = (0..n).collect();
    loop {
        alive.retain(|&i| set.binary_search(&i).is_err() && c.can_add(&set, i));
        if alive.is_empty() {
            break;
        }
        let gains: Vec<f64> = alive
            .par_iter()
            .map(|&i| f.value(&with_item(&set, i)) - value)
            .collect();
        let mut best = 0;
        for j in 1..alive.len() {
            if gains[j] > gains[best] {
                best = j;
            }
        }
        let pick = alive[best];
        set = with_item(&set, pick);
        order.push(pick);
        value = f.value(&set);
    }
    GreedyResult { set, value, order }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    key: f64,
    item: usize,
    fresh: bool,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Max-heap on key, then lowest item id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then(other.item.cmp(&self.item))
    }
}

/// Lazy greedy. Stale gains act as upper bounds; they are inflated by a
/// relative slack so floating-point rounding in `f(S+i) - f(S)` cannot let a
/// stale bound sit below a fresh gain.
pub fn lazy_greedy<F: SetObjective + ?Sized>(f: &F, c: &Constraint) -> GreedyResult {
    let n = f.ground_size();
    let mut set: Vec<usize> = Vec::new();
    let mut order = Vec::new();
    let mut value = f.value(&set);
    let mut bounds: Vec<(usize, f64)> = (0..n)
        .into_par_iter()
        .map(|i| (i, f.value(&[i]) - value))
        .collect();
    let mut first = true;
    loop {
        bounds.retain(|&(i, _)| c.can_add(&set, i));
        if bounds.is_empty() {
            break;
        }
        let slack = 1e-9 * value.abs().max(1.0);
        let mut heap: BinaryHeap<Entry> = bounds
            .iter()
            .map(|&(item, g)| Entry {
                key: if first { g } else { g + slack },
                item,
                fresh: first,
            })
            .collect();
        let pick = loop {
            let top = heap.pop().expect("nonempty heap");
            if top.fresh {
                break top;
            }
            let g = f.value(&with_item(&set, top.item)) - value;
            heap.push(Entry {
                key: g,
                item: top.item,
                fresh: true,
            });
        };
        first = false;
        // Refresh stored bounds with whatever was recomputed this round.
        let fresh: Vec<Entry> = heap.into_iter().filter(|e| e.fresh).collect();
        for e in fresh {
            if let Some(slot) = bounds.iter_mut().find(|b| b.0 == e.item) {
                slot.1 = e.key;
            }
        }
        bounds.retain(|&(i, _)| i != pick.item);
        set = with_item(&set, pick.item);
        order.push(pick.item);
        value = f.value(&set);
    }
    GreedyResult { set, value, order }
}

/// Exact maximizer by enumerating every independent set (exact values where
/// the objective provides them). Ties prefer larger sets, then the earlier
/// set in lexicographic order.
pub fn exhaustive_opt<F: SetObjective + ?Sized>(f: &F, c: &Constraint) -> Result<(Vec<usize>, f64)> {
    exhaustive_opt_with_cap(f, c, EXHAUSTIVE_CAP)
}

pub fn exhaustive_opt_with_cap<F: SetObjective + ?Sized>(
    f: &F,
    c: &Constraint,
    cap: u128,
) -> Result<(Vec<usize>, f64)> {
    let sets = enumerate_independent_sets(f.ground_size(), c, cap, false)?;
    let values: Vec<f64> = sets
        .par_iter()
        .map(|s| f.exact_value(s).unwrap_or_else(|| f.value(s)))
        .collect();
    let mut best = 0;
    for j in 1..sets.len() {
        if values[j] > values[best] || (values[j] == values[best] && sets[j].len() > sets[best].len()) {
            best = j;
        }
    }
    Ok((sets[best].clone(), values[best]))
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut b: u128 = 1;
    for j in 0..k {
        b = b.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    b
}

/// Number of sets of size at most `k` from `n` items.
pub fn count_small_sets(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for j in 0..=k.min(n) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    total
}

/// All independent sets (or only the maximal ones), each sorted, in
/// depth-first lexicographic order. Fails once more than `cap` sets would be
/// produced.
pub fn enumerate_independent_sets(
    n: usize,
    c: &Constraint,
    cap: u128,
    maximal_only: bool,
) -> Result<Vec<Vec<usize>>> {
    if let Constraint::Cardinality(k) = c {
        let total = if maximal_only {
            binomial(n, (*k).min(n))
        } else {
            count_small_sets(n, *k)
        };
        if total > cap {
            return Err(Error::SizeCap {
                what: "independent sets",
                required: total,
                cap,
            });
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn walk(
        n: usize,
        start: usize,
        c: &Constraint,
        cap: u128,
        maximal_only: bool,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        let addable: Vec<usize> = (start..n).filter(|&i| c.can_add(current, i)).collect();
        let maximal = addable.is_empty()
            && (0..start).all(|i| current.binary_search(&i).is_ok() || !c.can_add(current, i));
        if !maximal_only || maximal {
            if out.len() as u128 >= cap {
                return Err(Error::SizeCap {
                    what: "independent sets",
                    required: cap + 1,
                    cap,
                });
            }
            out.push(current.clone());
        }
        for i in addable {
            current.push(i);
            walk(n, i + 1, c, cap, maximal_only, current, out)?;
            current.pop();
        }
        Ok(())
    }
    walk(n, 0, c, cap, maximal_only, &mut current, &mut out)?;
    Ok(out)
}
