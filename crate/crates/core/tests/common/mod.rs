//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use robsub::graph::{Graph, SbmParams};
use robsub::objective::SetObjective;

/// Expected spread by enumerating every `(edge, step)` attempt outcome and
/// simulating synchronously step by step. Seeds are active at step 1.
pub fn brute_spread(n: usize, edges: &[(usize, usize)], p: &[f64], horizon: usize, seeds: &[usize]) -> f64 {
    let coins = edges.len() * horizon;
    assert!(coins <= 22, "too many coins for the oracle");
    let mut total = 0.0;
    for mask in 0u64..(1u64 << coins) {
        let mut prob = 1.0;
        for e in 0..edges.len() {
            for t in 0..horizon {
                let bit = mask >> (e * horizon + t) & 1 == 1;
                prob *= if bit { p[e] } else { 1.0 - p[e] };
            }
        }
        if prob == 0.0 {
            continue;
        }
        let mut active = vec![false; n];
        for &s in seeds {
            active[s] = true;
        }
        for t in 0..horizon {
            let before = active.clone();
            for (e, &(a, b)) in edges.iter().enumerate() {
                if mask >> (e * horizon + t) & 1 == 1 {
                    if before[a] {
                        active[b] = true;
                    }
                    if before[b] {
                        active[a] = true;
                    }
                }
            }
        }
        total += prob * active.iter().filter(|&&x| x).count() as f64;
    }
    total
}

/// All subsets of `0..n` as sorted vectors.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect()
}

/// Subsets of size at most `k`.
pub fn small_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    all_subsets(n).into_iter().filter(|s| s.len() <= k).collect()
}

/// Best value over all subsets of size at most `k`.
pub fn brute_opt<F: SetObjective + ?Sized>(f: &F, k: usize) -> f64 {
    small_subsets(f.ground_size(), k)
        .iter()
        .map(|s| f.exact_value(s).unwrap_or_else(|| f.value(s)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Multilinear extension by summing over all `2^n` sets.
pub fn brute_multilinear<F: SetObjective + ?Sized>(f: &F, x: &[f64]) -> f64 {
    let n = x.len();
    all_subsets(n)
        .iter()
        .map(|s| {
            let prob: f64 = (0..n).map(|i| if s.contains(&i) { x[i] } else { 1.0 - x[i] }).product();
            prob * f.value(s)
        })
        .sum()
}

/// Central differences.
pub fn finite_diff(fun: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (fun(&a) - fun(&b)) / (2.0 * h)
        })
        .collect()
}

/// Maximum of `fun` over a `steps × steps` grid of `[0, hi0] × [0, hi1]`,
/// restricted to points accepted by `feasible`.
pub fn grid_max_2d(fun: impl Fn(&[f64]) -> f64, hi: [f64; 2], steps: usize, feasible: impl Fn(&[f64]) -> bool) -> (Vec<f64>, f64) {
    let mut best = (vec![0.0, 0.0], f64::NEG_INFINITY);
    for a in 0..steps {
        for b in 0..steps {
            let x = [hi[0] * a as f64 / (steps - 1) as f64, hi[1] * b as f64 / (steps - 1) as f64];
            if feasible(&x) {
                let v = fun(&x);
                if v > best.1 {
                    best = (x.to_vec(), v);
                }
            }
        }
    }
    best
}

/// Rockafellar-Uryasev CVaR of equally weighted values by sorting: the mean
/// of the lowest `α` fraction, splitting the boundary atom.
pub fn sorted_cvar(values: &[f64], alpha: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let w = 1.0 / v.len() as f64;
    let mut mass = 0.0;
    let mut acc = 0.0;
    for x in v {
        let take = w.min(alpha - mass);
        if take <= 0.0 {
            break;
        }
        acc += take * x;
        mass += take;
    }
    acc / alpha
}

/// `max_x min_i f_i(x)` over the simplex of mixed strategies on the listed
/// pure sets, for two members, by scanning the mixing weight of each pair
/// of sets (two-member games have optimal supports of size at most two).
pub fn two_member_maximin(values: &[[f64; 2]], steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in values {
        for b in values {
            for s in 0..=steps {
                let w = s as f64 / steps as f64;
                let v0 = w * a[0] + (1.0 - w) * b[0];
                let v1 = w * a[1] + (1.0 - w) * b[1];
                best = best.max(v0.min(v1));
            }
        }
    }
    best
}

/// Exact expected spread of the best non-adaptive and adaptive two-round
/// policies by expanding the policy tree. `f` maps a set of attended seeds
/// to its spread; every invitee attends independently with probability `q`.
pub fn attendance_expectation<F: SetObjective + ?Sized>(f: &F, base: &[usize], invited: &[usize], q: &[f64]) -> f64 {
    let m = invited.len();
    let mut total = 0.0;
    for mask in 0u32..1 << m {
        let mut prob = 1.0;
        let mut set = base.to_vec();
        for (j, &v) in invited.iter().enumerate() {
            if mask >> j & 1 == 1 {
                prob *= q[v];
                set.push(v);
            } else {
                prob *= 1.0 - q[v];
            }
        }
        set.sort_unstable();
        set.dedup();
        total += prob * f.value(&set);
    }
    total
}

/// Expected final spread of a policy that invites `first` in round one and
/// then, for each attendance outcome, invites `second(attended)`.
pub fn two_round_policy_value<F: SetObjective + ?Sized>(f: &F, first: &[usize], q: &[f64], second: impl Fn(&[usize]) -> Vec<usize>) -> f64 {
    let m = first.len();
    let mut total = 0.0;
    for mask in 0u32..1 << m {
        let mut prob = 1.0;
        let mut attended = Vec::new();
        for (j, &v) in first.iter().enumerate() {
            if mask >> j & 1 == 1 {
                prob *= q[v];
                attended.push(v);
            } else {
                prob *= 1.0 - q[v];
            }
        }
        if prob == 0.0 {
            continue;
        }
        let next = second(&attended);
        total += prob * attendance_expectation(f, &attended, &next, q);
    }
    total
}

/// Ground-truth community of each node of a planted partition.
pub fn labels_of(params: &SbmParams) -> Vec<usize> {
    params.labels()
}

/// Edge set as pairs with `u < v`, sorted.
pub fn edge_set(g: &Graph) -> Vec<(usize, usize)> {
    let mut e = g.edges().to_vec();
    e.sort_unstable();
    e
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let v = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v.sqrt())
}
