//! Field protocols: neighbor-pair network sampling, seeding that is robust to
//! an unknown propagation probability, and multi-round seeding when invited
//! nodes may not show up.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::arisen::QueryLedger;
use crate::domains::InfluenceObjective;
use crate::error::{Error, Result};
use crate::graph::{EdgeParams, Graph};
use crate::greedy::greedy_maximize;
use crate::matroid::Constraint;
use crate::objective::{ScaledObjective, SetObjective};
use crate::rng;

#[derive(Debug, Clone)]
pub struct ChangeSample {
    /// Revealed edges on the full node set.
    pub observed: Graph,
    /// Queried nodes in query order.
    pub queried: Vec<usize>,
    /// Nodes that were drawn uniformly (the rest were neighbors).
    pub random_picks: usize,
}

/// Query `⌈fraction·n⌉` nodes: repeatedly draw a uniform unqueried node and
/// then one uniform neighbor of it, which is queried too unless already known
/// (isolated nodes have no partner). Stops as soon as the target is reached.
pub fn change_sample(graph: &Graph, fraction: f64, rng_seed: u64) -> Result<ChangeSample> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param(format!("fraction {fraction} outside (0, 1]")));
    }
    let n = graph.node_count();
    let target = ((fraction * n as f64).ceil() as usize).min(n);
    let mut ledger = QueryLedger::new(graph, target, rng_seed);
    let mut random_picks = 0;
    while ledger.queries_used() < target {
        let (_, nbrs) = ledger.query_random()?;
        random_picks += 1;
        if ledger.queries_used() == target {
            break;
        }
        if let Some(u) = ledger.choose(&nbrs) {
            if !ledger.is_queried(u) {
                ledger.query_node(u)?;
            }
        }
    }
    Ok(ChangeSample {
        observed: ledger.observed_graph(),
        queried: ledger.queried().to_vec(),
        random_picks,
    })
}

/// `min_j f_j(S)`: monotone but not submodular, so greedy uses full scans.
#[derive(Clone)]
pub struct MinObjective {
    members: Vec<Arc<dyn SetObjective>>,
}

impl MinObjective {
    pub fn new(members: Vec<Arc<dyn SetObjective>>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::input("min objective needs members"));
        };
        if members.iter().any(|f| f.ground_size() != first.ground_size()) {
            return Err(Error::input("members must share a ground set"));
        }
        Ok(MinObjective { members })
    }
}

impl SetObjective for MinObjective {
    fn ground_size(&self) -> usize {
        self.members[0].ground_size()
    }

    fn value(&self, set: &[usize]) -> f64 {
        self.members.iter().map(|f| f.value(set)).fold(f64::INFINITY, f64::min)
    }

    fn exact_value(&self, set: &[usize]) -> Option<f64> {
        let mut best = f64::INFINITY;
        for f in &self.members {
            best = best.min(f.exact_value(set)?);
        }
        Some(best)
    }

    fn is_monotone(&self) -> bool {
        self.members.iter().all(|f| f.is_monotone())
    }

    fn is_submodular(&self) -> bool {
        self.members.len() == 1 && self.members[0].is_submodular()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustPResult {
    pub seeds: Vec<usize>,
    /// `min_p spread(S; p) / spread(greedy_p; p)`.
    pub min_ratio: f64,
    /// `(p, ratio)` for every grid value.
    pub ratios: Vec<(f64, f64)>,
}

/// Seeds that do well for every propagation probability in `p_grid`.
///
/// Each `p` is normalized by the spread of the greedy set tuned to it. Greedy
/// on the minimum normalized spread is compared with every tuned set and the
/// candidate with the best minimum wins. All objectives are sampled with the
/// same seed, so they share uniforms.
pub fn robust_p_heuristic(graph: &Graph, k: usize, p_grid: &[f64], horizon: usize, samples: usize, rng_seed: u64) -> Result<RobustPResult> {
    if p_grid.is_empty() {
        return Err(Error::param("probability grid is empty"));
    }
    let c = Constraint::Cardinality(k);
    let mut scaled: Vec<Arc<dyn SetObjective>> = Vec::new();
    let mut tuned = Vec::new();
    for &p in p_grid {
        let f = InfluenceObjective::sampled(graph, &EdgeParams::uniform(graph, p)?, horizon, samples, rng_seed)?;
        let g = greedy_maximize(&f, &c)?;
        let scale = if g.value > 0.0 { 1.0 / g.value } else { 1.0 };
        tuned.push(g.set);
        scaled.push(Arc::new(ScaledObjective::new(Arc::new(f), scale)));
    }
    let worst = MinObjective::new(scaled.clone())?;
    let mut best = greedy_maximize(&worst, &c)?.set;
    let mut best_value = worst.value(&best);
    for set in tuned {
        let v = worst.value(&set);
        if v > best_value {
            best = set;
            best_value = v;
        }
    }
    let ratios = p_grid.iter().zip(&scaled).map(|(&p, f)| (p, f.value(&best))).collect();
    Ok(RobustPResult {
        seeds: best,
        min_ratio: best_value,
        ratios,
    })
}

/// Probability that each node attends when invited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttendanceModel {
    q: Vec<f64>,
}

impl AttendanceModel {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::input("attendance probabilities must lie in [0, 1]"));
        }
        Ok(AttendanceModel { q })
    }

    pub fn uniform(n: usize, q: f64) -> Result<Self> {
        Self::new(vec![q; n])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.q
    }
}

/// Largest invitation size evaluated by enumerating attendance outcomes;
/// larger ones use `ATTENDANCE_SAMPLES` sampled outcomes.
pub const EXACT_ATTENDANCE_CAP: usize = 12;
pub const ATTENDANCE_SAMPLES: usize = 256;

/// Expected gain over `f(base)` from inviting `I` when each invitee attends
/// independently: `E_J[f(base ∪ J)] - f(base)`, `J ⊆ I`.
struct InvitationObjective<'a, F: SetObjective + ?Sized> {
    f: &'a F,
    base: Vec<usize>,
    base_value: f64,
    q: &'a [f64],
    rng_seed: u64,
}

impl<F: SetObjective + ?Sized> InvitationObjective<'_, F> {
    fn with_base(&self, attended: impl Iterator<Item = usize>) -> Vec<usize> {
        let mut s = self.base.clone();
        s.extend(attended);
        crate::objective::normalize_set(s)
    }
}

impl<F: SetObjective + ?Sized> SetObjective for InvitationObjective<'_, F> {
    fn ground_size(&self) -> usize {
        self.f.ground_size()
    }

    fn value(&self, set: &[usize]) -> f64 {
        if set.len() <= EXACT_ATTENDANCE_CAP {
            let mut total = 0.0;
            for mask in 0u32..(1 << set.len()) {
                let mut prob = 1.0;
                for (j, &i) in set.iter().enumerate() {
                    prob *= if mask >> j & 1 == 1 { self.q[i] } else { 1.0 - self.q[i] };
                }
                if prob > 0.0 {
                    let s = self.with_base(set.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &i)| i));
                    total += prob * self.f.value(&s);
                }
            }
            total - self.base_value
        } else {
            let mut total = 0.0;
            for r in 0..ATTENDANCE_SAMPLES {
                let mut rng = rng::stream_rng(self.rng_seed, r as u64);
                let coins: Vec<bool> = set.iter().map(|&i| rng.gen::<f64>() < self.q[i]).collect();
                let s = self.with_base(set.iter().zip(&coins).filter(|(_, &c)| c).map(|(&i, _)| i));
                total += self.f.value(&s);
            }
            total / ATTENDANCE_SAMPLES as f64 - self.base_value
        }
    }

    fn is_monotone(&self) -> bool {
        self.f.is_monotone()
    }

    fn is_submodular(&self) -> bool {
        self.f.is_submodular()
    }
}

/// Greedy invitation list for one round given the nodes that have already
/// attended (who are not invited again). Deterministic in its inputs.
pub fn plan_round<F: SetObjective + ?Sized>(f: &F, attended: &[usize], k: usize, attendance: &AttendanceModel, rng_seed: u64) -> Result<Vec<usize>> {
    let n = f.ground_size();
    if attendance.q.len() != n {
        return Err(Error::input("attendance model does not match the ground set"));
    }
    let base = crate::objective::normalize_set(attended.to_vec());
    let mut part_of = vec![0usize; n];
    for &v in &base {
        part_of[v] = 1;
    }
    let c = Constraint::Partition { part_of, caps: vec![k, 0] };
    let obj = InvitationObjective {
        f,
        base_value: f.value(&base),
        base,
        q: &attendance.q,
        rng_seed,
    };
    Ok(greedy_maximize(&obj, &c)?.set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub invited: Vec<usize>,
    pub attended: Vec<usize>,
    /// Expected spread of every node that has attended so far.
    pub cumulative_spread: f64,
}

/// Multi-round seeding: plan invitations greedily, observe who attends
/// (independent coins, round `r` from stream `(rng_seed, r)`), and plan the
/// next round around the nodes that came.
pub fn adaptive_greedy<F: SetObjective + ?Sized>(
    f: &F,
    k_per_round: usize,
    rounds: usize,
    attendance: &AttendanceModel,
    rng_seed: u64,
) -> Result<Vec<RoundRecord>> {
    if rounds == 0 {
        return Err(Error::param("need at least one round"));
    }
    let mut attended_all: Vec<usize> = Vec::new();
    let mut trace = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let invited = plan_round(f, &attended_all, k_per_round, attendance, rng::derive_seed(rng_seed, 2 * r as u64))?;
        let mut rng = rng::stream_rng(rng_seed, 2 * r as u64 + 1);
        let attended: Vec<usize> = invited.iter().copied().filter(|&v| rng.gen::<f64>() < attendance.q[v]).collect();
        attended_all = crate::objective::normalize_set([attended_all, attended.clone()].concat());
        trace.push(RoundRecord {
            invited,
            attended,
            cumulative_spread: f.value(&attended_all),
        });
    }
    Ok(trace)
}

/// `adaptive_greedy` on sampled influence spread (realizations from `derive(rng_seed, 0)`).
pub fn adaptive_greedy_influence(
    graph: &Graph,
    p: &EdgeParams,
    k_per_round: usize,
    rounds: usize,
    attendance: &AttendanceModel,
    horizon: usize,
    samples: usize,
    rng_seed: u64,
) -> Result<Vec<RoundRecord>> {
    let f = InfluenceObjective::sampled(graph, p, horizon, samples, rng::derive_seed(rng_seed, 0))?;
    adaptive_greedy(&f, k_per_round, rounds, attendance, rng::derive_seed(rng_seed, 1))
}
