//! Robust maximization of the worst member of a family of monotone
//! submodular functions, `max_{p ∈ Δ(I)} min_i E_{S~p}[f_i(S)]`.
//!
//! [`equator_solve`] runs stochastic Frank-Wolfe on `min_i F_i(x)` (the
//! pointwise minimum of multilinear extensions), stepping along the gradient
//! of whichever member the best-response oracle returns. The final point is
//! an average of polytope vertices, which swap rounding turns into pure
//! strategies. [`double_oracle_solve`] and [`exact_minimax_lp`] are the
//! comparison baselines.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{enumerate_independent_sets, greedy_maximize};
use crate::lp::solve_matrix_game;
use crate::matroid::{merge_duplicate_sets, Constraint};
use crate::multilinear::{check_unit_box, sample_sets};
use crate::objective::{gradient_or_estimate, SetObjective};
use crate::rng;
use crate::rounding::swap_round_combination;

/// Cap on the number of bases enumerated by [`exact_minimax_lp`].
pub const LP_SET_CAP: u128 = 5000;
/// Largest family [`exact_minimax_lp`] accepts.
pub const LP_MEMBER_CAP: usize = 100;

/// Explicit family `f_1..f_m` with a bound `M` on singleton values.
#[derive(Clone)]
pub struct ObjectiveFamily {
    members: Vec<Arc<dyn SetObjective>>,
    bound: f64,
}

impl std::fmt::Debug for ObjectiveFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObjectiveFamily")
            .field("members", &self.members.len())
            .field("ground_size", &self.ground_size())
            .field("bound", &self.bound)
            .finish()
    }
}

impl ObjectiveFamily {
    /// Family with `M` computed from the members.
    pub fn new(members: Vec<Arc<dyn SetObjective>>) -> Result<Self> {
        Self::check_members(&members)?;
        let bound = members.iter().map(|f| f.singleton_bound()).fold(0.0, f64::max);
        Ok(ObjectiveFamily { members, bound })
    }

    /// Family with a caller-supplied `M`, checked against the members.
    pub fn with_bound(members: Vec<Arc<dyn SetObjective>>, bound: f64) -> Result<Self> {
        let fam = Self::new(members)?;
        if bound + 1e-12 < fam.bound {
            return Err(Error::input(format!(
                "bound {bound} is below the largest singleton value {}",
                fam.bound
            )));
        }
        Ok(ObjectiveFamily { bound, ..fam })
    }

    fn check_members(members: &[Arc<dyn SetObjective>]) -> Result<()> {
        let Some(first) = members.first() else {
            return Err(Error::input("objective family is empty"));
        };
        let n = first.ground_size();
        for (i, f) in members.iter().enumerate() {
            if f.ground_size() != n {
                return Err(Error::input(format!("member {i} has ground size {} instead of {n}", f.ground_size())));
            }
            if !f.is_monotone() {
                return Err(Error::NotMonotone);
            }
        }
        Ok(())
    }

    pub fn members(&self) -> &[Arc<dyn SetObjective>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ground_size(&self) -> usize {
        self.members[0].ground_size()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Exact (where available) value of a set under every member.
    pub fn values_of(&self, set: &[usize]) -> Vec<f64> {
        self.members
            .iter()
            .map(|f| f.exact_value(set).unwrap_or_else(|| f.value(set)))
            .collect()
    }

    /// `Σ_j w_j f_j` as a single objective.
    pub fn mixture(&self, weights: &[f64]) -> MixtureObjective {
        assert_eq!(weights.len(), self.members.len());
        let (members, weights) = self
            .members
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(f, &w)| (f.clone(), w))
            .unzip();
        MixtureObjective {
            n: self.ground_size(),
            members,
            weights,
        }
    }
}

/// Nonnegative combination of objectives.
#[derive(Clone)]
pub struct MixtureObjective {
    n: usize,
    members: Vec<Arc<dyn SetObjective>>,
    weights: Vec<f64>,
}

impl SetObjective for MixtureObjective {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &[usize]) -> f64 {
        self.members.iter().zip(&self.weights).map(|(f, w)| w * f.value(set)).sum()
    }

    fn exact_value(&self, set: &[usize]) -> Option<f64> {
        let mut total = 0.0;
        for (f, w) in self.members.iter().zip(&self.weights) {
            total += w * f.exact_value(set)?;
        }
        Some(total)
    }

    fn is_monotone(&self) -> bool {
        self.members.iter().all(|f| f.is_monotone())
    }

    fn is_submodular(&self) -> bool {
        self.members.iter().all(|f| f.is_submodular())
    }

    fn marginal_gains(&self, set: &[usize], out: &mut [f64]) {
        out.fill(0.0);
        let mut buf = vec![0.0; out.len()];
        for (f, w) in self.members.iter().zip(&self.weights) {
            f.marginal_gains(set, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += w * b;
            }
        }
    }

    fn closed_form_multilinear(&self, x: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for (f, w) in self.members.iter().zip(&self.weights) {
            total += w * f.closed_form_multilinear(x)?;
        }
        Some(total)
    }

    fn closed_form_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.n];
        for (f, w) in self.members.iter().zip(&self.weights) {
            for (a, b) in g.iter_mut().zip(f.closed_form_gradient(x)?) {
                *a += w * b;
            }
        }
        Some(g)
    }
}

/// The member returned by a best-response oracle.
#[derive(Clone)]
pub struct BestResponse {
    /// Oracle-defined identifier of the member.
    pub index: usize,
    pub member: Arc<dyn SetObjective>,
}

/// Best response to independent distributions: given marginals `x`, return
/// a member minimizing `E_{S~x}[f(S)]`. Families too large to list
/// implement this directly.
pub trait BestResponseOracle: Send + Sync {
    fn ground_size(&self) -> usize;

    /// Upper bound on any member's singleton value.
    fn bound(&self) -> f64;

    fn best_response(&self, x: &[f64], samples: usize, rng_seed: u64) -> Result<BestResponse>;
}

impl BestResponseOracle for ObjectiveFamily {
    fn ground_size(&self) -> usize {
        ObjectiveFamily::ground_size(self)
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn best_response(&self, x: &[f64], samples: usize, rng_seed: u64) -> Result<BestResponse> {
        let index = bri_enumerative(self, x, samples, rng_seed)?;
        Ok(BestResponse {
            index,
            member: self.members[index].clone(),
        })
    }
}

/// `E_{S~x}[f_i(S)]` for every member. Closed forms are used when every
/// member has one; otherwise all members share the same sampled sets.
pub fn member_values_at(family: &ObjectiveFamily, x: &[f64], samples: usize, rng_seed: u64) -> Result<Vec<f64>> {
    check_unit_box(x, family.ground_size())?;
    let closed: Option<Vec<f64>> = family.members.iter().map(|f| f.closed_form_multilinear(x)).collect();
    if let Some(v) = closed {
        return Ok(v);
    }
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    let sets = sample_sets(x, samples, rng_seed);
    Ok(family
        .members
        .par_iter()
        .map(|f| sets.iter().map(|s| f.value(s)).sum::<f64>() / samples as f64)
        .collect())
}

/// Index of the member with the smallest multilinear value at `x`; lowest
/// index on ties.
pub fn bri_enumerative(family: &ObjectiveFamily, x: &[f64], samples: usize, rng_seed: u64) -> Result<usize> {
    Ok(argmin(&member_values_at(family, x, samples, rng_seed)?))
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

/// Best response for profit weights known only up to per-customer
/// intervals: with monotone coverage, every customer at its lower end is
/// a minimizer for any `x`.
pub struct IntervalProfitOracle {
    lowest: Arc<dyn SetObjective>,
    bound: f64,
}

impl IntervalProfitOracle {
    pub fn new(objective: &crate::domains::BudgetObjective, intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.len() != objective.weights().len() {
            return Err(Error::input("interval count does not match customer count"));
        }
        if intervals.iter().any(|&(lo, hi)| !(0.0 <= lo && lo <= hi)) {
            return Err(Error::input("profit intervals must satisfy 0 <= lo <= hi"));
        }
        let lowest = objective.reweighted(intervals.iter().map(|p| p.0).collect());
        let bound = objective.reweighted(intervals.iter().map(|p| p.1).collect()).singleton_bound();
        Ok(IntervalProfitOracle {
            lowest: Arc::new(lowest),
            bound,
        })
    }
}

impl BestResponseOracle for IntervalProfitOracle {
    fn ground_size(&self) -> usize {
        self.lowest.ground_size()
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn best_response(&self, x: &[f64], _samples: usize, _rng_seed: u64) -> Result<BestResponse> {
        check_unit_box(x, self.ground_size())?;
        Ok(BestResponse {
            index: 0,
            member: self.lowest.clone(),
        })
    }
}

/// Probability distribution over independent sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    support: Vec<(Vec<usize>, f64)>,
}

impl MixedStrategy {
    /// Validates weights (nonnegative, summing to 1 within 1e-9) and
    /// feasibility of every set; merges duplicate sets.
    pub fn new(support: Vec<(Vec<usize>, f64)>, c: &Constraint) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::input("mixed strategy has empty support"));
        }
        let total: f64 = support.iter().map(|p| p.1).sum();
        if support.iter().any(|p| !(p.1 >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("strategy weights must be nonnegative and sum to 1 (sum {total})")));
        }
        let support: Vec<(Vec<usize>, f64)> = support
            .into_iter()
            .map(|(s, w)| (crate::objective::normalize_set(s), w))
            .collect();
        if let Some((s, _)) = support.iter().find(|(s, _)| !c.is_independent(s)) {
            return Err(Error::input(format!("{s:?} is not feasible")));
        }
        Ok(MixedStrategy {
            support: merge_duplicate_sets(support),
        })
    }

    pub fn pure(set: Vec<usize>) -> Self {
        MixedStrategy {
            support: vec![(crate::objective::normalize_set(set), 1.0)],
        }
    }

    /// Uniform distribution over the given draws, duplicates merged.
    pub fn empirical(draws: Vec<Vec<usize>>) -> Self {
        let total = draws.len() as f64;
        let counted = merge_duplicate_sets(draws.into_iter().map(|s| (s, 1.0)).collect());
        MixedStrategy {
            support: counted.into_iter().map(|(s, c)| (s, c / total)).collect(),
        }
    }

    pub fn support(&self) -> &[(Vec<usize>, f64)] {
        &self.support
    }

    /// Inclusion probability of every item.
    pub fn marginals(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (set, w) in &self.support {
            for &i in set {
                m[i] += w;
            }
        }
        m
    }

    /// `E_{S~p}[f(S)]`, exact values where the objective has them.
    pub fn expected_value<F: SetObjective + ?Sized>(&self, f: &F) -> f64 {
        self.support
            .iter()
            .map(|(s, w)| w * f.exact_value(s).unwrap_or_else(|| f.value(s)))
            .sum()
    }
}

/// A fractional point stored as the convex combination of independent sets
/// it was built from; sampling swap-rounds that combination.
#[derive(Debug, Clone)]
pub struct FractionalStrategy {
    pub x: Vec<f64>,
    pub parts: Vec<(Vec<usize>, f64)>,
    pub constraint: Constraint,
}

impl FractionalStrategy {
    pub fn sample(&self, rng_seed: u64) -> Result<Vec<usize>> {
        swap_round_combination(&self.parts, &self.constraint, self.x.len(), &mut rng::rng_from_seed(rng_seed))
    }

    /// Uniform distribution over `count` independent roundings; draw `s`
    /// uses stream `(rng_seed, s)`.
    pub fn sparse(&self, count: usize, rng_seed: u64) -> Result<MixedStrategy> {
        if count == 0 {
            return Err(Error::param("need at least one strategy sample"));
        }
        let draws = (0..count)
            .into_par_iter()
            .map(|s| self.sample(rng::derive_seed(rng_seed, s as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MixedStrategy::empirical(draws))
    }
}

/// Swap-round `x` to one pure strategy.
pub fn sample_pure_strategy(x: &[f64], c: &Constraint, rng_seed: u64) -> Result<Vec<usize>> {
    crate::rounding::swap_round(x, c, rng_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EquatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub iterations: usize,
    pub grad_samples: usize,
    pub eval_samples: usize,
    pub strategy_samples: usize,
}

impl Default for EquatorConfig {
    fn default() -> Self {
        EquatorConfig {
            epsilon: 0.05,
            delta: 0.1,
            iterations: 50,
            grad_samples: 200,
            eval_samples: 500,
            strategy_samples: 200,
        }
    }
}

impl EquatorConfig {
    /// Settings derived from a target additive error `epsilon` (relative to
    /// `bound`) and failure probability `delta`, with every count clamped to
    /// `max_count`. The step count scales as `k·M/ε` and the sample counts
    /// follow Hoeffding bounds for values in `[0, k·M]` with a union bound
    /// over coordinates and steps.
    pub fn calibrated(epsilon: f64, delta: f64, bound: f64, n: usize, k: usize, max_count: usize) -> Result<Self> {
        if !(epsilon > 0.0 && delta > 0.0 && delta < 1.0 && bound > 0.0) {
            return Err(Error::param("epsilon, delta and bound must be positive, delta below 1"));
        }
        let range = bound * k.max(1) as f64;
        let iterations = ((range / epsilon).ceil() as usize).clamp(1, max_count);
        let hoeffding = |events: f64| {
            let s = range * range / (2.0 * epsilon * epsilon) * (2.0 * events / delta).ln();
            (s.ceil() as usize).clamp(1, max_count)
        };
        Ok(EquatorConfig {
            epsilon,
            delta,
            iterations,
            grad_samples: hoeffding((n.max(1) * iterations) as f64),
            eval_samples: hoeffding(iterations as f64),
            strategy_samples: hoeffding(1.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("epsilon must be positive and delta in (0, 1)"));
        }
        if self.iterations == 0 || self.grad_samples == 0 || self.eval_samples == 0 || self.strategy_samples == 0 {
            return Err(Error::param("iteration and sample counts must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EquatorResult {
    pub x: Vec<f64>,
    /// Member chosen by the oracle at each step.
    pub responses: Vec<usize>,
    /// Rounds `x` through its Frank-Wolfe vertices.
    pub sampler: FractionalStrategy,
    /// Uniform over `strategy_samples` roundings.
    pub strategy: MixedStrategy,
}

/// Stochastic Frank-Wolfe on the pointwise minimum of the members'
/// multilinear extensions, followed by swap rounding.
pub fn equator_solve(
    oracle: &dyn BestResponseOracle,
    c: &Constraint,
    cfg: &EquatorConfig,
    rng_seed: u64,
) -> Result<EquatorResult> {
    cfg.validate()?;
    if cfg.epsilon > oracle.bound() && oracle.bound() > 0.0 {
        return Err(Error::param(format!("epsilon {} exceeds the value bound {}", cfg.epsilon, oracle.bound())));
    }
    let n = oracle.ground_size();
    let step = 1.0 / cfg.iterations as f64;
    let mut x = vec![0.0; n];
    let mut vertices = Vec::with_capacity(cfg.iterations);
    let mut responses = Vec::with_capacity(cfg.iterations);
    for t in 0..cfg.iterations as u64 {
        let br = oracle.best_response(&x, cfg.eval_samples, rng::derive_seed(rng_seed, 2 * t))?;
        let g = gradient_or_estimate(&*br.member, &x, cfg.grad_samples, rng::derive_seed(rng_seed, 2 * t + 1));
        if g.iter().any(|v| v.is_nan()) {
            return Err(Error::Internal("gradient estimate failed".into()));
        }
        let v = c.linear_opt(&g);
        for &i in &v {
            x[i] = (x[i] + step).min(1.0);
        }
        responses.push(br.index);
        vertices.push((v, step));
    }
    let sampler = FractionalStrategy {
        x: x.clone(),
        parts: merge_duplicate_sets(vertices),
        constraint: c.clone(),
    };
    let strategy = sampler.sparse(cfg.strategy_samples, rng::derive_seed(rng_seed, u64::MAX))?;
    Ok(EquatorResult {
        x,
        responses,
        sampler,
        strategy,
    })
}

/// Expected value of the strategy under every member.
pub fn member_values(strategy: &MixedStrategy, family: &ObjectiveFamily) -> Vec<f64> {
    family.members.iter().map(|f| strategy.expected_value(&**f)).collect()
}

/// `min_i E_{S~p}[f_i(S)]`.
pub fn worst_case_value(strategy: &MixedStrategy, family: &ObjectiveFamily) -> f64 {
    member_values(strategy, family).into_iter().fold(f64::INFINITY, f64::min)
}

/// Worst-case value of a fractional strategy estimated from `samples`
/// roundings.
pub fn worst_case_value_sampled(
    strategy: &FractionalStrategy,
    family: &ObjectiveFamily,
    samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    Ok(worst_case_value(&strategy.sparse(samples, rng_seed)?, family))
}

/// One double-oracle round.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleOracleStep {
    /// Value of the restricted game.
    pub restricted_value: f64,
    /// Worst case of the restricted equilibrium strategy over the full family.
    pub lower: f64,
    /// Value of the influencer's best response against the adversary mixture.
    pub response_value: f64,
    /// Sizes of the restricted strategy sets.
    pub influencer_strategies: usize,
    pub adversary_strategies: usize,
    /// Time since the solve started.
    pub elapsed: std::time::Duration,
}

#[derive(Debug, Clone)]
pub struct DoubleOracleResult {
    /// Restricted-equilibrium strategy with the best worst case seen.
    pub strategy: MixedStrategy,
    /// Adversary mixture over all members from the last restricted game.
    pub adversary: Vec<f64>,
    /// Worst-case value of `strategy`.
    pub value: f64,
    pub history: Vec<DoubleOracleStep>,
    pub converged: bool,
}

impl DoubleOracleResult {
    /// Best worst case found up to each round; nondecreasing.
    pub fn lower_bounds(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.history
            .iter()
            .map(|h| {
                best = best.max(h.lower);
                best
            })
            .collect()
    }
}

/// Double oracle: the influencer's best response is greedy on the
/// adversary's mixture, the adversary's is exact over the listed members.
/// Stops when neither response beats the restricted value by more than `tol`.
pub fn double_oracle_solve(family: &ObjectiveFamily, c: &Constraint, tol: f64, max_iters: usize) -> Result<DoubleOracleResult> {
    if !(tol >= 0.0) || max_iters == 0 {
        return Err(Error::param("tol must be nonnegative and max_iters positive"));
    }
    let started = std::time::Instant::now();
    let m = family.len();
    let first = greedy_maximize(&*family.members[0], c)?.set;
    let mut sets = vec![first.clone()];
    let mut rows = vec![family.values_of(&first)];
    let mut adv = vec![0usize];
    let mut history = Vec::new();
    let mut best: Option<(f64, MixedStrategy)> = None;
    let mut adversary = vec![0.0; m];
    let mut converged = false;
    for _ in 0..max_iters {
        let payoff: Vec<Vec<f64>> = rows.iter().map(|r| adv.iter().map(|&j| r[j]).collect()).collect();
        let game = solve_matrix_game(&payoff)?;
        adversary = vec![0.0; m];
        for (&j, &q) in adv.iter().zip(&game.col_strategy) {
            adversary[j] = q;
        }
        let br = greedy_maximize(&family.mixture(&adversary), c)?.set;
        let br_row = family.values_of(&br);
        let response_value: f64 = br_row.iter().zip(&adversary).map(|(v, q)| v * q).sum();
        let mut against = vec![0.0; m];
        for (row, &p) in rows.iter().zip(&game.row_strategy) {
            for (a, v) in against.iter_mut().zip(row) {
                *a += p * v;
            }
        }
        let adv_br = argmin(&against);
        let lower = against[adv_br];
        history.push(DoubleOracleStep {
            restricted_value: game.value,
            lower,
            response_value,
            influencer_strategies: sets.len(),
            adversary_strategies: adv.len(),
            elapsed: started.elapsed(),
        });
        if best.as_ref().is_none_or(|(b, _)| lower > *b) {
            let support = sets.iter().cloned().zip(game.row_strategy.iter().copied()).filter(|p| p.1 > 0.0).collect();
            best = Some((lower, MixedStrategy::new(normalize_weights(support), c)?));
        }
        let scale = family.bound.max(1.0);
        if response_value - game.value <= tol * scale && game.value - lower <= tol * scale {
            converged = true;
            break;
        }
        let mut grew = false;
        if !sets.contains(&br) {
            sets.push(br);
            rows.push(br_row);
            grew = true;
        }
        if !adv.contains(&adv_br) {
            adv.push(adv_br);
            grew = true;
        }
        if !grew {
            converged = true;
            break;
        }
    }
    let (value, strategy) = best.expect("at least one round");
    Ok(DoubleOracleResult {
        strategy,
        adversary,
        value,
        history,
        converged,
    })
}

fn normalize_weights(mut support: Vec<(Vec<usize>, f64)>) -> Vec<(Vec<usize>, f64)> {
    let total: f64 = support.iter().map(|p| p.1).sum();
    for p in &mut support {
        p.1 /= total;
    }
    support
}

#[derive(Debug, Clone)]
pub struct MinimaxSolution {
    pub value: f64,
    pub strategy: MixedStrategy,
    pub adversary: Vec<f64>,
}

/// Exact game value by enumerating every base of the constraint and solving
/// the full payoff matrix.
pub fn exact_minimax_lp(family: &ObjectiveFamily, c: &Constraint) -> Result<MinimaxSolution> {
    exact_minimax_lp_with_cap(family, c, LP_SET_CAP)
}

pub fn exact_minimax_lp_with_cap(family: &ObjectiveFamily, c: &Constraint, cap: u128) -> Result<MinimaxSolution> {
    if family.len() > LP_MEMBER_CAP {
        return Err(Error::SizeCap {
            what: "family members",
            required: family.len() as u128,
            cap: LP_MEMBER_CAP as u128,
        });
    }
    let sets = enumerate_independent_sets(family.ground_size(), c, cap, true)?;
    let payoff: Vec<Vec<f64>> = sets.par_iter().map(|s| family.values_of(s)).collect();
    let game = solve_matrix_game(&payoff)?;
    let support = sets
        .into_iter()
        .zip(game.row_strategy)
        .filter(|p| p.1 > 1e-12)
        .collect();
    Ok(MinimaxSolution {
        value: game.value,
        strategy: MixedStrategy::new(normalize_weights(support), c)?,
        adversary: game.col_strategy,
    })
}
