//! CVaR maximization for monotone DR-submodular stochastic objectives.
//!
//! For a risk level `α`, `CVaR_α(x) = max_τ H(x, τ)` with
//! `H(x, τ) = τ - E[(τ - F(x, y))⁺] / α`. The solver replaces the hinge by a
//! quadratic smoothing of width `u`, picks `τ` by bisection on the smoothed
//! derivative, and takes Frank-Wolfe steps along the smoothed gradient in `x`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Constraint;
use crate::objective::SetObjective;
use crate::rng;

/// Lipschitz and boundedness constants of a stochastic objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    /// Lipschitz constant of `F(·, y)`.
    pub l1: f64,
    /// Lipschitz constant of `∇F(·, y)`.
    pub l2: f64,
    /// Bound on `‖∇F‖`.
    pub g: f64,
    /// Bound on `F`.
    pub m: f64,
}

impl SmoothnessParams {
    pub fn validate(&self) -> Result<()> {
        if [self.l1, self.l2, self.g, self.m].iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::param("smoothness constants must be positive and finite"))
        }
    }
}

/// `F(x, y)` on the box `[0, upper]`, monotone and DR-submodular in `x` for
/// every scenario `y`, with `F(0, y) = 0`.
pub trait StochasticObjective: Send + Sync {
    type Scenario: Clone + Send + Sync;

    fn dimension(&self) -> usize;

    /// Upper corner of the domain box.
    fn upper(&self) -> Vec<f64> {
        vec![1.0; self.dimension()]
    }

    fn sample_scenario(&self, rng: &mut rng::Rng) -> Self::Scenario;

    fn value(&self, x: &[f64], y: &Self::Scenario) -> f64;

    fn gradient(&self, x: &[f64], y: &Self::Scenario) -> Vec<f64>;

    fn smoothness(&self) -> SmoothnessParams;
}

/// Weighted scenarios; weights are normalized to sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet<Y> {
    items: Vec<(Y, f64)>,
}

impl<Y: Clone + Send + Sync> ScenarioSet<Y> {
    pub fn new(items: Vec<(Y, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::input("scenario set is empty"));
        }
        let total: f64 = items.iter().map(|p| p.1).sum();
        if items.iter().any(|p| !(p.1 >= 0.0 && p.1.is_finite())) || !(total > 0.0) {
            return Err(Error::input("scenario weights must be nonnegative with positive total"));
        }
        Ok(ScenarioSet {
            items: items.into_iter().map(|(y, w)| (y, w / total)).collect(),
        })
    }

    pub fn uniform(scenarios: Vec<Y>) -> Result<Self> {
        Self::new(scenarios.into_iter().map(|y| (y, 1.0)).collect())
    }

    /// `count` scenarios; scenario `i` comes from stream `(rng_seed, i)`.
    pub fn sample<F: StochasticObjective<Scenario = Y>>(obj: &F, count: usize, rng_seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::param("need at least one scenario"));
        }
        let ys: Vec<Y> = (0..count)
            .into_par_iter()
            .map(|i| obj.sample_scenario(&mut rng::stream_rng(rng_seed, i as u64)))
            .collect();
        Self::uniform(ys)
    }

    pub fn items(&self) -> &[(Y, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// `(F(x, y), weight)` for every scenario.
pub fn scenario_values<F: StochasticObjective>(obj: &F, x: &[f64], scenarios: &ScenarioSet<F::Scenario>) -> Vec<(f64, f64)> {
    scenarios.items.par_iter().map(|(y, w)| (obj.value(x, y), *w)).collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("risk level {alpha} outside (0, 1]")))
    }
}

fn sorted(values: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Smallest `τ` with `Pr[V ≤ τ] ≥ α` under the weighted values.
pub fn var_of_values(values: &[(f64, f64)], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let v = sorted(values);
    let Some(last) = v.last() else {
        return Err(Error::input("no scenario values"));
    };
    let mut cum = 0.0;
    for &(val, w) in &v {
        cum += w;
        if cum >= alpha - 1e-12 {
            return Ok(val);
        }
    }
    Ok(last.0)
}

/// Mean of the lowest mass `α`, splitting the boundary atom.
pub fn cvar_of_values(values: &[(f64, f64)], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if values.is_empty() {
        return Err(Error::input("no scenario values"));
    }
    let v = sorted(values);
    if alpha >= 1.0 {
        return Ok(v.iter().map(|(val, w)| val * w).sum());
    }
    let mut left = alpha;
    let mut acc = 0.0;
    for &(val, w) in &v {
        let take = w.min(left);
        acc += take * val;
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    Ok(acc / alpha)
}

/// `τ - E[(τ - V)⁺] / α`.
pub fn h_of_values(values: &[(f64, f64)], tau: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(tau - values.iter().map(|&(v, w)| w * (tau - v).max(0.0)).sum::<f64>() / alpha)
}

/// Quadratic smoothing of `t⁺` with width `u`.
pub fn smooth_hinge(t: f64, u: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= u {
        t * t / (2.0 * u)
    } else {
        t - 0.5 * u
    }
}

pub fn smooth_hinge_slope(t: f64, u: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= u {
        t / u
    } else {
        1.0
    }
}

/// `τ - E[φ_u(τ - V)] / α` with the smoothed hinge `φ_u`.
pub fn h_smooth_of_values(values: &[(f64, f64)], tau: f64, alpha: f64, u: f64) -> f64 {
    tau - values.iter().map(|&(v, w)| w * smooth_hinge(tau - v, u)).sum::<f64>() / alpha
}

/// Maximizer of the smoothed `H` over `τ ≥ 0`: bisection on its
/// nonincreasing derivative down to width `u / 10`, returning the left end.
pub fn smooth_tau_of_values(values: &[(f64, f64)], alpha: f64, u: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(u > 0.0) {
        return Err(Error::param("smoothing width must be positive"));
    }
    if values.is_empty() {
        return Err(Error::input("no scenario values"));
    }
    let slope = |tau: f64| 1.0 - values.iter().map(|&(v, w)| w * smooth_hinge_slope(tau - v, u)).sum::<f64>() / alpha;
    let mut lo = 0.0;
    let mut hi = values.iter().map(|p| p.0).fold(0.0, f64::max) + u;
    if slope(lo) <= 1e-12 {
        return Ok(lo);
    }
    while hi - lo > u / 10.0 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 1e-12 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn var_alpha<F: StochasticObjective>(obj: &F, x: &[f64], scenarios: &ScenarioSet<F::Scenario>, alpha: f64) -> Result<f64> {
    var_of_values(&scenario_values(obj, x, scenarios), alpha)
}

pub fn cvar_alpha<F: StochasticObjective>(obj: &F, x: &[f64], scenarios: &ScenarioSet<F::Scenario>, alpha: f64) -> Result<f64> {
    cvar_of_values(&scenario_values(obj, x, scenarios), alpha)
}

pub fn h_objective<F: StochasticObjective>(obj: &F, x: &[f64], tau: f64, scenarios: &ScenarioSet<F::Scenario>, alpha: f64) -> Result<f64> {
    h_of_values(&scenario_values(obj, x, scenarios), tau, alpha)
}

pub fn smooth_tau<F: StochasticObjective>(obj: &F, x: &[f64], scenarios: &ScenarioSet<F::Scenario>, alpha: f64, u: f64) -> Result<f64> {
    smooth_tau_of_values(&scenario_values(obj, x, scenarios), alpha, u)
}

/// `E[φ_u'(τ - F(x, y)) ∇F(x, y)] / α`, the gradient in `x` of the smoothed `H`.
pub fn smooth_grad<F: StochasticObjective>(
    obj: &F,
    x: &[f64],
    tau: f64,
    batch: &ScenarioSet<F::Scenario>,
    alpha: f64,
    u: f64,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if !(u > 0.0) {
        return Err(Error::param("smoothing width must be positive"));
    }
    let parts: Vec<Option<Vec<f64>>> = batch
        .items
        .par_iter()
        .map(|(y, w)| {
            let s = smooth_hinge_slope(tau - obj.value(x, y), u);
            (s > 0.0).then(|| obj.gradient(x, y).into_iter().map(|g| w * s * g).collect())
        })
        .collect();
    let mut grad = vec![0.0; x.len()];
    for p in parts.into_iter().flatten() {
        for (a, b) in grad.iter_mut().zip(p) {
            *a += b;
        }
    }
    for a in &mut grad {
        *a /= alpha;
    }
    Ok(grad)
}

/// Downward-closed polytope accessed through linear optimization.
pub trait Polytope: Send + Sync {
    fn dimension(&self) -> usize;

    /// A vertex maximizing `w·v`.
    fn linear_opt(&self, w: &[f64]) -> Vec<f64>;

    fn contains(&self, x: &[f64]) -> bool;

    /// Euclidean diameter.
    fn diameter(&self) -> f64;
}

const MEMBER_TOL: f64 = 1e-9;

/// `0 ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxPolytope {
    pub upper: Vec<f64>,
}

impl Polytope for BoxPolytope {
    fn dimension(&self) -> usize {
        self.upper.len()
    }

    fn linear_opt(&self, w: &[f64]) -> Vec<f64> {
        w.iter().zip(&self.upper).map(|(&wi, &u)| if wi > 0.0 { u } else { 0.0 }).collect()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.upper.len() && x.iter().zip(&self.upper).all(|(v, u)| *v >= -MEMBER_TOL && *v <= u + MEMBER_TOL)
    }

    fn diameter(&self) -> f64 {
        self.upper.iter().map(|u| u * u).sum::<f64>().sqrt()
    }
}

/// `0 ≤ x ≤ upper, Σx ≤ budget`.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetSimplex {
    pub upper: Vec<f64>,
    pub budget: f64,
}

impl Polytope for BudgetSimplex {
    fn dimension(&self) -> usize {
        self.upper.len()
    }

    /// Fractional knapsack: fill the most valuable coordinates first.
    fn linear_opt(&self, w: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
        let mut v = vec![0.0; w.len()];
        let mut left = self.budget;
        for i in order {
            if left <= 0.0 {
                break;
            }
            v[i] = self.upper[i].min(left);
            left -= v[i];
        }
        v
    }

    fn contains(&self, x: &[f64]) -> bool {
        BoxPolytope { upper: self.upper.clone() }.contains(x) && x.iter().sum::<f64>() <= self.budget + MEMBER_TOL * (1.0 + x.len() as f64)
    }

    fn diameter(&self) -> f64 {
        let b = BoxPolytope {
            upper: self.upper.iter().map(|u| u.min(self.budget)).collect(),
        };
        b.diameter().min(self.budget * std::f64::consts::SQRT_2)
    }
}

/// Matroid polytope of a constraint on `n` items.
#[derive(Debug, Clone)]
pub struct MatroidPolytope {
    pub constraint: Constraint,
    pub n: usize,
}

impl Polytope for MatroidPolytope {
    fn dimension(&self) -> usize {
        self.n
    }

    fn linear_opt(&self, w: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        for i in self.constraint.linear_opt(w) {
            v[i] = 1.0;
        }
        v
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n && self.constraint.check_point(x).is_ok()
    }

    fn diameter(&self) -> f64 {
        (self.constraint.rank(self.n) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvarConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub iterations: usize,
    pub scenario_samples: usize,
    /// Hinge smoothing width; `ε·α/L₁` when absent.
    #[serde(default)]
    pub smoothing_width: Option<f64>,
}

impl Default for CvarConfig {
    fn default() -> Self {
        CvarConfig {
            alpha: 0.1,
            epsilon: 0.01,
            delta: 0.1,
            iterations: 100,
            scenario_samples: 500,
            smoothing_width: None,
        }
    }
}

impl CvarConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.epsilon > 0.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("epsilon must be positive and delta in (0, 1)"));
        }
        if self.iterations == 0 || self.scenario_samples == 0 {
            return Err(Error::param("iteration and scenario counts must be positive"));
        }
        if let Some(u) = self.smoothing_width {
            if !(u > 0.0) {
                return Err(Error::param("smoothing width must be positive"));
            }
        }
        Ok(())
    }

    pub fn width(&self, params: &SmoothnessParams) -> f64 {
        self.smoothing_width.unwrap_or(self.epsilon * self.alpha / params.l1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RascalStep {
    pub iteration: usize,
    pub tau: f64,
    /// CVaR of the current point on the step's scenario batch.
    pub cvar_estimate: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RascalResult {
    pub x: Vec<f64>,
    /// Frank-Wolfe vertices, each with weight `1 / iterations`.
    pub vertices: Vec<Vec<f64>>,
    pub trace: Vec<RascalStep>,
}

fn check_point_dims<F: StochasticObjective, P: Polytope + ?Sized>(obj: &F, p: &P) -> Result<()> {
    if obj.dimension() != p.dimension() {
        return Err(Error::input(format!(
            "objective has dimension {}, polytope {}",
            obj.dimension(),
            p.dimension()
        )));
    }
    obj.smoothness().validate()
}

/// Frank-Wolfe on the smoothed CVaR surrogate with a fresh scenario batch
/// per step; batch `t` uses stream `(rng_seed, t)`.
pub fn rascal_solve<F: StochasticObjective, P: Polytope + ?Sized>(obj: &F, p: &P, cfg: &CvarConfig, rng_seed: u64) -> Result<RascalResult> {
    cfg.validate()?;
    frank_wolfe(obj, p, cfg, |t| ScenarioSet::sample(obj, cfg.scenario_samples, rng::derive_seed(rng_seed, t as u64)))
}

/// Same iteration against one fixed scenario set.
pub fn rascal_solve_fixed<F: StochasticObjective, P: Polytope + ?Sized>(
    obj: &F,
    p: &P,
    cfg: &CvarConfig,
    scenarios: &ScenarioSet<F::Scenario>,
) -> Result<RascalResult> {
    cfg.validate()?;
    frank_wolfe(obj, p, cfg, |_| Ok(scenarios.clone()))
}

fn frank_wolfe<F: StochasticObjective, P: Polytope + ?Sized>(
    obj: &F,
    p: &P,
    cfg: &CvarConfig,
    mut batch: impl FnMut(usize) -> Result<ScenarioSet<F::Scenario>>,
) -> Result<RascalResult> {
    check_point_dims(obj, p)?;
    let started = Instant::now();
    let u = cfg.width(&obj.smoothness());
    let step = 1.0 / cfg.iterations as f64;
    let mut x = vec![0.0; obj.dimension()];
    let mut vertices = Vec::with_capacity(cfg.iterations);
    let mut trace = Vec::with_capacity(cfg.iterations);
    for t in 0..cfg.iterations {
        let ys = batch(t)?;
        let values = scenario_values(obj, &x, &ys);
        let tau = smooth_tau_of_values(&values, cfg.alpha, u)?;
        let g = smooth_grad(obj, &x, tau, &ys, cfg.alpha, u)?;
        let v = p.linear_opt(&g);
        for (xi, vi) in x.iter_mut().zip(&v) {
            *xi += step * vi;
        }
        trace.push(RascalStep {
            iteration: t,
            tau,
            cvar_estimate: cvar_of_values(&values, cfg.alpha)?,
            elapsed: started.elapsed(),
        });
        vertices.push(v);
    }
    Ok(RascalResult { x, vertices, trace })
}

/// Risk-neutral baseline: Frank-Wolfe on `E[F(x, y)]` with the same batches
/// as [`rascal_solve`].
pub fn expectation_frank_wolfe<F: StochasticObjective, P: Polytope + ?Sized>(
    obj: &F,
    p: &P,
    iterations: usize,
    scenario_samples: usize,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    check_point_dims(obj, p)?;
    if iterations == 0 || scenario_samples == 0 {
        return Err(Error::param("iteration and scenario counts must be positive"));
    }
    let step = 1.0 / iterations as f64;
    let mut x = vec![0.0; obj.dimension()];
    for t in 0..iterations {
        let ys = ScenarioSet::sample(obj, scenario_samples, rng::derive_seed(rng_seed, t as u64))?;
        let parts: Vec<Vec<f64>> = ys.items.par_iter().map(|(y, w)| obj.gradient(&x, y).into_iter().map(|g| w * g).collect()).collect();
        let mut g = vec![0.0; x.len()];
        for part in parts {
            for (a, b) in g.iter_mut().zip(part) {
                *a += b;
            }
        }
        let v = p.linear_opt(&g);
        for (xi, vi) in x.iter_mut().zip(&v) {
            *xi += step * vi;
        }
    }
    Ok(x)
}

/// `F(x, y) = Σ_i y_i (1 - e^{-x_i})`, where `y_i = w_i` except with
/// probability `fail_i`, when it is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturatingObjective {
    pub weights: Vec<f64>,
    pub fail: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SaturatingObjective {
    pub fn new(weights: Vec<f64>, fail: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if weights.len() != fail.len() || weights.len() != upper.len() || weights.is_empty() {
            return Err(Error::input("weights, failure probabilities and bounds must have equal nonzero length"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) || fail.iter().any(|q| !(0.0..=1.0).contains(q)) || upper.iter().any(|u| !(*u > 0.0)) {
            return Err(Error::input("weights and bounds must be positive, failure probabilities in [0, 1]"));
        }
        Ok(SaturatingObjective { weights, fail, upper })
    }
}

impl StochasticObjective for SaturatingObjective {
    type Scenario = Vec<f64>;

    fn dimension(&self) -> usize {
        self.weights.len()
    }

    fn upper(&self) -> Vec<f64> {
        self.upper.clone()
    }

    fn sample_scenario(&self, rng: &mut rng::Rng) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.fail)
            .map(|(&w, &q)| if rng.gen::<f64>() < q { 0.0 } else { w })
            .collect()
    }

    fn value(&self, x: &[f64], y: &Vec<f64>) -> f64 {
        x.iter().zip(y).map(|(&xi, &yi)| yi * (1.0 - (-xi).exp())).sum()
    }

    fn gradient(&self, x: &[f64], y: &Vec<f64>) -> Vec<f64> {
        x.iter().zip(y).map(|(&xi, &yi)| yi * (-xi).exp()).collect()
    }

    fn smoothness(&self) -> SmoothnessParams {
        let norm = self.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        let wmax = self.weights.iter().copied().fold(0.0, f64::max);
        SmoothnessParams {
            l1: norm,
            l2: wmax,
            g: norm,
            m: self.weights.iter().zip(&self.upper).map(|(w, u)| w * (1.0 - (-u).exp())).sum(),
        }
    }
}

/// Linear objective `F(x, y) = y·x` with `y` drawn uniformly from a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScenarioObjective {
    pub scenarios: Vec<Vec<f64>>,
    pub upper: Vec<f64>,
}

impl LinearScenarioObjective {
    pub fn new(scenarios: Vec<Vec<f64>>, upper: Vec<f64>) -> Result<Self> {
        if scenarios.is_empty() || scenarios.iter().any(|s| s.len() != upper.len()) {
            return Err(Error::input("scenario vectors must match the dimension"));
        }
        if scenarios.iter().flatten().any(|v| !(*v >= 0.0)) || upper.iter().any(|u| !(*u > 0.0)) {
            return Err(Error::input("scenario coefficients must be nonnegative and bounds positive"));
        }
        Ok(LinearScenarioObjective { scenarios, upper })
    }

    /// Every scenario with equal weight.
    pub fn scenario_set(&self) -> ScenarioSet<usize> {
        ScenarioSet::uniform((0..self.scenarios.len()).collect()).expect("nonempty")
    }
}

impl StochasticObjective for LinearScenarioObjective {
    type Scenario = usize;

    fn dimension(&self) -> usize {
        self.upper.len()
    }

    fn upper(&self) -> Vec<f64> {
        self.upper.clone()
    }

    fn sample_scenario(&self, rng: &mut rng::Rng) -> usize {
        rng.gen_range(0..self.scenarios.len())
    }

    fn value(&self, x: &[f64], y: &usize) -> f64 {
        x.iter().zip(&self.scenarios[*y]).map(|(a, b)| a * b).sum()
    }

    fn gradient(&self, _x: &[f64], y: &usize) -> Vec<f64> {
        self.scenarios[*y].clone()
    }

    fn smoothness(&self) -> SmoothnessParams {
        let g = self
            .scenarios
            .iter()
            .map(|s| s.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let m = self
            .scenarios
            .iter()
            .map(|s| s.iter().zip(&self.upper).map(|(a, b)| a * b).sum::<f64>())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        SmoothnessParams {
            l1: g,
            l2: f64::MIN_POSITIVE,
            g,
            m,
        }
    }
}

/// Continuous relaxation of choosing a portfolio of sets: scenario `k` has
/// a monotone submodular set function `f_k`, and `F(x, k)` is its
/// multilinear extension.
#[derive(Clone)]
pub struct PortfolioObjective {
    members: Vec<Arc<dyn SetObjective>>,
    weights: Vec<f64>,
    samples: usize,
    rng_seed: u64,
}

impl PortfolioObjective {
    pub fn members(&self) -> &[Arc<dyn SetObjective>] {
        &self.members
    }

    /// All scenarios with their probabilities.
    pub fn scenario_set(&self) -> ScenarioSet<usize> {
        ScenarioSet::new((0..self.members.len()).zip(self.weights.iter().copied()).collect()).expect("validated weights")
    }

    /// Per-scenario expected value of a distribution over sets.
    pub fn portfolio_values(&self, portfolio: &crate::equator::MixedStrategy) -> Vec<(f64, f64)> {
        self.members
            .iter()
            .zip(&self.weights)
            .map(|(f, &w)| (portfolio.expected_value(&**f), w))
            .collect()
    }
}

impl StochasticObjective for PortfolioObjective {
    type Scenario = usize;

    fn dimension(&self) -> usize {
        self.members[0].ground_size()
    }

    fn sample_scenario(&self, rng: &mut rng::Rng) -> usize {
        let mut u = rng.gen::<f64>();
        for (k, &w) in self.weights.iter().enumerate() {
            if u < w {
                return k;
            }
            u -= w;
        }
        self.weights.len() - 1
    }

    fn value(&self, x: &[f64], y: &usize) -> f64 {
        crate::objective::multilinear_or_estimate(&*self.members[*y], x, self.samples, self.rng_seed)
    }

    fn gradient(&self, x: &[f64], y: &usize) -> Vec<f64> {
        crate::objective::gradient_or_estimate(&*self.members[*y], x, self.samples, self.rng_seed)
    }

    fn smoothness(&self) -> SmoothnessParams {
        let n = self.dimension() as f64;
        let single = self.members.iter().map(|f| f.singleton_bound()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        SmoothnessParams {
            l1: n.sqrt() * single,
            l2: 2.0 * n * single,
            g: n.sqrt() * single,
            m: n * single,
        }
    }
}

/// Reduce "choose a distribution over independent sets to maximize CVaR
/// across scenarios" to the continuous problem over the matroid polytope.
/// Objectives without a closed-form extension are estimated with `samples`
/// fixed sampled sets.
pub fn portfolio_reduction(
    members: Vec<Arc<dyn SetObjective>>,
    weights: Vec<f64>,
    c: &Constraint,
    samples: usize,
    rng_seed: u64,
) -> Result<(PortfolioObjective, MatroidPolytope)> {
    if members.is_empty() || members.len() != weights.len() {
        return Err(Error::input("need one weight per scenario objective"));
    }
    let n = members[0].ground_size();
    if members.iter().any(|f| f.ground_size() != n) {
        return Err(Error::input("scenario objectives must share a ground set"));
    }
    if members.iter().any(|f| !f.is_monotone()) {
        return Err(Error::NotMonotone);
    }
    let set = ScenarioSet::new((0..members.len()).zip(weights).collect())?;
    let weights = set.items.iter().map(|p| p.1).collect();
    Ok((
        PortfolioObjective {
            members,
            weights,
            samples: samples.max(1),
            rng_seed,
        },
        MatroidPolytope {
            constraint: c.clone(),
            n,
        },
    ))
}

/// Round a RASCAL solution over a matroid polytope into a portfolio of
/// `count` swap-rounded sets (round `s` uses stream `(rng_seed, s)`).
pub fn round_portfolio(result: &RascalResult, c: &Constraint, count: usize, rng_seed: u64) -> Result<crate::equator::MixedStrategy> {
    let parts: Vec<(Vec<usize>, f64)> = result
        .vertices
        .iter()
        .map(|v| ((0..v.len()).filter(|&i| v[i] > 0.5).collect(), 1.0 / result.vertices.len() as f64))
        .collect();
    let sampler = crate::equator::FractionalStrategy {
        x: result.x.clone(),
        parts: crate::matroid::merge_duplicate_sets(parts),
        constraint: c.clone(),
    };
    sampler.sparse(count, rng_seed)
}
