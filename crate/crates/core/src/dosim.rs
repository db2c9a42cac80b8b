//! Influence maximization when edge probabilities are only known to lie in
//! intervals: a zero-sum game between the seed picker and nature, who picks
//! probabilities from a finite grid. The default payoff is the ratio of the
//! achieved spread to the best spread possible under nature's choice.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::InfluenceObjective;
use crate::equator::{double_oracle_solve, DoubleOracleResult, ObjectiveFamily};
use crate::error::{Error, Result};
use crate::graph::{EdgeParams, Graph};
use crate::greedy::{exhaustive_opt, greedy_maximize};
use crate::matroid::Constraint;
use crate::objective::{ScaledObjective, SetObjective};

/// Default cap on the number of grid points.
pub const GRID_CAP: u128 = 10_000;

/// Per-edge probability intervals `[lo_e, hi_e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUncertainty {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl IntervalUncertainty {
    pub fn new(g: &Graph, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != g.edge_count() || hi.len() != g.edge_count() {
            return Err(Error::input("interval bounds must cover every edge"));
        }
        for (e, (&a, &b)) in lo.iter().zip(&hi).enumerate() {
            if !(0.0 <= a && a <= b && b <= 1.0) {
                return Err(Error::input(format!("edge {e}: interval [{a}, {b}] not inside [0, 1]")));
            }
        }
        Ok(IntervalUncertainty { lo, hi })
    }

    /// The same interval on every edge.
    pub fn global(g: &Graph, lo: f64, hi: f64) -> Result<Self> {
        Self::new(g, vec![lo; g.edge_count()], vec![hi; g.edge_count()])
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Interval midpoints.
    pub fn midpoint(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lo.len()
            && p
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *a - 1e-12 <= *v && *v <= *b + 1e-12)
    }
}

/// Nature's pure strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub points: Vec<EdgeParams>,
    pub spacing: f64,
}

impl ParamGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `lo, lo + δ, ...` up to and including `hi`.
fn levels(lo: f64, hi: f64, delta: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let steps = ((hi - lo) / delta + 1e-9).floor() as usize;
    for j in 0..=steps {
        out.push((lo + j as f64 * delta).min(hi));
    }
    if hi - out[out.len() - 1] > 1e-12 {
        out.push(hi);
    }
    out
}

/// Discretize the intervals with spacing `delta`.
///
/// Coupled: one shared level `s` runs over a grid spanning all intervals and
/// edge `e` gets `clamp(s, lo_e, hi_e)`; repeated points are dropped.
/// Uncoupled: the product of per-edge grids, refused when it has more than
/// `cap` points.
pub fn discretize_params(g: &Graph, intervals: &IntervalUncertainty, delta: f64, coupled: bool, cap: u128) -> Result<ParamGrid> {
    if !(delta > 0.0) {
        return Err(Error::param("grid spacing must be positive"));
    }
    if intervals.lo.len() != g.edge_count() {
        return Err(Error::input("intervals do not match graph"));
    }
    let mut points: Vec<Vec<f64>> = Vec::new();
    if coupled || g.edge_count() == 0 {
        let lo = intervals.lo.iter().copied().fold(1.0, f64::min).min(1.0);
        let hi = intervals.hi.iter().copied().fold(0.0, f64::max);
        let lo = if g.edge_count() == 0 { 0.0 } else { lo };
        for s in levels(lo, hi.max(lo), delta) {
            let p: Vec<f64> = intervals.lo.iter().zip(&intervals.hi).map(|(&a, &b)| s.clamp(a, b)).collect();
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        if points.len() as u128 > cap {
            return Err(Error::SizeCap {
                what: "parameter grid points",
                required: points.len() as u128,
                cap,
            });
        }
    } else {
        let axes: Vec<Vec<f64>> = intervals
            .lo
            .iter()
            .zip(&intervals.hi)
            .map(|(&a, &b)| levels(a, b, delta))
            .collect();
        let total = axes.iter().fold(1u128, |t, a| t.saturating_mul(a.len() as u128));
        if total > cap {
            return Err(Error::SizeCap {
                what: "parameter grid points",
                required: total,
                cap,
            });
        }
        points.push(Vec::new());
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
    }
    Ok(ParamGrid {
        points: points.into_iter().map(|p| EdgeParams::new(g, p)).collect::<Result<_>>()?,
        spacing: delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffMode {
    /// Spread divided by the best spread under the same parameters.
    Ratio,
    /// Raw expected spread.
    Spread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMode {
    /// Exact spread and exhaustive search; small instances only.
    Exact,
    /// Sampled spread and greedy; ratios are approximate.
    Greedy,
}

#[derive(Debug, Clone)]
pub struct InfluenceGame {
    pub graph: Graph,
    pub intervals: IntervalUncertainty,
    pub k: usize,
    pub horizon: usize,
    pub payoff: PayoffMode,
}

impl InfluenceGame {
    pub fn new(graph: Graph, intervals: IntervalUncertainty, k: usize, horizon: usize, payoff: PayoffMode) -> Result<Self> {
        if k > graph.node_count() {
            return Err(Error::param(format!("budget {k} exceeds node count {}", graph.node_count())));
        }
        if horizon == 0 {
            return Err(Error::param("horizon must be at least 1"));
        }
        if intervals.lo.len() != graph.edge_count() {
            return Err(Error::input("intervals do not match graph"));
        }
        Ok(InfluenceGame {
            graph,
            intervals,
            k,
            horizon,
            payoff,
        })
    }

    pub fn constraint(&self) -> Constraint {
        Constraint::Cardinality(self.k)
    }

    /// Spread objective under `theta`. Sampled objectives share `rng_seed`
    /// across parameter points, so they are driven by the same uniforms.
    pub fn spread_objective(&self, theta: &EdgeParams, mode: OptMode, samples: usize, rng_seed: u64) -> Result<InfluenceObjective> {
        match mode {
            OptMode::Exact => InfluenceObjective::exact(&self.graph, theta, self.horizon),
            OptMode::Greedy => InfluenceObjective::sampled(&self.graph, theta, self.horizon, samples, rng_seed),
        }
    }
}

/// Best achievable spread under one parameter point, with the set attaining it.
fn opt_under(f: &InfluenceObjective, c: &Constraint, mode: OptMode) -> Result<(Vec<usize>, f64)> {
    match mode {
        OptMode::Exact => exhaustive_opt(f, c),
        OptMode::Greedy => {
            let r = greedy_maximize(f, c)?;
            Ok((r.set, r.value))
        }
    }
}

/// `spread(seeds; θ) / OPT(θ)`.
pub fn payoff_ratio(seeds: &[usize], theta: &EdgeParams, game: &InfluenceGame, mode: OptMode, samples: usize, rng_seed: u64) -> Result<f64> {
    if seeds.len() > game.k {
        return Err(Error::input(format!("{} seeds exceed budget {}", seeds.len(), game.k)));
    }
    let seeds = crate::objective::normalize_set(seeds.to_vec());
    if seeds.iter().any(|&s| s >= game.graph.node_count()) {
        return Err(Error::input("seed out of range"));
    }
    let f = game.spread_objective(theta, mode, samples, rng_seed)?;
    let (_, opt) = opt_under(&f, &game.constraint(), mode)?;
    if opt <= 0.0 {
        return Ok(1.0);
    }
    let v = f.exact_value(&seeds).filter(|_| mode == OptMode::Exact).unwrap_or_else(|| f.value(&seeds));
    Ok(v / opt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosimConfig {
    pub delta_grid: f64,
    #[serde(default = "default_true")]
    pub coupled: bool,
    #[serde(default = "default_grid_cap")]
    pub grid_cap: u128,
    pub tol: f64,
    pub max_iters: usize,
    pub samples: usize,
    pub opt_mode: OptMode,
}

fn default_true() -> bool {
    true
}

fn default_grid_cap() -> u128 {
    GRID_CAP
}

#[derive(Debug, Clone)]
pub struct DosimResult {
    pub grid: ParamGrid,
    /// `OPT(θ)` per grid point (exact or greedy per `opt_mode`).
    pub opt_values: Vec<f64>,
    pub solve: DoubleOracleResult,
    /// Whether ratios use exact optima.
    pub exact: bool,
}

impl DosimResult {
    pub fn value(&self) -> f64 {
        self.solve.value
    }

    pub fn converged(&self) -> bool {
        self.solve.converged
    }
}

/// Payoff family: one objective per grid point, scaled by `1 / OPT(θ)` in
/// ratio mode.
pub fn payoff_family(game: &InfluenceGame, grid: &ParamGrid, mode: OptMode, samples: usize, rng_seed: u64) -> Result<(ObjectiveFamily, Vec<f64>)> {
    if grid.is_empty() {
        return Err(Error::input("empty parameter grid"));
    }
    let c = game.constraint();
    let built: Vec<(Arc<dyn SetObjective>, f64)> = grid
        .points
        .par_iter()
        .map(|theta| {
            let f = game.spread_objective(theta, mode, samples, rng_seed)?;
            let (_, opt) = opt_under(&f, &c, mode)?;
            let member: Arc<dyn SetObjective> = match game.payoff {
                PayoffMode::Ratio if opt > 0.0 => Arc::new(ScaledObjective::new(Arc::new(f), 1.0 / opt)),
                _ => Arc::new(f),
            };
            Ok((member, opt))
        })
        .collect::<Result<_>>()?;
    let (members, opts): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    Ok((ObjectiveFamily::new(members)?, opts))
}

/// Double oracle over seed sets and grid points.
pub fn dosim_solve(game: &InfluenceGame, cfg: &DosimConfig, rng_seed: u64) -> Result<DosimResult> {
    let grid = discretize_params(&game.graph, &game.intervals, cfg.delta_grid, cfg.coupled, cfg.grid_cap)?;
    dosim_solve_on_grid(game, grid, cfg, rng_seed)
}

pub fn dosim_solve_on_grid(game: &InfluenceGame, grid: ParamGrid, cfg: &DosimConfig, rng_seed: u64) -> Result<DosimResult> {
    if cfg.samples == 0 && cfg.opt_mode == OptMode::Greedy {
        return Err(Error::param("samples must be positive"));
    }
    let (family, opt_values) = payoff_family(game, &grid, cfg.opt_mode, cfg.samples, rng_seed)?;
    let solve = double_oracle_solve(&family, &game.constraint(), cfg.tol, cfg.max_iters)?;
    Ok(DosimResult {
        grid,
        opt_values,
        solve,
        exact: cfg.opt_mode == OptMode::Exact,
    })
}
