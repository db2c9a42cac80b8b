//! Expected influence spread as a set objective over seed nodes.

use crate::cascade::{self, CascadeConfig, Realizations, Scratch};
use crate::error::{Error, Result};
use crate::graph::{EdgeParams, Graph};
use crate::objective::SetObjective;

/// Largest coin count for which a sampled objective also reports exact values.
pub const SAMPLED_EXACT_COINS: usize = 16;

fn random_coins(p: &EdgeParams, horizon: usize) -> usize {
    p.as_slice().iter().filter(|&&q| q > 0.0 && q < 1.0).count() * horizon
}

#[derive(Debug, Clone)]
enum Mode {
    Exact,
    Sampled(Realizations),
}

/// `f(S)` = expected number of active nodes when `S` is seeded at step 1.
///
/// Sampled mode fixes its cascade realizations at construction, so every
/// set is evaluated on the same coins.
#[derive(Debug, Clone)]
pub struct InfluenceObjective {
    graph: Graph,
    params: EdgeParams,
    horizon: usize,
    mode: Mode,
}

impl InfluenceObjective {
    /// Monte Carlo objective over `samples` realizations.
    pub fn sampled(g: &Graph, p: &EdgeParams, horizon: usize, samples: usize, rng_seed: u64) -> Result<Self> {
        let real = Realizations::sample(g, p, horizon, samples, rng_seed)?;
        Ok(InfluenceObjective {
            graph: g.clone(),
            params: p.clone(),
            horizon,
            mode: Mode::Sampled(real),
        })
    }

    /// Exact objective; fails when the instance has too many random coins.
    pub fn exact(g: &Graph, p: &EdgeParams, horizon: usize) -> Result<Self> {
        CascadeConfig::single_shot(horizon, &[]).validate(g)?;
        let coins = random_coins(p, horizon);
        if coins > cascade::EXACT_COIN_CAP as usize {
            return Err(Error::SizeCap {
                what: "exact spread coins",
                required: coins as u128,
                cap: cascade::EXACT_COIN_CAP as u128,
            });
        }
        Ok(InfluenceObjective {
            graph: g.clone(),
            params: p.clone(),
            horizon,
            mode: Mode::Exact,
        })
    }

    /// Number of `(edge, step)` coins with probability strictly between 0 and 1.
    pub fn random_coins(&self) -> usize {
        random_coins(&self.params, self.horizon)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn params(&self) -> &EdgeParams {
        &self.params
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Spread in each realization (sampled mode only).
    pub fn per_realization(&self, set: &[usize]) -> Option<Vec<usize>> {
        match &self.mode {
            Mode::Sampled(real) => Some(real.spreads(&self.graph, set)),
            Mode::Exact => None,
        }
    }

    fn exact_of(&self, set: &[usize]) -> Result<f64> {
        cascade::exact_spread(&self.graph, &self.params, &CascadeConfig::single_shot(self.horizon, set))
    }
}

impl SetObjective for InfluenceObjective {
    fn ground_size(&self) -> usize {
        self.graph.node_count()
    }

    fn value(&self, set: &[usize]) -> f64 {
        match &self.mode {
            Mode::Exact => self.exact_of(set).expect("checked at construction"),
            Mode::Sampled(real) => {
                if set.is_empty() {
                    return 0.0;
                }
                // Sequential in replicate order; callers parallelize over sets.
                let seeds: Vec<(usize, u32)> = set.iter().map(|&s| (s, 0)).collect();
                let mut scratch = Scratch::new(self.graph.node_count(), self.horizon);
                let total: usize = (0..real.len())
                    .map(|r| cascade::cascade_under(&self.graph, real.coins(r), self.horizon, &seeds, &mut scratch, None))
                    .sum();
                total as f64 / real.len() as f64
            }
        }
    }

    /// Sampled objectives report exact values only for instances with at
    /// most [`SAMPLED_EXACT_COINS`] random coins.
    fn exact_value(&self, set: &[usize]) -> Option<f64> {
        match self.mode {
            Mode::Exact => self.exact_of(set).ok(),
            Mode::Sampled(_) => {
                if self.random_coins() <= SAMPLED_EXACT_COINS {
                    self.exact_of(set).ok()
                } else {
                    None
                }
            }
        }
    }
}

/// Sampled influence objective; the usual entry point.
pub fn influence_set_objective(g: &Graph, p: &EdgeParams, horizon: usize, samples: usize, rng_seed: u64) -> Result<InfluenceObjective> {
    InfluenceObjective::sampled(g, p, horizon, samples, rng_seed)
}
