//! Time-horizon independent cascade.
//!
//! Every active node retries each inactive neighbor once per step until the
//! neighbor activates or the horizon is reached. A realization of the process
//! fixes one Bernoulli coin per `(edge, step)`; it is stored as a bitmask per
//! edge (bit `t - 1` set when the attempt at step `t` succeeds). Given the
//! coins, a node's activation step is its earliest arrival time over
//! time-respecting paths, which we compute with a bucket queue over steps.

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeParams, Graph};
use crate::rng;

/// Longest supported horizon (coins per edge are packed in a `u32`).
pub const MAX_HORIZON: usize = 32;

/// Default cap on the number of random coins enumerated by [`exact_spread`].
pub const EXACT_COIN_CAP: u32 = 24;

/// Horizon and seeding schedule. `schedule[t]` lists the seeds that become
/// active at the start of step `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeConfig {
    pub horizon: usize,
    pub schedule: Vec<Vec<usize>>,
}

impl CascadeConfig {
    /// All seeds activated at step 1.
    pub fn single_shot(horizon: usize, seeds: &[usize]) -> Self {
        CascadeConfig {
            horizon,
            schedule: vec![seeds.to_vec()],
        }
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::param("horizon must be at least 1"));
        }
        if self.horizon > MAX_HORIZON {
            return Err(Error::param(format!("horizon {} exceeds {MAX_HORIZON}", self.horizon)));
        }
        if self.schedule.len() > self.horizon {
            return Err(Error::param(format!(
                "seed schedule has {} rounds but horizon is {}",
                self.schedule.len(),
                self.horizon
            )));
        }
        for &s in self.schedule.iter().flatten() {
            if s >= g.node_count() {
                return Err(Error::input(format!("seed {s} out of range")));
            }
        }
        Ok(())
    }

    /// `(node, arrival)` pairs where arrival `t - 1` means active at the start of step `t`.
    fn seed_arrivals(&self) -> Vec<(usize, u32)> {
        self.schedule
            .iter()
            .enumerate()
            .flat_map(|(t, seeds)| seeds.iter().map(move |&s| (s, t as u32)))
            .collect()
    }

    pub fn all_seeds(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.schedule.iter().flatten().copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Reusable buffers for cascade evaluation.
#[derive(Debug, Default)]
pub struct Scratch {
    arrival: Vec<u32>,
    buckets: Vec<Vec<usize>>,
    touched: Vec<usize>,
}

const INACTIVE: u32 = u32::MAX;

impl Scratch {
    pub fn new(n: usize, horizon: usize) -> Self {
        Scratch {
            arrival: vec![INACTIVE; n],
            buckets: vec![Vec::new(); horizon + 1],
            touched: Vec::new(),
        }
    }

    fn prepare(&mut self, n: usize, horizon: usize) {
        if self.arrival.len() != n {
            self.arrival = vec![INACTIVE; n];
        }
        if self.buckets.len() < horizon + 1 {
            self.buckets.resize(horizon + 1, Vec::new());
        }
    }
}

/// Run the cascade for fixed coins. Returns the number of active nodes and,
/// when `active_out` is given, fills it with the sorted active set.
pub fn cascade_under(
    g: &Graph,
    coins: &[u32],
    horizon: usize,
    seeds: &[(usize, u32)],
    scratch: &mut Scratch,
    active_out: Option<&mut Vec<usize>>,
) -> usize {
    scratch.prepare(g.node_count(), horizon);
    let Scratch {
        arrival,
        buckets,
        touched,
    } = scratch;
    for &(s, a) in seeds {
        if a < arrival[s] {
            if arrival[s] == INACTIVE {
                touched.push(s);
            }
            arrival[s] = a;
            buckets[a as usize].push(s);
        }
    }
    let h = horizon as u32;
    for t in 0..horizon {
        let mut i = 0;
        while i < buckets[t].len() {
            let u = buckets[t][i];
            i += 1;
            if arrival[u] != t as u32 {
                continue;
            }
            for &(v, e) in g.neighbors(u) {
                if arrival[v] <= t as u32 + 1 {
                    continue;
                }
                let later = coins[e] >> t;
                if later == 0 {
                    continue;
                }
                let step = t as u32 + later.trailing_zeros() + 1;
                if step <= h && step < arrival[v] {
                    if arrival[v] == INACTIVE {
                        touched.push(v);
                    }
                    arrival[v] = step;
                    buckets[step as usize].push(v);
                }
            }
        }
        buckets[t].clear();
    }
    buckets[horizon].clear();
    let count = touched.len();
    if let Some(out) = active_out {
        out.clear();
        out.extend_from_slice(touched);
        out.sort_unstable();
    }
    for &v in touched.iter() {
        arrival[v] = INACTIVE;
    }
    touched.clear();
    count
}

/// Draw one realization: for each edge in id order, for each step in order,
/// one uniform `u` and coin `u < p_e`. Using the same stream for different
/// parameter vectors gives common random numbers across them.
pub fn draw_coins(p: &EdgeParams, horizon: usize, rng: &mut rng::Rng) -> Vec<u32> {
    p.as_slice()
        .iter()
        .map(|&pe| {
            let mut mask = 0u32;
            for t in 0..horizon {
                if rng.gen::<f64>() < pe {
                    mask |= 1 << t;
                }
            }
            mask
        })
        .collect()
}

/// A fixed batch of cascade realizations shared by every seed set it is
/// asked to evaluate.
#[derive(Debug, Clone)]
pub struct Realizations {
    horizon: usize,
    edges: usize,
    count: usize,
    coins: Vec<u32>,
}

impl Realizations {
    /// Replicate `r` draws its coins from stream `(rng_seed, r)`.
    pub fn sample(g: &Graph, p: &EdgeParams, horizon: usize, count: usize, rng_seed: u64) -> Result<Self> {
        if p.len() != g.edge_count() {
            return Err(Error::input("edge parameters do not match graph"));
        }
        if horizon == 0 || horizon > MAX_HORIZON {
            return Err(Error::param(format!("horizon {horizon} outside 1..={MAX_HORIZON}")));
        }
        if count == 0 {
            return Err(Error::param("need at least one realization"));
        }
        let coins: Vec<Vec<u32>> = (0..count)
            .into_par_iter()
            .map(|r| draw_coins(p, horizon, &mut rng::stream_rng(rng_seed, r as u64)))
            .collect();
        Ok(Realizations {
            horizon,
            edges: g.edge_count(),
            count,
            coins: coins.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn coins(&self, r: usize) -> &[u32] {
        &self.coins[r * self.edges..(r + 1) * self.edges]
    }

    /// Number of active nodes in every realization, all seeds at step 1.
    pub fn spreads(&self, g: &Graph, seeds: &[usize]) -> Vec<usize> {
        let seeds: Vec<(usize, u32)> = seeds.iter().map(|&s| (s, 0)).collect();
        (0..self.count)
            .into_par_iter()
            .map_init(
                || Scratch::new(g.node_count(), self.horizon),
                |scratch, r| cascade_under(g, self.coins(r), self.horizon, &seeds, scratch, None),
            )
            .collect()
    }

    /// Mean spread, summed in replicate order.
    pub fn mean_spread(&self, g: &Graph, seeds: &[usize]) -> f64 {
        let s = self.spreads(g, seeds);
        s.iter().sum::<usize>() as f64 / s.len() as f64
    }
}

/// One stochastic run of the cascade; returns the sorted final active set.
pub fn simulate_icm(g: &Graph, p: &EdgeParams, cfg: &CascadeConfig, rng_seed: u64) -> Result<Vec<usize>> {
    cfg.validate(g)?;
    if p.len() != g.edge_count() {
        return Err(Error::input("edge parameters do not match graph"));
    }
    let mut rng = rng::rng_from_seed(rng_seed);
    let coins = draw_coins(p, cfg.horizon, &mut rng);
    let mut active = Vec::new();
    cascade_under(
        g,
        &coins,
        cfg.horizon,
        &cfg.seed_arrivals(),
        &mut Scratch::new(g.node_count(), cfg.horizon),
        Some(&mut active),
    );
    Ok(active)
}

/// Spread of a fixed realization; used for common-random-number comparisons.
pub fn spread_with_coins(g: &Graph, coins: &[u32], cfg: &CascadeConfig) -> Result<Vec<usize>> {
    cfg.validate(g)?;
    if coins.len() != g.edge_count() {
        return Err(Error::input("coin vector does not match graph"));
    }
    let mut active = Vec::new();
    cascade_under(
        g,
        coins,
        cfg.horizon,
        &cfg.seed_arrivals(),
        &mut Scratch::new(g.node_count(), cfg.horizon),
        Some(&mut active),
    );
    Ok(active)
}

/// Monte Carlo estimate of the expected number of active nodes together with
/// its standard error. Replicate `r` uses stream `(rng_seed, r)`.
pub fn expected_spread(
    g: &Graph,
    p: &EdgeParams,
    cfg: &CascadeConfig,
    samples: usize,
    rng_seed: u64,
) -> Result<(f64, f64)> {
    cfg.validate(g)?;
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    if p.len() != g.edge_count() {
        return Err(Error::input("edge parameters do not match graph"));
    }
    let seeds = cfg.seed_arrivals();
    let counts: Vec<usize> = (0..samples)
        .into_par_iter()
        .map_init(
            || Scratch::new(g.node_count(), cfg.horizon),
            |scratch, r| {
                let coins = draw_coins(p, cfg.horizon, &mut rng::stream_rng(rng_seed, r as u64));
                cascade_under(g, &coins, cfg.horizon, &seeds, scratch, None)
            },
        )
        .collect();
    Ok(mean_and_stderr(counts.iter().map(|&c| c as f64)))
}

pub(crate) fn mean_and_stderr(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact expected spread by enumerating every random `(edge, step)` coin.
/// Coins with `p_e` equal to 0 or 1 are fixed and not enumerated.
pub fn exact_spread(g: &Graph, p: &EdgeParams, cfg: &CascadeConfig) -> Result<f64> {
    exact_spread_with_cap(g, p, cfg, EXACT_COIN_CAP)
}

pub fn exact_spread_with_cap(g: &Graph, p: &EdgeParams, cfg: &CascadeConfig, cap_bits: u32) -> Result<f64> {
    cfg.validate(g)?;
    if p.len() != g.edge_count() {
        return Err(Error::input("edge parameters do not match graph"));
    }
    let horizon = cfg.horizon;
    let mut base = vec![0u32; g.edge_count()];
    let mut free: Vec<(usize, u32, f64)> = Vec::new();
    for (e, &pe) in p.as_slice().iter().enumerate() {
        for t in 0..horizon {
            if pe >= 1.0 {
                base[e] |= 1 << t;
            } else if pe > 0.0 {
                free.push((e, 1 << t, pe));
            }
        }
    }
    if free.len() as u32 > cap_bits.min(63) {
        return Err(Error::SizeCap {
            what: "exact spread coins",
            required: free.len() as u128,
            cap: cap_bits as u128,
        });
    }
    let seeds = cfg.seed_arrivals();
    let mut scratch = Scratch::new(g.node_count(), horizon);
    let mut coins = base.clone();
    let mut total = 0.0;
    for outcome in 0u64..(1u64 << free.len()) {
        let mut prob = 1.0;
        coins.copy_from_slice(&base);
        for (j, &(e, bit, pe)) in free.iter().enumerate() {
            if outcome >> j & 1 == 1 {
                coins[e] |= bit;
                prob *= pe;
            } else {
                prob *= 1.0 - pe;
            }
        }
        total += prob * cascade_under(g, &coins, horizon, &seeds, &mut scratch, None) as f64;
    }
    Ok(total)
}
