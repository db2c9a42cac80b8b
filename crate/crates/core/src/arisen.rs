//! Seed selection on a hidden network that can only be explored by queries.
//!
//! Querying a node reveals its incident edges. A node may be queried if it
//! is a neighbor of an already queried node, or if the ledger draws it
//! uniformly at random. ARISEN draws random prospective seeds, estimates the
//! size of each one's community from a short random walk, and samples seeds
//! with probability inversely proportional to the estimated size.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, SbmParams};
use crate::rng;

/// Queries issued against a hidden graph.
#[derive(Debug)]
pub struct QueryLedger<'g> {
    graph: &'g Graph,
    queried: Vec<bool>,
    order: Vec<usize>,
    /// Nodes adjacent to some queried node.
    frontier: Vec<bool>,
    budget: usize,
    random_draws: usize,
    rng: rng::Rng,
}

impl<'g> QueryLedger<'g> {
    pub fn new(graph: &'g Graph, budget: usize, rng_seed: u64) -> Self {
        let n = graph.node_count();
        QueryLedger {
            graph,
            queried: vec![false; n],
            order: Vec::new(),
            frontier: vec![false; n],
            budget,
            random_draws: 0,
            rng: rng::rng_from_seed(rng_seed),
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn budget_left(&self) -> usize {
        self.budget
    }

    pub fn queries_used(&self) -> usize {
        self.order.len()
    }

    pub fn random_draws_used(&self) -> usize {
        self.random_draws
    }

    pub fn is_queried(&self, v: usize) -> bool {
        self.queried.get(v).copied().unwrap_or(false)
    }

    /// Queried nodes in query order.
    pub fn queried(&self) -> &[usize] {
        &self.order
    }

    /// Neighbors of a queried node; `None` if it has not been queried.
    pub fn revealed_neighbors(&self, v: usize) -> Option<Vec<usize>> {
        self.is_queried(v).then(|| self.graph.neighbors(v).iter().map(|&(u, _)| u).collect())
    }

    fn charge(&mut self, v: usize) -> Result<Vec<usize>> {
        if self.budget == 0 {
            return Err(Error::BudgetExhausted);
        }
        self.budget -= 1;
        self.queried[v] = true;
        self.order.push(v);
        let nbrs: Vec<usize> = self.graph.neighbors(v).iter().map(|&(u, _)| u).collect();
        for &u in &nbrs {
            self.frontier[u] = true;
        }
        Ok(nbrs)
    }

    /// Query a neighbor of a queried node; returns its neighbors.
    pub fn query_node(&mut self, v: usize) -> Result<Vec<usize>> {
        if v >= self.node_count() {
            return Err(Error::Protocol(format!("node {v} does not exist")));
        }
        if self.queried[v] {
            return Err(Error::Protocol(format!("node {v} was already queried")));
        }
        if !self.frontier[v] {
            return Err(Error::Protocol(format!("node {v} is not adjacent to a queried node")));
        }
        self.charge(v)
    }

    /// Query a node drawn uniformly from the unqueried nodes.
    pub fn query_random(&mut self) -> Result<(usize, Vec<usize>)> {
        if self.budget == 0 {
            return Err(Error::BudgetExhausted);
        }
        let open = self.node_count() - self.order.len();
        if open == 0 {
            return Err(Error::Protocol("every node has been queried".into()));
        }
        self.random_draws += 1;
        let mut pick = self.rng.gen_range(0..open);
        let v = (0..self.node_count())
            .find(|&u| {
                if self.queried[u] {
                    return false;
                }
                if pick == 0 {
                    return true;
                }
                pick -= 1;
                false
            })
            .expect("an unqueried node exists");
        Ok((v, self.charge(v)?))
    }

    /// Uniform choice used by walks and samplers; counted as a random draw.
    pub fn choose<T: Copy>(&mut self, items: &[T]) -> Option<T> {
        if items.is_empty() {
            return None;
        }
        self.random_draws += 1;
        Some(items[self.rng.gen_range(0..items.len())])
    }

    /// Edges revealed so far, sorted.
    pub fn revealed_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .order
            .iter()
            .flat_map(|&v| self.graph.neighbors(v).iter().map(move |&(u, _)| (v.min(u), v.max(u))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Revealed edges as a graph on the full node set.
    pub fn observed_graph(&self) -> Graph {
        Graph::new(self.node_count(), self.revealed_edges()).expect("revealed edges come from a valid graph")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub start: usize,
    pub visited: Vec<usize>,
    /// Mean degree over the visited nodes.
    pub degree_estimate: f64,
    /// Estimated community size, in `[1, n]`.
    pub size_estimate: f64,
    /// The walk stopped early because the budget ran out.
    pub truncated: bool,
}

/// Community size implied by an average degree under the block model:
/// `1 + (d - n·p_b) / (p_w - p_b)`, clamped to `[1, n]`.
pub fn size_from_degree(degree: f64, n: usize, params: &SbmParams) -> f64 {
    let gap = params.p_within - params.p_between;
    let n = n as f64;
    if gap <= 0.0 {
        return n;
    }
    (1.0 + (degree - n * params.p_between) / gap).clamp(1.0, n)
}

/// Random walk visiting `walk_len` nodes (the start included) from a queried
/// start node. Revisits are free; each step moves to a uniform neighbor.
pub fn random_walk_estimate(ledger: &mut QueryLedger<'_>, start: usize, walk_len: usize, params: &SbmParams) -> Result<WalkEstimate> {
    if walk_len == 0 {
        return Err(Error::param("walk length must be at least 1"));
    }
    if !ledger.is_queried(start) {
        return Err(Error::Protocol(format!("walk start {start} has not been queried")));
    }
    let mut visited = vec![start];
    let mut current = start;
    let mut truncated = false;
    while visited.len() < walk_len {
        let nbrs = ledger.revealed_neighbors(current).expect("current node is queried");
        let Some(next) = ledger.choose(&nbrs) else { break };
        if !ledger.is_queried(next) {
            match ledger.query_node(next) {
                Ok(_) => {}
                Err(Error::BudgetExhausted) => {
                    truncated = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        visited.push(next);
        current = next;
    }
    let degree_estimate = visited.iter().map(|&v| ledger.graph.degree(v) as f64).sum::<f64>() / visited.len() as f64;
    Ok(WalkEstimate {
        start,
        size_estimate: size_from_degree(degree_estimate, ledger.node_count(), params),
        visited,
        degree_estimate,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedDistribution {
    pub prospective: Vec<usize>,
    pub weights: Vec<f64>,
}

impl SeedDistribution {
    pub fn sample(&self, rng: &mut rng::Rng) -> usize {
        let mut u = rng.gen::<f64>();
        for (&v, &w) in self.prospective.iter().zip(&self.weights) {
            if u < w {
                return v;
            }
            u -= w;
        }
        *self.prospective.last().expect("nonempty distribution")
    }
}

/// Weights proportional to `1 / ŝ`.
pub fn build_seed_distribution(estimates: &[WalkEstimate]) -> Result<SeedDistribution> {
    if estimates.is_empty() {
        return Err(Error::input("no walk estimates"));
    }
    let inv: Vec<f64> = estimates.iter().map(|e| 1.0 / e.size_estimate.max(1.0)).collect();
    let total: f64 = inv.iter().sum();
    Ok(SeedDistribution {
        prospective: estimates.iter().map(|e| e.start).collect(),
        weights: inv.iter().map(|w| w / total).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArisenConfig {
    /// Number of prospective seeds; `⌈3 K ln K⌉ + K` when absent.
    #[serde(default)]
    pub prospects: Option<usize>,
    pub walk_len: usize,
    /// Query budget; `prospects · walk_len + prospects` when absent.
    #[serde(default)]
    pub budget: Option<usize>,
}

impl ArisenConfig {
    pub fn prospects_for(&self, k: usize) -> usize {
        self.prospects.unwrap_or_else(|| default_prospects(k))
    }

    pub fn budget_for(&self, k: usize) -> usize {
        let r = self.prospects_for(k);
        self.budget.unwrap_or(r * self.walk_len + r)
    }
}

/// `⌈3 K ln K⌉ + K`.
pub fn default_prospects(k: usize) -> usize {
    let kf = k as f64;
    (3.0 * kf * kf.ln().max(0.0)).ceil() as usize + k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArisenOutcome {
    /// `K` distinct seeds, sorted: the distinct draws, topped up by further
    /// draws when some repeat.
    pub seeds: Vec<usize>,
    /// The `K` independent draws, repeats included.
    pub draws: Vec<usize>,
    pub queries_used: usize,
    pub truncated_walks: usize,
    pub estimates: Vec<WalkEstimate>,
}

/// Select `k` seeds while exploring the hidden graph through a ledger.
pub fn arisen_select(graph: &Graph, k: usize, params: &SbmParams, cfg: &ArisenConfig, rng_seed: u64) -> Result<ArisenOutcome> {
    if k == 0 {
        return Err(Error::param("need at least one seed"));
    }
    if cfg.walk_len == 0 {
        return Err(Error::param("walk length must be at least 1"));
    }
    let r = cfg.prospects_for(k);
    let mut ledger = QueryLedger::new(graph, cfg.budget_for(k), rng::derive_seed(rng_seed, 0));
    let mut estimates = Vec::with_capacity(r);
    for _ in 0..r {
        if ledger.queries_used() == graph.node_count() {
            break;
        }
        let (start, _) = ledger.query_random()?;
        estimates.push(random_walk_estimate(&mut ledger, start, cfg.walk_len, params)?);
    }
    let dist = build_seed_distribution(&estimates)?;
    let mut rng = rng::stream_rng(rng_seed, 1);
    let draws: Vec<usize> = (0..k).map(|_| dist.sample(&mut rng)).collect();
    let mut seeds = crate::objective::normalize_set(draws.clone());
    let distinct = crate::objective::normalize_set(dist.prospective.clone()).len();
    while seeds.len() < k.min(distinct) {
        let v = dist.sample(&mut rng);
        if let Err(at) = seeds.binary_search(&v) {
            seeds.insert(at, v);
        }
    }
    Ok(ArisenOutcome {
        seeds,
        draws,
        queries_used: ledger.queries_used(),
        truncated_walks: estimates.iter().filter(|e| e.truncated).count(),
        estimates,
    })
}
