//! Budget allocation: channels reach customers independently, and a customer
//! reached by at least one selected channel yields its profit weight.
//!
//! `f(S) = Σ_v w_v (1 - Π_{u ∈ S} (1 - p_uv))`.

use std::path::Path;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Constraint;
use crate::objective::SetObjective;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetAllocInstance {
    pub channels: usize,
    pub customers: usize,
    /// Sparse activation probabilities `(channel, customer, p)`.
    pub edges: Vec<(usize, usize, f64)>,
    /// Number of channels that may be selected.
    pub budget: usize,
}

impl BudgetAllocInstance {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.customers == 0 {
            return Err(Error::input("budget instance needs at least one channel and one customer"));
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, v, p) in &self.edges {
            if u >= self.channels || v >= self.customers {
                return Err(Error::input(format!("edge ({u}, {v}) out of range")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::input(format!("activation probability {p} outside [0, 1]")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::input(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(())
    }

    pub fn constraint(&self) -> Constraint {
        Constraint::Cardinality(self.budget)
    }

    pub fn objective(&self, weights: Vec<f64>) -> Result<BudgetObjective> {
        BudgetObjective::new(self, weights)
    }
}

/// Profit uncertainty: an explicit list of weight vectors, with the
/// per-customer intervals they were drawn from when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitUncertaintySet {
    pub weights: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(f64, f64)>>,
}

impl ProfitUncertaintySet {
    pub fn validate(&self, customers: usize) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::input("profit uncertainty set is empty"));
        }
        for w in &self.weights {
            if w.len() != customers {
                return Err(Error::input("weight vector length does not match customer count"));
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::input("weights must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    /// Componentwise mean of the weight vectors.
    pub fn mean(&self) -> Vec<f64> {
        let m = self.weights.len() as f64;
        let mut out = vec![0.0; self.weights[0].len()];
        for w in &self.weights {
            for (o, x) in out.iter_mut().zip(w) {
                *o += x / m;
            }
        }
        out
    }
}

/// Instance file: the instance plus its profit uncertainty set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetInstanceFile {
    pub instance: BudgetAllocInstance,
    pub uncertainty: ProfitUncertaintySet,
}

impl BudgetInstanceFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: BudgetInstanceFile = serde_json::from_str(&text)?;
        file.instance.validate()?;
        file.uncertainty.validate(file.instance.customers)?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One objective per weight vector.
    pub fn family_members(&self) -> Result<Vec<Arc<dyn SetObjective>>> {
        self.uncertainty
            .weights
            .iter()
            .map(|w| Ok(Arc::new(self.instance.objective(w.clone())?) as Arc<dyn SetObjective>))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BudgetObjective {
    customers: usize,
    /// `reach[u]` lists `(customer, p)` for channel `u`.
    reach: Vec<Vec<(usize, f64)>>,
    /// `reached_by[v]` lists `(channel, p)` for customer `v`.
    reached_by: Vec<Vec<(usize, f64)>>,
    weights: Vec<f64>,
}

impl BudgetObjective {
    pub fn new(inst: &BudgetAllocInstance, weights: Vec<f64>) -> Result<Self> {
        inst.validate()?;
        if weights.len() != inst.customers {
            return Err(Error::input("weight vector length does not match customer count"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::input("weights must be finite and nonnegative"));
        }
        let mut reach = vec![Vec::new(); inst.channels];
        let mut reached_by = vec![Vec::new(); inst.customers];
        for &(u, v, p) in &inst.edges {
            if p > 0.0 {
                reach[u].push((v, p));
                reached_by[v].push((u, p));
            }
        }
        for list in reach.iter_mut().chain(reached_by.iter_mut()) {
            list.sort_by(|a, b| a.0.cmp(&b.0));
        }
        Ok(BudgetObjective {
            customers: inst.customers,
            reach,
            reached_by,
            weights,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same channels and probabilities, new weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), self.customers);
        BudgetObjective {
            weights,
            ..self.clone()
        }
    }

    /// `Π_{u ∈ S}(1 - p_uv)` for every customer.
    fn miss_probabilities(&self, set: &[usize]) -> Vec<f64> {
        let mut miss = vec![1.0; self.customers];
        for &u in set {
            for &(v, p) in &self.reach[u] {
                miss[v] *= 1.0 - p;
            }
        }
        miss
    }
}

impl SetObjective for BudgetObjective {
    fn ground_size(&self) -> usize {
        self.reach.len()
    }

    fn value(&self, set: &[usize]) -> f64 {
        self.miss_probabilities(set)
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| w * (1.0 - m))
            .sum()
    }

    fn marginal_gains(&self, set: &[usize], out: &mut [f64]) {
        let miss = self.miss_probabilities(set);
        let mut member = vec![false; self.reach.len()];
        for &u in set {
            member[u] = true;
        }
        for (u, slot) in out.iter_mut().enumerate() {
            *slot = self.reach[u]
                .iter()
                .map(|&(v, p)| {
                    let without = if !member[u] {
                        miss[v]
                    } else if p < 1.0 {
                        miss[v] / (1.0 - p)
                    } else {
                        self.reached_by[v]
                            .iter()
                            .filter(|&&(c, _)| c != u && member[c])
                            .map(|&(_, q)| 1.0 - q)
                            .product()
                    };
                    self.weights[v] * p * without
                })
                .sum();
        }
    }

    fn closed_form_multilinear(&self, x: &[f64]) -> Option<f64> {
        Some(
            self.reached_by
                .iter()
                .zip(&self.weights)
                .map(|(list, w)| w * (1.0 - list.iter().map(|&(u, p)| 1.0 - x[u] * p).product::<f64>()))
                .sum(),
        )
    }

    fn closed_form_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.reach.len()];
        let mut suffix = Vec::new();
        for (list, &w) in self.reached_by.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            // Product over the other channels via prefix and suffix products.
            suffix.clear();
            suffix.resize(list.len() + 1, 1.0);
            for j in (0..list.len()).rev() {
                suffix[j] = suffix[j + 1] * (1.0 - x[list[j].0] * list[j].1);
            }
            let mut prefix = 1.0;
            for (j, &(u, p)) in list.iter().enumerate() {
                g[u] += w * p * prefix * suffix[j + 1];
                prefix *= 1.0 - x[u] * p;
            }
        }
        Some(g)
    }

    fn singleton_bound(&self) -> f64 {
        (0..self.reach.len())
            .map(|u| self.reach[u].iter().map(|&(v, p)| self.weights[v] * p).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Generator settings for synthetic budget-allocation instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomInstanceSpec {
    pub channels: usize,
    pub customers: usize,
    /// Probability that a channel reaches a given customer.
    pub density: f64,
    pub budget: usize,
    /// Range of activation probabilities.
    pub p_range: (f64, f64),
    /// Range for the lower end of each customer's profit interval.
    pub weight_low: (f64, f64),
    /// Range for the width of each customer's profit interval.
    pub weight_width: (f64, f64),
    /// Number of weight vectors in the family.
    pub members: usize,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        RandomInstanceSpec {
            channels: 50,
            customers: 100,
            density: 0.1,
            budget: 5,
            p_range: (0.1, 0.5),
            weight_low: (0.0, 1.0),
            weight_width: (0.0, 1.0),
            members: 5,
        }
    }
}

fn uniform_in(rng: &mut rng::Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Random instance plus a family of weight vectors. Each customer gets a
/// profit interval; every member puts each customer at one end of its
/// interval chosen by a fair coin, so members are vertices of the interval box.
pub fn make_random_instance(spec: &RandomInstanceSpec, rng_seed: u64) -> Result<BudgetInstanceFile> {
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::param("density must lie in [0, 1]"));
    }
    let (plo, phi) = spec.p_range;
    if !(0.0 <= plo && plo <= phi && phi <= 1.0) {
        return Err(Error::param("activation probability range must lie in [0, 1]"));
    }
    if spec.weight_low.0 < 0.0 || spec.weight_low.0 > spec.weight_low.1 || spec.weight_width.0 < 0.0 || spec.weight_width.0 > spec.weight_width.1 {
        return Err(Error::param("weight ranges must be nonnegative and ordered"));
    }
    if spec.members == 0 {
        return Err(Error::param("family needs at least one member"));
    }
    let mut rng = rng::rng_from_seed(rng_seed);
    let mut edges = Vec::new();
    for u in 0..spec.channels {
        for v in 0..spec.customers {
            if spec.density > 0.0 && rng.gen::<f64>() < spec.density {
                edges.push((u, v, uniform_in(&mut rng, spec.p_range)));
            }
        }
    }
    let intervals: Vec<(f64, f64)> = (0..spec.customers)
        .map(|_| {
            let lo = uniform_in(&mut rng, spec.weight_low);
            (lo, lo + uniform_in(&mut rng, spec.weight_width))
        })
        .collect();
    let weights = (0..spec.members)
        .map(|_| {
            intervals
                .iter()
                .map(|&(lo, hi)| if rng.gen::<bool>() { hi } else { lo })
                .collect()
        })
        .collect();
    let file = BudgetInstanceFile {
        instance: BudgetAllocInstance {
            channels: spec.channels,
            customers: spec.customers,
            edges,
            budget: spec.budget,
        },
        uncertainty: ProfitUncertaintySet {
            weights,
            intervals: Some(intervals),
        },
    };
    file.instance.validate()?;
    Ok(file)
}

/// A family on which any single set has worst-case profit zero.
///
/// Channels and customers are split into `groups` disjoint blocks; channels
/// only reach customers of their own block, and member `j` only values
/// customers of block `j`. With `budget < groups` every pure allocation
/// misses some block entirely. Block 0 is the largest, so optimizing the
/// mean weights concentrates the whole budget there.
pub fn make_adversarial_instance(groups: usize, channels_per_group: usize, budget: usize, rng_seed: u64) -> Result<BudgetInstanceFile> {
    if groups < 2 || channels_per_group == 0 {
        return Err(Error::param("adversarial family needs at least two groups and one channel per group"));
    }
    if budget == 0 || budget >= groups {
        return Err(Error::param("adversarial family needs 0 < budget < groups"));
    }
    let mut rng = rng::rng_from_seed(rng_seed);
    let sizes: Vec<usize> = (0..groups).map(|j| if j == 0 { 4 * channels_per_group } else { 2 * channels_per_group }).collect();
    let customers: usize = sizes.iter().sum();
    let mut edges = Vec::new();
    let mut block_of = Vec::with_capacity(customers);
    let mut start = 0;
    for (j, &size) in sizes.iter().enumerate() {
        for u in j * channels_per_group..(j + 1) * channels_per_group {
            for v in start..start + size {
                if rng.gen::<f64>() < 0.5 {
                    edges.push((u, v, rng.gen_range(0.3..0.7)));
                }
            }
        }
        block_of.extend(std::iter::repeat(j).take(size));
        start += size;
    }
    let weights = (0..groups)
        .map(|j| block_of.iter().map(|&b| if b == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let file = BudgetInstanceFile {
        instance: BudgetAllocInstance {
            channels: groups * channels_per_group,
            customers,
            edges,
            budget,
        },
        uncertainty: ProfitUncertaintySet { weights, intervals: None },
    };
    file.instance.validate()?;
    Ok(file)
}
