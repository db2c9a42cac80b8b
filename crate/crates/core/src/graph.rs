//! Undirected graphs with dense node ids, per-edge propagation probabilities,
//! and the stochastic block model generator.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Immutable undirected simple graph on nodes `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted; the edge id is the
/// position in that list. Adjacency lists are sorted by neighbor id and carry
/// the edge id so per-edge data can be looked up from either endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
    labels: Option<Vec<usize>>,
}

impl Graph {
    /// Build a graph from an edge list. Rejects self-loops, duplicate edges
    /// (in either orientation) and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at node {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !set.insert(e) {
                return Err(Error::input(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
        }
        Ok(Self::from_sorted_unique(n, set.into_iter().collect()))
    }

    fn from_sorted_unique(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            adj,
            labels: None,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unique(n, Vec::new())
    }

    /// Attach ground-truth community labels; one label per node.
    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::input(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `(neighbor, edge id)` pairs sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_id(u, v).is_some()
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n {
            return None;
        }
        self.adj[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    /// Subgraph on the same node set keeping only the listed edges.
    pub fn with_edge_subset(&self, keep: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let g = Graph::new(self.n, keep)?;
        Ok(match &self.labels {
            Some(l) => Graph {
                labels: Some(l.clone()),
                ..g
            },
            None => g,
        })
    }

    /// Read the edge-list text format: one `u v [p]` per line, `#` comments.
    /// Returns the graph and, when every line carries a third column, the
    /// per-edge probabilities aligned with the graph's edge ids.
    pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<(Graph, Option<EdgeParams>)> {
        let file = std::fs::File::open(path)?;
        Self::parse_edge_list(std::io::BufReader::new(file), n)
    }

    pub fn parse_edge_list(reader: impl BufRead, n: Option<usize>) -> Result<(Graph, Option<EdgeParams>)> {
        let mut raw: Vec<(usize, usize, Option<f64>)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(Error::input(format!("line {}: expected `u v [p]`", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::input(format!("line {}: bad node id `{s}`", lineno + 1)))
            };
            let p = match cols.get(2) {
                Some(s) => Some(s.parse::<f64>().map_err(|_| {
                    Error::input(format!("line {}: bad probability `{s}`", lineno + 1))
                })?),
                None => None,
            };
            raw.push((parse(cols[0])?, parse(cols[1])?, p));
        }
        let max_id = raw.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        let n = n.unwrap_or(max_id);
        let g = Graph::new(n, raw.iter().map(|&(u, v, _)| (u, v)))?;
        let params = if !raw.is_empty() && raw.iter().all(|r| r.2.is_some()) {
            let mut p = vec![0.0; g.edge_count()];
            for &(u, v, pe) in &raw {
                let id = g.edge_id(u, v).expect("edge just inserted");
                p[id] = pe.unwrap();
            }
            Some(EdgeParams::new(&g, p)?)
        } else {
            None
        };
        Ok((g, params))
    }

    /// Read a `node label` sidecar and attach the labels.
    pub fn read_labels(self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut labels = vec![None; self.n];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::input(format!("labels line {}: expected `node label`", lineno + 1)));
            };
            let node: usize = a.parse().map_err(|_| Error::input(format!("bad node `{a}`")))?;
            let label: usize = b.parse().map_err(|_| Error::input(format!("bad label `{b}`")))?;
            if node >= self.n {
                return Err(Error::input(format!("label for unknown node {node}")));
            }
            labels[node] = Some(label);
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.ok_or_else(|| Error::input(format!("node {v} has no label"))))
            .collect::<Result<Vec<_>>>()?;
        self.with_labels(labels)
    }

    pub fn write_edge_list(&self, params: Option<&EdgeParams>) -> String {
        let mut out = String::new();
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            match params {
                Some(p) => out.push_str(&format!("{u} {v} {}\n", p.get(id))),
                None => out.push_str(&format!("{u} {v}\n")),
            }
        }
        out
    }
}

/// Propagation probability for every edge, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeParams {
    p: Vec<f64>,
}

impl EdgeParams {
    pub fn new(g: &Graph, p: Vec<f64>) -> Result<Self> {
        if p.len() != g.edge_count() {
            return Err(Error::input(format!(
                "{} probabilities for {} edges",
                p.len(),
                g.edge_count()
            )));
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::param(format!("edge probability {bad} outside [0, 1]")));
        }
        Ok(EdgeParams { p })
    }

    pub fn uniform(g: &Graph, p: f64) -> Result<Self> {
        Self::new(g, vec![p; g.edge_count()])
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.p[edge]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Planted-partition parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub sizes: Vec<usize>,
    pub p_within: f64,
    pub p_between: f64,
    /// Permit `p_between > p_within` (off by default).
    #[serde(default)]
    pub allow_disassortative: bool,
}

impl SbmParams {
    pub fn new(sizes: Vec<usize>, p_within: f64, p_between: f64) -> Self {
        SbmParams {
            sizes,
            p_within,
            p_between,
            allow_disassortative: false,
        }
    }

    pub fn node_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::param("no communities"));
        }
        if self.sizes.contains(&0) {
            return Err(Error::param("community sizes must be positive"));
        }
        for p in [self.p_within, self.p_between] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("probability {p} outside [0, 1]")));
            }
        }
        if !self.allow_disassortative && self.p_between > self.p_within {
            return Err(Error::param(format!(
                "p_between = {} exceeds p_within = {}",
                self.p_between, self.p_within
            )));
        }
        Ok(())
    }

    /// Community id of every node, communities laid out contiguously.
    pub fn labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat(c).take(s))
            .collect()
    }
}

/// Sample a graph from the stochastic block model. Every unordered pair is
/// visited once in lexicographic order and joined with probability
/// `p_within` or `p_between` depending on the ground-truth labels.
pub fn generate_sbm(params: &SbmParams, rng_seed: u64) -> Result<Graph> {
    params.validate()?;
    let labels = params.labels();
    let n = labels.len();
    let mut rng = rng::rng_from_seed(rng_seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] {
                params.p_within
            } else {
                params.p_between
            };
            // p == 1 must always connect; gen::<f64>() is in [0, 1).
            if p > 0.0 && rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_sorted_unique(n, edges).with_labels(labels)
}
