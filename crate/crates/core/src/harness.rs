//! Experiment runner: JSON run configs in, CSV tables and a JSON manifest out.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arisen::{arisen_select, ArisenConfig};
use crate::cascade::{exact_spread, expected_spread, CascadeConfig};
use crate::domains::{make_adversarial_instance, make_random_instance, BudgetInstanceFile, InfluenceObjective, RandomInstanceSpec};
use crate::dosim::{dosim_solve, DosimConfig, InfluenceGame, IntervalUncertainty, PayoffMode};
use crate::equator::{double_oracle_solve, equator_solve, exact_minimax_lp_with_cap, worst_case_value, EquatorConfig, MixedStrategy, ObjectiveFamily, LP_SET_CAP};
use crate::error::{Error, Result};
use crate::field::change_sample;
use crate::graph::{generate_sbm, EdgeParams, Graph, SbmParams};
use crate::greedy::greedy_maximize;
use crate::matroid::Constraint;
use crate::objective::SetObjective;
use crate::rascal::{rascal_solve, rascal_solve_fixed, BoxPolytope, BudgetSimplex, CvarConfig, LinearScenarioObjective, Polytope, RascalResult, SaturatingObjective, ScenarioSet, StochasticObjective};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub instance_id: Option<String>,
    /// Output directory; the CLI's `--out` wins.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Record wall times; when off every time column is 0 so outputs are
    /// byte-reproducible.
    #[serde(default = "default_true")]
    pub timing: bool,
    /// Lift enumeration caps (LP strategy sets, parameter grids).
    #[serde(default)]
    pub cap_override: bool,
    #[serde(flatten)]
    pub experiment: Experiment,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    IcmSim(IcmSimConfig),
    EquatorBench(EquatorBenchConfig),
    DosimRun(DosimRunConfig),
    ArisenBench(ArisenBenchConfig),
    RascalBench(RascalBenchConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::IcmSim(_) => "icm-sim",
            Experiment::EquatorBench(_) => "equator-bench",
            Experiment::DosimRun(_) => "dosim-run",
            Experiment::ArisenBench(_) => "arisen-bench",
            Experiment::RascalBench(_) => "rascal-bench",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcmSimConfig {
    /// Edge list; an optional third column holds per-edge probabilities.
    pub graph: PathBuf,
    #[serde(default)]
    pub nodes: Option<usize>,
    /// Uniform probability; overrides the file's column.
    #[serde(default)]
    pub p: Option<f64>,
    pub horizon: usize,
    pub seeds: Vec<usize>,
    pub samples: usize,
    /// Also compute the exact spread.
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum InstanceSource {
    File {
        path: PathBuf,
    },
    Random {
        #[serde(default)]
        spec: RandomInstanceSpec,
        #[serde(default = "one")]
        count: usize,
    },
    Adversarial {
        groups: usize,
        channels_per_group: usize,
        budget: usize,
        #[serde(default = "one")]
        count: usize,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquatorBenchConfig {
    pub instances: Vec<InstanceSource>,
    #[serde(default)]
    pub equator: EquatorConfig,
    #[serde(default = "default_do_tol")]
    pub do_tol: f64,
    #[serde(default = "default_do_iters")]
    pub do_max_iters: usize,
    /// Double-oracle runs slower than this are flagged `timeout`.
    #[serde(default)]
    pub do_time_cap_ms: Option<u64>,
    /// Add an exact LP row where the strategy space is small enough.
    #[serde(default)]
    pub lp_oracle: bool,
}

fn default_do_tol() -> f64 {
    1e-3
}

fn default_do_iters() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalSpec {
    Global { lo: f64, hi: f64 },
    PerEdge { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosimRunConfig {
    pub graph: PathBuf,
    #[serde(default)]
    pub nodes: Option<usize>,
    pub interval: IntervalSpec,
    pub k: usize,
    pub horizon: usize,
    #[serde(default = "default_payoff")]
    pub payoff: PayoffMode,
    pub dosim: DosimConfig,
}

fn default_payoff() -> PayoffMode {
    PayoffMode::Ratio
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArisenBenchConfig {
    /// Planted partition used by the size estimator and, without `graph`,
    /// to generate the hidden graph.
    pub sbm: SbmParams,
    #[serde(default)]
    pub graph: Option<PathBuf>,
    pub k: usize,
    pub trials: usize,
    pub arisen: ArisenConfig,
    /// Uniform propagation probability for spread evaluation.
    pub p: f64,
    pub horizon: usize,
    pub samples: usize,
    /// Also benchmark neighbor-pair sampling at this fraction.
    #[serde(default)]
    pub change_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RascalObjectiveSpec {
    Saturating(SaturatingObjective),
    Linear(LinearScenarioObjective),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PolytopeSpec {
    Box,
    Budget { budget: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RascalBenchConfig {
    pub objective: RascalObjectiveSpec,
    pub polytope: PolytopeSpec,
    pub cvar: CvarConfig,
    /// Solve against this many scenarios drawn once instead of fresh batches.
    #[serde(default)]
    pub fixed_scenarios: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Read a config; relative paths inside it are taken relative to the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.experiment {
            Experiment::IcmSim(c) => fix(&mut c.graph),
            Experiment::DosimRun(c) => fix(&mut c.graph),
            Experiment::ArisenBench(c) => {
                if let Some(g) = &mut c.graph {
                    fix(g);
                }
            }
            Experiment::EquatorBench(c) => {
                for src in &mut c.instances {
                    if let InstanceSource::File { path } = src {
                        fix(path);
                    }
                }
            }
            Experiment::RascalBench(_) => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let exists = |p: &Path| {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::input(format!("file not found: {}", p.display())))
            }
        };
        match &self.experiment {
            Experiment::IcmSim(c) => exists(&c.graph),
            Experiment::DosimRun(c) => exists(&c.graph),
            Experiment::ArisenBench(c) => c.graph.as_deref().map_or(Ok(()), exists),
            Experiment::EquatorBench(c) => {
                if c.instances.is_empty() {
                    return Err(Error::input("no instances listed"));
                }
                c.instances.iter().try_for_each(|s| match s {
                    InstanceSource::File { path } => exists(path),
                    _ => Ok(()),
                })
            }
            Experiment::RascalBench(_) => Ok(()),
        }
    }

    fn instance_id(&self) -> String {
        self.instance_id.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub name: String,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    /// File name inside the output directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub phases: Vec<PhaseTiming>,
    pub files: Vec<FileDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialize rows as CSV with a header row.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

struct Recorder {
    out: PathBuf,
    timing: bool,
    phases: Vec<PhaseTiming>,
    files: Vec<FileDigest>,
}

impl Recorder {
    fn ms(&self, started: Instant) -> u64 {
        if self.timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        }
    }

    fn phase(&mut self, name: &str, started: Instant) {
        let wall_time_ms = self.ms(started);
        self.phases.push(PhaseTiming {
            name: name.to_string(),
            wall_time_ms,
        });
    }

    fn write<T: Serialize>(&mut self, file: &str, rows: &[T]) -> Result<()> {
        let bytes = to_csv(rows)?;
        fs::write(self.out.join(file), &bytes)?;
        self.files.push(FileDigest {
            file: file.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }
}

/// Run one experiment, writing its CSVs and `manifest.json` into `out`.
pub fn run_experiment(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let mut rec = Recorder {
        out: out.to_path_buf(),
        timing: cfg.timing,
        phases: Vec::new(),
        files: Vec::new(),
    };
    match &cfg.experiment {
        Experiment::IcmSim(c) => run_icm(cfg, c, &mut rec)?,
        Experiment::EquatorBench(c) => run_equator_bench(cfg, c, &mut rec)?,
        Experiment::DosimRun(c) => run_dosim(cfg, c, &mut rec)?,
        Experiment::ArisenBench(c) => run_arisen(cfg, c, &mut rec)?,
        Experiment::RascalBench(c) => run_rascal(cfg, c, &mut rec)?,
    }
    let manifest = RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        phases: rec.phases,
        files: rec.files,
    };
    fs::write(out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Recompute every digest listed in a manifest; returns the mismatching files.
pub fn verify_manifest(manifest: &RunManifest, out: &Path) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for f in &manifest.files {
        if sha256_hex(&fs::read(out.join(&f.file))?) != f.sha256 {
            bad.push(f.file.clone());
        }
    }
    Ok(bad)
}

fn load_graph(path: &Path, nodes: Option<usize>, p: Option<f64>) -> Result<(Graph, Option<EdgeParams>)> {
    let (g, file_p) = Graph::read_edge_list(path, nodes)?;
    let params = match p {
        Some(p) => Some(EdgeParams::uniform(&g, p)?),
        None => file_p,
    };
    Ok((g, params))
}

fn join_set(set: &[usize]) -> String {
    set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcmRow {
    pub instance_id: String,
    pub seed: u64,
    pub n: usize,
    pub edges: usize,
    pub horizon: usize,
    pub seeds: String,
    pub samples: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: Option<f64>,
    pub wall_time_ms: u64,
}

fn run_icm(cfg: &RunConfig, c: &IcmSimConfig, rec: &mut Recorder) -> Result<()> {
    let started = Instant::now();
    let (g, p) = load_graph(&c.graph, c.nodes, c.p)?;
    let p = p.ok_or_else(|| Error::input("no edge probabilities: set p or add a third column"))?;
    let cc = CascadeConfig::single_shot(c.horizon, &c.seeds);
    let (estimate, stderr) = expected_spread(&g, &p, &cc, c.samples, cfg.seed)?;
    let exact = if c.exact { Some(exact_spread(&g, &p, &cc)?) } else { None };
    let row = IcmRow {
        instance_id: cfg.instance_id(),
        seed: cfg.seed,
        n: g.node_count(),
        edges: g.edge_count(),
        horizon: c.horizon,
        seeds: join_set(&crate::objective::normalize_set(c.seeds.clone())),
        samples: c.samples,
        estimate,
        stderr,
        exact,
        wall_time_ms: rec.ms(started),
    };
    rec.write("icm.csv", &[row])?;
    rec.phase("simulate", started);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance_id: String,
    pub algorithm: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub worst_case_value: Option<f64>,
    pub wall_time_ms: u64,
    pub seed: u64,
    pub status: String,
}

/// Settings shared by every algorithm in a comparison.
#[derive(Debug, Clone)]
pub struct CompareSettings {
    pub equator: EquatorConfig,
    pub do_tol: f64,
    pub do_max_iters: usize,
    pub do_time_cap_ms: Option<u64>,
    pub lp_oracle: bool,
    pub lp_cap: u128,
    pub timing: bool,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            equator: EquatorConfig::default(),
            do_tol: default_do_tol(),
            do_max_iters: default_do_iters(),
            do_time_cap_ms: None,
            lp_oracle: false,
            lp_cap: LP_SET_CAP,
            timing: true,
        }
    }
}

/// EQUATOR, double oracle and greedy on the uniform mixture of the members
/// (plus the exact LP when requested) on one family. Failures become rows
/// with an `error` status.
pub fn compare_algorithms(instance_id: &str, family: &ObjectiveFamily, c: &Constraint, settings: &CompareSettings, seed: u64) -> Vec<ComparisonRow> {
    let n = family.ground_size();
    let k = c.rank(n);
    let ms = |t: Instant| if settings.timing { t.elapsed().as_millis() as u64 } else { 0 };
    let row = |algorithm: &str, value: Option<f64>, wall: u64, status: String| ComparisonRow {
        instance_id: instance_id.to_string(),
        algorithm: algorithm.to_string(),
        n,
        k,
        m: family.len(),
        worst_case_value: value,
        wall_time_ms: wall,
        seed,
        status,
    };
    let mut rows = Vec::new();

    let t = Instant::now();
    match equator_solve(family, c, &settings.equator, seed) {
        Ok(r) => rows.push(row("equator", Some(worst_case_value(&r.strategy, family)), ms(t), "ok".into())),
        Err(e) => rows.push(row("equator", None, ms(t), format!("error: {e}"))),
    }

    let t = Instant::now();
    match double_oracle_solve(family, c, settings.do_tol, settings.do_max_iters) {
        Ok(r) => {
            let elapsed = t.elapsed().as_millis() as u64;
            let status = match settings.do_time_cap_ms {
                Some(cap) if elapsed > cap => "timeout",
                _ if !r.converged => "not-converged",
                _ => "ok",
            };
            rows.push(row("double-oracle", Some(r.value), ms(t), status.into()));
        }
        Err(e) => rows.push(row("double-oracle", None, ms(t), format!("error: {e}"))),
    }

    let t = Instant::now();
    let mean = family.mixture(&vec![1.0 / family.len() as f64; family.len()]);
    match greedy_maximize(&mean, c) {
        Ok(g) => rows.push(row("greedy", Some(worst_case_value(&MixedStrategy::pure(g.set), family)), ms(t), "ok".into())),
        Err(e) => rows.push(row("greedy", None, ms(t), format!("error: {e}"))),
    }

    if settings.lp_oracle {
        let t = Instant::now();
        match exact_minimax_lp_with_cap(family, c, settings.lp_cap) {
            Ok(s) => rows.push(row("lp", Some(s.value), ms(t), "ok".into())),
            Err(e @ Error::SizeCap { .. }) => rows.push(row("lp", None, ms(t), format!("skipped: {e}"))),
            Err(e) => rows.push(row("lp", None, ms(t), format!("error: {e}"))),
        }
    }
    rows
}

fn bench_instances(cfg: &RunConfig, c: &EquatorBenchConfig) -> Result<Vec<(String, BudgetInstanceFile)>> {
    let mut out = Vec::new();
    for (s, src) in c.instances.iter().enumerate() {
        let stream = |i: usize| rng::derive_seed(rng::derive_seed(cfg.seed, s as u64), i as u64);
        match src {
            InstanceSource::File { path } => {
                let id = path.file_stem().map_or_else(|| format!("file-{s}"), |f| f.to_string_lossy().into_owned());
                out.push((id, BudgetInstanceFile::load(path)?));
            }
            InstanceSource::Random { spec, count } => {
                for i in 0..*count {
                    out.push((format!("random-{s}-{i}"), make_random_instance(spec, stream(i))?));
                }
            }
            InstanceSource::Adversarial {
                groups,
                channels_per_group,
                budget,
                count,
            } => {
                for i in 0..*count {
                    out.push((
                        format!("adversarial-{s}-{i}"),
                        make_adversarial_instance(*groups, *channels_per_group, *budget, stream(i))?,
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn run_equator_bench(cfg: &RunConfig, c: &EquatorBenchConfig, rec: &mut Recorder) -> Result<()> {
    let started = Instant::now();
    let instances = bench_instances(cfg, c)?;
    rec.phase("instances", started);
    let settings = CompareSettings {
        equator: c.equator.clone(),
        do_tol: c.do_tol,
        do_max_iters: c.do_max_iters,
        do_time_cap_ms: c.do_time_cap_ms,
        lp_oracle: c.lp_oracle,
        lp_cap: if cfg.cap_override { u128::MAX } else { LP_SET_CAP },
        timing: cfg.timing,
    };
    let started = Instant::now();
    let mut rows = Vec::new();
    for (id, file) in &instances {
        let family = ObjectiveFamily::new(file.family_members()?)?;
        rows.extend(compare_algorithms(id, &family, &file.instance.constraint(), &settings, cfg.seed));
    }
    rec.write("comparison.csv", &rows)?;
    rec.phase("compare", started);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosimRow {
    pub instance_id: String,
    pub seed: u64,
    pub iteration: usize,
    pub game_value: f64,
    pub lower_bound: f64,
    pub influencer_support: usize,
    pub adversary_support: usize,
    /// Whether ratios use exact optima (otherwise greedy, approximate).
    pub exact_ratio: bool,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub instance_id: String,
    pub seed: u64,
    pub set: String,
    pub probability: f64,
}

fn run_dosim(cfg: &RunConfig, c: &DosimRunConfig, rec: &mut Recorder) -> Result<()> {
    let started = Instant::now();
    let (g, _) = load_graph(&c.graph, c.nodes, None)?;
    let intervals = match &c.interval {
        IntervalSpec::Global { lo, hi } => IntervalUncertainty::global(&g, *lo, *hi)?,
        IntervalSpec::PerEdge { lo, hi } => IntervalUncertainty::new(&g, lo.clone(), hi.clone())?,
    };
    let game = InfluenceGame::new(g, intervals, c.k, c.horizon, c.payoff)?;
    let mut dcfg = c.dosim.clone();
    if cfg.cap_override {
        dcfg.grid_cap = u128::MAX;
    }
    let result = dosim_solve(&game, &dcfg, cfg.seed)?;
    let id = cfg.instance_id();
    let lower = result.solve.lower_bounds();
    let rows: Vec<DosimRow> = result
        .solve
        .history
        .iter()
        .zip(lower)
        .enumerate()
        .map(|(i, (h, lb))| DosimRow {
            instance_id: id.clone(),
            seed: cfg.seed,
            iteration: i,
            game_value: h.restricted_value,
            lower_bound: lb,
            influencer_support: h.influencer_strategies,
            adversary_support: h.adversary_strategies,
            exact_ratio: result.exact,
            wall_time_ms: if cfg.timing { h.elapsed.as_millis() as u64 } else { 0 },
        })
        .collect();
    rec.write("dosim.csv", &rows)?;
    let strategy: Vec<StrategyRow> = result
        .solve
        .strategy
        .support()
        .iter()
        .map(|(s, w)| StrategyRow {
            instance_id: id.clone(),
            seed: cfg.seed,
            set: join_set(s),
            probability: *w,
        })
        .collect();
    rec.write("dosim_strategy.csv", &strategy)?;
    rec.phase("solve", started);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryBenchRow {
    pub instance_id: String,
    pub seed: u64,
    pub trial: usize,
    pub queries_used: usize,
    pub fraction_queried: f64,
    pub spread: f64,
    pub greedy_full_spread: f64,
    pub ratio: f64,
}

fn run_arisen(cfg: &RunConfig, c: &ArisenBenchConfig, rec: &mut Recorder) -> Result<()> {
    let started = Instant::now();
    let g = match &c.graph {
        Some(path) => Graph::read_edge_list(path, Some(c.sbm.node_count()))?.0,
        None => generate_sbm(&c.sbm, rng::derive_seed(cfg.seed, 0))?,
    };
    let n = g.node_count();
    let p = EdgeParams::uniform(&g, c.p)?;
    let eval_seed = rng::derive_seed(cfg.seed, 1);
    let full = InfluenceObjective::sampled(&g, &p, c.horizon, c.samples, eval_seed)?;
    let kc = Constraint::Cardinality(c.k);
    let best = greedy_maximize(&full, &kc)?.value;
    rec.phase("full-greedy", started);
    let id = cfg.instance_id();
    let row = |trial: usize, queries: usize, spread: f64| QueryBenchRow {
        instance_id: id.clone(),
        seed: cfg.seed,
        trial,
        queries_used: queries,
        fraction_queried: queries as f64 / n as f64,
        spread,
        greedy_full_spread: best,
        ratio: if best > 0.0 { spread / best } else { 0.0 },
    };

    let started = Instant::now();
    let base = rng::derive_seed(cfg.seed, 2);
    let rows: Vec<QueryBenchRow> = (0..c.trials)
        .into_par_iter()
        .map(|t| {
            let o = arisen_select(&g, c.k, &c.sbm, &c.arisen, rng::derive_seed(base, t as u64))?;
            Ok(row(t, o.queries_used, full.value(&o.seeds)))
        })
        .collect::<Result<_>>()?;
    rec.write("arisen.csv", &rows)?;
    rec.phase("arisen", started);

    if let Some(fraction) = c.change_fraction {
        let started = Instant::now();
        let base = rng::derive_seed(cfg.seed, 3);
        let rows: Vec<QueryBenchRow> = (0..c.trials)
            .into_par_iter()
            .map(|t| {
                let s = change_sample(&g, fraction, rng::derive_seed(base, t as u64))?;
                let observed = InfluenceObjective::sampled(&s.observed, &EdgeParams::uniform(&s.observed, c.p)?, c.horizon, c.samples, eval_seed)?;
                let seeds = greedy_maximize(&observed, &kc)?.set;
                Ok(row(t, s.queried.len(), full.value(&seeds)))
            })
            .collect::<Result<_>>()?;
        rec.write("change.csv", &rows)?;
        rec.phase("change", started);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RascalRow {
    pub instance_id: String,
    pub seed: u64,
    pub iteration: usize,
    pub tau: f64,
    pub cvar_estimate: f64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub instance_id: String,
    pub seed: u64,
    pub coordinate: usize,
    pub x: f64,
}

fn solve_rascal<F: StochasticObjective>(obj: &F, c: &RascalBenchConfig, seed: u64) -> Result<RascalResult> {
    let upper = obj.upper();
    let poly: Box<dyn Polytope> = match c.polytope {
        PolytopeSpec::Box => Box::new(BoxPolytope { upper }),
        PolytopeSpec::Budget { budget } => Box::new(BudgetSimplex { upper, budget }),
    };
    match c.fixed_scenarios {
        Some(count) => {
            let scenarios = ScenarioSet::sample(obj, count, rng::derive_seed(seed, 0))?;
            rascal_solve_fixed(obj, &*poly, &c.cvar, &scenarios)
        }
        None => rascal_solve(obj, &*poly, &c.cvar, seed),
    }
}

fn run_rascal(cfg: &RunConfig, c: &RascalBenchConfig, rec: &mut Recorder) -> Result<()> {
    let started = Instant::now();
    let result = match &c.objective {
        RascalObjectiveSpec::Saturating(o) => {
            let o = SaturatingObjective::new(o.weights.clone(), o.fail.clone(), o.upper.clone())?;
            solve_rascal(&o, c, cfg.seed)?
        }
        RascalObjectiveSpec::Linear(o) => {
            let o = LinearScenarioObjective::new(o.scenarios.clone(), o.upper.clone())?;
            solve_rascal(&o, c, cfg.seed)?
        }
    };
    let id = cfg.instance_id();
    let rows: Vec<RascalRow> = result
        .trace
        .iter()
        .map(|s| RascalRow {
            instance_id: id.clone(),
            seed: cfg.seed,
            iteration: s.iteration,
            tau: s.tau,
            cvar_estimate: s.cvar_estimate,
            wall_time_ms: if cfg.timing { s.elapsed.as_millis() as u64 } else { 0 },
        })
        .collect();
    rec.write("rascal.csv", &rows)?;
    let sol: Vec<SolutionRow> = result
        .x
        .iter()
        .enumerate()
        .map(|(i, &x)| SolutionRow {
            instance_id: id.clone(),
            seed: cfg.seed,
            coordinate: i,
            x,
        })
        .collect();
    rec.write("rascal_solution.csv", &sol)?;
    rec.phase("solve", started);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tagged_config() {
        let cfg = RunConfig::from_json(
            r#"{"kind": "icm-sim", "seed": 3, "graph": "g.txt", "p": 0.5, "horizon": 2, "seeds": [0], "samples": 10}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment.name(), "icm-sim");
        assert!(cfg.timing);
        assert!(RunConfig::from_json(r#"{"kind": "icm-sim", "graph": "g.txt", "horizon": 2, "seeds": [0], "samples": 10}"#).is_err());
    }

    #[test]
    fn csv_has_header() {
        let rows = vec![StrategyRow {
            instance_id: "a".into(),
            seed: 1,
            set: "0;2".into(),
            probability: 0.5,
        }];
        let text = String::from_utf8(to_csv(&rows).unwrap()).unwrap();
        assert_eq!(text, "instance_id,seed,set,probability\na,1,0;2,0.5\n");
    }
}
