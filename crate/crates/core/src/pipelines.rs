//! End-to-end tasks: uniform sampling, state transfer, deterministic search
//! and the verification harness.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{build_depth_chain, level_states, overlaps, DepthChain};
use crate::error::{Error, Result};
use crate::graph::{Family, Graph, Transitivity};
use crate::schedule::{
    dagger, synth_bipartite_branch, synth_sampling_schedule, synth_search_schedule, Direction,
    Hamiltonian, Reference, Schedule,
};
use crate::simulate::{
    argmax_vertex, fidelity, fidelity_vertex, run_schedule_staged, Oracle, StateVector,
};
use crate::spectral::{
    eigendecompose, eigenspace_amplitudes, validate_integer_spectrum, IntegerSpectrum, Spectrum,
};
use crate::FIDELITY_THRESHOLD;

/// Default vertex cap for [`verify_graph`].
pub const DEFAULT_VERIFY_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Sample,
    Transfer,
    Search,
    /// Search with the marked vertex known at synthesis time; not a black-box search.
    PromiseSearch,
    BipartiteSearch,
    /// A schedule loaded from a file.
    Replay,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::Sample => "sample",
            Task::Transfer => "transfer",
            Task::Search => "search",
            Task::PromiseSearch => "promise_search",
            Task::BipartiteSearch => "bipartite_search",
            Task::Replay => "replay",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub family: String,
    pub n: usize,
    pub edges: usize,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> GraphSummary {
        GraphSummary { family: g.family().to_string(), n: g.n(), edges: g.edge_count() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: Task,
    pub graph: GraphSummary,
    /// Marked vertex for searches, start vertex otherwise.
    pub m: Option<usize>,
    /// Destination of a transfer.
    pub target: Option<usize>,
    /// Fidelity of the final state with the task's target state.
    pub fidelity: f64,
    pub oracle_count: usize,
    pub total_time: f64,
    pub depth: usize,
    /// `p / (2^d·√N)`.
    pub bound_ratio: f64,
    /// Fidelity with the expected intermediate state after each stage.
    pub stage_fidelities: Vec<f64>,
    /// Vertex read out by a search.
    pub found: Option<usize>,
    /// Bipartite branch (1 or 2) that found the vertex.
    pub branch: Option<u8>,
    pub success: bool,
}

pub fn bound_ratio(oracle_count: usize, depth: usize, n: usize) -> f64 {
    oracle_count as f64 / (2f64.powi(depth as i32) * (n as f64).sqrt())
}

/// A graph with its validated Laplacian spectrum and depth chain.
#[derive(Debug, Clone)]
pub struct WalkContext {
    graph: Graph,
    ints: IntegerSpectrum,
    chain: DepthChain,
}

impl WalkContext {
    pub fn new(graph: Graph) -> Result<WalkContext> {
        let ints = validate_integer_spectrum(eigendecompose(&graph.laplacian())?)?;
        let chain = build_depth_chain(&ints);
        Ok(WalkContext { graph, ints, chain })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.ints.spectrum()
    }

    pub fn integer_spectrum(&self) -> &IntegerSpectrum {
        &self.ints
    }

    pub fn chain(&self) -> &DepthChain {
        &self.chain
    }

    fn n(&self) -> usize {
        self.graph.n()
    }

    /// `s_k` for vertex `m`.
    pub fn vertex_overlaps(&self, m: usize) -> Result<Vec<f64>> {
        overlaps(&self.chain, &eigenspace_amplitudes(self.spectrum(), m)?)
    }

    /// `|w_0⟩ … |w_d⟩` for vertex `m`, in the vertex basis.
    pub fn level_targets(&self, m: usize) -> Result<Vec<StateVector>> {
        let alphas = eigenspace_amplitudes(self.spectrum(), m)?;
        level_states(&self.chain, &alphas)?
            .into_iter()
            .map(|pair| {
                let v = pair.w.to_vertex_basis(self.spectrum().eigenvectors());
                StateVector::from_amplitudes(v.into_iter().map(Into::into).collect())
            })
            .collect()
    }

    /// Forward schedule `|m⟩ → |s⟩`.
    pub fn sampling_schedule(&self, m: usize) -> Result<Schedule> {
        synth_sampling_schedule(&self.chain, &self.vertex_overlaps(m)?)
    }

    /// The m-independent reversed schedule `|s⟩ → |m⟩`.
    pub fn search_schedule(&self) -> Result<Schedule> {
        if self.graph.vertex_transitive() != Transitivity::Yes {
            return Err(Error::NotVertexTransitive);
        }
        synth_search_schedule(&self.chain)
    }

    fn report(&self, task: Task, m: usize, schedules: &[&Schedule]) -> RunReport {
        let p = schedules.iter().map(|s| s.oracle_count).sum();
        RunReport {
            task,
            graph: GraphSummary::of(&self.graph),
            m: Some(m),
            target: None,
            fidelity: 0.0,
            oracle_count: p,
            total_time: schedules.iter().map(|s| s.total_time).sum(),
            depth: self.chain.depth(),
            bound_ratio: bound_ratio(p, self.chain.depth(), self.n()),
            stage_fidelities: Vec::new(),
            found: None,
            branch: None,
            success: false,
        }
    }

    /// Runs `sched` with the oracle for `m`, recording per-stage fidelities
    /// against `targets[j]`.
    fn run_tracked(
        &self,
        st: &mut StateVector,
        sched: &Schedule,
        oracle: &Oracle,
        targets: &[StateVector],
        out: &mut Vec<f64>,
    ) -> Result<()> {
        run_schedule_staged(st, sched, self.spectrum(), Some(oracle), |j, s| {
            out.push(fidelity(s, &targets[j]).unwrap_or(f64::NAN));
        })
    }

    /// Forward sampling from `|m⟩`; fidelity with `|s⟩`.
    pub fn uniform_sample(&self, m: usize) -> Result<RunReport> {
        let oracle = Oracle::new(self.n(), m)?;
        let sched = self.sampling_schedule(m)?;
        let levels = self.level_targets(m)?;
        let mut st = StateVector::basis(self.n(), m)?;
        let mut report = self.report(Task::Sample, m, &[&sched]);
        self.run_tracked(&mut st, &sched, &oracle, &levels[1..], &mut report.stage_fidelities)?;
        report.fidelity = fidelity(&st, &StateVector::uniform(self.n()))?;
        report.success = report.fidelity >= FIDELITY_THRESHOLD;
        Ok(report)
    }

    /// `A_v† A_u |u⟩`; fidelity with `|v⟩`.
    pub fn transfer(&self, u: usize, v: usize) -> Result<RunReport> {
        let (ou, ov) = (Oracle::new(self.n(), u)?, Oracle::new(self.n(), v)?);
        let forward = self.sampling_schedule(u)?;
        let back = dagger(&self.sampling_schedule(v)?);
        let lu = self.level_targets(u)?;
        let mut lv = self.level_targets(v)?;
        lv.reverse();
        let mut st = StateVector::basis(self.n(), u)?;
        let mut report = self.report(Task::Transfer, u, &[&forward, &back]);
        report.target = Some(v);
        self.run_tracked(&mut st, &forward, &ou, &lu[1..], &mut report.stage_fidelities)?;
        self.run_tracked(&mut st, &back, &ov, &lv[1..], &mut report.stage_fidelities)?;
        report.fidelity = fidelity_vertex(&st, v)?;
        report.success = report.fidelity >= FIDELITY_THRESHOLD;
        Ok(report)
    }

    /// Deterministic search on a vertex-transitive graph. The schedule does
    /// not depend on `m`; the marked vertex enters only through the oracle.
    pub fn search_vertex_transitive(&self, m: usize) -> Result<RunReport> {
        let sched = self.search_schedule()?;
        self.search_with(&sched, m, Task::Search)
    }

    /// Reversed per-vertex schedule from `|s⟩`, synthesized knowing `m`.
    pub fn promise_search(&self, m: usize) -> Result<RunReport> {
        let sched = dagger(&self.sampling_schedule(m)?);
        self.search_with(&sched, m, Task::PromiseSearch)
    }

    /// Runs a reversed schedule from `|s⟩` against the oracle for `m`.
    pub fn search_with(&self, sched: &Schedule, m: usize, task: Task) -> Result<RunReport> {
        let oracle = Oracle::new(self.n(), m)?;
        let mut levels = self.level_targets(m)?;
        levels.reverse();
        let mut st = StateVector::uniform(self.n());
        let mut report = self.report(task, m, &[sched]);
        self.run_tracked(&mut st, sched, &oracle, &levels[1..], &mut report.stage_fidelities)?;
        let found = argmax_vertex(&st);
        report.fidelity = fidelity_vertex(&st, m)?;
        report.found = Some(found);
        report.success = report.fidelity >= FIDELITY_THRESHOLD && oracle.is_marked(found);
        Ok(report)
    }
}

/// Outcome of one bipartite search branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOutcome {
    /// Most probable vertex after the branch.
    pub found: usize,
    /// Probability of `found`.
    pub readout: f64,
    /// `|⟨m|ψ⟩|²`.
    pub fidelity: f64,
    /// Readout is sharp and the oracle confirms it.
    pub success: bool,
    pub oracle_count: usize,
    pub total_time: f64,
}

/// Both search branches for `K(n1, n2)` over the adjacency spectrum.
#[derive(Debug, Clone)]
pub struct BipartiteSearch {
    graph: Graph,
    adjacency: Spectrum,
    branches: [Schedule; 2],
}

impl BipartiteSearch {
    pub fn new(n1: usize, n2: usize) -> Result<BipartiteSearch> {
        let graph = Graph::build_family(Family::CompleteBipartite { n1, n2 })?;
        let adjacency = eigendecompose(&graph.adjacency())?;
        let branches = [
            dagger(&synth_bipartite_branch(n1, n2, Reference::Part1)?),
            dagger(&synth_bipartite_branch(n1, n2, Reference::Part2)?),
        ];
        Ok(BipartiteSearch { graph, adjacency, branches })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn adjacency_spectrum(&self) -> &Spectrum {
        &self.adjacency
    }

    /// Branch `b ∈ {1, 2}`.
    pub fn schedule(&self, b: u8) -> &Schedule {
        &self.branches[usize::from(b) - 1]
    }

    pub fn run_branch(&self, b: u8, oracle: &Oracle) -> Result<BranchOutcome> {
        let sched = self.schedule(b);
        let mut st = reference_state(&self.graph, sched.reference)?;
        run_schedule_staged(&mut st, sched, &self.adjacency, Some(oracle), |_, _| {})?;
        let found = argmax_vertex(&st);
        let readout = fidelity_vertex(&st, found)?;
        let marked = (0..self.graph.n()).find(|&v| oracle.is_marked(v)).expect("oracle in range");
        Ok(BranchOutcome {
            found,
            readout,
            fidelity: fidelity_vertex(&st, marked)?,
            success: readout >= FIDELITY_THRESHOLD && oracle.is_marked(found),
            oracle_count: sched.oracle_count,
            total_time: sched.total_time,
        })
    }

    /// Branch 1, then branch 2 if branch 1 does not confirm a vertex.
    pub fn run(&self, m: usize) -> Result<RunReport> {
        let n = self.graph.n();
        let oracle = Oracle::new(n, m)?;
        let mut report = RunReport {
            task: Task::BipartiteSearch,
            graph: GraphSummary::of(&self.graph),
            m: Some(m),
            target: None,
            fidelity: 0.0,
            oracle_count: 0,
            total_time: 0.0,
            depth: 0,
            bound_ratio: 0.0,
            stage_fidelities: Vec::new(),
            found: None,
            branch: None,
            success: false,
        };
        for b in [1u8, 2] {
            let out = self.run_branch(b, &oracle)?;
            report.oracle_count += out.oracle_count;
            report.total_time += out.total_time;
            report.stage_fidelities.push(out.fidelity);
            report.fidelity = out.fidelity;
            report.found = Some(out.found);
            if out.success {
                report.branch = Some(b);
                report.success = true;
                break;
            }
        }
        report.bound_ratio = bound_ratio(report.oracle_count, 0, n);
        Ok(report)
    }
}

pub fn search_bipartite(n1: usize, n2: usize, m: usize) -> Result<RunReport> {
    BipartiteSearch::new(n1, n2)?.run(m)
}

/// Start or end state named by a schedule's reference.
pub fn reference_state(g: &Graph, r: Reference) -> Result<StateVector> {
    let n = g.n();
    match (r, g.family()) {
        (Reference::Uniform, _) => Ok(StateVector::uniform(n)),
        (Reference::Part1, Family::CompleteBipartite { n1, .. }) => {
            StateVector::uniform_over(n, &(0..n1).collect::<Vec<_>>())
        }
        (Reference::Part2, Family::CompleteBipartite { n1, .. }) => {
            StateVector::uniform_over(n, &(n1..n).collect::<Vec<_>>())
        }
        _ => Err(Error::ParameterOutOfRange(
            "part references need a complete-bipartite graph".into(),
        )),
    }
}

/// Re-simulates a stored schedule against the oracle for `m`. Forward
/// schedules start at `|m⟩` and are scored against the reference state;
/// reversed ones start at the reference and are scored against `|m⟩`.
pub fn replay(g: &Graph, sched: &Schedule, m: usize) -> Result<RunReport> {
    sched.validate()?;
    let spectrum = match sched.hamiltonian {
        Hamiltonian::Laplacian => eigendecompose(&g.laplacian())?,
        Hamiltonian::Adjacency => eigendecompose(&g.adjacency())?,
    };
    let oracle = Oracle::new(g.n(), m)?;
    let reference = reference_state(g, sched.reference)?;
    let mut st = match sched.direction {
        Direction::Forward => StateVector::basis(g.n(), m)?,
        Direction::Reversed => reference.clone(),
    };
    run_schedule_staged(&mut st, sched, &spectrum, Some(&oracle), |_, _| {})?;
    let (fid, found) = match sched.direction {
        Direction::Forward => (fidelity(&st, &reference)?, None),
        Direction::Reversed => (fidelity_vertex(&st, m)?, Some(argmax_vertex(&st))),
    };
    let depth = match sched.hamiltonian {
        Hamiltonian::Laplacian => sched.stage_count(),
        Hamiltonian::Adjacency => 0,
    };
    Ok(RunReport {
        task: Task::Replay,
        graph: GraphSummary::of(g),
        m: Some(m),
        target: None,
        fidelity: fid,
        oracle_count: sched.oracle_count,
        total_time: sched.total_time,
        depth,
        bound_ratio: bound_ratio(sched.oracle_count, depth, g.n()),
        stage_fidelities: Vec::new(),
        found,
        branch: None,
        success: fid >= FIDELITY_THRESHOLD && found.is_none_or(|v| oracle.is_marked(v)),
    })
}

/// Search pipeline chosen by [`verify_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchRoute {
    VertexTransitive,
    Bipartite,
    /// Fallback for graphs without a black-box route.
    Promise,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub cap: usize,
    /// Ordered transfer pairs to test; all pairs when the graph has fewer.
    pub transfer_pairs: usize,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { cap: DEFAULT_VERIFY_CAP, transfer_pairs: 64, seed: 0, workers: None }
    }
}

impl VerifyConfig {
    /// Defaults, with `workers` taken from `QWALK_WORKERS` when set.
    pub fn from_env() -> VerifyConfig {
        let workers = std::env::var("QWALK_WORKERS").ok().and_then(|v| v.parse().ok()).filter(|&w| w > 0);
        VerifyConfig { workers, ..VerifyConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub graph: GraphSummary,
    pub search_route: SearchRoute,
    pub notes: Vec<String>,
    pub min_fidelity: f64,
    pub max_bound_ratio: f64,
    pub all_succeeded: bool,
    pub runs: Vec<RunReport>,
    #[serde(skip)]
    pub wall_time: Duration,
}

enum Job {
    Sample(usize),
    Transfer(usize, usize),
    Search(usize),
    Promise(usize),
    Bipartite(usize),
}

/// Sampling from every vertex, transfer over (sampled) ordered pairs and the
/// applicable search for every marked vertex. Runs fan out over a rayon pool;
/// results keep job order, so the report is independent of worker count.
pub fn verify_graph(g: &Graph, cfg: &VerifyConfig) -> Result<AggregateReport> {
    let start = Instant::now();
    let n = g.n();
    if n > cfg.cap {
        return Err(Error::CapExceeded { n, cap: cfg.cap });
    }
    let ctx = WalkContext::new(g.clone())?;
    let mut notes = Vec::new();
    let route = match (g.vertex_transitive(), g.family()) {
        (Transitivity::Yes, _) => SearchRoute::VertexTransitive,
        (_, Family::CompleteBipartite { .. }) => SearchRoute::Bipartite,
        _ => {
            notes.push(format!(
                "search: {}; ran promise search (marked vertex known at synthesis)",
                Error::NotVertexTransitive
            ));
            SearchRoute::Promise
        }
    };

    let mut jobs: Vec<Job> = (0..n).map(Job::Sample).collect();
    let total_pairs = n * n.saturating_sub(1);
    let pair = |i: usize| {
        let (u, r) = (i / (n - 1), i % (n - 1));
        (u, if r >= u { r + 1 } else { r })
    };
    if total_pairs <= cfg.transfer_pairs {
        jobs.extend((0..total_pairs).map(|i| {
            let (u, v) = pair(i);
            Job::Transfer(u, v)
        }));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut picked = sample(&mut rng, total_pairs, cfg.transfer_pairs).into_vec();
        picked.sort_unstable();
        jobs.extend(picked.into_iter().map(|i| {
            let (u, v) = pair(i);
            Job::Transfer(u, v)
        }));
    }
    let search_schedule = match route {
        SearchRoute::VertexTransitive => Some(ctx.search_schedule()?),
        _ => None,
    };
    let bipartite = match (route, g.family()) {
        (SearchRoute::Bipartite, Family::CompleteBipartite { n1, n2 }) => Some(BipartiteSearch::new(n1, n2)?),
        _ => None,
    };
    jobs.extend((0..n).map(|m| match route {
        SearchRoute::VertexTransitive => Job::Search(m),
        SearchRoute::Bipartite => Job::Bipartite(m),
        SearchRoute::Promise => Job::Promise(m),
    }));

    let run = |job: &Job| -> Result<RunReport> {
        match *job {
            Job::Sample(m) => ctx.uniform_sample(m),
            Job::Transfer(u, v) => ctx.transfer(u, v),
            Job::Search(m) => {
                ctx.search_with(search_schedule.as_ref().expect("route has a schedule"), m, Task::Search)
            }
            Job::Promise(m) => ctx.promise_search(m),
            Job::Bipartite(m) => bipartite.as_ref().expect("route has branches").run(m),
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Internal(e.to_string()))?;
    let runs: Vec<RunReport> = pool.install(|| jobs.par_iter().map(run).collect::<Result<_>>())?;

    Ok(AggregateReport {
        graph: GraphSummary::of(g),
        search_route: route,
        notes,
        min_fidelity: runs.iter().map(|r| r.fidelity).fold(1.0, f64::min),
        max_bound_ratio: runs.iter().map(|r| r.bound_ratio).fold(0.0, f64::max),
        all_succeeded: runs.iter().all(|r| r.success),
        runs,
        wall_time: start.elapsed(),
    })
}
