//! Kernel search: initialization, bucket enlargement and improvement.
//!
//! The kernel starts from the LP support, a greedy starting tree and an
//! independent set of the explored edges. Remaining edges are sorted and
//! cut into buckets. Each improvement step solves the problem restricted to
//! the kernel plus one bucket, requiring a bucket edge and a weight no
//! larger than the incumbent; bucket edges used by the solution join the
//! kernel. From the second pass on, buckets are merged pairwise by
//! affinity, measured by the size of a greedy independent set.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bnb::{solve_restricted, SubproblemSpec, SubproblemStatus};
use crate::error::{Error, Result};
use crate::graph::{check_feasible, kruskal, ConflictGraph, Instance, Solution};
use crate::greedy::{independent_set, starting_solution, GreedyParams};
use crate::lp::{solve_lp, LpOptions, LpSolution, LpSolveStatus};
use crate::preprocess::{preprocess, PreprocessReport};

/// Support threshold for LP values.
pub const SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    /// Number of passes over the buckets (`P`).
    pub outer_iterations: usize,
    /// Seconds per restricted problem.
    pub inner_time_limit: f64,
    /// Seconds for the whole run.
    pub global_time_limit: f64,
    pub greedy: GreedyParams,
    pub rng_seed: u64,
    /// Stop after `floor(delta * b)` consecutive failures once a solution
    /// is known.
    pub early_stop: bool,
}

impl Default for KsParams {
    fn default() -> Self {
        KsParams {
            alpha: 1.1,
            beta: 0.2,
            delta: 0.6,
            outer_iterations: 4,
            inner_time_limit: 420.0,
            global_time_limit: 3600.0,
            greedy: GreedyParams::default(),
            rng_seed: 0,
            early_stop: true,
        }
    }
}

impl KsParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(what.to_string()));
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return bad("alpha must be at least 1");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]");
        }
        if self.outer_iterations == 0 {
            return bad("P must be at least 1");
        }
        if !(self.inner_time_limit > 0.0) || !(self.global_time_limit > 0.0) {
            return bad("time limits must be positive");
        }
        self.greedy.validate()
    }

    /// `K = round(alpha (n - 1))`, ties to even.
    pub fn kernel_size(&self, n: usize) -> usize {
        (self.alpha * n.saturating_sub(1) as f64).round_ties_even() as usize
    }

    /// `d = round(beta (m - K))`, ties to even, at least 1.
    pub fn bucket_size(&self, m: usize, kernel_size: usize) -> usize {
        let d = (self.beta * m.saturating_sub(kernel_size) as f64).round_ties_even() as usize;
        d.max(1)
    }

    /// `floor(delta b)`, at least 1.
    pub fn stop_threshold(&self, buckets: usize) -> usize {
        ((self.delta * buckets as f64).floor() as usize).max(1)
    }

    fn greedy_params(&self) -> GreedyParams {
        GreedyParams {
            rng_seed: self.rng_seed,
            ..self.greedy
        }
    }
}

/// One restricted solve of the improvement phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub p: usize,
    pub k: usize,
    pub bucket_size: usize,
    pub status: Option<SubproblemStatus>,
    pub w_star: Option<f64>,
    pub elapsed_s: f64,
}

/// Wall-clock budget shared by every phase of a run.
#[derive(Debug, Clone, Copy)]
pub struct Clock {
    pub start: Instant,
    pub deadline: Instant,
}

impl Clock {
    pub fn new(limit_s: f64) -> Self {
        let start = Instant::now();
        let limit =
            Duration::try_from_secs_f64(limit_s).unwrap_or(Duration::from_secs(u32::MAX as u64));
        Clock {
            start,
            deadline: start
                .checked_add(limit)
                .unwrap_or(start + Duration::from_secs(u32::MAX as u64)),
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn remaining(&self) -> f64 {
        self.deadline
            .saturating_duration_since(Instant::now())
            .as_secs_f64()
    }

    pub fn expired(&self) -> bool {
        Instant::now() >= self.deadline
    }
}

#[derive(Debug, Clone)]
pub struct KernelState {
    /// Kernel edges, ascending.
    pub kernel: Vec<usize>,
    pub buckets: Vec<Vec<usize>>,
    pub incumbent: Option<Solution>,
    /// Weight of the incumbent, `+inf` without one.
    pub upper_bound: f64,
    pub p: usize,
    pub k: usize,
    pub k_bar: usize,
    /// Derived `K` before clamping to the LP support.
    pub kernel_size: usize,
    pub bucket_size: usize,
    /// Weight of the first solution, `+inf` without one.
    pub initial_weight: f64,
    /// Tree returned by the starting heuristic (possibly empty).
    pub starting_tree: Vec<usize>,
    /// Seconds since the start of the run when the incumbent was found.
    pub time_to_best: f64,
    pub trace: Vec<TraceRecord>,
}

impl KernelState {
    fn accept(&mut self, inst: &Instance, sol: Solution, clock: &Clock) -> Result<()> {
        if let Some(reason) = check_feasible(inst, &sol.edges) {
            return Err(Error::Precondition(format!("rejected incumbent: {reason}")));
        }
        if inst.improves(sol.weight, self.upper_bound) {
            self.time_to_best = clock.elapsed();
        }
        self.upper_bound = sol.weight;
        self.incumbent = Some(sol);
        Ok(())
    }
}

fn positive_support(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] > SUPPORT_TOL).collect()
}

fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Builds the kernel, the buckets and the first solution.
pub fn initialize(
    inst: &Instance,
    cg: &ConflictGraph,
    params: &KsParams,
    clock: &Clock,
) -> Result<KernelState> {
    params.validate()?;
    let (n, m) = (inst.n(), inst.m());
    let lp_budget = |clock: &Clock| LpOptions {
        time_limit: Some(Duration::from_secs_f64(clock.remaining())),
        ..LpOptions::default()
    };
    let with = solve_lp(inst, &lp_budget(clock));
    let without = solve_lp(
        inst,
        &LpOptions {
            include_subtours: false,
            ..lp_budget(clock)
        },
    );
    if with.status == LpSolveStatus::Infeasible || without.status == LpSolveStatus::Infeasible {
        return Err(Error::Infeasible("the LP relaxation is infeasible".into()));
    }
    let lp = if inst.count_conflicts(&positive_support(&without.x))
        < inst.count_conflicts(&positive_support(&with.x))
    {
        without
    } else {
        with
    };
    log::debug!("lp bound {:.4} ({:?})", lp.objective, lp.status);

    let kernel_size = params.kernel_size(n);
    let bucket_size = params.bucket_size(m, kernel_size);
    let mut support = positive_support(&lp.x);
    support.sort_by(|&a, &b| lp.x[b].total_cmp(&lp.x[a]).then(a.cmp(&b)));
    let k = kernel_size.min(support.len());
    let seed = &support[..k];

    let start = starting_solution(inst, cg, seed, &params.greedy_params())?;
    let indep = independent_set(inst, &cg.induced(&start.explored)?, &[])?;
    let mut kernel = union_sorted(&indep, &start.tree);
    let in_kernel = inst.mask(&kernel);
    let rest: Vec<usize> = (0..m).filter(|&i| !in_kernel[i]).collect();
    let mut rest = order_excluded(inst, &rest, &kernel, &lp);
    if kernel.len() < k {
        let extra: Vec<usize> = rest.drain(..k - kernel.len()).collect();
        kernel = union_sorted(&kernel, &extra);
    }
    let buckets: Vec<Vec<usize>> = rest.chunks(bucket_size).map(|c| c.to_vec()).collect();
    log::debug!(
        "kernel {} edges (K = {kernel_size}), {} buckets of size {bucket_size}",
        kernel.len(),
        buckets.len()
    );

    let mut state = KernelState {
        kernel,
        buckets,
        incumbent: None,
        upper_bound: f64::INFINITY,
        p: 0,
        k: 0,
        k_bar: 0,
        kernel_size,
        bucket_size,
        initial_weight: f64::INFINITY,
        starting_tree: start.tree.clone(),
        time_to_best: 0.0,
        trace: Vec::new(),
    };
    if !start.tree.is_empty() {
        state.accept(inst, Solution::evaluate(inst, &start.tree), clock)?;
    }
    if !clock.expired() {
        let spec = SubproblemSpec {
            allowed: state.kernel.clone(),
            must_use: Vec::new(),
            cutoff: f64::INFINITY,
            time_budget: params.inner_time_limit.min(clock.remaining()).max(1e-3),
        };
        let res = solve_restricted(inst, &spec)?;
        if let Some(sol) = res.solution {
            if inst.improves(sol.weight, state.upper_bound) {
                state.accept(inst, sol, clock)?;
            }
        }
    }
    state.initial_weight = state.upper_bound;
    Ok(state)
}

/// Orders non-kernel edges: fewer conflicts with the kernel first, then
/// larger LP value, then larger reduced cost, then larger index.
pub fn order_excluded(
    inst: &Instance,
    rest: &[usize],
    kernel: &[usize],
    lp: &LpSolution,
) -> Vec<usize> {
    let in_kernel = inst.mask(kernel);
    let key = |i: usize| {
        let c = inst
            .conflicts_of(i)
            .iter()
            .filter(|&&j| in_kernel[j])
            .count();
        (c, lp.x[i], lp.reduced_costs[i])
    };
    let mut keyed: Vec<(usize, (usize, f64, f64))> = rest.iter().map(|&i| (i, key(i))).collect();
    keyed.sort_by(|(i, a), (j, b)| {
        a.0.cmp(&b.0)
            .then(b.1.total_cmp(&a.1))
            .then(b.2.total_cmp(&a.2))
            .then(j.cmp(i))
    });
    keyed.into_iter().map(|(i, _)| i).collect()
}

/// Merges buckets pairwise, most compatible pairs first. An odd bucket out
/// is appended unmerged.
pub fn enlarge_buckets(
    inst: &Instance,
    cg: &ConflictGraph,
    buckets: &[Vec<usize>],
    kernel: &[usize],
) -> Result<Vec<Vec<usize>>> {
    let b = buckets.len();
    let mut pairs = Vec::new();
    for l in 0..b {
        for t in l + 1..b {
            let nodes = union_sorted(kernel, &union_sorted(&buckets[l], &buckets[t]));
            let size = independent_set(inst, &cg.induced(&nodes)?, &[])?.len();
            pairs.push((size, l, t));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut used = vec![false; b];
    let mut out = Vec::new();
    for (_, l, t) in pairs {
        if used[l] || used[t] {
            continue;
        }
        used[l] = true;
        used[t] = true;
        out.push(union_sorted(&buckets[l], &buckets[t]));
    }
    out.extend((0..b).filter(|&l| !used[l]).map(|l| buckets[l].clone()));
    Ok(out)
}

/// Runs the improvement passes on `state`.
pub fn improve(
    inst: &Instance,
    cg: &ConflictGraph,
    mut state: KernelState,
    params: &KsParams,
    clock: &Clock,
) -> Result<KernelState> {
    params.validate()?;
    state.k_bar = 0;
    'outer: for p in 1..=params.outer_iterations {
        state.p = p;
        if p > 1 {
            state.buckets = enlarge_buckets(inst, cg, &state.buckets, &state.kernel)?;
        }
        let b = state.buckets.len();
        if b == 0 {
            break;
        }
        let threshold = params.stop_threshold(b);
        for k in 0..b {
            state.k = k + 1;
            if clock.expired() {
                break 'outer;
            }
            let bucket = state.buckets[k].clone();
            let mut record = TraceRecord {
                p,
                k: k + 1,
                bucket_size: bucket.len(),
                status: None,
                w_star: None,
                elapsed_s: 0.0,
            };
            let mut success = false;
            if !bucket.is_empty() {
                let spec = SubproblemSpec {
                    allowed: union_sorted(&state.kernel, &bucket),
                    must_use: bucket.clone(),
                    cutoff: state.upper_bound,
                    time_budget: params.inner_time_limit.min(clock.remaining()).max(1e-3),
                };
                let res = solve_restricted(inst, &spec)?;
                record.status = Some(res.status);
                if let Some(sol) = res.solution {
                    success = res.status == SubproblemStatus::Optimal
                        || inst.improves(sol.weight, state.upper_bound);
                    if success {
                        let used = inst.mask(&sol.edges);
                        let (promoted, kept): (Vec<usize>, Vec<usize>) =
                            bucket.iter().partition(|&&i| used[i]);
                        state.kernel = union_sorted(&state.kernel, &promoted);
                        state.buckets[k] = kept;
                        state.accept(inst, sol, clock)?;
                    }
                }
            }
            if success {
                state.k_bar = 0;
            } else {
                state.k_bar += 1;
            }
            record.w_star = state.upper_bound.is_finite().then_some(state.upper_bound);
            record.elapsed_s = clock.elapsed();
            log::debug!("{}", serde_json::to_string(&record).unwrap_or_default());
            state.trace.push(record);
            if params.early_stop && state.k_bar >= threshold && state.upper_bound.is_finite() {
                break 'outer;
            }
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    /// A conflict-free spanning tree was found.
    Feasible,
    /// The search ended without a solution.
    NoSolution,
    /// The instance provably has no conflict-free spanning tree.
    Infeasible,
}

/// Result of [`run`], in the edge indices of the input instance.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub solution: Option<Solution>,
    pub initial_weight: f64,
    pub time_to_best: f64,
    pub total_time: f64,
    /// Starting heuristic tree, empty when it found none.
    pub starting_tree: Vec<usize>,
    pub preprocess: Option<PreprocessReport>,
    pub trace: Vec<TraceRecord>,
}

impl RunOutcome {
    pub fn weight(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.weight)
    }
}

/// Preprocesses `inst`, runs kernel search on the reduced instance and maps
/// the result back. When the unconstrained minimum spanning tree is already
/// conflict-free it is optimal and returned directly.
pub fn run(inst: &Instance, params: &KsParams) -> Result<RunOutcome> {
    params.validate()?;
    let clock = Clock::new(params.global_time_limit);
    let infeasible = |clock: &Clock, report| RunOutcome {
        status: RunStatus::Infeasible,
        solution: None,
        initial_weight: f64::INFINITY,
        time_to_best: 0.0,
        total_time: clock.elapsed(),
        starting_tree: Vec::new(),
        preprocess: report,
        trace: Vec::new(),
    };
    let (reduced, report) = match preprocess(inst) {
        Ok(r) => r,
        Err(Error::Infeasible(why)) => {
            log::info!("infeasible: {why}");
            return Ok(infeasible(&clock, None));
        }
        Err(e) => return Err(e),
    };

    let all: Vec<usize> = (0..reduced.m()).collect();
    let mst = kruskal(&reduced, &all, &[], None)?;
    if mst.spanning && reduced.count_conflicts(&mst.edges) == 0 {
        let sol = Solution::evaluate(inst, &report.to_original(&mst.edges));
        verify(inst, &sol)?;
        let t = clock.elapsed();
        return Ok(RunOutcome {
            status: RunStatus::Feasible,
            initial_weight: sol.weight,
            solution: Some(sol),
            time_to_best: t,
            total_time: t,
            starting_tree: Vec::new(),
            preprocess: Some(report),
            trace: Vec::new(),
        });
    }

    let cg = ConflictGraph::build(&reduced);
    let state = match initialize(&reduced, &cg, params, &clock) {
        Ok(s) => s,
        Err(Error::Infeasible(why)) => {
            log::info!("infeasible: {why}");
            return Ok(infeasible(&clock, Some(report)));
        }
        Err(e) => return Err(e),
    };
    let state = improve(&reduced, &cg, state, params, &clock)?;
    let solution = match &state.incumbent {
        Some(s) => {
            let sol = Solution::evaluate(inst, &report.to_original(&s.edges));
            verify(inst, &sol)?;
            Some(sol)
        }
        None => None,
    };
    Ok(RunOutcome {
        status: if solution.is_some() {
            RunStatus::Feasible
        } else {
            RunStatus::NoSolution
        },
        solution,
        initial_weight: state.initial_weight,
        time_to_best: state.time_to_best,
        total_time: clock.elapsed(),
        starting_tree: report.to_original(&state.starting_tree),
        preprocess: Some(report),
        trace: state.trace,
    })
}

fn verify(inst: &Instance, sol: &Solution) -> Result<()> {
    match check_feasible(inst, &sol.edges) {
        None => Ok(()),
        Some(reason) => Err(Error::Precondition(format!(
            "solution failed verification: {reason}"
        ))),
    }
}

/// Compares weights for sorting results, `None` last.
pub fn cmp_weight(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}
