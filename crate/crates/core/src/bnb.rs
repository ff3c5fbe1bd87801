//! Branch-and-bound for restricted problems.
//!
//! A node fixes some edges in (`IN`) and some out (`OUT`). Its bound is the
//! minimum spanning tree over the allowed edges minus `OUT` that contains
//! `IN`, ignoring conflicts. When that tree has a conflicting pair, the
//! heavier edge of the heaviest pair is branched on (excluded first, then
//! included with all its conflicts excluded). When it is conflict-free but
//! misses the must-use set, the cheapest usable must-use edge is branched
//! on (included first).

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bridges, check_feasible, DisjointSets, Instance, Solution};

/// A restricted problem: edges outside `allowed` are fixed to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSpec {
    pub allowed: Vec<usize>,
    /// When nonempty, a solution must use at least one of these edges.
    pub must_use: Vec<usize>,
    /// Solutions must weigh at most this much; `f64::INFINITY` for none.
    pub cutoff: f64,
    /// Seconds; `f64::INFINITY` for no limit.
    pub time_budget: f64,
}

impl SubproblemSpec {
    pub fn unrestricted(inst: &Instance) -> Self {
        SubproblemSpec {
            allowed: (0..inst.m()).collect(),
            must_use: Vec::new(),
            cutoff: f64::INFINITY,
            time_budget: f64::INFINITY,
        }
    }

    fn validate(&self, inst: &Instance) -> Result<()> {
        if self.time_budget.is_nan() || self.time_budget <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "time budget must be positive, got {}",
                self.time_budget
            )));
        }
        if self.cutoff.is_nan() || self.cutoff < 0.0 {
            return Err(Error::InvalidInput(format!(
                "invalid cutoff {}",
                self.cutoff
            )));
        }
        if let Some(&i) = self.allowed.iter().find(|&&i| i >= inst.m()) {
            return Err(Error::InvalidInput(format!("edge {} out of range", i + 1)));
        }
        let mask = inst.mask(&self.allowed);
        if let Some(&i) = self.must_use.iter().find(|&&i| i >= inst.m() || !mask[i]) {
            return Err(Error::InvalidInput(format!(
                "must-use edge {} is not allowed",
                i + 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubproblemStatus {
    /// Search closed; the solution is optimal.
    Optimal,
    /// Budget ran out with a solution in hand.
    FeasibleTimeout,
    /// Search closed without a solution and there was no cutoff.
    Infeasible,
    /// Search closed without a solution within the cutoff.
    NoImprovingSolution,
    /// Budget ran out before any solution was found.
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemResult {
    pub status: SubproblemStatus,
    pub solution: Option<Solution>,
    pub nodes_explored: u64,
}

/// Number of conflict pairs with both edges in `set`.
pub fn count_conflicts(inst: &Instance, set: &[usize]) -> usize {
    inst.count_conflicts(set)
}

enum Frame {
    Enter { ins: Vec<usize>, outs: Vec<usize> },
    Undo { ins: Vec<usize>, outs: Vec<usize> },
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<usize>,
    allowed: Vec<bool>,
    must: Vec<bool>,
    has_must: bool,
    fixed_in: Vec<bool>,
    fixed_out: Vec<bool>,
    in_list: Vec<usize>,
    cutoff: f64,
    incumbent: Option<(f64, Vec<usize>)>,
    dsu: DisjointSets,
}

/// Solves `inst` restricted to `spec`. Deterministic for a given input.
pub fn solve_restricted(inst: &Instance, spec: &SubproblemSpec) -> Result<SubproblemResult> {
    spec.validate(inst)?;
    let start = Instant::now();
    let deadline = if spec.time_budget.is_finite() {
        Some(start + Duration::from_secs_f64(spec.time_budget))
    } else {
        None
    };
    let allowed = inst.mask(&spec.allowed);
    let order = inst
        .by_weight()
        .iter()
        .copied()
        .filter(|&i| allowed[i])
        .collect();
    let mut s = Search {
        inst,
        order,
        must: inst.mask(&spec.must_use),
        has_must: !spec.must_use.is_empty(),
        allowed,
        fixed_in: vec![false; inst.m()],
        fixed_out: vec![false; inst.m()],
        in_list: Vec::new(),
        cutoff: spec.cutoff,
        incumbent: None,
        dsu: DisjointSets::new(inst.n()),
    };

    let mut nodes = 0u64;
    let mut interrupted = false;
    let mut stack = vec![Frame::Enter {
        ins: Vec::new(),
        outs: Vec::new(),
    }];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Undo { ins, outs } => s.undo(&ins, &outs),
            Frame::Enter { ins, outs } => {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    interrupted = true;
                    break;
                }
                nodes += 1;
                let (mut applied, mut consistent) = s.apply(&ins, &outs);
                if consistent {
                    consistent = s.propagate(&mut applied);
                }
                stack.push(Frame::Undo {
                    ins: applied.0,
                    outs: applied.1,
                });
                if consistent {
                    if let Some((left, right)) = s.expand() {
                        stack.push(right);
                        stack.push(left);
                    }
                }
            }
        }
    }

    let solution = s.incumbent.map(|(_, edges)| {
        let sol = Solution::evaluate(inst, &edges);
        debug_assert!(check_feasible(inst, &sol.edges).is_none());
        sol
    });
    let status = match (interrupted, solution.is_some()) {
        (false, true) => SubproblemStatus::Optimal,
        (true, true) => SubproblemStatus::FeasibleTimeout,
        (true, false) => SubproblemStatus::Timeout,
        (false, false) if spec.cutoff.is_infinite() => SubproblemStatus::Infeasible,
        (false, false) => SubproblemStatus::NoImprovingSolution,
    };
    log::debug!(
        "restricted solve: {:?} after {nodes} nodes in {:.3}s",
        status,
        start.elapsed().as_secs_f64()
    );
    Ok(SubproblemResult {
        status,
        solution,
        nodes_explored: nodes,
    })
}

impl Search<'_> {
    /// Applies fixings, returning the ones that changed state and whether
    /// the node is still consistent.
    fn apply(&mut self, ins: &[usize], outs: &[usize]) -> ((Vec<usize>, Vec<usize>), bool) {
        let mut consistent = true;
        let mut new_in = Vec::new();
        let mut new_out = Vec::new();
        for &i in outs {
            if self.fixed_in[i] {
                consistent = false;
            } else if !self.fixed_out[i] {
                self.fixed_out[i] = true;
                new_out.push(i);
            }
        }
        for &i in ins {
            if self.fixed_out[i] {
                consistent = false;
            } else if !self.fixed_in[i] {
                self.fixed_in[i] = true;
                self.in_list.push(i);
                new_in.push(i);
            }
        }
        ((new_in, new_out), consistent)
    }

    /// Fixes every bridge of the usable graph in and its conflicts out,
    /// until nothing changes. Returns false when that is contradictory.
    fn propagate(&mut self, applied: &mut (Vec<usize>, Vec<usize>)) -> bool {
        let inst = self.inst;
        loop {
            let active: Vec<usize> = self
                .order
                .iter()
                .copied()
                .filter(|&i| !self.fixed_out[i])
                .collect();
            let mut changed = false;
            for b in bridges(inst, &active) {
                if self.fixed_in[b] {
                    continue;
                }
                self.fixed_in[b] = true;
                self.in_list.push(b);
                applied.0.push(b);
                changed = true;
                for &j in inst.conflicts_of(b) {
                    if self.fixed_in[j] {
                        return false;
                    }
                    if self.allowed[j] && !self.fixed_out[j] {
                        self.fixed_out[j] = true;
                        applied.1.push(j);
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn undo(&mut self, ins: &[usize], outs: &[usize]) {
        for &i in ins {
            self.fixed_in[i] = false;
        }
        self.in_list.truncate(self.in_list.len() - ins.len());
        for &i in outs {
            self.fixed_out[i] = false;
        }
    }

    fn usable(&self, i: usize) -> bool {
        self.allowed[i] && !self.fixed_out[i]
    }

    /// Whether `bound` cannot lead to an acceptable improving solution.
    fn pruned(&self, bound: f64) -> bool {
        if bound > self.cutoff && !self.near(bound, self.cutoff) {
            return true;
        }
        match &self.incumbent {
            Some((w, _)) => !self.inst.improves(bound, *w),
            None => false,
        }
    }

    fn near(&self, a: f64, b: f64) -> bool {
        !self.inst.is_integral() && (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    /// Bound tree: MST over usable edges containing every fixed-in edge.
    fn bound_tree(&mut self) -> Option<(f64, Vec<usize>)> {
        let inst = self.inst;
        self.dsu.reset();
        let mut tree = Vec::with_capacity(inst.n() - 1);
        for &i in &self.in_list {
            let e = inst.edge(i);
            if !self.dsu.union(e.u, e.v) {
                return None;
            }
            tree.push(i);
        }
        for &i in &self.order {
            if tree.len() + 1 == inst.n() {
                break;
            }
            if self.fixed_out[i] || self.fixed_in[i] {
                continue;
            }
            let e = inst.edge(i);
            if self.dsu.union(e.u, e.v) {
                tree.push(i);
            }
        }
        if tree.len() + 1 != inst.n() {
            return None;
        }
        let w = inst.total_weight(&tree);
        Some((w, tree))
    }

    /// Evaluates the current node; returns the children to explore, left
    /// first, or `None` when the node is closed.
    fn expand(&mut self) -> Option<(Frame, Frame)> {
        let (bound, tree) = self.bound_tree()?;
        if self.pruned(bound) {
            return None;
        }
        let inst = self.inst;
        let in_tree = inst.mask(&tree);

        // heaviest conflicting pair inside the tree
        let mut best: Option<(f64, usize, usize)> = None;
        for &i in &tree {
            for &j in inst.conflicts_of(i) {
                if j > i && in_tree[j] {
                    let w = inst.weight(i) + inst.weight(j);
                    if best.is_none_or(|(bw, _, _)| w > bw) {
                        best = Some((w, i, j));
                    }
                }
            }
        }
        if let Some((_, i, j)) = best {
            let pick = match (self.fixed_in[i], self.fixed_in[j]) {
                (true, _) => j,
                (_, true) => i,
                _ if inst.weight(j) > inst.weight(i) => j,
                _ => i,
            };
            let conflicts = inst.conflicts_of(pick).to_vec();
            return Some((
                Frame::Enter {
                    ins: Vec::new(),
                    outs: vec![pick],
                },
                Frame::Enter {
                    ins: vec![pick],
                    outs: conflicts,
                },
            ));
        }

        if self.has_must && !tree.iter().any(|&i| self.must[i]) {
            let candidate = self.cheapest_must_use();
            let b = candidate?;
            return Some((
                Frame::Enter {
                    ins: vec![b],
                    outs: inst.conflicts_of(b).to_vec(),
                },
                Frame::Enter {
                    ins: Vec::new(),
                    outs: vec![b],
                },
            ));
        }

        self.incumbent = Some((bound, tree));
        None
    }

    /// Cheapest must-use edge that can join the fixed-in set.
    fn cheapest_must_use(&mut self) -> Option<usize> {
        let inst = self.inst;
        self.dsu.reset();
        for &i in &self.in_list {
            let e = inst.edge(i);
            self.dsu.union(e.u, e.v);
        }
        for k in 0..self.order.len() {
            let i = self.order[k];
            if self.must[i] && self.usable(i) {
                let e = inst.edge(i);
                if !self.dsu.same(e.u, e.v) {
                    return Some(i);
                }
            }
        }
        None
    }
}

/// Writes the restricted problem as a MILP in CPLEX LP format.
///
/// Connectivity uses a single-commodity flow from node 1 (`f_u_v` per arc,
/// capacity `(n - 1) x`), which has the same integer solutions as the
/// subtour formulation. Degree cuts, conflict rows and the must-use and
/// cutoff rows are included; edges outside `allowed` are omitted.
pub fn export_milp(inst: &Instance, spec: &SubproblemSpec) -> Result<String> {
    spec.validate(inst)?;
    let n = inst.n();
    let mut allowed = spec.allowed.clone();
    allowed.sort_unstable();
    allowed.dedup();
    let mask = inst.mask(&allowed);
    let mut out = String::from("\\ MSTC restricted problem\nMinimize\n obj:");
    for &i in &allowed {
        let _ = write!(out, " + {} x{}", inst.weight(i), i + 1);
    }
    out.push_str("\nSubject To\n card:");
    for &i in &allowed {
        let _ = write!(out, " + x{}", i + 1);
    }
    let _ = writeln!(out, " = {}", n - 1);

    let arcs = |i: usize| {
        let e = inst.edge(i);
        [(e.u, e.v), (e.v, e.u)]
    };
    for v in 0..n {
        let _ = write!(out, " flow{}:", v + 1);
        let mut any = false;
        for &i in inst.incident(v).iter().filter(|&&i| mask[i]) {
            for (a, b) in arcs(i) {
                if b == v {
                    let _ = write!(out, " + f{}_{}", a + 1, b + 1);
                    any = true;
                } else if a == v {
                    let _ = write!(out, " - f{}_{}", a + 1, b + 1);
                    any = true;
                }
            }
        }
        if !any {
            out.push_str(" 0 x1");
        }
        let supply = if v == 0 { -((n - 1) as f64) } else { 1.0 };
        let _ = writeln!(out, " = {supply}");
    }
    for &i in &allowed {
        for (a, b) in arcs(i) {
            let _ = writeln!(
                out,
                " cap{}_{}: f{}_{} - {} x{} <= 0",
                a + 1,
                b + 1,
                a + 1,
                b + 1,
                n - 1,
                i + 1
            );
        }
    }
    for v in 0..n {
        let _ = write!(out, " deg{}:", v + 1);
        for &i in inst.incident(v).iter().filter(|&&i| mask[i]) {
            let _ = write!(out, " + x{}", i + 1);
        }
        out.push_str(" >= 1\n");
    }
    for &(i, j) in inst.conflicts() {
        if mask[i] && mask[j] {
            let _ = writeln!(out, " cfl{}_{}: x{} + x{} <= 1", i + 1, j + 1, i + 1, j + 1);
        }
    }
    if !spec.must_use.is_empty() {
        out.push_str(" bucket:");
        for &i in &spec.must_use {
            let _ = write!(out, " + x{}", i + 1);
        }
        out.push_str(" >= 1\n");
    }
    if spec.cutoff.is_finite() {
        out.push_str(" cutoff:");
        for &i in &allowed {
            let _ = write!(out, " + {} x{}", inst.weight(i), i + 1);
        }
        let _ = writeln!(out, " <= {}", spec.cutoff);
    }
    out.push_str("Bounds\n");
    for &i in &allowed {
        for (a, b) in arcs(i) {
            let _ = writeln!(out, " 0 <= f{}_{} <= {}", a + 1, b + 1, n - 1);
        }
    }
    out.push_str("Binaries\n");
    for &i in &allowed {
        let _ = writeln!(out, " x{}", i + 1);
    }
    out.push_str("End\n");
    Ok(out)
}
