//! LP relaxations of the MSTC model solved by cutting planes.
//!
//! The model starts with `sum x = n - 1`, `0 <= x <= 1` and one degree cut
//! `x(delta(u)) >= 1` per node. Violated conflict pairs `x_i + x_j <= 1`
//! are added lazily. With subtours enabled, each round also separates
//! subtour elimination and conflict-cycle inequalities until none is
//! violated by more than [`VIOLATION_TOL`].

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::separation::{separate_conflict_cycle, separate_subtour, VIOLATION_TOL};
use super::simplex::{DualSimplex, LpStatus};
use crate::graph::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CutKind {
    /// `sum_{E(S)} x <= |S| - 1`.
    Subtour,
    /// `sum_H x + x_c <= |H| - 1`.
    ConflictCycle,
    /// `x(delta(u)) >= 1`.
    Degree,
    /// `x_i + x_j <= 1`.
    ConflictPair,
}

/// A linear inequality over edge variables with unit coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cut {
    pub kind: CutKind,
    /// Edges with coefficient 1, ascending.
    pub edges: Vec<usize>,
    /// The outside edge of a conflict-cycle cut.
    pub extra: Option<usize>,
    pub rhs: f64,
    /// Node set of a subtour cut, or the single node of a degree cut.
    pub nodes: Vec<usize>,
}

impl Cut {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .chain(self.extra.iter())
            .map(|&i| x[i])
            .sum()
    }

    /// Amount by which `x` violates the cut; nonpositive when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self.kind {
            CutKind::Degree => self.rhs - self.lhs(x),
            _ => self.lhs(x) - self.rhs,
        }
    }

    /// Whether the incidence vector of `tree` satisfies the cut.
    pub fn holds_for(&self, m: usize, tree: &[usize]) -> bool {
        let mut x = vec![0.0; m];
        for &i in tree {
            x[i] = 1.0;
        }
        self.violation(&x) <= 1e-9
    }

    fn coefficients(&self) -> Vec<(usize, f64)> {
        self.edges
            .iter()
            .chain(self.extra.iter())
            .map(|&i| (i, 1.0))
            .collect()
    }

    fn bounds(&self) -> (f64, f64) {
        let len = (self.edges.len() + usize::from(self.extra.is_some())) as f64;
        match self.kind {
            CutKind::Degree => (self.rhs, len.max(self.rhs)),
            _ => (0.0, self.rhs),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpOptions {
    /// Separate subtour and conflict-cycle cuts (LP-MSTC); otherwise only
    /// the cardinality, degree and conflict rows are used.
    pub include_subtours: bool,
    pub time_limit: Option<Duration>,
    pub max_rounds: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            include_subtours: true,
            time_limit: None,
            max_rounds: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpSolveStatus {
    /// No cut of the enabled families is violated.
    Optimal,
    /// The relaxation has no feasible point, so the instance has no
    /// conflict-free spanning tree.
    Infeasible,
    /// Time, round or iteration budget exhausted; `objective` is the value
    /// of the last relaxation solved and may not be a valid bound of the
    /// full relaxation.
    NonOptimal,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    pub status: LpSolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Every row of the final model except `sum x = n - 1`.
    pub cuts: Vec<Cut>,
    pub rounds: usize,
    pub simplex_iterations: usize,
}

impl LpSolution {
    /// Writes the final model in CPLEX LP format.
    pub fn to_lp_format(&self, inst: &Instance) -> String {
        let mut out = String::from("\\ MSTC relaxation\nMinimize\n obj:");
        for (i, e) in inst.edges().iter().enumerate() {
            let _ = write!(out, " + {} x{}", e.w, i + 1);
        }
        out.push_str("\nSubject To\n card:");
        for i in 0..inst.m() {
            let _ = write!(out, " + x{}", i + 1);
        }
        let _ = writeln!(out, " = {}", inst.n() - 1);
        for (k, c) in self.cuts.iter().enumerate() {
            let name = match c.kind {
                CutKind::Subtour => "sec",
                CutKind::ConflictCycle => "ccc",
                CutKind::Degree => "deg",
                CutKind::ConflictPair => "cfl",
            };
            let _ = write!(out, " {name}{}:", k + 1);
            for (i, _) in c.coefficients() {
                let _ = write!(out, " + x{}", i + 1);
            }
            let sense = if c.kind == CutKind::Degree {
                ">="
            } else {
                "<="
            };
            let _ = writeln!(out, " {sense} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for i in 0..inst.m() {
            let _ = writeln!(out, " 0 <= x{} <= 1", i + 1);
        }
        out.push_str("End\n");
        out
    }
}

/// Solves the LP relaxation of `inst` by cutting planes.
pub fn solve_lp(inst: &Instance, opts: &LpOptions) -> LpSolution {
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let (n, m) = (inst.n(), inst.m());
    let mut lp = DualSimplex::new(
        inst.edges().iter().map(|e| e.w).collect(),
        vec![0.0; m],
        vec![1.0; m],
    );
    let card = (n - 1) as f64;
    let all: Vec<(usize, f64)> = (0..m).map(|i| (i, 1.0)).collect();
    lp.add_row(&all, card, card);

    let mut cuts = Vec::new();
    let mut infeasible = m < n - 1;
    if n > 1 {
        for u in 0..n {
            let cut = Cut {
                kind: CutKind::Degree,
                edges: inst.incident(u).to_vec(),
                extra: None,
                rhs: 1.0,
                nodes: vec![u],
            };
            if cut.edges.is_empty() {
                infeasible = true;
            }
            add(&mut lp, &mut cuts, cut);
        }
    }
    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    let finish = |lp: &DualSimplex, cuts: Vec<Cut>, status, rounds| LpSolution {
        status,
        objective: if status == LpSolveStatus::Infeasible {
            f64::INFINITY
        } else {
            lp.objective()
        },
        x: lp.primal().iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        reduced_costs: lp.reduced_costs().to_vec(),
        cuts,
        rounds,
        simplex_iterations: lp.iterations(),
    };
    if infeasible {
        return finish(&lp, cuts, LpSolveStatus::Infeasible, 0);
    }

    let mut rounds = 0;
    loop {
        rounds += 1;
        match lp.solve(deadline) {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return finish(&lp, cuts, LpSolveStatus::Infeasible, rounds),
            LpStatus::Interrupted => return finish(&lp, cuts, LpSolveStatus::NonOptimal, rounds),
        }
        let x = lp.primal().to_vec();
        let mut found = Vec::new();
        for i in (0..m).filter(|&i| x[i] > 1e-9) {
            for &j in inst.conflicts_of(i) {
                let key = (i.min(j), i.max(j));
                if x[i] + x[j] > 1.0 + VIOLATION_TOL && pairs.insert(key) {
                    found.push(Cut {
                        kind: CutKind::ConflictPair,
                        edges: vec![key.0, key.1],
                        extra: None,
                        rhs: 1.0,
                        nodes: Vec::new(),
                    });
                }
            }
        }
        if opts.include_subtours {
            let subtours = separate_subtour(inst, &x);
            found.extend(separate_conflict_cycle(inst, &x, &subtours));
            found.extend(subtours);
        }
        if found.is_empty() {
            return finish(&lp, cuts, LpSolveStatus::Optimal, rounds);
        }
        log::trace!(
            "lp round {rounds}: obj {:.6}, {} cuts",
            lp.objective(),
            found.len()
        );
        for cut in found {
            add(&mut lp, &mut cuts, cut);
        }
        if rounds >= opts.max_rounds || deadline.is_some_and(|d| Instant::now() >= d) {
            return finish(&lp, cuts, LpSolveStatus::NonOptimal, rounds);
        }
    }
}

fn add(lp: &mut DualSimplex, cuts: &mut Vec<Cut>, cut: Cut) {
    let (lo, hi) = cut.bounds();
    lp.add_row(&cut.coefficients(), lo, hi);
    cuts.push(cut);
}
