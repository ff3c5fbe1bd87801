//! Instance model and graph primitives.
//!
//! Nodes and edges are indexed from zero internally. File formats and
//! user-facing output use one-based indices.

mod bridges;
mod conflict;
mod dsu;
mod flow;
mod kruskal;

use std::collections::HashSet;

pub use bridges::{bridges, is_connected_over, is_connected_without};
pub use conflict::ConflictGraph;
pub use dsu::DisjointSets;
pub use flow::{max_flow, FlowArc, MinCut};
pub use kruskal::{creates_cycle, kruskal, Forest};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing weights that are not integral.
pub const WEIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn other(&self, node: usize) -> usize {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// An undirected weighted graph together with its conflicting edge pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    edges: Vec<Edge>,
    conflicts: Vec<(usize, usize)>,
    conflict_adj: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    by_weight: Vec<usize>,
    integral: bool,
}

impl Instance {
    /// Builds and validates an instance. Conflict pairs are normalised to
    /// `(min, max)` and deduplicated.
    pub fn new(n: usize, edges: Vec<Edge>, conflicts: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("instance has no nodes".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge {} has an endpoint outside 1..={}",
                    i + 1,
                    n
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidInstance(format!(
                    "edge {} is a self-loop",
                    i + 1
                )));
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "edge {} has weight {} (must be finite and nonnegative)",
                    i + 1,
                    e.w
                )));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidInstance(format!(
                    "edge {} duplicates an earlier edge",
                    i + 1
                )));
            }
        }
        let m = edges.len();
        let mut pairs = Vec::with_capacity(conflicts.len());
        for &(a, b) in &conflicts {
            if a >= m || b >= m {
                return Err(Error::InvalidInstance(format!(
                    "conflict ({}, {}) references an edge outside 1..={}",
                    a + 1,
                    b + 1,
                    m
                )));
            }
            if a == b {
                return Err(Error::InvalidInstance(format!(
                    "edge {} is in conflict with itself",
                    a + 1
                )));
            }
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut conflict_adj = vec![Vec::new(); m];
        for &(a, b) in &pairs {
            conflict_adj[a].push(b);
            conflict_adj[b].push(a);
        }
        for list in &mut conflict_adj {
            list.sort_unstable();
        }
        let mut incidence = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.u].push(i);
            incidence[e.v].push(i);
        }
        let mut by_weight: Vec<usize> = (0..m).collect();
        by_weight.sort_by(|&a, &b| edges[a].w.total_cmp(&edges[b].w).then(a.cmp(&b)));
        let integral = edges.iter().all(|e| e.w.fract() == 0.0 && e.w < 9.0e15);

        Ok(Self {
            n,
            edges,
            conflicts: pairs,
            conflict_adj,
            incidence,
            by_weight,
            integral,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.edges[i].w
    }

    /// Conflict pairs as `(i, j)` with `i < j`, sorted.
    pub fn conflicts(&self) -> &[(usize, usize)] {
        &self.conflicts
    }

    /// Edges in conflict with edge `i`, ascending.
    pub fn conflicts_of(&self, i: usize) -> &[usize] {
        &self.conflict_adj[i]
    }

    pub fn in_conflict(&self, i: usize, j: usize) -> bool {
        self.conflict_adj[i].binary_search(&j).is_ok()
    }

    /// Edges incident to `node`, ascending.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incidence[node]
    }

    /// All edge indices sorted by `(weight, index)`.
    pub fn by_weight(&self) -> &[usize] {
        &self.by_weight
    }

    /// True when every weight is an integer, so objective values compare exactly.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn total_weight(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.edges[i].w).sum()
    }

    /// Number of conflict pairs with both edges inside `set`.
    pub fn count_conflicts(&self, set: &[usize]) -> usize {
        let mask = self.mask(set);
        set.iter()
            .map(|&i| {
                self.conflict_adj[i]
                    .iter()
                    .filter(|&&j| j > i && mask[j])
                    .count()
            })
            .sum()
    }

    /// Membership mask over all edge indices.
    pub fn mask(&self, set: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.m()];
        for &i in set {
            mask[i] = true;
        }
        mask
    }

    /// Strict "better than" for objective values, exact on integral instances.
    pub fn improves(&self, candidate: f64, reference: f64) -> bool {
        if reference.is_infinite() {
            return candidate.is_finite();
        }
        if self.integral {
            candidate < reference
        } else {
            candidate < reference - WEIGHT_EPS * (1.0 + reference.abs())
        }
    }

    /// Restricts the instance to `keep` (ascending edge indices). Edges are
    /// renumbered in order and conflicts touching dropped edges are removed.
    pub fn restrict(&self, keep: &[usize]) -> Instance {
        let mut new_index = vec![usize::MAX; self.m()];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let edges = keep.iter().map(|&i| self.edges[i]).collect();
        let conflicts = self
            .conflicts
            .iter()
            .filter_map(|&(a, b)| {
                let (x, y) = (new_index[a], new_index[b]);
                (x != usize::MAX && y != usize::MAX).then_some((x, y))
            })
            .collect();
        Instance::new(self.n, edges, conflicts).expect("restriction of a valid instance")
    }
}

/// An edge set with its weight and feasibility classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub edges: Vec<usize>,
    pub weight: f64,
    pub is_spanning_tree: bool,
    pub conflict_count: usize,
}

impl Solution {
    pub fn evaluate(inst: &Instance, edges: &[usize]) -> Self {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        let weight = inst.total_weight(&edges);
        let conflict_count = inst.count_conflicts(&edges);
        let is_spanning_tree = is_spanning_tree(inst, &edges);
        Self {
            edges,
            weight,
            is_spanning_tree,
            conflict_count,
        }
    }

    /// Spanning and conflict-free.
    pub fn is_feasible(&self) -> bool {
        self.is_spanning_tree && self.conflict_count == 0
    }
}

/// `n - 1` distinct edges, acyclic and connected.
pub fn is_spanning_tree(inst: &Instance, edges: &[usize]) -> bool {
    if edges.len() + 1 != inst.n() {
        return false;
    }
    let mut dsu = DisjointSets::new(inst.n());
    for &i in edges {
        let e = inst.edge(i);
        if !dsu.union(e.u, e.v) {
            return false;
        }
    }
    dsu.components() == 1
}

/// Independent feasibility check: a reason string for the first violated
/// property, or `None` when `edges` is a conflict-free spanning tree.
///
/// Uses a BFS over an adjacency list rather than union-find so that it does
/// not share code paths with the solvers it audits.
pub fn check_feasible(inst: &Instance, edges: &[usize]) -> Option<String> {
    let n = inst.n();
    if edges.len() != n - 1 {
        return Some(format!("{} edges, expected {}", edges.len(), n - 1));
    }
    let mut seen_edges = HashSet::new();
    let mut adj = vec![Vec::new(); n];
    for &i in edges {
        if i >= inst.m() {
            return Some(format!("edge index {} out of range", i + 1));
        }
        if !seen_edges.insert(i) {
            return Some(format!("edge {} repeated", i + 1));
        }
        let e = inst.edge(i);
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut visited = vec![false; n];
    let mut stack = vec![0];
    visited[0] = true;
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                reached += 1;
                stack.push(v);
            }
        }
    }
    // n - 1 edges reaching all n nodes is a tree.
    if reached != n {
        return Some(format!("reaches {reached} of {n} nodes"));
    }
    for (idx, &i) in edges.iter().enumerate() {
        for &j in &edges[idx + 1..] {
            if inst
                .conflicts()
                .binary_search(&(i.min(j), i.max(j)))
                .is_ok()
            {
                return Some(format!("edges {} and {} conflict", i + 1, j + 1));
            }
        }
    }
    None
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn inst(n: usize, edges: &[(usize, usize, f64)], conflicts: &[(usize, usize)]) -> Instance {
        Instance::new(
            n,
            edges.iter().map(|&(u, v, w)| Edge { u, v, w }).collect(),
            conflicts.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let e = |u, v| Edge { u, v, w: 1.0 };
        assert!(Instance::new(3, vec![e(0, 0)], vec![]).is_err());
        assert!(Instance::new(3, vec![e(0, 1), e(1, 0)], vec![]).is_err());
        assert!(Instance::new(3, vec![e(0, 3)], vec![]).is_err());
        assert!(Instance::new(3, vec![e(0, 1), e(1, 2)], vec![(0, 0)]).is_err());
        assert!(Instance::new(3, vec![e(0, 1), e(1, 2)], vec![(0, 2)]).is_err());
    }

    #[test]
    fn conflicts_are_normalised() {
        let g = inst(
            3,
            &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)],
            &[(2, 0), (0, 2)],
        );
        assert_eq!(g.conflicts(), &[(0, 2)]);
        assert!(g.in_conflict(2, 0));
        assert_eq!(g.count_conflicts(&[0, 1, 2]), 1);
        assert_eq!(g.count_conflicts(&[]), 0);
    }

    #[test]
    fn solution_classification() {
        let g = inst(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)], &[(0, 1)]);
        let s = Solution::evaluate(&g, &[0, 1]);
        assert!(s.is_spanning_tree);
        assert_eq!(s.conflict_count, 1);
        assert_eq!(s.weight, 3.0);
        assert!(!s.is_feasible());
        assert!(check_feasible(&g, &[0, 1]).is_some());
        assert!(check_feasible(&g, &[1, 2]).is_none());
        assert!(Solution::evaluate(&g, &[1, 2]).is_feasible());
    }

    #[test]
    fn restrict_renumbers_and_drops_conflicts() {
        let g = inst(
            3,
            &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)],
            &[(0, 1), (1, 2)],
        );
        let r = g.restrict(&[1, 2]);
        assert_eq!(r.m(), 2);
        assert_eq!(r.conflicts(), &[(0, 1)]);
        assert_eq!(r.weight(0), 2.0);
    }
}
