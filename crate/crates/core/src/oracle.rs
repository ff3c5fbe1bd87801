//! Brute-force reference routines for small instances.
//!
//! Everything here enumerates explicitly and shares no code with the solvers,
//! so it can serve as an independent oracle in tests and audits. Only use it
//! on graphs with a handful of nodes.

use rand::Rng;

use crate::graph::{Edge, Instance};

/// Every spanning tree of `G[allowed]` (conflicts ignored), each ascending.
pub fn spanning_trees(inst: &Instance, allowed: &[usize]) -> Vec<Vec<usize>> {
    let mut allowed = allowed.to_vec();
    allowed.sort_unstable();
    allowed.dedup();
    let mut out = Vec::new();
    let mut label: Vec<usize> = (0..inst.n()).collect();
    let mut chosen = Vec::new();
    extend(inst, &allowed, 0, &mut label, &mut chosen, &mut out);
    out
}

fn extend(
    inst: &Instance,
    allowed: &[usize],
    pos: usize,
    label: &mut Vec<usize>,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let need = inst.n() - 1 - chosen.len();
    if need == 0 {
        out.push(chosen.clone());
        return;
    }
    if allowed.len() - pos < need {
        return;
    }
    let i = allowed[pos];
    let e = inst.edge(i);
    let (a, b) = (label[e.u], label[e.v]);
    if a != b {
        // relabel component b as a, then undo
        let saved = label.clone();
        for l in label.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
        chosen.push(i);
        extend(inst, allowed, pos + 1, label, chosen, out);
        chosen.pop();
        *label = saved;
    }
    extend(inst, allowed, pos + 1, label, chosen, out);
}

fn conflict_free(inst: &Instance, tree: &[usize]) -> bool {
    tree.iter().enumerate().all(|(k, &i)| {
        tree[k + 1..]
            .iter()
            .all(|&j| !inst.conflicts().contains(&(i.min(j), i.max(j))))
    })
}

/// Every conflict-free spanning tree of `G[allowed]`.
pub fn feasible_trees(inst: &Instance, allowed: &[usize]) -> Vec<Vec<usize>> {
    spanning_trees(inst, allowed)
        .into_iter()
        .filter(|t| conflict_free(inst, t))
        .collect()
}

/// Minimum weight spanning tree of `G[allowed]` by enumeration, optionally
/// requiring it to be conflict-free. Ties go to the lexicographically first
/// tree. `None` when no tree qualifies.
pub fn brute_force_optimum(
    inst: &Instance,
    allowed: &[usize],
    respect_conflicts: bool,
) -> Option<(f64, Vec<usize>)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for t in spanning_trees(inst, allowed) {
        if respect_conflicts && !conflict_free(inst, &t) {
            continue;
        }
        let w: f64 = t.iter().map(|&i| inst.weight(i)).sum();
        if best.as_ref().is_none_or(|(bw, _)| w < *bw) {
            best = Some((w, t));
        }
    }
    best
}

/// Random instance on `n` nodes: each node pair becomes an edge with
/// probability `density`, each edge pair conflicts with probability
/// `conflict_rate`, and weights are integers in `1..=max_weight`. The graph
/// may be disconnected.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    density: f64,
    conflict_rate: f64,
    max_weight: u32,
) -> Instance {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density.clamp(0.0, 1.0)) {
                edges.push(Edge {
                    u,
                    v,
                    w: f64::from(rng.gen_range(1..=max_weight)),
                });
            }
        }
    }
    let conflicts = random_conflicts(rng, edges.len(), conflict_rate);
    Instance::new(n, edges, conflicts).expect("generated instance is valid")
}

/// Random connected instance: a random spanning tree plus extra edges
/// with probability `density`.
pub fn random_connected_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    density: f64,
    conflict_rate: f64,
    max_weight: u32,
) -> Instance {
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    for k in 1..n {
        let (u, v) = (order[k], order[rng.gen_range(0..k)]);
        present[u][v] = true;
        present[v][u] = true;
        edges.push(Edge {
            u: u.min(v),
            v: u.max(v),
            w: f64::from(rng.gen_range(1..=max_weight)),
        });
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.gen_bool(density.clamp(0.0, 1.0)) {
                edges.push(Edge {
                    u,
                    v,
                    w: f64::from(rng.gen_range(1..=max_weight)),
                });
            }
        }
    }
    let conflicts = random_conflicts(rng, edges.len(), conflict_rate);
    Instance::new(n, edges, conflicts).expect("generated instance is valid")
}

fn random_conflicts<R: Rng>(rng: &mut R, m: usize, rate: f64) -> Vec<(usize, usize)> {
    let mut conflicts = Vec::new();
    if rate <= 0.0 {
        return conflicts;
    }
    for i in 0..m {
        for j in i + 1..m {
            if rng.gen_bool(rate.min(1.0)) {
                conflicts.push((i, j));
            }
        }
    }
    conflicts
}

/// Connectivity of `G[allowed]` over all nodes, by plain BFS.
pub fn connected(inst: &Instance, allowed: &[usize]) -> bool {
    let n = inst.n();
    let mut adj = vec![Vec::new(); n];
    for &i in allowed {
        let e = inst.edge(i);
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
