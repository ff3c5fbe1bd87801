//! Greedy heuristics over the conflict graph.
//!
//! [`independent_set`] picks conflict-free, acyclic edge sets by repeatedly
//! taking a minimum-degree node of the remaining conflict subgraph.
//! [`starting_solution`] uses it inside a Kruskal-based repair loop to look
//! for a conflict-free spanning tree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{kruskal, ConflictGraph, DisjointSets, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GreedyParams {
    /// Maximum outer (restart) iterations.
    pub h_max: usize,
    /// Maximum repair iterations per restart.
    pub t_max: usize,
    pub rng_seed: u64,
}

impl Default for GreedyParams {
    fn default() -> Self {
        Self {
            h_max: 20,
            t_max: 500,
            rng_seed: 0,
        }
    }
}

impl GreedyParams {
    pub fn validate(&self) -> Result<()> {
        if self.h_max <= 1 || self.t_max <= 1 {
            return Err(Error::InvalidInput(format!(
                "h_max and t_max must exceed 1 (got {} and {})",
                self.h_max, self.t_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartingResult {
    /// Every edge the heuristic looked at, ascending. Contains the start set.
    pub explored: Vec<usize>,
    /// Best conflict-free spanning tree found, or empty.
    pub tree: Vec<usize>,
    /// Weight of `tree`, `+inf` when it is empty.
    pub weight: f64,
}

/// Greedy independent set of `h` whose edges are acyclic in the instance
/// graph and which contains `seed`.
///
/// Candidates start as the nodes of `h` that are neither in `seed` nor in
/// conflict with it. At each step a candidate of minimum degree within the
/// remaining candidates is examined (ties: lowest edge index); it is taken
/// unless it would close a cycle, and its conflict neighbours are dropped.
/// Returned edge indices are ascending.
pub fn independent_set(inst: &Instance, h: &ConflictGraph, seed: &[usize]) -> Result<Vec<usize>> {
    let mut dsu = DisjointSets::new(inst.n());
    let mut blocked = vec![false; inst.m()];
    let mut chosen = Vec::with_capacity(inst.n());
    for &s in seed {
        if blocked[s] {
            return Err(Error::Precondition(format!(
                "seed edge {} conflicts with another seed edge",
                s + 1
            )));
        }
        let e = inst.edge(s);
        if !dsu.union(e.u, e.v) {
            return Err(Error::Precondition(format!(
                "seed edges contain a cycle through edge {}",
                s + 1
            )));
        }
        chosen.push(s);
        for &j in inst.conflicts_of(s) {
            blocked[j] = true;
        }
    }
    for &s in seed {
        if blocked[s] {
            return Err(Error::Precondition(format!(
                "seed edge {} conflicts with another seed edge",
                s + 1
            )));
        }
        blocked[s] = true;
    }

    let nodes = h.nodes();
    let mut alive: Vec<bool> = nodes.iter().map(|&e| !blocked[e]).collect();
    let mut degree: Vec<usize> = (0..nodes.len())
        .map(|p| {
            if alive[p] {
                h.neighbors_local(p).iter().filter(|&&q| alive[q]).count()
            } else {
                0
            }
        })
        .collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize, usize)>> = (0..nodes.len())
        .filter(|&p| alive[p])
        .map(|p| Reverse((degree[p], nodes[p], p)))
        .collect();

    let drop_node =
        |p: usize, alive: &mut [bool], degree: &mut [usize], heap: &mut BinaryHeap<_>| {
            alive[p] = false;
            for &q in h.neighbors_local(p) {
                if alive[q] {
                    degree[q] -= 1;
                    heap.push(Reverse((degree[q], nodes[q], q)));
                }
            }
        };

    while let Some(Reverse((d, edge, p))) = heap.pop() {
        if !alive[p] || d != degree[p] {
            continue;
        }
        let e = inst.edge(edge);
        if dsu.union(e.u, e.v) {
            chosen.push(edge);
            drop_node(p, &mut alive, &mut degree, &mut heap);
            for &q in h.neighbors_local(p) {
                if alive[q] {
                    drop_node(q, &mut alive, &mut degree, &mut heap);
                }
            }
        } else {
            drop_node(p, &mut alive, &mut degree, &mut heap);
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Edges of `set` that conflict with another edge of `set`.
fn conflicting_within(inst: &Instance, set: &[usize]) -> Vec<usize> {
    let mask = inst.mask(set);
    set.iter()
        .copied()
        .filter(|&i| inst.conflicts_of(i).iter().any(|&j| mask[j]))
        .collect()
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Tries to build a conflict-free spanning tree starting from `start`.
///
/// Each outer iteration runs Kruskal on the explored edges. While the tree
/// has conflicts (or does not span), conflicting edges are thinned to an
/// independent set, the remainder is greedily extended over the whole
/// conflict graph and, if that still does not span, completed into a tree
/// with random auxiliary weights. The final tree is added to the explored
/// set and becomes the incumbent when conflict-free and lighter.
pub fn starting_solution(
    inst: &Instance,
    cg: &ConflictGraph,
    start: &[usize],
    params: &GreedyParams,
) -> Result<StartingResult> {
    params.validate()?;
    let m = inst.m();
    let all: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut explored = merge_sorted(start, &[]);
    let mut best: Vec<usize> = Vec::new();
    let mut best_weight = f64::INFINITY;

    for _ in 0..params.h_max {
        let forest = kruskal(inst, &explored, &[], None)?;
        let mut tree = forest.edges;
        let mut spanning = forest.spanning;
        let mut clashing = conflicting_within(inst, &tree);
        let mut t = 0;
        let mut repaired = false;
        while (!clashing.is_empty() || !spanning) && t <= params.t_max {
            repaired = true;
            let thin = independent_set(inst, &cg.induced(&clashing)?, &[])?;
            let thin_mask = inst.mask(&thin);
            let clash_mask = inst.mask(&clashing);
            tree.retain(|&i| !clash_mask[i] || thin_mask[i]);
            let grown = independent_set(inst, cg, &tree)?;
            if grown.len() + 1 == inst.n() {
                tree = grown;
                spanning = true;
                clashing.clear();
                break;
            }
            let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=m) as f64).collect();
            let completed = kruskal(inst, &all, &grown, Some(&weights))?;
            spanning = completed.spanning;
            tree = completed.edges;
            clashing = conflicting_within(inst, &tree);
            t += 1;
        }
        explored = merge_sorted(&explored, &tree);
        if clashing.is_empty() && spanning {
            let w = inst.total_weight(&tree);
            if w < best_weight {
                best_weight = w;
                best = tree;
                if !repaired {
                    break;
                }
            }
        }
    }

    Ok(StartingResult {
        explored,
        tree: best,
        weight: best_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{check_feasible, tests::inst};
    use crate::oracle;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand_chacha::ChaCha8Rng;

    fn params(seed: u64) -> GreedyParams {
        GreedyParams {
            h_max: 20,
            t_max: 500,
            rng_seed: seed,
        }
    }

    #[test]
    fn conflict_free_tree_takes_everything() {
        let g = inst(4, &[(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)], &[]);
        let cg = ConflictGraph::build(&g);
        assert_eq!(independent_set(&g, &cg, &[]).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn conflict_path_prefers_low_degree_ends() {
        // conflict graph path 0 - 1 - 2 over an acyclic edge set
        let g = inst(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
            &[(0, 1), (1, 2)],
        );
        let cg = ConflictGraph::build(&g);
        assert_eq!(independent_set(&g, &cg, &[]).unwrap(), vec![0, 2]);
    }

    #[test]
    fn seeding_excludes_neighbours() {
        let g = inst(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[(0, 1)]);
        let cg = ConflictGraph::build(&g);
        assert_eq!(independent_set(&g, &cg, &[1]).unwrap(), vec![1]);
    }

    #[test]
    fn invalid_seeds_are_rejected() {
        let g = inst(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[(0, 1)]);
        let cg = ConflictGraph::build(&g);
        assert!(independent_set(&g, &cg, &[0, 1]).is_err());
        let h = inst(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[]);
        let hg = ConflictGraph::build(&h);
        assert!(independent_set(&h, &hg, &[0, 1, 2]).is_err());
    }

    #[test]
    fn cycle_closing_nodes_are_skipped() {
        let g = inst(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[]);
        let cg = ConflictGraph::build(&g);
        assert_eq!(independent_set(&g, &cg, &[]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn tree_instance_is_solved_in_one_pass() {
        let g = inst(4, &[(0, 1, 2.0), (1, 2, 3.0), (1, 3, 4.0)], &[]);
        let cg = ConflictGraph::build(&g);
        let r = starting_solution(&g, &cg, &[0, 1, 2], &params(1)).unwrap();
        assert_eq!(r.tree, vec![0, 1, 2]);
        assert_eq!(r.weight, 9.0);
        assert_eq!(r.explored, vec![0, 1, 2]);
    }

    #[test]
    fn star_with_conflict_has_no_solution() {
        let g = inst(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], &[(0, 1)]);
        let cg = ConflictGraph::build(&g);
        let r = starting_solution(&g, &cg, &[0, 1, 2], &params(3)).unwrap();
        assert!(r.tree.is_empty());
        assert!(r.weight.is_infinite());
    }

    #[test]
    fn empty_start_set_still_finds_a_tree() {
        let g = inst(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
            &[(0, 1)],
        );
        let cg = ConflictGraph::build(&g);
        let r = starting_solution(&g, &cg, &[], &params(2)).unwrap();
        assert!(check_feasible(&g, &r.tree).is_none());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let g = inst(2, &[(0, 1, 1.0)], &[]);
        let cg = ConflictGraph::build(&g);
        let p = GreedyParams {
            h_max: 1,
            ..params(0)
        };
        assert!(starting_solution(&g, &cg, &[], &p).is_err());
    }

    fn case(seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..=12);
        let density = rng.gen_range(0.1..0.7);
        let rate = rng.gen_range(0.0..0.3);
        oracle::random_connected_instance(&mut rng, n, density, rate, 20)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn independent_sets_are_valid_and_maximal(seed in any::<u64>()) {
            let g = case(seed);
            let cg = ConflictGraph::build(&g);
            let set = independent_set(&g, &cg, &[]).unwrap();
            prop_assert_eq!(g.count_conflicts(&set), 0);
            let mut dsu = DisjointSets::new(g.n());
            for &i in &set {
                prop_assert!(dsu.union(g.edge(i).u, g.edge(i).v));
            }
            for e in 0..g.m() {
                if set.contains(&e) {
                    continue;
                }
                let conflicts = set.iter().any(|&i| g.in_conflict(i, e));
                let cycles = crate::graph::creates_cycle(&g, &set, e);
                prop_assert!(conflicts || cycles, "edge {} could be added", e);
            }
        }

        #[test]
        fn starting_solution_is_feasible_deterministic_and_monotone(seed in any::<u64>()) {
            let g = case(seed);
            let cg = ConflictGraph::build(&g);
            let start: Vec<usize> = (0..g.m()).step_by(2).collect();
            let p = GreedyParams { h_max: 5, t_max: 20, rng_seed: seed };
            let a = starting_solution(&g, &cg, &start, &p).unwrap();
            let b = starting_solution(&g, &cg, &start, &p).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(start.iter().all(|s| a.explored.contains(s)));
            if a.tree.is_empty() {
                prop_assert!(a.weight.is_infinite());
            } else {
                prop_assert!(check_feasible(&g, &a.tree).is_none());
                prop_assert_eq!(a.weight, g.total_weight(&a.tree));
                prop_assert!(a.tree.iter().all(|e| a.explored.contains(e)));
            }
        }
    }
}
