//! Iterative instance reduction.
//!
//! Step 1: a bridge lies in every spanning tree, so every edge in conflict
//! with a bridge can be dropped. Step 2: an edge whose conflicting edges
//! disconnect the graph when removed can never be used, so it is dropped.
//! Step 1 is repeated until stable; any removal in step 2 restarts from
//! step 1. Bridges are recomputed once per pass of step 1.

use crate::error::{Error, Result};
use crate::graph::{bridges, is_connected_over, Instance};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreprocessReport {
    /// Original indices of removed edges, ascending.
    pub removed_edges: Vec<usize>,
    /// Original indices of bridges, which every solution must contain.
    pub fixed_edges: Vec<usize>,
    /// For each edge of the reduced instance, its original index.
    pub kept: Vec<usize>,
    /// Number of outer passes (step 1 followed by step 2).
    pub iterations: usize,
}

impl PreprocessReport {
    /// Maps reduced edge indices back to original ones, ascending.
    pub fn to_original(&self, edges: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = edges.iter().map(|&i| self.kept[i]).collect();
        out.sort_unstable();
        out
    }
}

/// Reduces `inst`; errors with [`Error::Infeasible`] when the instance is or
/// becomes disconnected, since then no conflict-free spanning tree exists.
pub fn preprocess(inst: &Instance) -> Result<(Instance, PreprocessReport)> {
    let m = inst.m();
    let mut active = vec![true; m];
    if !is_connected_over(inst, &active) {
        return Err(Error::Infeasible("the input graph is disconnected".into()));
    }
    let mut fixed = vec![false; m];
    let mut iterations = 0;

    loop {
        iterations += 1;
        // step 1
        loop {
            let current: Vec<usize> = (0..m).filter(|&i| active[i]).collect();
            let mut removed_any = false;
            for b in bridges(inst, &current) {
                fixed[b] = true;
                for &j in inst.conflicts_of(b) {
                    if active[j] {
                        if fixed[j] {
                            return Err(Error::Infeasible(format!(
                                "bridges {} and {} are in conflict",
                                b + 1,
                                j + 1
                            )));
                        }
                        active[j] = false;
                        removed_any = true;
                    }
                }
            }
            if !removed_any {
                break;
            }
            if !is_connected_over(inst, &active) {
                return Err(Error::Infeasible(
                    "removing edges in conflict with bridges disconnects the graph".into(),
                ));
            }
        }

        // step 2
        let mut removed = None;
        let mut probe = active.clone();
        for i in 0..m {
            if !active[i] {
                continue;
            }
            let blocked: Vec<usize> = inst
                .conflicts_of(i)
                .iter()
                .copied()
                .filter(|&j| active[j])
                .collect();
            if blocked.is_empty() {
                continue;
            }
            for &j in &blocked {
                probe[j] = false;
            }
            let connected = is_connected_over(inst, &probe);
            for &j in &blocked {
                probe[j] = true;
            }
            if !connected {
                removed = Some(i);
                break;
            }
        }
        match removed {
            Some(i) => {
                active[i] = false;
                if !is_connected_over(inst, &active) {
                    return Err(Error::Infeasible(format!(
                        "edge {} is unusable but required for connectivity",
                        i + 1
                    )));
                }
            }
            None => break,
        }
    }

    let kept: Vec<usize> = (0..m).filter(|&i| active[i]).collect();
    let report = PreprocessReport {
        removed_edges: (0..m).filter(|&i| !active[i]).collect(),
        fixed_edges: (0..m).filter(|&i| fixed[i] && active[i]).collect(),
        iterations,
        kept: kept.clone(),
    };
    Ok((inst.restrict(&kept), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::inst;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conflict_free_instance_is_unchanged() {
        let g = inst(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)], &[]);
        let (r, rep) = preprocess(&g).unwrap();
        assert_eq!(r.m(), 3);
        assert!(rep.removed_edges.is_empty());
        assert!(rep.fixed_edges.is_empty());
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn conflicting_bridges_are_infeasible() {
        let g = inst(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], &[(0, 1)]);
        assert!(matches!(preprocess(&g), Err(Error::Infeasible(_))));
    }

    #[test]
    fn disconnected_input_is_infeasible() {
        let g = inst(4, &[(0, 1, 1.0), (2, 3, 1.0)], &[]);
        assert!(matches!(preprocess(&g), Err(Error::Infeasible(_))));
    }

    #[test]
    fn pendant_bridge_removes_conflicting_triangle_edge() {
        // triangle 0-1-2 (edges 0,1,2) plus pendant 2-3 (edge 3)
        let g = inst(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0)],
            &[(3, 1)],
        );
        let (r, rep) = preprocess(&g).unwrap();
        assert_eq!(rep.removed_edges, vec![1]);
        // the path 1-0-2-3 is all bridges now
        assert_eq!(rep.fixed_edges, vec![0, 2, 3]);
        assert_eq!(r.m(), 3);
        assert!(r.conflicts().is_empty());
        assert_eq!(rep.to_original(&[0, 1, 2]), vec![0, 2, 3]);
    }

    #[test]
    fn step_two_removes_edge_whose_conflicts_disconnect() {
        // 4-cycle 0-1-2-3 with a chord; edge 4 (chord 0-2) conflicts with
        // both edges at node 1, so taking it would isolate node 1
        let g = inst(
            4,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 0, 1.0),
                (0, 2, 1.0),
            ],
            &[(4, 0), (4, 1)],
        );
        let (_, rep) = preprocess(&g).unwrap();
        assert_eq!(rep.removed_edges, vec![4]);
        assert!(rep.iterations >= 2);
    }

    fn random_cases() -> Vec<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        (0..150)
            .map(|_| {
                let n = rng.gen_range(3..=7);
                let density = rng.gen_range(0.1..0.6);
                let rate = rng.gen_range(0.0..0.3);
                oracle::random_connected_instance(&mut rng, n, density, rate, 9)
            })
            .collect()
    }

    #[test]
    fn feasible_trees_survive_and_contain_fixed_edges() {
        for g in random_cases() {
            let all: Vec<usize> = (0..g.m()).collect();
            let mut before = oracle::feasible_trees(&g, &all);
            match preprocess(&g) {
                Err(Error::Infeasible(_)) => assert!(before.is_empty()),
                Err(e) => panic!("{e}"),
                Ok((r, rep)) => {
                    assert!(rep
                        .removed_edges
                        .iter()
                        .all(|e| !rep.fixed_edges.contains(e)));
                    let r_all: Vec<usize> = (0..r.m()).collect();
                    assert!(oracle::connected(&r, &r_all));
                    let mut after: Vec<Vec<usize>> = oracle::feasible_trees(&r, &r_all)
                        .iter()
                        .map(|t| rep.to_original(t))
                        .collect();
                    before.sort();
                    after.sort();
                    assert_eq!(before, after);
                    for t in &before {
                        assert!(rep.fixed_edges.iter().all(|f| t.contains(f)));
                    }
                }
            }
        }
    }

    #[test]
    fn idempotent() {
        for g in random_cases() {
            if let Ok((r, _)) = preprocess(&g) {
                let (rr, rep2) = preprocess(&r).unwrap();
                assert!(rep2.removed_edges.is_empty());
                assert_eq!(rr.m(), r.m());
                assert_eq!(rr.conflicts(), r.conflicts());
            }
        }
    }
}
