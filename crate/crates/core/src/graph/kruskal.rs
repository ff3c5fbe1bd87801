use super::{DisjointSets, Instance};
use crate::error::{Error, Result};

/// Result of [`kruskal`]: a spanning forest and whether it spans every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub edges: Vec<usize>,
    pub spanning: bool,
}

/// Minimum spanning forest of `G[allowed]` containing every edge of `forced`.
///
/// Forced edges are taken first, then the rest in `(weight, index)` order,
/// using `weight_override` instead of the instance weights when given.
/// Returned edges are ascending.
pub fn kruskal(
    inst: &Instance,
    allowed: &[usize],
    forced: &[usize],
    weight_override: Option<&[f64]>,
) -> Result<Forest> {
    let allowed_mask = inst.mask(allowed);
    let mut dsu = DisjointSets::new(inst.n());
    let mut taken = Vec::with_capacity(inst.n().saturating_sub(1));
    for &i in forced {
        if !allowed_mask[i] {
            return Err(Error::Precondition(format!(
                "forced edge {} is not allowed",
                i + 1
            )));
        }
        let e = inst.edge(i);
        if !dsu.union(e.u, e.v) {
            return Err(Error::Precondition(format!(
                "forced edges contain a cycle through edge {}",
                i + 1
            )));
        }
        taken.push(i);
    }
    let target = inst.n() - 1;
    let consider = |i: usize, dsu: &mut DisjointSets, taken: &mut Vec<usize>| {
        let e = inst.edge(i);
        if dsu.union(e.u, e.v) {
            taken.push(i);
        }
    };
    match weight_override {
        None => {
            for &i in inst.by_weight() {
                if taken.len() == target {
                    break;
                }
                if allowed_mask[i] {
                    consider(i, &mut dsu, &mut taken);
                }
            }
        }
        Some(w) => {
            let mut order: Vec<usize> = allowed.to_vec();
            order.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
            order.dedup();
            for i in order {
                if taken.len() == target {
                    break;
                }
                consider(i, &mut dsu, &mut taken);
            }
        }
    }
    taken.sort_unstable();
    Ok(Forest {
        spanning: taken.len() == target,
        edges: taken,
    })
}

/// True when adding `candidate` to the acyclic set `current` closes a cycle.
pub fn creates_cycle(inst: &Instance, current: &[usize], candidate: usize) -> bool {
    let mut dsu = DisjointSets::new(inst.n());
    for &i in current {
        let e = inst.edge(i);
        dsu.union(e.u, e.v);
    }
    let e = inst.edge(candidate);
    dsu.same(e.u, e.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::inst;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> Instance {
        inst(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)], &[])
    }

    #[test]
    fn triangle_mst() {
        let g = triangle();
        let f = kruskal(&g, &[0, 1, 2], &[], None).unwrap();
        assert_eq!(f.edges, vec![0, 1]);
        assert!(f.spanning);
        assert_eq!(g.total_weight(&f.edges), 3.0);
    }

    #[test]
    fn single_allowed_edge_is_a_forest() {
        let g = triangle();
        let f = kruskal(&g, &[2], &[], None).unwrap();
        assert_eq!(f.edges, vec![2]);
        assert!(!f.spanning);
    }

    #[test]
    fn forced_edges_come_first() {
        let g = triangle();
        let f = kruskal(&g, &[0, 1, 2], &[2], None).unwrap();
        assert_eq!(f.edges, vec![0, 2]);
    }

    #[test]
    fn cyclic_forced_set_is_rejected() {
        let g = triangle();
        assert!(matches!(
            kruskal(&g, &[0, 1, 2], &[0, 1, 2], None),
            Err(Error::Precondition(_))
        ));
        assert!(kruskal(&g, &[0], &[1], None).is_err());
    }

    #[test]
    fn override_weights_and_index_ties() {
        let g = triangle();
        let w = [5.0, 1.0, 1.0];
        let f = kruskal(&g, &[0, 1, 2], &[], Some(&w)).unwrap();
        assert_eq!(f.edges, vec![1, 2]);
        // all equal: lower indices win
        let f = kruskal(&g, &[0, 1, 2], &[], Some(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(f.edges, vec![0, 1]);
    }

    #[test]
    fn cycle_detection() {
        let g = triangle();
        assert!(!creates_cycle(&g, &[], 2));
        assert!(!creates_cycle(&g, &[0], 1));
        assert!(creates_cycle(&g, &[0, 1], 2));
    }

    #[test]
    fn matches_spanning_tree_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let density = rng.gen_range(0.4..1.0);
            let g = oracle::random_instance(&mut rng, 6, density, 0.0, 20);
            let all: Vec<usize> = (0..g.m()).collect();
            let f = kruskal(&g, &all, &[], None).unwrap();
            let best = oracle::brute_force_optimum(&g, &all, false);
            match best {
                Some((w, _)) => {
                    assert!(f.spanning);
                    assert_eq!(g.total_weight(&f.edges), w);
                }
                None => assert!(!f.spanning),
            }
        }
    }
}
