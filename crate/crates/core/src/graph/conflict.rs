use super::Instance;
use crate::error::{Error, Result};

/// Graph over edge indices whose adjacency means "in conflict".
///
/// A conflict graph may cover only part of the instance: `nodes` lists the
/// edge indices it contains and adjacency is stored by local position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    universe: usize,
    nodes: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

impl ConflictGraph {
    /// Full conflict graph of `inst`: one node per edge.
    pub fn build(inst: &Instance) -> Self {
        let m = inst.m();
        Self {
            universe: m,
            nodes: (0..m).collect(),
            adj: (0..m).map(|i| inst.conflicts_of(i).to_vec()).collect(),
        }
    }

    /// Number of conflict-graph nodes.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn size(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edge indices of the nodes, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Edge index count of the underlying instance.
    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Local positions adjacent to local position `pos`.
    pub fn neighbors_local(&self, pos: usize) -> &[usize] {
        &self.adj[pos]
    }

    pub fn degree_local(&self, pos: usize) -> usize {
        self.adj[pos].len()
    }

    /// Local position of edge index `edge`, if it is a node.
    pub fn position(&self, edge: usize) -> Option<usize> {
        self.nodes.binary_search(&edge).ok()
    }

    /// Edge indices in conflict with `edge` inside this graph, ascending.
    pub fn neighbors(&self, edge: usize) -> Vec<usize> {
        self.position(edge)
            .map(|p| self.adj[p].iter().map(|&q| self.nodes[q]).collect())
            .unwrap_or_default()
    }

    pub fn degree(&self, edge: usize) -> usize {
        self.position(edge).map_or(0, |p| self.adj[p].len())
    }

    /// Subgraph induced by the edge indices in `subset`.
    pub fn induced(&self, subset: &[usize]) -> Result<ConflictGraph> {
        let mut nodes = subset.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let mut local = vec![usize::MAX; self.universe];
        let mut parent_pos = Vec::with_capacity(nodes.len());
        for (k, &e) in nodes.iter().enumerate() {
            let p = self.position(e).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "edge {} is not a node of the conflict graph",
                    e + 1
                ))
            })?;
            local[e] = k;
            parent_pos.push(p);
        }
        let adj = parent_pos
            .iter()
            .map(|&p| {
                self.adj[p]
                    .iter()
                    .filter_map(|&q| {
                        let l = local[self.nodes[q]];
                        (l != usize::MAX).then_some(l)
                    })
                    .collect()
            })
            .collect();
        Ok(ConflictGraph {
            universe: self.universe,
            nodes,
            adj,
        })
    }
}
