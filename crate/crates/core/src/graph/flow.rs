use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Residual capacities below this are treated as saturated.
const FLOW_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub value: f64,
    /// Nodes reachable from the source in the final residual graph, ascending.
    pub source_side: Vec<usize>,
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(nodes: usize, arcs: &[FlowArc]) -> Self {
        let mut r = Self {
            head: Vec::with_capacity(2 * arcs.len()),
            cap: Vec::with_capacity(2 * arcs.len()),
            adj: vec![Vec::new(); nodes],
        };
        for a in arcs {
            r.adj[a.from].push(r.head.len());
            r.head.push(a.to);
            r.cap.push(a.cap);
            r.adj[a.to].push(r.head.len());
            r.head.push(a.from);
            r.cap.push(0.0);
        }
        r
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.head[a];
                if self.cap[a] > FLOW_EPS && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(
        &mut self,
        u: usize,
        t: usize,
        pushed: f64,
        level: &[usize],
        it: &mut [usize],
    ) -> f64 {
        if u == t {
            return pushed;
        }
        while it[u] < self.adj[u].len() {
            let a = self.adj[u][it[u]];
            let v = self.head[a];
            if self.cap[a] > FLOW_EPS && level[v] == level[u] + 1 {
                let got = self.augment(v, t, pushed.min(self.cap[a]), level, it);
                if got > 0.0 {
                    self.cap[a] -= got;
                    self.cap[a ^ 1] += got;
                    return got;
                }
            }
            it[u] += 1;
        }
        0.0
    }
}

/// Maximum `s`-`t` flow and a minimum cut (Dinic's algorithm).
///
/// Exact for integer capacities; otherwise accurate to floating point with
/// residuals below 1e-12 treated as zero.
pub fn max_flow(nodes: usize, arcs: &[FlowArc], s: usize, t: usize) -> Result<MinCut> {
    if s == t {
        return Err(Error::InvalidInput("source and sink coincide".into()));
    }
    if s >= nodes || t >= nodes {
        return Err(Error::InvalidInput("source or sink out of range".into()));
    }
    if let Some(a) = arcs
        .iter()
        .find(|a| a.from >= nodes || a.to >= nodes || !(a.cap >= 0.0))
    {
        return Err(Error::InvalidInput(format!("bad arc {a:?}")));
    }
    let mut r = Residual::new(nodes, arcs);
    let mut value = 0.0;
    loop {
        let level = r.levels(s);
        if level[t] == usize::MAX {
            let source_side = (0..nodes).filter(|&v| level[v] != usize::MAX).collect();
            return Ok(MinCut { value, source_side });
        }
        let mut it = vec![0; nodes];
        loop {
            let f = r.augment(s, t, f64::INFINITY, &level, &mut it);
            if f <= 0.0 {
                break;
            }
            value += f;
        }
    }
}
