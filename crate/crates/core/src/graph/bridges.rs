use super::Instance;

/// Cut edges of `G[active]`, ascending. Disconnected inputs are handled per
/// component.
pub fn bridges(inst: &Instance, active: &[usize]) -> Vec<usize> {
    let n = inst.n();
    let mask = inst.mask(active);
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut out = Vec::new();
    // (node, edge used to enter, next incidence position)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(top) = stack.last_mut() {
            let (u, via, pos) = *top;
            let inc = inst.incident(u);
            if pos < inc.len() {
                top.2 += 1;
                let i = inc[pos];
                if !mask[i] || i == via {
                    continue;
                }
                let v = inst.edge(i).other(u);
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, i, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[u]);
                    if low[u] > disc[parent] {
                        out.push(via);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Connectivity of `G[E \ removed]` over all nodes.
pub fn is_connected_without(inst: &Instance, removed: &[usize]) -> bool {
    let mut active = vec![true; inst.m()];
    for &i in removed {
        active[i] = false;
    }
    is_connected_over(inst, &active)
}

/// Connectivity over all nodes using the edges whose mask entry is set.
pub fn is_connected_over(inst: &Instance, active: &[bool]) -> bool {
    let n = inst.n();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for &i in inst.incident(u) {
            if !active[i] {
                continue;
            }
            let v = inst.edge(i).other(u);
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                stack.push(v);
            }
        }
    }
    reached == n
}
