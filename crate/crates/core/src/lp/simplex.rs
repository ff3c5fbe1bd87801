//! Bounded-variable dual simplex with a dense basis inverse.
//!
//! Problems have the form `min c'x` subject to `lo_r <= a_r x <= hi_r` and
//! `lo_j <= x_j <= hi_j` with finite structural bounds. Every row gets a
//! logical variable `s_r = a_r x`, so the equality system is `A x - s = 0`
//! and the all-logical basis is always available and dual feasible. Rows may
//! be appended between solves; the new logical enters the basis, which keeps
//! the current basis dual feasible and lets the next solve warm-start.

use std::time::Instant;

use log::trace;

/// Primal feasibility tolerance.
pub const PRIMAL_TOL: f64 = 1e-9;
/// Dual feasibility tolerance.
pub const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const RECOMPUTE_EVERY: usize = 50;
const DEGENERATE_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    /// Deadline or iteration limit hit; the current point may be infeasible.
    Interrupted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
}

#[derive(Debug, Clone)]
pub struct DualSimplex {
    n: usize,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    x: Vec<f64>,
    d: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    iterations: usize,
    pub max_iterations: usize,
}

impl DualSimplex {
    /// Creates a problem with structural columns only. Bounds must be finite.
    pub fn new(cost: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let n = cost.len();
        assert!(lo.len() == n && hi.len() == n);
        assert!(
            lo.iter()
                .zip(&hi)
                .all(|(l, h)| l.is_finite() && h.is_finite() && l <= h),
            "structural bounds must be finite and ordered"
        );
        let mut state = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        for j in 0..n {
            if cost[j] >= 0.0 {
                state.push(VarState::Lower);
                x.push(lo[j]);
            } else {
                state.push(VarState::Upper);
                x.push(hi[j]);
            }
        }
        Self {
            n,
            d: cost.clone(),
            cost,
            lo,
            hi,
            cols: vec![Vec::new(); n],
            rows: Vec::new(),
            x,
            state,
            basis: Vec::new(),
            binv: Vec::new(),
            iterations: 0,
            max_iterations: usize::MAX,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Appends `row_lo <= sum coef * x_j <= row_hi` and returns its index.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], row_lo: f64, row_hi: f64) -> usize {
        assert!(row_lo <= row_hi);
        let r = self.rows.len();
        let mut merged: Vec<(usize, f64)> = coeffs.to_vec();
        merged.sort_by_key(|&(j, _)| j);
        merged.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
        merged.retain(|&(_, c)| c != 0.0);
        for &(j, c) in &merged {
            assert!(j < self.n, "column {j} out of range");
            self.cols[j].push((r, c));
        }
        let activity: f64 = merged.iter().map(|&(j, c)| c * self.x[j]).sum();

        // extend the inverse: new row is (a_B B^-1, -1)
        let mut new_row = vec![0.0; r + 1];
        for &(j, c) in &merged {
            if let VarState::Basic(pos) = self.state[j] {
                for (k, v) in self.binv[pos].iter().enumerate() {
                    new_row[k] += c * v;
                }
            }
        }
        new_row[r] = -1.0;
        for row in &mut self.binv {
            row.push(0.0);
        }
        self.binv.push(new_row);

        self.rows.push(merged);
        self.lo.push(row_lo);
        self.hi.push(row_hi);
        self.x.push(activity);
        self.d.push(0.0);
        self.state.push(VarState::Basic(r));
        self.basis.push(self.n + r);
        r
    }

    /// Structural values.
    pub fn primal(&self) -> &[f64] {
        &self.x[..self.n]
    }

    /// Row activities `a_r x`.
    pub fn row_activity(&self) -> &[f64] {
        &self.x[self.n..]
    }

    pub fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    /// Reduced costs of the structural columns.
    pub fn reduced_costs(&self) -> &[f64] {
        &self.d[..self.n]
    }

    /// Row duals; positive for rows at their lower bound in a minimisation.
    pub fn duals(&self) -> &[f64] {
        &self.d[self.n..]
    }

    fn column(&self, j: usize) -> ColumnIter<'_> {
        if j < self.n {
            ColumnIter::Structural(self.cols[j].iter())
        } else {
            ColumnIter::Logical(Some(j - self.n))
        }
    }

    fn cost_of(&self, j: usize) -> f64 {
        if j < self.n {
            self.cost[j]
        } else {
            0.0
        }
    }

    /// Largest bound violation over basic variables.
    pub fn primal_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| {
                (self.lo[j] - self.x[j])
                    .max(self.x[j] - self.hi[j])
                    .max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Recomputes basic values and reduced costs from the current inverse.
    fn recompute(&mut self) {
        let r = self.rows.len();
        let mut v = vec![0.0; r];
        for j in 0..self.n + r {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            for (row, c) in self.column(j) {
                v[row] += c * xj;
            }
        }
        for pos in 0..r {
            let val: f64 = -self.binv[pos]
                .iter()
                .zip(&v)
                .map(|(a, b)| a * b)
                .sum::<f64>();
            self.x[self.basis[pos]] = val;
        }
        let mut y = vec![0.0; r];
        for pos in 0..r {
            let cb = self.cost_of(self.basis[pos]);
            if cb != 0.0 {
                for (k, val) in self.binv[pos].iter().enumerate() {
                    y[k] += cb * val;
                }
            }
        }
        for j in 0..self.n + r {
            if matches!(self.state[j], VarState::Basic(_)) {
                self.d[j] = 0.0;
                continue;
            }
            let ya: f64 = self.column(j).map(|(row, c)| y[row] * c).sum();
            self.d[j] = self.cost_of(j) - ya;
        }
    }

    /// Rebuilds the basis inverse. With rows ordered so that those whose
    /// logical is nonbasic come first, `B = [[A11, 0], [A21, -I]]` and
    /// `B^-1 = [[A11^-1, 0], [A21 A11^-1, -I]]`, so only the square block
    /// `A11` of basic structural columns is inverted, by Gauss-Jordan.
    /// Falls back to the all-logical basis if `A11` is numerically singular.
    fn refactor(&mut self) {
        let r = self.rows.len();
        let mut logical_basic = vec![false; r];
        let mut structural = Vec::new();
        for (pos, &j) in self.basis.iter().enumerate() {
            if j >= self.n {
                logical_basic[j - self.n] = true;
            } else {
                structural.push((pos, j));
            }
        }
        let tight: Vec<usize> = (0..r).filter(|&i| !logical_basic[i]).collect();
        let k = structural.len();
        if tight.len() != k {
            self.reset_basis();
            self.recompute();
            return;
        }
        let mut local = vec![usize::MAX; r];
        for (t, &i) in tight.iter().enumerate() {
            local[i] = t;
        }
        // [A11 | I], A11[t][s] = coefficient of structural s in tight row t
        let mut a = vec![vec![0.0; 2 * k]; k];
        for (s, &(_, j)) in structural.iter().enumerate() {
            for &(row, c) in &self.cols[j] {
                if local[row] != usize::MAX {
                    a[local[row]][s] = c;
                }
            }
        }
        for (t, row) in a.iter_mut().enumerate() {
            row[k + t] = 1.0;
        }
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            if a[piv][col].abs() < 1e-11 {
                self.reset_basis();
                self.recompute();
                return;
            }
            a.swap(col, piv);
            let pv = a[col][col];
            for v in a[col].iter_mut() {
                *v /= pv;
            }
            let pivot_row = a[col].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == col {
                    continue;
                }
                let f = row[col];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                        *v -= f * p;
                    }
                }
            }
        }
        // row s of A11^-1 sits in a[s][k..], indexed by tight-row position
        let mut slot = vec![usize::MAX; self.n];
        for (s, &(_, j)) in structural.iter().enumerate() {
            slot[j] = s;
        }
        let mut binv = vec![vec![0.0; r]; r];
        for (s, &(pos, _)) in structural.iter().enumerate() {
            for (t, &i) in tight.iter().enumerate() {
                binv[pos][i] = a[s][k + t];
            }
        }
        for (pos, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                continue;
            }
            let i = j - self.n;
            let out = &mut binv[pos];
            for &(col, c) in &self.rows[i] {
                let s = slot[col];
                if s != usize::MAX {
                    for (t, &ti) in tight.iter().enumerate() {
                        out[ti] += c * a[s][k + t];
                    }
                }
            }
            out[i] = -1.0;
        }
        self.binv = binv;
        self.recompute();
    }

    fn reset_basis(&mut self) {
        let r = self.rows.len();
        for j in 0..self.n {
            self.state[j] = if self.cost[j] >= 0.0 {
                VarState::Lower
            } else {
                VarState::Upper
            };
            self.x[j] = if self.cost[j] >= 0.0 {
                self.lo[j]
            } else {
                self.hi[j]
            };
        }
        self.basis = (0..r).map(|i| self.n + i).collect();
        for i in 0..r {
            self.state[self.n + i] = VarState::Basic(i);
        }
        self.binv = (0..r)
            .map(|i| {
                let mut row = vec![0.0; r];
                row[i] = -1.0;
                row
            })
            .collect();
    }

    /// Runs the dual simplex until optimality, infeasibility, the iteration
    /// limit or `deadline`.
    pub fn solve(&mut self, deadline: Option<Instant>) -> LpStatus {
        self.recompute();
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut since_recompute = 0usize;
        let mut refactored_at_end = false;
        loop {
            if self.iterations >= self.max_iterations {
                return LpStatus::Interrupted;
            }
            if self.iterations.is_multiple_of(16) && deadline.is_some_and(|d| Instant::now() >= d) {
                return LpStatus::Interrupted;
            }
            if since_recompute >= RECOMPUTE_EVERY {
                since_recompute = 0;
                if self.iterations.is_multiple_of(RECOMPUTE_EVERY * 4) {
                    self.refactor();
                } else {
                    self.recompute();
                }
            }

            // leaving row
            let mut leave: Option<(usize, f64)> = None;
            for (pos, &j) in self.basis.iter().enumerate() {
                let viol = (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]);
                if viol > PRIMAL_TOL {
                    let better = match leave {
                        None => true,
                        Some((p, v)) => {
                            if bland {
                                j < self.basis[p]
                            } else {
                                viol > v
                            }
                        }
                    };
                    if better {
                        leave = Some((pos, viol));
                    }
                }
            }
            let Some((p, _)) = leave else {
                if !refactored_at_end {
                    // confirm with fresh values before declaring optimality
                    refactored_at_end = true;
                    self.refactor_or_recompute();
                    continue;
                }
                return LpStatus::Optimal;
            };
            refactored_at_end = false;
            let leaving = self.basis[p];
            let to_lower = self.x[leaving] < self.lo[leaving];
            let target = if to_lower {
                self.lo[leaving]
            } else {
                self.hi[leaving]
            };

            // pivot row alphas for nonbasic variables
            let rho = self.binv[p].clone();
            let total = self.n + self.rows.len();
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..total {
                let st = self.state[j];
                if matches!(st, VarState::Basic(_)) || self.lo[j] == self.hi[j] {
                    continue;
                }
                let alpha: f64 = self.column(j).map(|(row, c)| rho[row] * c).sum();
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                // sign of the required alpha for j to limit the dual step
                let eligible = match (to_lower, st) {
                    (true, VarState::Lower) => alpha < 0.0,
                    (true, VarState::Upper) => alpha > 0.0,
                    (false, VarState::Lower) => alpha > 0.0,
                    (false, VarState::Upper) => alpha < 0.0,
                    _ => false,
                };
                if eligible {
                    let ratio = (self.d[j].abs()) / alpha.abs();
                    cands.push((j, alpha, ratio));
                }
            }
            if cands.is_empty() {
                if since_recompute > 0 {
                    // retry once on fresh numbers before declaring infeasibility
                    self.refactor_or_recompute();
                    since_recompute = 0;
                    continue;
                }
                return LpStatus::Infeasible;
            }
            // Harris-style two-pass choice: bound the step with slack, then take
            // the largest pivot among ratios below the bound.
            let (q, _, theta_dual) = if bland {
                let min_ratio = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
                *cands
                    .iter()
                    .filter(|c| c.2 <= min_ratio + 1e-12)
                    .min_by_key(|c| c.0)
                    .unwrap()
            } else {
                let bound = cands
                    .iter()
                    .map(|&(j, a, _)| (self.d[j].abs() + DUAL_TOL) / a.abs())
                    .fold(f64::INFINITY, f64::min);
                *cands
                    .iter()
                    .filter(|c| c.2 <= bound)
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                    .unwrap()
            };

            // entering column in basis coordinates
            let mut col = vec![0.0; self.rows.len()];
            for (row, c) in self.column(q) {
                for (pos, v) in col.iter_mut().enumerate() {
                    *v += self.binv[pos][row] * c;
                }
            }
            let piv = col[p];
            if piv.abs() < PIVOT_TOL {
                // inconsistent with alpha_q: numerical trouble
                self.refactor();
                since_recompute = 0;
                continue;
            }

            // primal step
            let step = (self.x[leaving] - target) / piv;
            for (pos, &j) in self.basis.iter().enumerate() {
                self.x[j] -= step * col[pos];
            }
            self.x[q] += step;
            self.x[leaving] = target;

            // dual step: d_j -= sigma * theta * alpha_j with sigma = -1 when
            // the leaving variable goes to its lower bound
            let signed = if to_lower { -theta_dual } else { theta_dual };
            if theta_dual != 0.0 {
                for j in 0..total {
                    if matches!(self.state[j], VarState::Basic(_)) || j == q {
                        continue;
                    }
                    let alpha: f64 = self.column(j).map(|(row, c)| rho[row] * c).sum();
                    if alpha != 0.0 {
                        self.d[j] -= signed * alpha;
                    }
                }
            }
            self.d[q] = 0.0;
            self.d[leaving] = -signed;

            // basis inverse update
            let pivot_row: Vec<f64> = self.binv[p].iter().map(|v| v / piv).collect();
            for (pos, row) in self.binv.iter_mut().enumerate() {
                if pos == p {
                    continue;
                }
                let f = col[pos];
                if f != 0.0 {
                    for (v, pr) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pr;
                    }
                }
            }
            self.binv[p] = pivot_row;
            self.basis[p] = q;
            self.state[q] = VarState::Basic(p);
            self.state[leaving] = if to_lower {
                VarState::Lower
            } else {
                VarState::Upper
            };

            self.iterations += 1;
            since_recompute += 1;
            if theta_dual <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_LIMIT && !bland {
                    trace!("switching to Bland's rule after {degenerate} degenerate pivots");
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
        }
    }

    fn refactor_or_recompute(&mut self) {
        self.refactor();
    }
}

enum ColumnIter<'a> {
    Structural(std::slice::Iter<'a, (usize, f64)>),
    Logical(Option<usize>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Structural(it) => it.next().copied(),
            ColumnIter::Logical(slot) => slot.take().map(|r| (r, -1.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent optimality certificate: primal feasibility, dual sign
    /// conditions and zero duality gap, all from raw problem data.
    fn assert_kkt(
        lp: &DualSimplex,
        cost: &[f64],
        lo: &[f64],
        hi: &[f64],
        rows: &[(Vec<(usize, f64)>, f64, f64)],
    ) {
        let x = lp.primal();
        let y = lp.duals();
        let tol = 1e-7;
        for j in 0..cost.len() {
            assert!(x[j] >= lo[j] - tol && x[j] <= hi[j] + tol);
        }
        for (r, (a, l, h)) in rows.iter().enumerate() {
            let act: f64 = a.iter().map(|&(j, c)| c * x[j]).sum();
            assert!(
                act >= l - tol && act <= h + tol,
                "row {r}: {l} <= {act} <= {h}"
            );
            if y[r] > tol {
                assert!(
                    (act - l).abs() < 1e-6,
                    "row {r} dual {} but not at lower",
                    y[r]
                );
            }
            if y[r] < -tol {
                assert!(
                    (act - h).abs() < 1e-6,
                    "row {r} dual {} but not at upper",
                    y[r]
                );
            }
        }
        for j in 0..cost.len() {
            let mut d = cost[j];
            for (r, (a, _, _)) in rows.iter().enumerate() {
                for &(k, c) in a {
                    if k == j {
                        d -= y[r] * c;
                    }
                }
            }
            if d > tol {
                assert!((x[j] - lo[j]).abs() < 1e-6);
            }
            if d < -tol {
                assert!((x[j] - hi[j]).abs() < 1e-6);
            }
            assert!((d - lp.reduced_costs()[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn tiny_lp() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, 0 <= x,y <= 10
        let mut lp = DualSimplex::new(vec![-1.0, -1.0], vec![0.0; 2], vec![10.0; 2]);
        lp.add_row(&[(0, 1.0), (1, 2.0)], f64::NEG_INFINITY, 4.0);
        lp.add_row(&[(0, 3.0), (1, 1.0)], f64::NEG_INFINITY, 6.0);
        assert_eq!(lp.solve(None), LpStatus::Optimal);
        assert!((lp.objective() + 2.8).abs() < 1e-9);
        assert!((lp.primal()[0] - 1.6).abs() < 1e-9);
        assert!((lp.primal()[1] - 1.2).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        let mut lp = DualSimplex::new(vec![1.0, 1.0], vec![0.0; 2], vec![1.0; 2]);
        lp.add_row(&[(0, 1.0), (1, 1.0)], 3.0, f64::INFINITY);
        assert_eq!(lp.solve(None), LpStatus::Infeasible);
    }

    #[test]
    fn warm_start_after_adding_rows() {
        let mut lp = DualSimplex::new(vec![1.0, 2.0, 3.0], vec![0.0; 3], vec![1.0; 3]);
        lp.add_row(&[(0, 1.0), (1, 1.0), (2, 1.0)], 2.0, 2.0);
        assert_eq!(lp.solve(None), LpStatus::Optimal);
        assert!((lp.objective() - 3.0).abs() < 1e-9);
        lp.add_row(&[(0, 1.0), (1, 1.0)], f64::NEG_INFINITY, 1.0);
        assert_eq!(lp.solve(None), LpStatus::Optimal);
        assert!((lp.objective() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn random_lps_satisfy_kkt() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut solved = 0;
        for _ in 0..300 {
            let n = rng.gen_range(1..8);
            let r = rng.gen_range(1..8);
            let cost: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
            let lo = vec![0.0; n];
            let hi: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=3) as f64).collect();
            let mut rows = Vec::new();
            let mut lp = DualSimplex::new(cost.clone(), lo.clone(), hi.clone());
            for _ in 0..r {
                let mut a: Vec<(usize, f64)> = Vec::new();
                for j in 0..n {
                    if rng.gen_bool(0.6) {
                        a.push((j, rng.gen_range(-3..=3) as f64));
                    }
                }
                let (l, h) = match rng.gen_range(0..3) {
                    0 => (f64::NEG_INFINITY, rng.gen_range(0..6) as f64),
                    1 => (rng.gen_range(-2..3) as f64, f64::INFINITY),
                    _ => {
                        let v = rng.gen_range(-1..4) as f64;
                        (v, v)
                    }
                };
                lp.add_row(&a, l, h);
                rows.push((a, l, h));
                // occasionally solve in between to exercise warm starts
                if rng.gen_bool(0.3) {
                    lp.solve(None);
                }
            }
            match lp.solve(None) {
                LpStatus::Optimal => {
                    solved += 1;
                    assert_kkt(&lp, &cost, &lo, &hi, &rows);
                }
                LpStatus::Infeasible => {}
                LpStatus::Interrupted => panic!("no deadline given"),
            }
        }
        assert!(solved > 100);
    }
}
