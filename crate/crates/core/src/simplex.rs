//! Dense two-phase tableau simplex for `max c·x` subject to `A_ub x ≤ b_ub`,
//! `A_eq x = b_eq`, `x ≥ 0`, with `b_ub ≥ 0`.
//!
//! Dantzig pricing with a switch to Bland's rule after a run of degenerate
//! pivots. Row updates are spread over the rayon pool for large tableaus;
//! each row is updated independently so the result does not depend on the
//! thread count.

use crate::error::{Result, UceError};
use rayon::prelude::*;

const PIVOT_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-12;
const PRICE_EPS: f64 = 1e-11;
const PAR_MIN_CELLS: usize = 1 << 16;
const REFACTOR_EVERY: usize = 500;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub duals_ub: Vec<f64>,
    pub duals_eq: Vec<f64>,
    /// `b·y`.
    pub dual_value: f64,
    /// `max_j (c_j - A_j·y)⁺`, zero at an exact optimum.
    pub dual_infeasibility: f64,
    /// `max` violation of the primal constraints by `x`.
    pub primal_infeasibility: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols` body.
    t: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B B⁻¹ A_j`.
    d: Vec<f64>,
    value: f64,
    barred: Vec<bool>,
    pivots: usize,
    /// Initial body and right-hand side, for refactoring.
    orig: Vec<f64>,
    orig_rhs: Vec<f64>,
    costs: Vec<f64>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.at(r, q);
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= p;
            }
        }
        self.rhs[r] /= p;
        let prow: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        let prhs = self.rhs[r];
        let update = |(i, (row, rhs)): (usize, (&mut [f64], &mut f64))| {
            if i == r {
                return;
            }
            let f = row[q];
            if f == 0.0 {
                return;
            }
            for (v, &pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[q] = 0.0;
            *rhs -= f * prhs;
            if rhs.abs() < 1e-15 {
                *rhs = 0.0;
            }
        };
        if self.rows * cols >= PAR_MIN_CELLS {
            self.t.par_chunks_mut(cols).zip(self.rhs.par_iter_mut()).enumerate().for_each(update);
        } else {
            self.t.chunks_mut(cols).zip(self.rhs.iter_mut()).enumerate().for_each(update);
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, &pv) in self.d.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.d[q] = 0.0;
            self.value += f * prhs;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let scale = self.d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = PRICE_EPS * scale;
        let mut best: Option<(usize, f64)> = None;
        for (j, &dj) in self.d.iter().enumerate() {
            if self.barred[j] || dj <= tol {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.map_or(true, |(_, b)| dj > b) {
                best = Some((j, dj));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Harris two-pass ratio test: the bound is relaxed by `FEAS_EPS`, then
    /// the largest pivot element under it wins.
    fn leaving(&self, q: usize, bland: bool) -> Option<usize> {
        let col_max = (0..self.rows).fold(0.0f64, |m, i| m.max(self.at(i, q).abs()));
        let eps = PIVOT_EPS * col_max.max(1.0);
        let mut bound = f64::INFINITY;
        for i in 0..self.rows {
            let a = self.at(i, q);
            if a > eps {
                bound = bound.min((self.rhs[i].max(0.0) + FEAS_EPS) / a);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, q);
            if a <= eps || self.rhs[i].max(0.0) / a > bound {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, _)) if bland => self.basis[i] < self.basis[bi],
                Some((_, ba)) => a > ba,
            };
            if better {
                best = Some((i, a));
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, max_pivots: usize) -> Result<()> {
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            let q = match self.entering(bland) {
                Some(q) => q,
                None => return Ok(()),
            };
            let r = match self.leaving(q, bland) {
                Some(r) => r,
                None => return Err(UceError::Numeric("linear program is unbounded".into())),
            };
            if self.rhs[r].abs() <= 1e-14 {
                degenerate += 1;
                if degenerate > 50 + self.rows / 4 {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.pivot(r, q);
            if self.pivots % REFACTOR_EVERY == 0 && !self.refactor() {
                return Err(UceError::Numeric("basis matrix became singular".into()));
            }
            if self.pivots > max_pivots {
                return Err(UceError::Numeric(format!("simplex exceeded {max_pivots} pivots")));
            }
        }
    }

    /// Rebuilds body, right-hand side and costs from the original data for
    /// the current basis. Returns false when the basis matrix is singular.
    fn refactor(&mut self) -> bool {
        let (m, cols) = (self.rows, self.cols);
        let (orig, orig_rhs) = (&self.orig, &self.orig_rhs);
        let mut b = vec![0.0; m * m];
        for r in 0..m {
            for (i, &j) in self.basis.iter().enumerate() {
                b[r * m + i] = orig[r * cols + j];
            }
        }
        let inv = match invert(b, m) {
            Some(inv) => inv,
            None => return false,
        };
        let body: Vec<f64> = inv
            .par_chunks(m)
            .flat_map_iter(|irow| {
                let mut out = vec![0.0; cols];
                for (r, &w) in irow.iter().enumerate() {
                    if w != 0.0 {
                        for (o, &v) in out.iter_mut().zip(&orig[r * cols..(r + 1) * cols]) {
                            *o += w * v;
                        }
                    }
                }
                out
            })
            .collect();
        self.t = body;
        for (i, &j) in self.basis.iter().enumerate() {
            for k in 0..m {
                self.t[k * cols + j] = if k == i { 1.0 } else { 0.0 };
            }
        }
        self.rhs = inv.chunks(m).map(|irow| irow.iter().zip(orig_rhs).map(|(w, v)| w * v).sum()).collect();
        for v in &mut self.rhs {
            if *v < 0.0 && *v > -1e-9 {
                *v = 0.0;
            }
        }
        let c = std::mem::take(&mut self.costs);
        self.reset_costs(&c);
        self.costs = c;
        true
    }

    fn reset_costs(&mut self, c: &[f64]) {
        for j in 0..self.cols {
            let mut dj = c[j];
            for i in 0..self.rows {
                let v = self.at(i, j);
                if v != 0.0 {
                    dj -= c[self.basis[i]] * v;
                }
            }
            self.d[j] = dj;
        }
        self.value = (0..self.rows).map(|i| c[self.basis[i]] * self.rhs[i]).sum();
    }
}

/// Gauss-Jordan inverse with partial pivoting of a row-major `m × m` matrix.
fn invert(mut a: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i * m + k].abs().partial_cmp(&a[j * m + k].abs()).unwrap())?;
        if a[p * m + k].abs() < 1e-14 {
            return None;
        }
        if p != k {
            for j in 0..m {
                a.swap(p * m + j, k * m + j);
                inv.swap(p * m + j, k * m + j);
            }
        }
        let d = a[k * m + k];
        for j in 0..m {
            a[k * m + j] /= d;
            inv[k * m + j] /= d;
        }
        let (arow, irow) = (a[k * m..(k + 1) * m].to_vec(), inv[k * m..(k + 1) * m].to_vec());
        a.par_chunks_mut(m).zip(inv.par_chunks_mut(m)).enumerate().for_each(|(i, (ar, ir))| {
            if i == k {
                return;
            }
            let f = ar[k];
            if f == 0.0 {
                return;
            }
            for j in 0..m {
                ar[j] -= f * arow[j];
                ir[j] -= f * irow[j];
            }
        });
    }
    Some(inv)
}

pub fn maximize(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.c.len();
    let mu = lp.a_ub.len();
    let me = lp.a_eq.len();
    if lp.b_ub.len() != mu || lp.b_eq.len() != me {
        return Err(UceError::Config("constraint and bound counts differ".into()));
    }
    if lp.a_ub.iter().chain(&lp.a_eq).any(|r| r.len() != n) {
        return Err(UceError::Config("constraint row width differs from the objective".into()));
    }
    if lp.b_ub.iter().any(|&b| b < 0.0) {
        return Err(UceError::Config("inequality bounds must be non-negative".into()));
    }
    let rows = mu + me;
    let cols = n + mu + me;
    let mut t = vec![0.0; rows * cols];
    let mut rhs = vec![0.0; rows];
    let mut basis = vec![0; rows];
    let mut flip = vec![1.0; me];
    for (i, row) in lp.a_ub.iter().enumerate() {
        t[i * cols..i * cols + n].copy_from_slice(row);
        t[i * cols + n + i] = 1.0;
        rhs[i] = lp.b_ub[i];
        basis[i] = n + i;
    }
    for (k, row) in lp.a_eq.iter().enumerate() {
        let i = mu + k;
        if lp.b_eq[k] < 0.0 {
            flip[k] = -1.0;
        }
        for j in 0..n {
            t[i * cols + j] = flip[k] * row[j];
        }
        t[i * cols + n + mu + k] = 1.0;
        rhs[i] = flip[k] * lp.b_eq[k];
        basis[i] = n + mu + k;
    }
    let mut tab = Tableau {
        rows,
        cols,
        t,
        rhs,
        basis,
        d: vec![0.0; cols],
        value: 0.0,
        barred: vec![false; cols],
        pivots: 0,
        orig: Vec::new(),
        orig_rhs: Vec::new(),
        costs: Vec::new(),
    };
    tab.orig = tab.t.clone();
    tab.orig_rhs = tab.rhs.clone();
    let max_pivots = 50 * (rows + cols);

    if me > 0 {
        let mut c1 = vec![0.0; cols];
        for c in &mut c1[n + mu..] {
            *c = -1.0;
        }
        tab.reset_costs(&c1);
        tab.costs = c1;
        tab.run(max_pivots)?;
        let infeas = -tab.value;
        let scale = lp.b_eq.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        if infeas > 1e-9 * scale {
            return Err(UceError::Numeric(format!("linear program is infeasible (phase one residual {infeas:e})")));
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..rows {
            if tab.basis[i] < n + mu {
                continue;
            }
            if let Some(q) = (0..n + mu).find(|&j| tab.at(i, j).abs() > 1e-9) {
                tab.pivot(i, q);
            }
        }
        for b in &mut tab.barred[n + mu..] {
            *b = true;
        }
    }
    let mut c2 = vec![0.0; cols];
    c2[..n].copy_from_slice(&lp.c);
    tab.reset_costs(&c2);
    tab.costs = c2;
    tab.run(max_pivots)?;
    for _ in 0..4 {
        if !tab.refactor() {
            return Err(UceError::Numeric("optimal basis is singular".into()));
        }
        if tab.rhs.iter().any(|&v| v < -1e-9) {
            return Err(UceError::Numeric("basis lost primal feasibility".into()));
        }
        if tab.entering(false).is_none() {
            break;
        }
        tab.run(max_pivots)?;
    }

    let mut x = vec![0.0; n];
    for i in 0..rows {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs[i].max(0.0);
        }
    }
    let duals_ub: Vec<f64> = (0..mu).map(|i| -tab.d[n + i]).collect();
    let duals_eq: Vec<f64> = (0..me).map(|k| -tab.d[n + mu + k] * flip[k]).collect();
    Ok(certify(lp, x, duals_ub, duals_eq, tab.pivots))
}

/// Objective values and residuals recomputed from the original data.
fn certify(lp: &LinearProgram, x: Vec<f64>, duals_ub: Vec<f64>, duals_eq: Vec<f64>, pivots: usize) -> LpSolution {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let value = dot(&lp.c, &x);
    let dual_value = dot(&lp.b_ub, &duals_ub) + dot(&lp.b_eq, &duals_eq);
    let mut primal: f64 = 0.0;
    for (row, &b) in lp.a_ub.iter().zip(&lp.b_ub) {
        primal = primal.max(dot(row, &x) - b);
    }
    for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        primal = primal.max((dot(row, &x) - b).abs());
    }
    let mut dual: f64 = duals_ub.iter().fold(0.0, |m, &y| m.max(-y));
    for j in 0..lp.c.len() {
        let mut aty = 0.0;
        for (row, &y) in lp.a_ub.iter().zip(&duals_ub) {
            aty += row[j] * y;
        }
        for (row, &y) in lp.a_eq.iter().zip(&duals_eq) {
            aty += row[j] * y;
        }
        dual = dual.max(lp.c[j] - aty);
    }
    LpSolution {
        x,
        value,
        duals_ub,
        duals_eq,
        dual_value,
        dual_infeasibility: dual,
        primal_infeasibility: primal,
        pivots,
    }
}
