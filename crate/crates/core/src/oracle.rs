//! Brute-force best response against a fixed consumer conjecture `G*`.
//!
//! The deviating firm picks masses `p_i` on a grid of posterior means to
//! maximize `Σ p_i D(x_i; G*)` subject to `Σ p_i = 1`, `Σ p_i x_i = μ`, and
//! `Σ_i p_i (x_k - x_i)⁺ ≤ ∫_0^{x_k} F` at every interior grid point. The
//! optimal dual is a convex piecewise-linear price function on the grid.

use crate::demand::{expected_payoff, DemandCurve};
use crate::dist::{mpc_check, Atom, PiecewisePolyDist, Side};
use crate::error::{config, Result};
use crate::poly::gauss;
use crate::simplex::{maximize, LinearProgram};
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const MIN_GRID: usize = 51;
pub const COST_QUANTILES: usize = 64;
/// Offset of the extra points placed on either side of an atom of `G*`.
const ATOM_SPLIT: f64 = 1e-7;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrProblem {
    pub grid: Vec<f64>,
    pub objective: Vec<f64>,
    pub mean_target: f64,
    /// `∫_0^{x_k} F` per grid point.
    pub caps: Vec<f64>,
    pub n: usize,
    /// `∫ D(·; G*) dG*`.
    pub baseline: f64,
    /// `Σ_cells max(0, ∫ (chord of D - D) dF)`: how far grid atoms can beat a
    /// revealed stretch of the prior through interpolation alone.
    pub chord_slack: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrSolution {
    pub value: f64,
    pub masses: Vec<f64>,
    /// `value - ∫ D(·; G*) dG*`.
    pub gap: f64,
    pub duality_gap: f64,
    pub dual_infeasibility: f64,
    pub primal_infeasibility: f64,
    pub pivots: usize,
    /// Grid points carrying mass, as `(x, p)`.
    pub support: Vec<(f64, f64)>,
}

pub fn build_problem(
    g_star: &PiecewisePolyDist,
    f: &PiecewisePolyDist,
    h: &PiecewisePolyDist,
    n: usize,
    grid_n: usize,
) -> Result<BrProblem> {
    if grid_n < MIN_GRID {
        return config(format!("grid too coarse: {grid_n} < {MIN_GRID}"));
    }
    let curve = DemandCurve::new(g_star, h, n)?;
    let (lo, hi) = f.support();
    let mut grid: Vec<f64> = (0..grid_n).map(|i| lo + (hi - lo) * i as f64 / (grid_n - 1) as f64).collect();
    grid.extend(g_star.knots().iter().copied());
    for a in g_star.atoms() {
        grid.extend([a.at - ATOM_SPLIT, a.at, a.at + ATOM_SPLIT]);
    }
    grid.extend([curve.r_lo(), curve.r_hi()]);
    for j in 0..COST_QUANTILES {
        let c = h.quantile((j as f64 + 0.5) / COST_QUANTILES as f64);
        if c > 0.0 {
            grid.push(g_star.reservation_value(c, 1e-12)?);
        }
    }
    grid.retain(|&x| x >= lo && x <= hi);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|b, a| (*b - *a).abs() <= 1e-12);

    let objective: Vec<f64> = grid.iter().map(|&x| curve.value(x)).collect();
    let caps = grid.iter().map(|&x| f.int_cdf(x)).collect();
    let chord_slack = chord_slack(&grid, f, &curve);
    Ok(BrProblem { grid, objective, mean_target: f.mean(), caps, n, baseline: curve.expected_payoff(g_star), chord_slack })
}

fn chord_slack(grid: &[f64], f: &PiecewisePolyDist, curve: &DemandCurve) -> f64 {
    let mut total = 0.0;
    for x in grid.windows(2) {
        let (p, q) = (x[0], x[1]);
        // Right limit at p and left limit at q keep cell-edge jumps out.
        let (dp, dq) = (curve.value(p + 1e-13 * (q - p)), curve.value_left(q));
        let chord = |t: f64| dp + (dq - dp) * (t - p) / (q - p);
        let cell = gauss(&|t: f64| (chord(t) - curve.value(t)) * f.density(t, Side::Right), p, q);
        total += cell.max(0.0);
    }
    total
}

/// Interior grid points carry the contraction constraints; at the ends they
/// are implied by the two equalities.
fn constraint_rows(p: &BrProblem) -> Vec<usize> {
    (1..p.grid.len() - 1).collect()
}

pub fn to_linear_program(p: &BrProblem) -> LinearProgram {
    let m = p.grid.len();
    let rows = constraint_rows(p);
    let a_ub = rows.iter().map(|&k| p.grid.iter().map(|&x| (p.grid[k] - x).max(0.0)).collect()).collect();
    let b_ub = rows.iter().map(|&k| p.caps[k].max(0.0)).collect();
    LinearProgram {
        c: p.objective.clone(),
        a_ub,
        b_ub,
        a_eq: vec![vec![1.0; m], p.grid.clone()],
        b_eq: vec![1.0, p.mean_target],
    }
}

pub fn solve_br(p: &BrProblem) -> Result<BrSolution> {
    let lp = to_linear_program(p);
    let s = maximize(&lp)?;
    let support = p.grid.iter().zip(&s.x).filter(|(_, &m)| m > 1e-12).map(|(&x, &m)| (x, m)).collect();
    Ok(BrSolution {
        value: s.value,
        gap: s.value - p.baseline,
        duality_gap: s.duality_gap(),
        dual_infeasibility: s.dual_infeasibility,
        primal_infeasibility: s.primal_infeasibility,
        pivots: s.pivots,
        masses: s.x,
        support,
    })
}

/// `max(0, LP value - 1/n - chord slack)`.
pub fn equilibrium_gap(
    g_star: &PiecewisePolyDist,
    f: &PiecewisePolyDist,
    h: &PiecewisePolyDist,
    n: usize,
    grid_n: usize,
) -> Result<f64> {
    let (ok, viol) = mpc_check(g_star, f, 1e-9);
    if !ok {
        return config(format!("conjecture is not a contraction of the prior (violation {viol:e})"));
    }
    let p = build_problem(g_star, f, h, n, grid_n)?;
    let s = solve_br(&p)?;
    Ok((s.value - 1.0 / n as f64 - p.chord_slack).max(0.0))
}

/// The LP optimum as an atomic distribution on the prior's support.
pub fn deviation_dist(p: &BrProblem, s: &BrSolution) -> Result<PiecewisePolyDist> {
    let total: f64 = s.support.iter().map(|&(_, m)| m).sum();
    let atoms = s.support.iter().map(|&(x, m)| Atom { at: x, mass: m / total }).collect();
    PiecewisePolyDist::new(p.grid[0], p.grid[p.grid.len() - 1], vec![], atoms)
}

/// Payoff of the LP optimum re-evaluated through the analytic demand curve.
pub fn deviation_payoff(
    g_star: &PiecewisePolyDist,
    h: &PiecewisePolyDist,
    n: usize,
    dev: &PiecewisePolyDist,
) -> Result<f64> {
    expected_payoff(dev, g_star, n, h)
}

/// Sparse triplets, one entry per line: `row col value`. Row 0 is the
/// objective, rows `1..` the inequalities, then the two equalities; column
/// `m` holds the right-hand side.
pub fn dump_lp(p: &BrProblem, mut w: impl Write) -> std::io::Result<()> {
    let lp = to_linear_program(p);
    let m = lp.c.len();
    writeln!(w, "# rows {} cols {} (le {}, eq {})", 1 + lp.a_ub.len() + lp.a_eq.len(), m + 1, lp.a_ub.len(), lp.a_eq.len())?;
    for (j, &c) in lp.c.iter().enumerate() {
        if c != 0.0 {
            writeln!(w, "0 {j} {c:e}")?;
        }
    }
    let all = lp.a_ub.iter().zip(&lp.b_ub).chain(lp.a_eq.iter().zip(&lp.b_eq));
    for (i, (row, &b)) in all.enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                writeln!(w, "{} {j} {v:e}", i + 1)?;
            }
        }
        writeln!(w, "{} {m} {b:e}", i + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censor::upper_censorship;

    fn unif() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 1.0).unwrap()
    }

    fn costs() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 0.18).unwrap()
    }

    #[test]
    fn caps_at_the_ends() {
        let g = upper_censorship(&unif(), 0.4).unwrap();
        let p = build_problem(&g, &unif(), &costs(), 2, 101).unwrap();
        assert_eq!(p.caps[0], 0.0);
        assert!((p.caps.last().unwrap() - 0.5).abs() < 1e-15);
        assert!(p.caps.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = upper_censorship(&unif(), 0.4).unwrap();
        assert!(build_problem(&g, &unif(), &costs(), 2, 50).is_err());
    }

    #[test]
    fn equilibrium_and_non_equilibrium_at_two_firms() {
        let f = unif();
        let h = costs();
        let g = upper_censorship(&f, 0.4).unwrap();
        let p = build_problem(&g, &f, &h, 2, 201).unwrap();
        let s = solve_br(&p).unwrap();
        assert!((s.value - 0.5).abs() < 1e-6, "{}", s.value);
        assert!(s.duality_gap < 1e-8);
        let g = upper_censorship(&f, 0.45).unwrap();
        assert!(equilibrium_gap(&g, &f, &h, 2, 201).unwrap() > 1e-3);
    }

    #[test]
    fn dump_has_one_line_per_entry() {
        let g = upper_censorship(&unif(), 0.0).unwrap();
        let p = build_problem(&g, &unif(), &costs(), 3, 51).unwrap();
        let mut buf = Vec::new();
        dump_lp(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# rows"));
        assert!(text.lines().skip(1).all(|l| l.split(' ').count() == 3));
    }
}
