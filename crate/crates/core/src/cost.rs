//! Shape statistics of the search-cost distribution `H`: the average slope
//! `S(c) = H(c)/c`, the concave tail start `c_cav`, the critical set `m(H)`,
//! `c_loc`, `c_sol` and the case label that selects the formula for `a^M`.
//!
//! Sign of `S'` on a piece is the sign of the polynomial `g(c) = c h(c) - H(c)`,
//! so critical points are polynomial roots rather than grid artefacts. A dense
//! scan is still used for the running minimum of `S`.

use crate::dist::{PiecewisePolyDist, Side};
use crate::error::{config, Result};
use crate::poly::{bisect, Poly};
use serde::{Deserialize, Serialize};

/// Points per density piece in the scan.
pub const SCAN_PER_PIECE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CritItem {
    Point { at: f64, kink: bool },
    Interval { lo: f64, hi: f64 },
}

impl CritItem {
    pub fn lo(&self) -> f64 {
        match *self {
            CritItem::Point { at, .. } => at,
            CritItem::Interval { lo, .. } => lo,
        }
    }
    pub fn hi(&self) -> f64 {
        match *self {
            CritItem::Point { at, .. } => at,
            CritItem::Interval { hi, .. } => hi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremCase {
    A,
    B,
    C,
    D,
}

impl TheoremCase {
    pub fn label(self) -> &'static str {
        match self {
            TheoremCase::A => "a",
            TheoremCase::B => "b",
            TheoremCase::C => "c",
            TheoremCase::D => "d",
        }
    }
}

/// `c_loc`, `c_sol` and the case label derived from one reading of `m(H)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CritStructure {
    pub m_set: Vec<CritItem>,
    pub c_loc: f64,
    pub s_loc: f64,
    pub c_sol: Option<f64>,
    pub theorem_case: TheoremCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostShapeReport {
    pub c_bar: f64,
    #[serde(rename = "cM")]
    pub c_m: f64,
    #[serde(rename = "hcM")]
    pub hc_m: f64,
    pub s_min: f64,
    pub c_cav: f64,
    pub m_set: Vec<CritItem>,
    pub c_loc: f64,
    pub s_loc: f64,
    pub c_sol: Option<f64>,
    pub assumption_diag: bool,
    pub theorem_case: TheoremCase,
    /// Weaker readings of `m(H)` whose case or thresholds disagree with the
    /// main one.
    pub alternatives: Vec<(Reading, CritStructure)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub c: f64,
    pub cdf: f64,
    pub density: f64,
    pub s: f64,
    pub ds: f64,
}

const INEQ_TOL: f64 = 1e-9;

fn check_costs(h: &PiecewisePolyDist) -> Result<()> {
    if h.has_atoms() {
        return config("cost analysis needs an atomless cost distribution");
    }
    if h.support().0 != 0.0 {
        return config("cost support must start at 0");
    }
    Ok(())
}

/// Upper end of the cost support.
pub fn c_bar(h: &PiecewisePolyDist) -> f64 {
    h.max_support()
}

/// `S(c) = H(c)/c`, with `S(0) = h(0)`.
pub fn average_slope(h: &PiecewisePolyDist, c: f64) -> f64 {
    if c <= 0.0 {
        h.density(0.0, Side::Right)
    } else {
        h.cdf(c) / c
    }
}

/// One-sided `S'(c) = (h(c) - S(c))/c`; at zero, `h'(0+)/2`.
pub fn average_slope_deriv(h: &PiecewisePolyDist, c: f64, side: Side) -> f64 {
    if c <= 0.0 {
        return 0.5 * h.density_deriv(0.0, Side::Right);
    }
    (h.density(c, side) - average_slope(h, c)) / c
}

struct PieceG {
    lo: f64,
    hi: f64,
    /// Sign-carrier of `S'`: `g/c^2` on the first piece, `g` elsewhere.
    q: Poly,
    dens: Poly,
    flat: bool,
}

fn g_pieces(h: &PiecewisePolyDist) -> Vec<PieceG> {
    let cb = c_bar(h);
    h.piece_polys()
        .filter(|(lo, _, _, _)| *lo < cb)
        .map(|(lo, hi, dens, cdf)| {
            let g = dens.times_t().sub(cdf);
            let scale = dens.norm().max(cdf.norm()).max(1.0);
            let q = if lo == 0.0 {
                Poly::new(g.c.iter().skip(2).copied().collect())
            } else {
                g
            };
            let flat = q.norm() <= 1e-12 * scale;
            PieceG { lo, hi: hi.min(cb), q, dens: dens.clone(), flat }
        })
        .collect()
}

/// `c_cav = inf{c : h' <= 0 on (c, c̄]}`, with `c̄` when the set is empty.
/// Upward density jumps count as increases.
pub fn concavity_tail_start(h: &PiecewisePolyDist) -> f64 {
    let cb = c_bar(h);
    let pieces: Vec<_> = h.piece_polys().filter(|(lo, _, _, _)| *lo < cb).collect();
    for (i, (lo, hi, dens, _)) in pieces.iter().enumerate().rev() {
        let hi = hi.min(cb);
        let d = dens.deriv();
        let eps = 1e-12 * dens.norm().max(1.0);
        let mut marks = vec![*lo];
        marks.extend(d.roots_in(*lo, hi, 0.0).into_iter().filter(|&r| r > *lo && r < hi));
        marks.push(hi);
        for w in marks.windows(2).rev() {
            if d.eval(0.5 * (w[0] + w[1])) > eps {
                return w[1];
            }
        }
        if i > 0 {
            let jump = dens.eval(*lo) - pieces[i - 1].2.eval(*lo);
            if jump > 1e-12 * dens.norm().max(1.0) {
                return *lo;
            }
        }
    }
    0.0
}

/// Dense scan of `S` over `[0, c̄]`.
pub fn scan(h: &PiecewisePolyDist, per_piece: usize) -> Vec<ScanRow> {
    let cb = c_bar(h);
    let mut rows = Vec::new();
    for p in g_pieces(h) {
        for k in 0..per_piece {
            let c = p.lo + (p.hi - p.lo) * k as f64 / per_piece as f64;
            rows.push(row(h, c));
        }
    }
    rows.push(row(h, cb));
    rows
}

fn row(h: &PiecewisePolyDist, c: f64) -> ScanRow {
    ScanRow {
        c,
        cdf: h.cdf(c),
        density: h.density(c, Side::Left).max(if c == 0.0 { h.density(0.0, Side::Right) } else { 0.0 }),
        s: average_slope(h, c),
        ds: average_slope_deriv(h, c, Side::Right),
    }
}

struct Scan {
    cs: Vec<f64>,
    prefix_min: Vec<f64>,
}

impl Scan {
    fn new(h: &PiecewisePolyDist) -> Self {
        let rows = scan(h, SCAN_PER_PIECE);
        let cs: Vec<f64> = rows.iter().map(|r| r.c).collect();
        let mut prefix_min = Vec::with_capacity(rows.len());
        let mut m = f64::INFINITY;
        for r in &rows {
            m = m.min(r.s);
            prefix_min.push(m);
        }
        Scan { cs, prefix_min }
    }

    /// Minimum of `S` over scan points strictly below `c`.
    fn min_below(&self, c: f64) -> f64 {
        let i = self.cs.partition_point(|&x| x < c);
        if i == 0 {
            f64::INFINITY
        } else {
            self.prefix_min[i - 1]
        }
    }
}

fn prefix_ok(h: &PiecewisePolyDist, scan: &Scan, c: f64) -> bool {
    let s = average_slope(h, c);
    s <= scan.min_below(c) + INEQ_TOL * s.abs().max(1.0)
}

/// Which points count as members of `m(H)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    /// Only points where `S` is differentiable with `S' = 0` (plateaus included).
    Smooth,
    /// Also one-sided minima at density jumps: `S'(b-) <= 0 <= S'(b+)`.
    Jumps,
    /// Also `c = 0` when `S` rises from it, `S'(0+) > 0`.
    OneSided,
}

/// Critical points of `S` under `reading` that are global minima of `S`
/// over `[0, c]`.
pub fn critical_points(h: &PiecewisePolyDist, reading: Reading) -> Vec<CritItem> {
    let cb = c_bar(h);
    let sc = Scan::new(h);
    let pieces = g_pieces(h);
    let mut items: Vec<CritItem> = Vec::new();
    // `S'(b) = (h(b) - S(b))/b`, so compare `h` against `S` on the scale of `S`.
    let level = |dens: f64, s: f64| {
        let d = dens - s;
        if d.abs() <= INEQ_TOL * s.abs().max(1.0) {
            0
        } else if d < 0.0 {
            -1
        } else {
            1
        }
    };

    let d0 = average_slope_deriv(h, 0.0, Side::Right);
    let s0 = average_slope(h, 0.0);
    if d0.abs() <= INEQ_TOL * s0.abs().max(1.0) {
        items.push(CritItem::Point { at: 0.0, kink: false });
    } else if reading == Reading::OneSided && d0 > 0.0 {
        items.push(CritItem::Point { at: 0.0, kink: true });
    }

    for (i, p) in pieces.iter().enumerate() {
        if p.flat {
            if prefix_ok(h, &sc, p.lo) {
                items.push(CritItem::Interval { lo: p.lo, hi: p.hi });
            }
            continue;
        }
        let ztol = 1e-13 * p.q.norm().max(1e-300);
        for r in p.q.roots_in(p.lo, p.hi, ztol) {
            if r > p.lo && r < p.hi && prefix_ok(h, &sc, r) {
                items.push(CritItem::Point { at: r, kink: false });
            }
        }
        let b = p.hi;
        let s = average_slope(h, b);
        let left = level(p.dens.eval(b), s);
        if b >= cb {
            if left == 0 && prefix_ok(h, &sc, b) {
                items.push(CritItem::Point { at: b, kink: false });
            }
            continue;
        }
        let right = match pieces.get(i + 1) {
            Some(n) => level(n.dens.eval(b), s),
            None => left,
        };
        let keep = match (left, right) {
            (0, 0) => true,
            _ => reading != Reading::Smooth && left <= 0 && right >= 0,
        };
        if keep && prefix_ok(h, &sc, b) {
            items.push(CritItem::Point { at: b, kink: (left, right) != (0, 0) });
        }
    }
    merge(items)
}

fn merge(mut items: Vec<CritItem>) -> Vec<CritItem> {
    items.sort_by(|a, b| a.lo().partial_cmp(&b.lo()).unwrap());
    let mut out: Vec<CritItem> = Vec::new();
    for it in items {
        if let Some(last) = out.last_mut() {
            if it.lo() <= last.hi() + 1e-12 {
                let lo = last.lo();
                let hi = last.hi().max(it.hi());
                *last = if hi > lo {
                    CritItem::Interval { lo, hi }
                } else {
                    match (*last, it) {
                        (CritItem::Point { kink: k1, .. }, CritItem::Point { kink: k2, .. }) => {
                            CritItem::Point { at: lo, kink: k1 && k2 }
                        }
                        _ => CritItem::Point { at: lo, kink: false },
                    }
                };
                continue;
            }
        }
        out.push(it);
    }
    out
}

/// `m(H)` as used by the solver: smooth critical points plus one-sided
/// minima at density jumps and at zero.
pub fn critical_min_set(h: &PiecewisePolyDist) -> Vec<CritItem> {
    critical_points(h, Reading::OneSided)
}

fn only_top(m: &[CritItem], cb: f64) -> bool {
    m.len() == 1 && m[0].lo() >= cb - 1e-12
}

fn loc_from_set(h: &PiecewisePolyDist, m: &[CritItem], c_cav: f64) -> f64 {
    let cb = c_bar(h);
    if m.is_empty() || only_top(m, cb) {
        return c_cav;
    }
    let smin = m.iter().map(|it| average_slope(h, it.lo())).fold(f64::INFINITY, f64::min);
    m.iter()
        .filter(|it| average_slope(h, it.lo()) <= smin + INEQ_TOL * smin.abs().max(1.0))
        .map(|it| it.hi())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `c_loc`: the largest minimiser of `S` over `m(H)`, or `c_cav` when `m(H)`
/// is empty or only `{c̄}`.
pub fn smallest_local_min(h: &PiecewisePolyDist) -> f64 {
    loc_from_set(h, &critical_min_set(h), concavity_tail_start(h))
}

fn sol_from(h: &PiecewisePolyDist, m: &[CritItem], c_loc: f64) -> Option<f64> {
    if m.is_empty() {
        return None;
    }
    let cb = c_bar(h);
    let target = average_slope(h, c_loc);
    let top = 1.0 / cb;
    if (target - top).abs() <= INEQ_TOL * top {
        return Some(cb);
    }
    if target < top || c_loc >= cb {
        return None;
    }
    let rows = scan(h, SCAN_PER_PIECE);
    let j = rows.iter().rposition(|r| r.c > c_loc && r.s >= target)?;
    let (a, b) = (rows[j].c, rows.get(j + 1).map(|r| r.c).unwrap_or(cb));
    Some(bisect(|c| target - average_slope(h, c), a, b, true))
}

/// `c_sol`: the solution of `S(c) = S(c_loc)` on `(c_loc, c̄]`; `c̄` when
/// `S(c_loc) = 1/c̄`; absent when `S(c_loc) < 1/c̄` or `m(H)` is empty.
pub fn crossing_solution(h: &PiecewisePolyDist) -> Option<f64> {
    let m = critical_min_set(h);
    let loc = loc_from_set(h, &m, concavity_tail_start(h));
    sol_from(h, &m, loc)
}

/// Assumption check: the global minimum of `S` is attained below `c̄`
/// (equivalently some `c < c̄` has `S(c) <= 1/c̄`). Returns the smallest
/// global minimiser and the density there (left limit, matching pieces of
/// the form `(u, v]`).
pub fn assumption_diag_check(h: &PiecewisePolyDist) -> (bool, f64, f64) {
    let cb = c_bar(h);
    let rows = scan(h, SCAN_PER_PIECE);
    let mut extra: Vec<f64> = critical_points(h, Reading::OneSided).iter().flat_map(|it| [it.lo(), it.hi()]).collect();
    extra.extend(rows.iter().map(|r| r.c));
    let smin = extra.iter().map(|&c| average_slope(h, c)).fold(f64::INFINITY, f64::min);
    let tol = INEQ_TOL * smin.abs().max(1.0);
    let c_m = extra
        .iter()
        .copied()
        .filter(|&c| average_slope(h, c) <= smin + tol)
        .fold(f64::INFINITY, f64::min);
    let holds = c_m < cb - 1e-12 && smin <= 1.0 / cb + tol;
    let hcm = if c_m == 0.0 { h.density(0.0, Side::Right) } else { h.density(c_m, Side::Left) };
    (holds, c_m, hcm)
}

fn structure(h: &PiecewisePolyDist, m: Vec<CritItem>, c_cav: f64, mu: f64) -> CritStructure {
    let cb = c_bar(h);
    let c_loc = loc_from_set(h, &m, c_cav);
    let s_loc = average_slope(h, c_loc);
    let empty = m.is_empty() || only_top(&m, cb);
    let c_sol = if empty { None } else { sol_from(h, &m, c_loc) };
    let tol = INEQ_TOL * s_loc.abs().max(1.0);
    let theorem_case = if empty {
        TheoremCase::D
    } else if s_loc <= 1.0 / mu + tol {
        TheoremCase::A
    } else if s_loc <= 1.0 / cb + tol {
        TheoremCase::B
    } else {
        TheoremCase::C
    };
    CritStructure { m_set: m, c_loc, s_loc, c_sol, theorem_case }
}

fn same_outcome(x: &CritStructure, y: &CritStructure) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    x.theorem_case == y.theorem_case
        && close(x.c_loc, y.c_loc)
        && match (x.c_sol, y.c_sol) {
            (Some(a), Some(b)) => close(a, b),
            (None, None) => true,
            _ => false,
        }
}

impl CostShapeReport {
    /// `c_loc`, `c_sol` and the case under one reading of `m(H)`.
    pub fn structure_for(h: &PiecewisePolyDist, reading: Reading, c_cav: f64, mu: f64) -> CritStructure {
        structure(h, critical_points(h, reading), c_cav, mu)
    }

    /// Full shape analysis of `H` against a prior with mean `mu`.
    pub fn analyze(h: &PiecewisePolyDist, mu: f64) -> Result<Self> {
        check_costs(h)?;
        let cb = c_bar(h);
        if cb >= mu {
            return config(format!("search costs must stay below the prior mean (c̄ = {cb} >= μ = {mu})"));
        }
        let c_cav = concavity_tail_start(h);
        let main = Self::structure_for(h, Reading::OneSided, c_cav, mu);
        let (assumption_diag, c_m, hc_m) = assumption_diag_check(h);
        let s_min = average_slope(h, c_m);
        let alternatives = [Reading::Jumps, Reading::Smooth]
            .into_iter()
            .map(|r| (r, Self::structure_for(h, r, c_cav, mu)))
            .filter(|(_, alt)| !same_outcome(alt, &main))
            .collect();
        Ok(CostShapeReport {
            c_bar: cb,
            c_m,
            hc_m,
            s_min,
            c_cav,
            m_set: main.m_set,
            c_loc: main.c_loc,
            s_loc: main.s_loc,
            c_sol: main.c_sol,
            assumption_diag,
            theorem_case: main.theorem_case,
            alternatives,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_a() -> PiecewisePolyDist {
        PiecewisePolyDist::step_density(&[0.0, 0.1, 0.3, 0.4], &[4.0, 0.8, 4.4]).unwrap()
    }

    #[test]
    fn slope_examples() {
        let u = PiecewisePolyDist::uniform(0.0, 0.18).unwrap();
        assert!((average_slope(&u, 0.09) - 1.0 / 0.18).abs() < 1e-9);
        assert!((average_slope(&u, 0.0) - 1.0 / 0.18).abs() < 1e-12);
        let q = PiecewisePolyDist::from_pieces(0.0, &[(0.3, vec![0.0, 2.0 / 0.09])], vec![]).unwrap();
        assert!((average_slope(&q, 0.15) - 0.15 / 0.09).abs() < 1e-9);
    }

    #[test]
    fn c_cav_examples() {
        let u = PiecewisePolyDist::uniform(0.0, 0.18).unwrap();
        assert_eq!(concavity_tail_start(&u), 0.0);
        // 15 u (1 - u) with u = c / 0.4
        let s = PiecewisePolyDist::from_pieces(0.0, &[(0.4, vec![0.0, 15.0 / 0.4, -15.0 / 0.16])], vec![]).unwrap();
        assert!((concavity_tail_start(&s) - 0.2).abs() < 1e-12);
        let inc = PiecewisePolyDist::from_pieces(0.0, &[(0.3, vec![0.0, 2.0 / 0.09])], vec![]).unwrap();
        assert_eq!(concavity_tail_start(&inc), 0.3);
    }

    #[test]
    fn uniform_has_full_plateau() {
        let u = PiecewisePolyDist::uniform(0.0, 0.18).unwrap();
        let m = critical_min_set(&u);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].lo(), m[0].hi()), (0.0, 0.18));
        assert_eq!(smallest_local_min(&u), 0.18);
        assert_eq!(crossing_solution(&u), Some(0.18));
    }

    #[test]
    fn step_case_a_structure() {
        let h = step_a();
        let r = CostShapeReport::analyze(&h, 0.5).unwrap();
        assert!((r.c_loc - 0.3).abs() < 1e-12);
        assert!((r.s_loc - 0.56 / 0.3).abs() < 1e-12);
        assert_eq!(r.c_sol, None);
        assert_eq!(r.theorem_case, TheoremCase::A);
        assert!(r.assumption_diag);
        assert!((r.c_m - 0.3).abs() < 1e-12 && (r.hc_m - 0.8).abs() < 1e-12);
    }

    fn bimodal() -> PiecewisePolyDist {
        PiecewisePolyDist::step_density(&[0.0, 0.1, 0.15, 0.17, 0.25], &[8.0, 0.4, 7.0, 0.5]).unwrap()
    }

    #[test]
    fn step_set_has_plateau_and_kink() {
        let m = critical_min_set(&step_a());
        assert_eq!(m.len(), 2);
        assert_eq!((m[0].lo(), m[0].hi()), (0.0, 0.1));
        assert!(matches!(m[1], CritItem::Point { at, kink: true } if (at - 0.3).abs() < 1e-12));
        assert!((smallest_local_min(&step_a()) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn convex_costs_under_each_reading() {
        let h = PiecewisePolyDist::from_pieces(0.0, &[(0.3, vec![0.0, 2.0 / 0.09])], vec![]).unwrap();
        assert!(critical_points(&h, Reading::Smooth).is_empty());
        assert!(critical_points(&h, Reading::Jumps).is_empty());
        let jumps = CostShapeReport::structure_for(&h, Reading::Jumps, 0.3, 0.5);
        assert_eq!(jumps.c_loc, 0.3);
        assert_eq!(jumps.theorem_case, TheoremCase::D);
        let r = CostShapeReport::analyze(&h, 0.5).unwrap();
        assert_eq!(r.m_set, vec![CritItem::Point { at: 0.0, kink: true }]);
        assert_eq!((r.c_loc, r.s_loc), (0.0, 0.0));
        assert_eq!(r.theorem_case, TheoremCase::A);
        assert_eq!(r.alternatives.len(), 2);
    }

    #[test]
    fn bimodal_crossing() {
        let h = bimodal();
        let r = CostShapeReport::analyze(&h, 0.5).unwrap();
        assert!((r.c_loc - 0.15).abs() < 1e-12);
        assert!((r.s_loc - 0.82 / 0.15).abs() < 1e-12);
        let want = 0.875 / (0.82 / 0.15 - 0.5);
        assert!((r.c_sol.unwrap() - want).abs() < 1e-10);
        assert!((want - 0.1762).abs() < 1e-4);
        assert_eq!(r.theorem_case, TheoremCase::C);
        assert!((r.c_cav - 0.15).abs() < 1e-12);
        assert!(!r.assumption_diag);
        assert!((r.c_m - 0.25).abs() < 1e-12);
    }

    #[test]
    fn decreasing_slope_has_empty_set() {
        // S falls monotonically; the last upward density jump sits at 0.15.
        let h = PiecewisePolyDist::from_pieces(
            0.0,
            &[(0.1, vec![10.0, -40.0]), (0.15, vec![0.5]), (0.2, vec![3.5])],
            vec![],
        )
        .unwrap();
        let r = CostShapeReport::analyze(&h, 0.5).unwrap();
        assert!(r.m_set.is_empty());
        assert_eq!(r.theorem_case, TheoremCase::D);
        assert!((r.c_loc - 0.15).abs() < 1e-12);
    }

    #[test]
    fn slope_derivative_matches_difference() {
        let h = bimodal();
        for &c in &[0.05, 0.12, 0.16, 0.2, 0.24] {
            let fd = (average_slope(&h, c + 1e-7) - average_slope(&h, c - 1e-7)) / 2e-7;
            let an = average_slope_deriv(&h, c, Side::Right);
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{c}: {fd} vs {an}");
        }
        assert_eq!(average_slope(&h, 0.25), 4.0);
    }

    #[test]
    fn rejects_costs_above_mean() {
        let h = PiecewisePolyDist::uniform(0.0, 0.6).unwrap();
        assert!(CostShapeReport::analyze(&h, 0.5).is_err());
    }
}
