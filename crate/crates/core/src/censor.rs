//! Upper censorship `U_a`, its certificate `φ_a`, the finite-n and limit
//! equilibrium checks, and the solver for the maximal threshold `a^M`.

use crate::cost::{average_slope, concavity_tail_start, CostShapeReport, Reading, TheoremCase};
use crate::demand::{jump_size, DemandCurve};
use crate::dist::{Atom, PiecewisePolyDist, Segment, Side};
use crate::error::{config, Result};
use crate::market::{check_costs, check_prior};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ROOT_TOL: f64 = 1e-13;
/// Points on `[0, a]` for the convexity scan and on `[a, 1]` for the margin.
pub const PHI_GRID: usize = 2049;
const INEQ_TOL: f64 = 1e-9;

/// `c_F(a)`.
pub fn cost_of_threshold(f: &PiecewisePolyDist, a: f64) -> f64 {
    f.incremental_benefit(a)
}

/// `c_F^{-1}(c)`, i.e. the reservation value of `c` under full disclosure.
pub fn threshold_of_cost(f: &PiecewisePolyDist, c: f64) -> Result<f64> {
    f.reservation_value(c, ROOT_TOL)
}

/// `ā = c_F^{-1}(c̄)`.
pub fn a_bar(f: &PiecewisePolyDist, h: &PiecewisePolyDist) -> Result<f64> {
    threshold_of_cost(f, h.max_support())
}

/// `U_a`: `F` below `a`, the rest pooled into an atom at `k_a = E[v | v >= a]`.
pub fn upper_censorship(f: &PiecewisePolyDist, a: f64) -> Result<PiecewisePolyDist> {
    let (lo, hi) = f.support();
    if a <= lo {
        return PiecewisePolyDist::point_mass(f.mean(), lo, hi);
    }
    if a >= hi {
        return Ok(f.clone());
    }
    let k = f.truncated_mean_above(a)?;
    let segs: Vec<Segment> = f
        .segments()
        .iter()
        .filter(|s| s.lo < a)
        .map(|s| Segment { lo: s.lo, hi: s.hi.min(a), coef: s.coef.clone() })
        .collect();
    let mut atoms: Vec<Atom> = f.atoms().iter().filter(|t| t.at < a).copied().collect();
    atoms.push(Atom { at: k, mass: 1.0 - f.cdf_left(a) });
    PiecewisePolyDist::new(lo, hi, segs, atoms)
}

/// `U_a` with its demand curve and the secant that defines `φ_a` above `a`.
#[derive(Clone, Debug)]
pub struct Censorship {
    pub a: f64,
    pub k_a: f64,
    pub dist: PiecewisePolyDist,
    pub curve: DemandCurve,
    d_a: f64,
    slope: f64,
}

impl Censorship {
    pub fn new(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return config(format!("threshold {a} outside [0, 1]"));
        }
        let dist = upper_censorship(f, a)?;
        let curve = DemandCurve::new(&dist, h, n)?;
        let (k_a, d_a, slope) = if a > 0.0 && a < 1.0 {
            let k = f.truncated_mean_above(a)?;
            let da = curve.value(a);
            (k, da, (curve.value(k) - da) / (k - a))
        } else {
            (if a >= 1.0 { 1.0 } else { f.mean() }, 0.0, 0.0)
        };
        Ok(Censorship { a, k_a, dist, curve, d_a, slope })
    }

    /// Secant slope of `φ_a` on `[a, 1]`.
    pub fn secant_slope(&self) -> f64 {
        self.slope
    }

    /// `φ_a(x)`: `D` on `[0, a]`, the secant through `a` and `k_a` above.
    /// For `a = 0` the certificate is the constant `1/n`; for `a = 1` it is `D`.
    pub fn phi(&self, x: f64) -> f64 {
        if self.a <= 0.0 {
            return 1.0 / self.curve.n() as f64;
        }
        if self.a >= 1.0 || x <= self.a {
            return self.curve.value(x);
        }
        self.d_a + self.slope * (x - self.a)
    }

    pub fn demand(&self, x: f64) -> f64 {
        self.curve.value(x)
    }
}

/// Net gain per unit of deviating mass from a partial-purchase signal aimed
/// at cost `c`: `J_F(a) (c / c_F(a) - H(c))`.
pub fn deviation_net_gain(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64, c: f64, n: usize) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let cf = cost_of_threshold(f, a);
    jump_size(f, a, n) * (c / cf - h.cdf(c))
}

/// Exact counterpart of [`deviation_net_gain`] for any `a`:
/// `D(r(c); U_a) - φ_a(r(c))`.
pub fn partial_purchase_gain(cen: &Censorship, c: f64) -> Result<f64> {
    let r = cen.dist.reservation_value(c, ROOT_TOL)?;
    if r <= cen.a {
        return Ok(0.0);
    }
    Ok(cen.demand(r) - cen.phi(r))
}

/// Finite partial-purchase deviation from `U_a`: the prior mass on
/// `[a - δ, a)` and just enough of the atom at `k_a` are pooled into one atom
/// at `r(c)` under `U_a`. The result is still a contraction of `F`.
pub fn partial_purchase_deviation(f: &PiecewisePolyDist, a: f64, c: f64, delta: f64) -> Result<PiecewisePolyDist> {
    let (lo, hi) = f.support();
    if !(a > lo && a < hi && delta > 0.0 && a - delta >= lo) {
        return config(format!("need {lo} <= a - δ < a < {hi}"));
    }
    let ua = upper_censorship(f, a)?;
    let k = f.truncated_mean_above(a)?;
    let x = ua.reservation_value(c, ROOT_TOL)?;
    let b = a - delta;
    let p1 = f.cdf_left(a) - f.cdf(b);
    let m1 = (f.partial_moment(a) - f.partial_moment(b)) / p1;
    if !(x > m1 && x < k) {
        return config(format!("r(c) = {x} must lie strictly between {m1} and {k}"));
    }
    let p2 = p1 * (x - m1) / (k - x);
    let top = 1.0 - f.cdf_left(a);
    if p2 > top {
        return config("not enough pooled mass for this deviation");
    }
    let segs: Vec<Segment> = f
        .segments()
        .iter()
        .filter(|s| s.lo < b)
        .map(|s| Segment { lo: s.lo, hi: s.hi.min(b), coef: s.coef.clone() })
        .collect();
    let mut atoms: Vec<Atom> = f.atoms().iter().filter(|t| t.at <= b).copied().collect();
    atoms.push(Atom { at: x, mass: p1 + p2 });
    atoms.push(Atom { at: k, mass: top - p2 });
    PiecewisePolyDist::new(lo, hi, segs, atoms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equilibrium,
    Fails,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub phi_convex_on_0a: bool,
    pub kink_increasing: bool,
    pub phi_dominates: bool,
    pub cost_condition: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensorshipReport {
    pub a: f64,
    pub n: usize,
    pub k_a: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub verdict: Verdict,
    pub checks: Checks,
    /// `min_x φ_a(x) - D(x; U_a)`.
    pub margin: f64,
    /// Right minus left slope of `φ_a` at `a`.
    pub kink_slack: f64,
    /// Largest drop in slope found by the convexity scan (0 when convex).
    pub convexity_defect: f64,
    /// Maximal intervals where `φ_a = D` above `a`.
    pub binding_signals: Vec<[f64; 2]>,
}

impl CensorshipReport {
    pub fn passes(&self) -> bool {
        self.verdict == Verdict::Equilibrium
    }
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn with_breaks(mut xs: Vec<f64>, breaks: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    xs.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

/// Slope-monotonicity scan of `D` on `[lo, hi]` plus one-sided derivative
/// comparisons at the breakpoints. Returns the largest slope drop relative to
/// the largest slope.
fn convexity_defect(curve: &DemandCurve, lo: f64, hi: f64, points: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let breaks = curve.breakpoints();
    let xs = with_breaks(uniform_grid(lo, hi, points), &breaks, lo, hi);
    let ys: Vec<f64> = xs.iter().map(|&x| curve.value(x)).collect();
    let slopes: Vec<f64> = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
    let scale = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(1e-300);
    let mut worst = 0.0f64;
    for w in slopes.windows(2) {
        worst = worst.max((w[0] - w[1]) / scale);
    }
    for &b in breaks.iter().filter(|&&b| b > lo && b < hi) {
        let l = curve.slope(b, Side::Left);
        let r = curve.slope(b, Side::Right);
        worst = worst.max((l - r) / scale);
    }
    worst
}

/// Kink slack `R - L` at `a`, with the `S = h` tie resolved structurally.
///
/// `R - L = J (1-F) (S - h) - (n-1) F^{n-2} f H` where `S`, `h`, `H` are taken at
/// `c_F(a)` (with `H = 1`, `h = 0` once `c_F(a) >= c̄`). When `S` and `h` agree
/// to tolerance the first term is exactly zero.
fn kink_slack(cen: &Censorship, f: &PiecewisePolyDist, h: &PiecewisePolyDist, n: usize) -> f64 {
    let a = cen.a;
    let cf = cost_of_threshold(f, a);
    let big_f = f.cdf(a);
    let dens = f.density(a, Side::Left);
    let big_h = h.cdf(cf);
    let hc = h.density(cf, Side::Right);
    let s = if cf > 0.0 { big_h / cf } else { hc };
    let j = jump_size(f, a, n);
    let mut diff = s - hc;
    if diff.abs() <= INEQ_TOL * s.abs().max(1.0) {
        diff = 0.0;
    }
    let grow = (n - 1) as f64 * big_f.powi(n as i32 - 2) * dens * big_h;
    j * (1.0 - big_f) * diff - grow
}

/// Minimum of `φ_a - D` over `[a, 1]`, with golden-section polish around the
/// best grid point, and the intervals where the gap is within tolerance.
fn margin_scan(cen: &Censorship, points: usize) -> (f64, Vec<[f64; 2]>) {
    let a = cen.a;
    let breaks = cen.curve.breakpoints();
    let xs = with_breaks(uniform_grid(a, 1.0, points), &breaks, a, 1.0);
    let gap = |x: f64| cen.phi(x) - cen.demand(x);
    let vals: Vec<f64> = xs.iter().map(|&x| gap(x)).collect();
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = xs[best_i.saturating_sub(1)];
    let hi = xs[(best_i + 1).min(xs.len() - 1)];
    best = best.min(golden_min(&gap, lo, hi));
    let scale = cen.phi(1.0).abs().max(1.0);
    let tol = INEQ_TOL * scale;
    let mut binding: Vec<[f64; 2]> = Vec::new();
    let mut open: Option<f64> = None;
    for (i, &v) in vals.iter().enumerate() {
        if v <= tol {
            open.get_or_insert(xs[i]);
        } else if let Some(s) = open.take() {
            binding.push([s, xs[i - 1]]);
        }
    }
    if let Some(s) = open {
        binding.push([s, *xs.last().unwrap()]);
    }
    (best, binding)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if b - a < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(a)).min(f(b))
}

/// Limit conditions on `H` alone that characterise `U_a` for large `n`.
pub fn cost_condition(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64) -> Result<bool> {
    if a <= 0.0 {
        return Ok(true);
    }
    if a >= 1.0 {
        return Ok(false);
    }
    let cb = h.max_support();
    let cf = cost_of_threshold(f, a);
    let abar = a_bar(f, h)?;
    let grid = slope_grid(h, cb.min(cf));
    let smin = grid.iter().map(|&c| average_slope(h, c)).fold(f64::INFINITY, f64::min);
    if a <= abar {
        let need = 1.0 / cf;
        return Ok(smin >= need - INEQ_TOL * need);
    }
    let s = average_slope(h, cf);
    let tol = INEQ_TOL * s.max(1.0);
    let hc = h.density(cf, Side::Right);
    let c_cav = concavity_tail_start(h);
    Ok(smin >= s - tol && s - hc > tol && cf >= c_cav - 1e-12)
}

/// Scan points for `S` on `[0, top]`: every knot of `H` plus a dense grid.
fn slope_grid(h: &PiecewisePolyDist, top: f64) -> Vec<f64> {
    let mut g = uniform_grid(0.0, top, 8193);
    g.extend(h.knots().iter().copied().filter(|&k| k <= top));
    g
}

/// Finite-n verification of `U_a` plus the limit cost condition.
pub fn verify_uce(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64, n: usize) -> Result<CensorshipReport> {
    verify_uce_with(f, h, a, n, PHI_GRID)
}

pub fn verify_uce_with(
    f: &PiecewisePolyDist,
    h: &PiecewisePolyDist,
    a: f64,
    n: usize,
    points: usize,
) -> Result<CensorshipReport> {
    check_prior(f)?;
    check_costs(h, f.mean())?;
    if n < 2 {
        return config("need at least 2 firms");
    }
    let cen = Censorship::new(f, h, a, n)?;
    let cost_ok = cost_condition(f, h, a)?;
    let (r_lo, r_hi) = (cen.curve.r_lo(), cen.curve.r_hi());
    if a <= 0.0 {
        // Constant certificate 1/n: it dominates D everywhere and touches it on [μ, 1].
        let xs = uniform_grid(0.0, 1.0, points);
        let margin = xs.iter().map(|&x| cen.phi(x) - cen.demand(x)).fold(f64::INFINITY, f64::min);
        let binding = vec![[f.mean(), 1.0]];
        return Ok(CensorshipReport {
            a,
            n,
            k_a: cen.k_a,
            r_lo,
            r_hi,
            verdict: if margin >= -INEQ_TOL { Verdict::Equilibrium } else { Verdict::Fails },
            checks: Checks { phi_convex_on_0a: true, kink_increasing: true, phi_dominates: margin >= -INEQ_TOL, cost_condition: cost_ok },
            margin,
            kink_slack: 0.0,
            convexity_defect: 0.0,
            binding_signals: binding,
        });
    }
    let top = a.min(1.0);
    let defect = convexity_defect(&cen.curve, 0.0, top, points);
    let convex = defect <= INEQ_TOL;
    if a >= 1.0 {
        return Ok(CensorshipReport {
            a,
            n,
            k_a: 1.0,
            r_lo,
            r_hi,
            verdict: if convex { Verdict::Equilibrium } else { Verdict::Fails },
            checks: Checks { phi_convex_on_0a: convex, kink_increasing: true, phi_dominates: true, cost_condition: cost_ok },
            margin: 0.0,
            kink_slack: 0.0,
            convexity_defect: defect,
            binding_signals: vec![[0.0, 1.0]],
        });
    }
    let slack = kink_slack(&cen, f, h, n);
    let slope_scale = cen.secant_slope().abs().max(1e-300);
    let kink_ok = slack >= -INEQ_TOL * slope_scale && !(slack < 0.0 && slack_is_structural(f, h, a));
    let (margin, binding) = margin_scan(&cen, points);
    let dominates = margin >= -INEQ_TOL;
    let pass = convex && kink_ok && dominates;
    Ok(CensorshipReport {
        a,
        n,
        k_a: cen.k_a,
        r_lo,
        r_hi,
        verdict: if pass { Verdict::Equilibrium } else { Verdict::Fails },
        checks: Checks { phi_convex_on_0a: convex, kink_increasing: kink_ok, phi_dominates: dominates, cost_condition: cost_ok },
        margin,
        kink_slack: slack,
        convexity_defect: defect,
        binding_signals: binding,
    })
}

/// A negative kink slack is decisive (not rounding) when `S(c_F(a)) = h(c_F(a)+)`
/// above `ā`: only the strictly positive finite-n term remains.
fn slack_is_structural(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64) -> bool {
    let cf = cost_of_threshold(f, a);
    if cf >= h.max_support() {
        return false;
    }
    let s = average_slope(h, cf);
    let hc = h.density(cf, Side::Right);
    s - hc <= INEQ_TOL * s.abs().max(1.0)
}

/// Smallest `n` in `ns` at which the finite-n checks pass.
pub fn smallest_passing_n(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64, ns: &[usize]) -> Result<Option<usize>> {
    for &n in ns {
        if verify_uce(f, h, a, n)?.passes() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltThreshold {
    pub reading: Reading,
    pub a_max: f64,
    pub case: TheoremCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AMax {
    #[serde(rename = "aM")]
    pub a_max: f64,
    pub case: TheoremCase,
    pub attained: bool,
    /// Thresholds under the weaker readings of `m(H)` where they differ.
    pub alternatives: Vec<AltThreshold>,
    pub kink_sensitive: bool,
    pub cost_shape: CostShapeReport,
}

/// `1 - ε`: reported when the threshold formula lands on `c_F^{-1}(0) = 1`.
pub const A_MAX_SENTINEL: f64 = 1.0 - f64::EPSILON;

fn threshold_for(
    f: &PiecewisePolyDist,
    case: TheoremCase,
    s_loc: f64,
    c_loc: f64,
    c_sol: Option<f64>,
    c_cav: f64,
) -> Result<(f64, bool)> {
    let target = match case {
        TheoremCase::A => return Ok((0.0, true)),
        TheoremCase::B => 1.0 / s_loc,
        // With no crossing, S falls right after c_loc and the crossing
        // collapses onto c_loc itself.
        TheoremCase::C => c_cav.max(c_sol.unwrap_or(c_loc)),
        TheoremCase::D => c_cav,
    };
    if target <= 1e-14 {
        return Ok((A_MAX_SENTINEL, false));
    }
    // No threshold clears a cost at or above `c_F(0) = μ`.
    if target >= f.mean() {
        return Ok((0.0, true));
    }
    Ok((threshold_of_cost(f, target)?, true))
}

/// Maximal equilibrium threshold from the shape of `H`.
pub fn solve_a_max(f: &PiecewisePolyDist, h: &PiecewisePolyDist) -> Result<AMax> {
    check_prior(f)?;
    check_costs(h, f.mean())?;
    let rep = CostShapeReport::analyze(h, f.mean())?;
    let (a_max, attained) = threshold_for(f, rep.theorem_case, rep.s_loc, rep.c_loc, rep.c_sol, rep.c_cav)?;
    let mut alternatives = Vec::new();
    for (reading, alt) in &rep.alternatives {
        let (a, _) = threshold_for(f, alt.theorem_case, alt.s_loc, alt.c_loc, alt.c_sol, rep.c_cav)?;
        alternatives.push(AltThreshold { reading: *reading, a_max: a, case: alt.theorem_case });
    }
    let kink_sensitive = alternatives.iter().any(|t| (t.a_max - a_max).abs() > 1e-9);
    Ok(AMax { a_max, case: rep.theorem_case, attained, alternatives, kink_sensitive, cost_shape: rep })
}

/// `verify_uce` over a grid of thresholds.
pub fn equilibrium_set(f: &PiecewisePolyDist, h: &PiecewisePolyDist, n: usize, grid: &[f64]) -> Result<Vec<(f64, bool)>> {
    grid.par_iter().map(|&a| verify_uce(f, h, a, n).map(|r| (a, r.passes()))).collect()
}

/// True when no failing threshold lies below a passing one.
pub fn is_downward_closed(verdicts: &[(f64, bool)]) -> bool {
    let mut v = verdicts.to_vec();
    v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let first_fail = v.iter().position(|(_, p)| !p).unwrap_or(v.len());
    v[first_fail..].iter().all(|(_, p)| !p)
}

/// `(x, D(x; U_a), φ_a(x))` rows.
pub fn phi_rows(cen: &Censorship, points: usize) -> Vec<[f64; 3]> {
    uniform_grid(0.0, 1.0, points).into_iter().map(|x| [x, cen.demand(x), cen.phi(x)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unif() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 1.0).unwrap()
    }

    fn costs() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 0.18).unwrap()
    }

    #[test]
    fn censorship_examples() {
        let f = unif();
        let u0 = upper_censorship(&f, 0.0).unwrap();
        assert_eq!(u0.atoms(), &[Atom { at: 0.5, mass: 1.0 }]);
        let u1 = upper_censorship(&f, 1.0).unwrap();
        assert_eq!(u1.segments(), f.segments());
        let u = upper_censorship(&f, 0.4).unwrap();
        assert_eq!(u.segments()[0].hi, 0.4);
        assert!((u.atoms()[0].at - 0.7).abs() < 1e-15 && (u.atoms()[0].mass - 0.6).abs() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        let cen = Censorship::new(&unif(), &costs(), 0.4, 2).unwrap();
        assert!((cen.phi(0.55) - 0.55).abs() < 1e-12);
        assert!((cen.phi(0.2) - 0.2).abs() < 1e-12);
        assert!((cen.phi(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn net_gain_examples() {
        let (f, h) = (unif(), costs());
        for &c in &[0.02, 0.09, 0.17] {
            assert!(deviation_net_gain(&f, &h, 0.4, c, 2).abs() < 1e-12);
        }
        let g = deviation_net_gain(&f, &h, 0.3, 0.09, 2);
        assert!((g - 0.35 * (0.09 / 0.245 - 0.5)).abs() < 1e-12 && g < 0.0);
        assert_eq!(deviation_net_gain(&f, &h, 0.3, 0.0, 2), 0.0);
    }

    #[test]
    fn verify_examples() {
        let (f, h) = (unif(), costs());
        let r = verify_uce(&f, &h, 0.3, 50).unwrap();
        assert!(r.passes() && r.checks.cost_condition);
        let r = verify_uce(&f, &h, 0.45, 50).unwrap();
        assert!(!r.passes() && !r.checks.cost_condition);
        let r = verify_uce(&f, &h, 0.4, 50).unwrap();
        assert!(r.passes());
        assert!(r.margin.abs() < 1e-9);
        assert!(!r.binding_signals.is_empty());
    }

    #[test]
    fn solve_uniform() {
        let s = solve_a_max(&unif(), &costs()).unwrap();
        assert!((s.a_max - 0.4).abs() < 1e-9);
        assert_eq!(s.case, TheoremCase::B);
        assert!(s.attained);
    }

    #[test]
    fn kink_slack_matches_slope_difference() {
        let (f, h) = (unif(), costs());
        for &(a, n) in &[(0.2, 5), (0.4, 5), (0.45, 2), (0.6, 3)] {
            let cen = Censorship::new(&f, &h, a, n).unwrap();
            let direct = cen.secant_slope() - cen.curve.slope(a, Side::Left);
            let slack = kink_slack(&cen, &f, &h, n);
            assert!((slack - direct).abs() < 1e-9, "a={a} n={n}: {slack} vs {direct}");
        }
    }

    #[test]
    fn tiny_kink_above_threshold_still_fails() {
        let (f, h) = (unif(), costs());
        for n in [50, 80] {
            assert!(!verify_uce(&f, &h, 0.5, n).unwrap().passes());
        }
    }
}
