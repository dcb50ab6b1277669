//! Convex price-function certificate for a general candidate `G`.
//!
//! `G` must split `[0, 1]` into revealed stretches (density equal to `f`) and
//! pooling gaps that each hold exactly one atom. The candidate `φ` equals
//! `D(·; G)` on revealed stretches and is affine across each gap, touching `D`
//! at the atom. `G` is a best response iff `φ` is convex, dominates `D`, and
//! integrates equally against `F` and `G`.

use crate::demand::DemandCurve;
use crate::dist::{PiecewisePolyDist, Side};
use crate::error::{Result, UceError};
use crate::poly::{integrate_pieces, Poly};
use serde::{Deserialize, Serialize};

const INEQ_TOL: f64 = 1e-9;
const GRID: usize = 4097;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bridge {
    pub lo: f64,
    pub atom: f64,
    pub hi: f64,
    pub slope: f64,
    pub level: f64,
}

impl Bridge {
    fn at(&self, x: f64) -> f64 {
        self.level + self.slope * (x - self.atom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceFunctionReport {
    pub passes: bool,
    pub convex: bool,
    pub dominates: bool,
    pub integrals_match: bool,
    /// `min φ - D`.
    pub margin: f64,
    /// `∫ φ dF - ∫ φ dG`.
    pub integral_gap: f64,
    pub convexity_defect: f64,
    pub bridges: Vec<Bridge>,
    /// Stretches inside pooling gaps where `φ = D` on the scan grid.
    pub touch_intervals: Vec<[f64; 2]>,
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(UceError::Unsupported(msg.into()))
}

/// Pooling gaps of `G` relative to `F` as `(lo, atom, hi)`.
fn pooling_gaps(g: &PiecewisePolyDist, f: &PiecewisePolyDist) -> Result<Vec<(f64, f64, f64)>> {
    let (lo, hi) = f.support();
    let mut revealed: Vec<(f64, f64)> = Vec::new();
    for s in g.segments() {
        let p = Poly::new(s.coef.clone());
        if p.is_zero() {
            continue;
        }
        for t in [0.25, 0.5, 0.75] {
            let x = s.lo + t * (s.hi - s.lo);
            let (dg, df) = (p.eval(x), f.density(x, Side::Right));
            if (dg - df).abs() > 1e-9 * df.abs().max(1.0) {
                return unsupported(format!("density of G differs from the prior on [{}, {}]", s.lo, s.hi));
            }
        }
        match revealed.last_mut() {
            Some(last) if (s.lo - last.1).abs() <= 1e-15 => last.1 = s.hi,
            _ => revealed.push((s.lo, s.hi)),
        }
    }
    let mut gaps = Vec::new();
    let mut at = lo;
    for &(a, b) in revealed.iter().chain(std::iter::once(&(hi, hi))) {
        if a > at {
            gaps.push((at, a));
        }
        at = at.max(b);
    }
    let mut out = Vec::new();
    for (p, q) in gaps {
        let inside: Vec<_> = g.atoms().iter().filter(|t| t.at >= p && t.at <= q).collect();
        match inside.len() {
            0 if f.cdf(q) - f.cdf(p) <= 1e-12 => {}
            0 => return unsupported(format!("gap [{p}, {q}] carries prior mass but no atom")),
            1 => out.push((p, inside[0].at, q)),
            _ => return unsupported(format!("gap [{p}, {q}] holds more than one atom")),
        }
    }
    let placed: usize = out.len();
    if placed != g.atoms().len() {
        return unsupported("atom inside a revealed stretch");
    }
    Ok(out)
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn verify_price_function(
    g: &PiecewisePolyDist,
    f: &PiecewisePolyDist,
    h: &PiecewisePolyDist,
    n: usize,
) -> Result<PriceFunctionReport> {
    let (lo, hi) = f.support();
    let gaps = pooling_gaps(g, f)?;
    let curve = DemandCurve::new(g, h, n)?;
    let mut breaks = curve.breakpoints();
    for &(p, k, q) in &gaps {
        breaks.extend([p, k, q]);
    }
    breaks.extend(f.knots().iter().copied());
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut xs = uniform_grid(lo, hi, GRID);
    xs.extend(breaks.iter().copied().filter(|&b| b >= lo && b <= hi));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Grid points within rounding of a breakpoint straddle it and produce
    // spurious slopes; keep the breakpoint.
    xs.dedup_by(|b, a| {
        if (*b - *a).abs() > 1e-12 {
            return false;
        }
        if breaks.contains(b) {
            *a = *b;
        }
        true
    });

    let mut bridges = Vec::new();
    for &(p, k, q) in &gaps {
        let dk = curve.value(k);
        let slope = if p > lo && k > p {
            (dk - curve.value(p)) / (k - p)
        } else if q < hi && q > k {
            (curve.value(q) - dk) / (q - k)
        } else {
            // Nothing revealed on either side: any supporting slope at the
            // atom will do, take the smallest one.
            let up = xs
                .iter()
                .filter(|&&x| x > k)
                .map(|&x| (curve.value(x) - dk) / (x - k))
                .fold(f64::NEG_INFINITY, f64::max);
            if up.is_finite() {
                up
            } else {
                0.0
            }
        };
        bridges.push(Bridge { lo: p, atom: k, hi: q, slope, level: dk });
    }
    let phi = |x: f64| match bridges.iter().find(|b| x >= b.lo && x <= b.hi) {
        Some(b) => b.at(x),
        None => curve.value(x),
    };

    let ys: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    let slopes: Vec<f64> = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
    let scale = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(1e-300);
    let mut defect = 0.0f64;
    for w in slopes.windows(2) {
        defect = defect.max((w[0] - w[1]) / scale);
    }
    let convex = defect <= INEQ_TOL;

    let mut margin = f64::INFINITY;
    let mut touch: Vec<[f64; 2]> = Vec::new();
    let mut open = false;
    for (&x, &y) in xs.iter().zip(&ys) {
        let m = y - curve.value(x);
        margin = margin.min(m);
        if m.abs() <= INEQ_TOL && bridges.iter().any(|b| x >= b.lo && x <= b.hi) {
            match touch.last_mut() {
                Some(t) if open => t[1] = x,
                _ => touch.push([x, x]),
            }
            open = true;
        } else {
            open = false;
        }
    }
    let dominates = margin >= -INEQ_TOL;

    let mut int_f = 0.0;
    for s in f.segments() {
        let p = Poly::new(s.coef.clone());
        int_f += integrate_pieces(|x| phi(x) * p.eval(x), s.lo, s.hi, &breaks, 1e-14);
    }
    int_f += f.atoms().iter().map(|t| t.mass * phi(t.at)).sum::<f64>();
    let mut int_g = 0.0;
    for s in g.segments() {
        let p = Poly::new(s.coef.clone());
        int_g += integrate_pieces(|x| phi(x) * p.eval(x), s.lo, s.hi, &breaks, 1e-14);
    }
    int_g += g.atoms().iter().map(|t| t.mass * phi(t.at)).sum::<f64>();
    let integral_gap = int_f - int_g;
    let integrals_match = integral_gap.abs() <= 1e-8;

    Ok(PriceFunctionReport {
        passes: convex && dominates && integrals_match,
        convex,
        dominates,
        integrals_match,
        margin,
        integral_gap,
        convexity_defect: defect,
        bridges,
        touch_intervals: touch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censor::upper_censorship;
    use crate::dist::{Atom, Segment};

    fn unif() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 1.0).unwrap()
    }

    fn costs() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 0.18).unwrap()
    }

    #[test]
    fn no_disclosure_has_flat_certificate() {
        let g = upper_censorship(&unif(), 0.0).unwrap();
        let r = verify_price_function(&g, &unif(), &costs(), 5).unwrap();
        assert!(r.passes, "{r:?}");
        assert!(r.bridges[0].slope.abs() < 1e-12);
        assert!((r.bridges[0].level - 0.2).abs() < 1e-12);
    }

    #[test]
    fn censorship_at_the_threshold_passes() {
        let g = upper_censorship(&unif(), 0.4).unwrap();
        let r = verify_price_function(&g, &unif(), &costs(), 50).unwrap();
        assert!(r.passes, "{r:?}");
        assert!(!r.touch_intervals.is_empty());
    }

    #[test]
    fn censorship_beyond_the_threshold_fails() {
        // At large n the violation is of order F^(n-2) and below tolerance.
        let g = upper_censorship(&unif(), 0.5).unwrap();
        let r = verify_price_function(&g, &unif(), &costs(), 5).unwrap();
        assert!(!r.passes, "{:?}", (r.convex, r.dominates, r.margin, r.convexity_defect));
    }

    #[test]
    fn full_disclosure_fails() {
        let r = verify_price_function(&unif(), &unif(), &costs(), 50).unwrap();
        assert!(!r.passes);
        assert!(!r.convex);
    }

    #[test]
    fn two_atoms_in_a_gap_are_unsupported() {
        let g = PiecewisePolyDist::new(
            0.0,
            1.0,
            vec![Segment { lo: 0.0, hi: 0.2, coef: vec![1.0] }],
            vec![Atom { at: 0.4, mass: 0.4 }, Atom { at: 0.8, mass: 0.4 }],
        )
        .unwrap();
        assert!(matches!(verify_price_function(&g, &unif(), &costs(), 2), Err(UceError::Unsupported(_))));
    }
}
