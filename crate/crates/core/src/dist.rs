//! Distributions on a compact interval: piecewise-polynomial density segments
//! (degree at most 3) plus finitely many atoms. Every integral used downstream
//! (CDF, integrated CDF, first moment) is carried as an exact polynomial per
//! piece.

use crate::error::{config, Result, UceError};
use crate::poly::{monotone_root, Poly};
use serde::{Deserialize, Serialize};

pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    /// Density coefficients in the absolute variable, constant term first.
    pub coef: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: f64,
    pub mass: f64,
}

#[derive(Clone, Debug)]
struct Piece {
    lo: f64,
    hi: f64,
    dens: Poly,
    cdf: Poly,
    icdf: Poly,
    mom: Poly,
}

/// A probability distribution on `[support_lo, support_hi]`.
#[derive(Clone, Debug)]
pub struct PiecewisePolyDist {
    support_lo: f64,
    support_hi: f64,
    segments: Vec<Segment>,
    atoms: Vec<Atom>,
    knots: Vec<f64>,
    pieces: Vec<Piece>,
    at_knot: Vec<f64>,
    left_of_knot: Vec<f64>,
    mean: f64,
    icdf_hi: f64,
}

/// Which one-sided limit to take at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl PiecewisePolyDist {
    pub fn new(support_lo: f64, support_hi: f64, segments: Vec<Segment>, atoms: Vec<Atom>) -> Result<Self> {
        if !(support_lo.is_finite() && support_hi.is_finite()) || support_hi < support_lo {
            return config(format!("bad support [{support_lo}, {support_hi}]"));
        }
        let mut segments: Vec<Segment> = segments.into_iter().filter(|s| s.hi > s.lo).collect();
        for s in &segments {
            if s.coef.len() > 4 {
                return config("density pieces must have degree at most 3");
            }
            if s.lo < support_lo - 1e-15 || s.hi > support_hi + 1e-15 {
                return config(format!("segment [{}, {}] outside support", s.lo, s.hi));
            }
        }
        segments.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        for w in segments.windows(2) {
            if w[1].lo < w[0].hi - 1e-15 {
                return config("density segments overlap or breakpoints are not increasing");
            }
        }
        let mut atoms: Vec<Atom> = atoms.into_iter().filter(|a| a.mass != 0.0).collect();
        atoms.sort_by(|a, b| a.at.partial_cmp(&b.at).unwrap());
        for a in &atoms {
            if !(a.mass > 0.0 && a.mass <= 1.0 + MASS_TOL) {
                return config(format!("atom mass {} not in (0, 1]", a.mass));
            }
            if a.at < support_lo || a.at > support_hi {
                return config(format!("atom at {} outside support", a.at));
            }
        }
        for w in atoms.windows(2) {
            if w[1].at == w[0].at {
                return config(format!("duplicate atom location {}", w[0].at));
            }
        }
        for s in &segments {
            let p = Poly::new(s.coef.clone());
            let mut probe = vec![s.lo, s.hi];
            probe.extend(p.deriv().roots_in(s.lo, s.hi, 0.0));
            if probe.iter().any(|&t| p.eval(t) < -1e-12) {
                return config(format!("negative density on [{}, {}]", s.lo, s.hi));
            }
        }

        let mut knots = vec![support_lo, support_hi];
        for s in &segments {
            knots.push(s.lo);
            knots.push(s.hi);
        }
        knots.extend(atoms.iter().map(|a| a.at));
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup();

        let mut pieces = Vec::with_capacity(knots.len());
        let mut at_knot = Vec::with_capacity(knots.len());
        let mut left_of_knot = Vec::with_capacity(knots.len());
        let (mut g, mut ig, mut m) = (0.0f64, 0.0f64, 0.0f64);
        let mut ai = 0;
        for (i, &k) in knots.iter().enumerate() {
            left_of_knot.push(g);
            while ai < atoms.len() && atoms[ai].at == k {
                g += atoms[ai].mass;
                m += atoms[ai].mass * k;
                ai += 1;
            }
            at_knot.push(g);
            let hi = knots.get(i + 1).copied().unwrap_or(k);
            let dens = segments
                .iter()
                .find(|s| s.lo <= k && s.hi >= hi && hi > k)
                .map(|s| Poly::new(s.coef.clone()))
                .unwrap_or_else(Poly::zero);
            let a = dens.antideriv();
            let cdf = a.add(&Poly::constant(g - a.eval(k)));
            let ci = cdf.antideriv();
            let icdf = ci.add(&Poly::constant(ig - ci.eval(k)));
            let mi = dens.times_t().antideriv();
            let mom = mi.add(&Poly::constant(m - mi.eval(k)));
            g = cdf.eval(hi);
            ig = icdf.eval(hi);
            m = mom.eval(hi);
            pieces.push(Piece { lo: k, hi, dens, cdf, icdf, mom });
        }
        if (g - 1.0).abs() > MASS_TOL {
            return config(format!("total mass {g} differs from 1"));
        }
        Ok(PiecewisePolyDist {
            support_lo,
            support_hi,
            segments,
            atoms,
            knots,
            pieces,
            at_knot,
            left_of_knot,
            mean: m,
            icdf_hi: ig,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if hi <= lo {
            return config("uniform needs lo < hi");
        }
        Self::new(lo, hi, vec![Segment { lo, hi, coef: vec![1.0 / (hi - lo)] }], vec![])
    }

    /// Point mass at `x`, carried on the support `[lo, hi]`.
    pub fn point_mass(x: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, vec![], vec![Atom { at: x, mass: 1.0 }])
    }

    /// Consecutive density pieces starting at `lo`; each entry is `(to, coef)`.
    pub fn from_pieces(lo: f64, pieces: &[(f64, Vec<f64>)], atoms: Vec<Atom>) -> Result<Self> {
        let mut segs = Vec::new();
        let mut start = lo;
        for (to, coef) in pieces {
            if *to <= start {
                return config("piece breakpoints must be strictly increasing");
            }
            segs.push(Segment { lo: start, hi: *to, coef: coef.clone() });
            start = *to;
        }
        let hi = atoms.iter().map(|a| a.at).fold(start, f64::max);
        Self::new(lo, hi, segs, atoms)
    }

    /// Step density: `heights[i]` on `(edges[i], edges[i+1]]`.
    pub fn step_density(edges: &[f64], heights: &[f64]) -> Result<Self> {
        if edges.len() != heights.len() + 1 {
            return config("step density needs one more edge than heights");
        }
        let pieces: Vec<(f64, Vec<f64>)> = edges[1..].iter().zip(heights).map(|(&e, &h)| (e, vec![h])).collect();
        Self::from_pieces(edges[0], &pieces, vec![])
    }

    /// Weighted mixture, flattened onto a common refinement.
    pub fn mixture(parts: &[(f64, &PiecewisePolyDist)]) -> Result<Self> {
        let wsum: f64 = parts.iter().map(|p| p.0).sum();
        if parts.is_empty() || (wsum - 1.0).abs() > MASS_TOL || parts.iter().any(|p| p.0 < 0.0) {
            return config("mixture weights must be nonnegative and sum to 1");
        }
        let lo = parts.iter().map(|p| p.1.support_lo).fold(f64::INFINITY, f64::min);
        let hi = parts.iter().map(|p| p.1.support_hi).fold(f64::NEG_INFINITY, f64::max);
        let mut cuts: Vec<f64> = parts
            .iter()
            .flat_map(|p| p.1.segments.iter().flat_map(|s| [s.lo, s.hi]))
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut segs = Vec::new();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut p = Poly::zero();
            for (wt, d) in parts {
                if let Some(s) = d.segments.iter().find(|s| s.lo <= mid && mid < s.hi) {
                    p = p.add(&Poly::new(s.coef.clone()).scale(*wt));
                }
            }
            if !p.is_zero() {
                let mut coef = p.c.clone();
                coef.resize(coef.len().max(1), 0.0);
                segs.push(Segment { lo: w[0], hi: w[1], coef });
            }
        }
        let mut atoms: Vec<Atom> = Vec::new();
        for (wt, d) in parts {
            for a in &d.atoms {
                match atoms.iter_mut().find(|b| b.at == a.at) {
                    Some(b) => b.mass += wt * a.mass,
                    None => atoms.push(Atom { at: a.at, mass: wt * a.mass }),
                }
            }
        }
        Self::new(lo, hi, segs, atoms)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Sorted breakpoints: support ends, segment ends and atom locations.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Smallest point carrying mass.
    pub fn min_support(&self) -> f64 {
        let s = self
            .segments
            .iter()
            .find(|s| !Poly::new(s.coef.clone()).is_zero())
            .map(|s| s.lo)
            .unwrap_or(f64::INFINITY);
        let a = self.atoms.first().map(|a| a.at).unwrap_or(f64::INFINITY);
        s.min(a)
    }

    /// Largest point carrying mass.
    pub fn max_support(&self) -> f64 {
        let s = self
            .segments
            .iter()
            .rev()
            .find(|s| !Poly::new(s.coef.clone()).is_zero())
            .map(|s| s.hi)
            .unwrap_or(f64::NEG_INFINITY);
        let a = self.atoms.last().map(|a| a.at).unwrap_or(f64::NEG_INFINITY);
        s.max(a)
    }

    /// Index of the piece `[k_i, k_{i+1})` containing `x`, if any.
    #[inline]
    fn piece_right(&self, x: f64) -> Option<usize> {
        if x < self.support_lo || x >= self.support_hi {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= x) - 1)
    }

    /// Index of the piece `(k_i, k_{i+1}]` containing `x`, if any.
    #[inline]
    fn piece_left(&self, x: f64) -> Option<usize> {
        if x <= self.support_lo || x > self.support_hi {
            return None;
        }
        Some(self.knots.partition_point(|&k| k < x) - 1)
    }

    /// Per-piece `(lo, hi, density, cdf)` polynomials between consecutive knots.
    pub(crate) fn piece_polys(&self) -> impl Iterator<Item = (f64, f64, &Poly, &Poly)> + '_ {
        self.pieces.iter().filter(|p| p.hi > p.lo).map(|p| (p.lo, p.hi, &p.dens, &p.cdf))
    }

    pub fn atom_mass_at(&self, x: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.at.partial_cmp(&x).unwrap()) {
            Ok(i) => self.atoms[i].mass,
            Err(_) => 0.0,
        }
    }

    /// Right-continuous CDF `G(x)`.
    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.support_lo {
            return 0.0;
        }
        if x >= self.support_hi {
            return 1.0;
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        self.pieces[i].cdf.eval(x).clamp(0.0, 1.0)
    }

    /// Left limit `G(x-)`.
    #[inline]
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= self.support_lo {
            return 0.0;
        }
        if x > self.support_hi {
            return 1.0;
        }
        let i = self.knots.partition_point(|&k| k < x);
        if i < self.knots.len() && self.knots[i] == x {
            return self.left_of_knot[i];
        }
        self.pieces[i - 1].cdf.eval(x).clamp(0.0, 1.0)
    }

    pub fn density(&self, x: f64, side: Side) -> f64 {
        let idx = match side {
            Side::Right => self.piece_right(x),
            Side::Left => self.piece_left(x),
        };
        idx.map(|i| self.pieces[i].dens.eval(x)).unwrap_or(0.0)
    }

    pub fn density_deriv(&self, x: f64, side: Side) -> f64 {
        let idx = match side {
            Side::Right => self.piece_right(x),
            Side::Left => self.piece_left(x),
        };
        idx.map(|i| self.pieces[i].dens.deriv().eval(x)).unwrap_or(0.0)
    }

    /// `∫_{-∞}^x G(t) dt`.
    pub fn int_cdf(&self, x: f64) -> f64 {
        if x <= self.support_lo {
            return 0.0;
        }
        if x >= self.support_hi {
            return self.icdf_hi + (x - self.support_hi);
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        self.pieces[i].icdf.eval(x)
    }

    /// `∫_{(-∞, x]} t dG(t)`.
    pub fn partial_moment(&self, x: f64) -> f64 {
        if x < self.support_lo {
            return 0.0;
        }
        if x >= self.support_hi {
            return self.mean;
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        self.pieces[i].mom.eval(x)
    }

    /// Incremental benefit `c_G(x) = ∫_x^∞ (1 - G(t)) dt = E[(V - x)^+]`.
    #[inline]
    pub fn incremental_benefit(&self, x: f64) -> f64 {
        (self.mean - x + self.int_cdf(x)).max(0.0)
    }

    /// Reservation value: the `r` with `c_G(r) = c`. Costs at or below zero
    /// map to the top of the support.
    pub fn reservation_value(&self, c: f64, tol: f64) -> Result<f64> {
        if c > self.mean * (1.0 + 1e-14) + 1e-300 {
            return Err(UceError::Config(format!(
                "cost exceeds prior mean ({c} > {})",
                self.mean
            )));
        }
        let top = self.max_support();
        if c <= 0.0 {
            return Ok(top);
        }
        let bot = self.min_support();
        if c >= self.mean - bot {
            return Ok(self.mean - c);
        }
        Ok(monotone_root(
            |x| self.incremental_benefit(x) - c,
            |x| -(1.0 - self.cdf(x)),
            bot,
            top,
            tol,
        ))
    }

    /// `E[V | V > a]`.
    pub fn truncated_mean_above(&self, a: f64) -> Result<f64> {
        let tail = 1.0 - self.cdf(a);
        if tail <= 1e-15 {
            return config(format!("empty upper tail above {a}"));
        }
        Ok((self.mean - self.partial_moment(a)) / tail)
    }

    /// Smallest `x` with `G(x) >= u`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.min_support().max(self.support_lo);
        }
        let idx = self.at_knot.partition_point(|&g| g < u);
        if idx >= self.knots.len() {
            return self.max_support();
        }
        if u > self.left_of_knot[idx] || idx == 0 {
            return self.knots[idx];
        }
        let p = &self.pieces[idx - 1];
        let target = u;
        let (a, b) = (p.lo, p.hi);
        match p.dens.degree() {
            0 if !p.dens.is_zero() => {
                let v = a + (target - p.cdf.eval(a)) / p.dens.c[0];
                v.clamp(a, b)
            }
            _ => monotone_root(|x| p.cdf.eval(x) - target, |x| p.dens.eval(x), a, b, 1e-13),
        }
    }
}

/// Mean-preserving-contraction test: equal means and
/// `∫_0^x G <= ∫_0^x F` on all breakpoints plus a 1024-point grid.
/// Returns the verdict and the largest signed breach.
pub fn mpc_check(g: &PiecewisePolyDist, f: &PiecewisePolyDist, tol: f64) -> (bool, f64) {
    let dm = (g.mean() - f.mean()).abs();
    let lo = g.support_lo.min(f.support_lo);
    let hi = g.support_hi.max(f.support_hi);
    let mut pts: Vec<f64> = g.knots.iter().chain(f.knots.iter()).copied().collect();
    pts.extend((0..=1024).map(|i| lo + (hi - lo) * i as f64 / 1024.0));
    let worst = pts
        .iter()
        .map(|&x| g.int_cdf(x) - f.int_cdf(x))
        .fold(f64::NEG_INFINITY, f64::max);
    if dm > tol {
        return (false, dm.max(worst));
    }
    (worst <= tol, worst)
}
