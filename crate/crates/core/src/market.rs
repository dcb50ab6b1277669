//! A game instance: prior `F`, cost distribution `H`, number of firms and the
//! numerical knobs shared by every solver.

use crate::dist::{PiecewisePolyDist, Side};
use crate::error::{config, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub root: f64,
    pub ineq: f64,
    pub lp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { root: 1e-10, ineq: 1e-9, lp: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Points for the convexity scan of `φ_a` on `[0, a]`.
    pub phi: usize,
    /// Uniform points in the best-response LP.
    pub lp: usize,
    /// Scan points per density piece of `H`.
    pub scan: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { phi: 2049, lp: 801, scan: crate::cost::SCAN_PER_PIECE }
    }
}

#[derive(Clone, Debug)]
pub struct MarketConfig {
    pub prior: PiecewisePolyDist,
    pub costs: PiecewisePolyDist,
    pub n: usize,
    pub tol: Tolerances,
    pub grid: GridConfig,
}

impl MarketConfig {
    pub fn new(prior: PiecewisePolyDist, costs: PiecewisePolyDist, n: usize) -> Result<Self> {
        let m = MarketConfig { prior, costs, n, tol: Tolerances::default(), grid: GridConfig::default() };
        m.validate()?;
        Ok(m)
    }

    pub fn mu(&self) -> f64 {
        self.prior.mean()
    }

    pub fn c_bar(&self) -> f64 {
        self.costs.max_support()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return config(format!("need at least 2 firms, got {}", self.n));
        }
        check_prior(&self.prior)?;
        check_costs(&self.costs, self.prior.mean())
    }
}

/// The prior lives on `[0, 1]` with a strictly positive density and no atoms.
pub fn check_prior(f: &PiecewisePolyDist) -> Result<()> {
    if f.support() != (0.0, 1.0) {
        return config("prior must be supported on [0, 1]");
    }
    if f.has_atoms() {
        return config("prior must be atomless");
    }
    let mut at = 0.0;
    for s in f.segments() {
        if s.lo > at + 1e-15 {
            return config(format!("prior density vanishes on ({at}, {})", s.lo));
        }
        at = s.hi;
    }
    if at < 1.0 - 1e-15 {
        return config(format!("prior density vanishes on ({at}, 1)"));
    }
    for &k in f.knots() {
        let l = if k > 0.0 { f.density(k, Side::Left) } else { 1.0 };
        let r = if k < 1.0 { f.density(k, Side::Right) } else { 1.0 };
        if l <= 0.0 || r <= 0.0 {
            return config(format!("prior density must be strictly positive (zero at {k})"));
        }
    }
    // Interior minima of a cubic piece.
    for s in f.segments() {
        let p = crate::poly::Poly::new(s.coef.clone());
        for r in p.deriv().roots_in(s.lo, s.hi, 0.0) {
            if p.eval(r) <= 0.0 {
                return config(format!("prior density must be strictly positive (zero at {r})"));
            }
        }
    }
    Ok(())
}

/// Costs start at 0, have no atoms, and stay below the prior mean.
pub fn check_costs(h: &PiecewisePolyDist, mu: f64) -> Result<()> {
    if h.support().0 != 0.0 {
        return config("cost support must start at 0");
    }
    if h.has_atoms() {
        return config("cost distribution must be atomless");
    }
    let cb = h.max_support();
    if cb >= mu {
        return config(format!("need c̄ < μ: c̄ = {cb}, μ = {mu}"));
    }
    Ok(())
}
