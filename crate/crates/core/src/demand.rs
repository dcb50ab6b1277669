//! Interim demand under a symmetric conjecture `G`.
//!
//! For a type with cost `c` and reservation value `r(c)`:
//! `D^c(x) = G(x)^{n-1}` if `x < r(c)`, else `T(r(c))` with
//! `T(r) = (1 - G(r-)^n) / (n (1 - G(r-)))`.
//! Integrating over `H` and substituting `c = c_G(t)` turns the stopping part
//! into `∫_{r_lo}^{x} (1 - G(t)^n)/n · h(c_G(t)) dt`, which is smooth between
//! the knots of `G` and the reservation images of the knots of `H`.

use crate::dist::{PiecewisePolyDist, Side};
use crate::error::{config, Result};
use crate::poly::integrate;
use serde::{Deserialize, Serialize};

const ROOT_TOL: f64 = 1e-13;
const QUAD_TOL: f64 = 1e-14;

/// `(1 - q^n) / (n (1 - q))`, i.e. the mean of `q^k` over `k < n`.
#[inline]
pub fn stop_share(q: f64, n: usize) -> f64 {
    let mut s = 0.0;
    for _ in 0..n {
        s = s * q + 1.0;
    }
    s / n as f64
}

/// `J_G(x) = T(G(x-)) - G(x)^{n-1}`.
pub fn jump_size(g: &PiecewisePolyDist, x: f64, n: usize) -> f64 {
    (stop_share(g.cdf_left(x), n) - g.cdf(x).powi(n as i32 - 1)).max(0.0)
}

/// Probability of being the best of `n` draws from `G` with signal `x`;
/// ties at an atom of size `α` are split uniformly, giving
/// `(G(x)^n - G(x-)^n) / (n α)`.
#[inline]
pub fn win_share(g: &PiecewisePolyDist, x: f64, n: usize) -> f64 {
    let alpha = g.atom_mass_at(x);
    let gx = g.cdf(x);
    if alpha > 0.0 {
        let gl = g.cdf_left(x);
        // Mean of gl^k gx^(n-1-k): the divided difference without cancellation.
        let mut s = 0.0;
        let mut pl = 1.0;
        for k in 0..n {
            s += pl * gx.powi((n - 1 - k) as i32);
            pl *= gl;
        }
        s / n as f64
    } else {
        gx.powi(n as i32 - 1)
    }
}

fn win_share_left(g: &PiecewisePolyDist, x: f64, n: usize) -> f64 {
    g.cdf_left(x).powi(n as i32 - 1)
}

/// Demand of a single cost type.
pub fn type_demand(g: &PiecewisePolyDist, x: f64, c: f64, n: usize) -> Result<f64> {
    let r = g.reservation_value(c, ROOT_TOL)?;
    Ok(if x < r { win_share(g, x, n) } else { stop_share(g.cdf_left(r), n) })
}

/// Extensive and intensive parts of `D'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub extensive: f64,
    pub intensive: f64,
}

impl Margins {
    pub fn total(&self) -> f64 {
        self.extensive + self.intensive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandRow {
    pub x: f64,
    pub demand: f64,
    pub extensive: f64,
    pub intensive: f64,
    pub cdf: f64,
    pub cost_cut: f64,
}

/// `D(·; G)` with the reservation-image partition cached.
#[derive(Clone, Debug)]
pub struct DemandCurve {
    g: PiecewisePolyDist,
    h: PiecewisePolyDist,
    n: usize,
    r_lo: f64,
    r_hi: f64,
    /// Knots of the stopping integral and its cumulative value at each.
    t_knots: Vec<f64>,
    cum: Vec<f64>,
    /// Cost atoms with their stopping demand `T(r(c_j))`.
    cost_atoms: Vec<(f64, f64, f64)>,
}

impl DemandCurve {
    pub fn new(g: &PiecewisePolyDist, h: &PiecewisePolyDist, n: usize) -> Result<Self> {
        if n < 2 {
            return config("need at least 2 firms");
        }
        let (c_lo, c_bar) = (h.support().0, h.max_support());
        if c_lo < 0.0 {
            return config("search costs must be nonnegative");
        }
        let r_lo = g.reservation_value(c_bar, ROOT_TOL)?;
        let r_hi = g.reservation_value(c_lo.max(h.min_support()), ROOT_TOL)?;
        let mut t_knots = vec![r_lo, r_hi];
        t_knots.extend(g.knots().iter().copied().filter(|&k| k > r_lo && k < r_hi));
        for &k in h.knots() {
            if k > 0.0 && k < c_bar {
                t_knots.push(g.reservation_value(k, ROOT_TOL)?);
            }
        }
        t_knots.retain(|&t| t >= r_lo && t <= r_hi);
        t_knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t_knots.dedup();
        let mut cum = vec![0.0];
        for w in t_knots.windows(2) {
            let v = integrate(|t| stop_density(g, h, n, t), w[0], w[1], QUAD_TOL);
            cum.push(cum.last().unwrap() + v);
        }
        let mut cost_atoms = Vec::new();
        for a in h.atoms() {
            let r = g.reservation_value(a.at, ROOT_TOL)?;
            cost_atoms.push((a.at, a.mass, stop_share(g.cdf_left(r), n)));
        }
        Ok(DemandCurve { g: g.clone(), h: h.clone(), n, r_lo, r_hi, t_knots, cum, cost_atoms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn conjecture(&self) -> &PiecewisePolyDist {
        &self.g
    }

    pub fn costs(&self) -> &PiecewisePolyDist {
        &self.h
    }

    /// `r(c̄)`: below this every type keeps searching.
    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    /// Reservation value of the lowest cost (`max supp G` when costs start at 0).
    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    /// `c_G(x)`: types with cost at least this stop at `x`.
    pub fn cost_cut(&self, x: f64) -> f64 {
        self.g.incremental_benefit(x)
    }

    /// Points where `D` or its derivative may break.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.t_knots.clone();
        b.extend(self.g.knots().iter().copied());
        b.sort_by(|a, b| a.partial_cmp(b).unwrap());
        b.dedup();
        b
    }

    fn stopping_integral(&self, x: f64) -> f64 {
        let x = x.min(self.r_hi);
        if x <= self.r_lo {
            return 0.0;
        }
        let i = self.t_knots.partition_point(|&t| t <= x) - 1;
        let base = self.cum[i];
        let t0 = self.t_knots[i];
        if x == t0 {
            return base;
        }
        base + integrate(|t| stop_density(&self.g, &self.h, self.n, t), t0, x, QUAD_TOL)
    }

    fn atom_part(&self, cut: f64, strict: bool) -> f64 {
        self.cost_atoms
            .iter()
            .filter(|(c, _, _)| if strict { *c > cut } else { *c >= cut })
            .map(|(_, m, t)| m * t)
            .sum()
    }

    /// `D(x; G)`, with the closed stopping set `{c : r(c) <= x}` and the
    /// uniform tie-break at atoms of `G`.
    pub fn value(&self, x: f64) -> f64 {
        let w = win_share(&self.g, x, self.n);
        if x < self.r_lo {
            return w;
        }
        let cut = self.cost_cut(x);
        w * self.h.cdf_left(cut) + self.stopping_integral(x) + self.atom_part(cut, false)
    }

    /// Left limit `D(x-; G)`.
    pub fn value_left(&self, x: f64) -> f64 {
        let w = win_share_left(&self.g, x, self.n);
        if x <= self.r_lo {
            return w;
        }
        let cut = self.cost_cut(x);
        w * self.h.cdf(cut) + self.stopping_integral(x) + self.atom_part(cut, true)
    }

    /// One-sided margins of `D'`. The right derivative sees `g(x+)` and
    /// `h(c_G(x)-)`, the left one `g(x-)` and `h(c_G(x)+)`.
    pub fn margins(&self, x: f64, side: Side) -> Margins {
        let n = self.n;
        let (gx, dens) = match side {
            Side::Right => (self.g.cdf(x), self.g.density(x, Side::Right)),
            Side::Left => (self.g.cdf_left(x), self.g.density(x, Side::Left)),
        };
        let growth = if n == 2 { dens } else { (n - 1) as f64 * gx.powi(n as i32 - 2) * dens };
        let below = match side {
            Side::Right => x < self.r_lo,
            Side::Left => x <= self.r_lo,
        };
        if below {
            return Margins { extensive: 0.0, intensive: growth };
        }
        let cut = self.cost_cut(x);
        let (hc, big_h) = match side {
            Side::Right => (self.h.density(cut, Side::Left), self.h.cdf_left(cut)),
            Side::Left => (self.h.density(cut, Side::Right), self.h.cdf(cut)),
        };
        let j = stop_share(gx, n) - gx.powi(n as i32 - 1);
        Margins { extensive: (1.0 - gx) * hc * j, intensive: growth * big_h }
    }

    pub fn slope(&self, x: f64, side: Side) -> f64 {
        self.margins(x, side).total()
    }

    pub fn rows(&self, xs: &[f64]) -> Vec<DemandRow> {
        xs.iter()
            .map(|&x| {
                let m = self.margins(x, Side::Right);
                DemandRow {
                    x,
                    demand: self.value(x),
                    extensive: m.extensive,
                    intensive: m.intensive,
                    cdf: self.g.cdf(x),
                    cost_cut: self.cost_cut(x),
                }
            })
            .collect()
    }

    /// `∫ D(x; G) dG_dev(x)`.
    pub fn expected_payoff(&self, dev: &PiecewisePolyDist) -> f64 {
        let mut breaks = self.breakpoints();
        breaks.extend(dev.knots().iter().copied());
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut total = 0.0;
        for s in dev.segments() {
            let p = crate::poly::Poly::new(s.coef.clone());
            if p.is_zero() {
                continue;
            }
            total += crate::poly::integrate_pieces(|x| self.value(x) * p.eval(x), s.lo, s.hi, &breaks, QUAD_TOL);
        }
        for a in dev.atoms() {
            total += a.mass * self.value(a.at);
        }
        total
    }
}

/// Integrand of the stopping part after the `t = r(c)` substitution.
fn stop_density(g: &PiecewisePolyDist, h: &PiecewisePolyDist, n: usize, t: f64) -> f64 {
    let gt = g.cdf(t);
    let c = g.incremental_benefit(t);
    (1.0 - gt.powi(n as i32)) / n as f64 * h.density(c, Side::Right)
}

pub fn interim_demand(g: &PiecewisePolyDist, x: f64, n: usize, h: &PiecewisePolyDist) -> Result<f64> {
    Ok(DemandCurve::new(g, h, n)?.value(x))
}

/// `(extensive, intensive)` from the right of `x`.
pub fn demand_margins(g: &PiecewisePolyDist, x: f64, n: usize, h: &PiecewisePolyDist) -> Result<(f64, f64)> {
    let m = DemandCurve::new(g, h, n)?.margins(x, Side::Right);
    Ok((m.extensive, m.intensive))
}

pub fn expected_payoff(
    g_dev: &PiecewisePolyDist,
    g_star: &PiecewisePolyDist,
    n: usize,
    h: &PiecewisePolyDist,
) -> Result<f64> {
    Ok(DemandCurve::new(g_star, h, n)?.expected_payoff(g_dev))
}

/// `|E_G[D(x; G)] - 1/n|`.
pub fn equilibrium_payoff_identity(g: &PiecewisePolyDist, n: usize, h: &PiecewisePolyDist) -> Result<f64> {
    Ok((expected_payoff(g, g, n, h)? - 1.0 / n as f64).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Atom;

    fn unif() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 1.0).unwrap()
    }

    fn costs() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 0.18).unwrap()
    }

    // U_0.4 for the uniform prior: density 1 on [0, 0.4), atom 0.6 at 0.7.
    fn u04() -> PiecewisePolyDist {
        PiecewisePolyDist::from_pieces(0.0, &[(0.4, vec![1.0])], vec![Atom { at: 0.7, mass: 0.6 }]).unwrap()
    }

    #[test]
    fn jump_examples() {
        let d = PiecewisePolyDist::point_mass(0.5, 0.0, 1.0).unwrap();
        assert!((jump_size(&d, 0.2, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((jump_size(&unif(), 0.5, 2) - 0.25).abs() < 1e-15);
        assert_eq!(jump_size(&unif(), 1.0, 4), 0.0);
    }

    #[test]
    fn type_demand_examples() {
        let f = unif();
        assert!((type_demand(&f, 0.25, 0.125, 2).unwrap() - 0.25).abs() < 1e-12);
        assert!((type_demand(&f, 0.6, 0.125, 2).unwrap() - 0.75).abs() < 1e-12);
        let d = PiecewisePolyDist::point_mass(0.5, 0.0, 1.0).unwrap();
        assert_eq!(type_demand(&d, 0.1, 0.1, 3).unwrap(), 0.0);
    }

    #[test]
    fn interim_examples() {
        let d = DemandCurve::new(&u04(), &costs(), 2).unwrap();
        assert!((d.r_lo() - 0.4).abs() < 1e-10);
        assert!((d.r_hi() - 0.7).abs() < 1e-12);
        assert!((d.value(0.2) - 0.2).abs() < 1e-12);
        assert!((d.value(0.55) - 0.55).abs() < 1e-12);
        assert!((d.value(0.7) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn margin_examples() {
        let d = DemandCurve::new(&u04(), &costs(), 2).unwrap();
        let m = d.margins(0.55, Side::Right);
        assert_eq!(m.intensive, 0.0);
        assert!((m.extensive - 0.6 / 0.18 * 0.3).abs() < 1e-10);
        let fd = (d.value(0.55 + 1e-6) - d.value(0.55 - 1e-6)) / 2e-6;
        assert!((fd - m.total()).abs() < 1e-5 * fd);
        let full = DemandCurve::new(&unif(), &costs(), 3).unwrap();
        let top = full.margins(1.0 - 1e-9, Side::Left);
        assert!(top.extensive.abs() < 1e-6 && top.intensive.abs() < 1e-6);
    }

    #[test]
    fn payoff_examples() {
        let g = u04();
        let h = costs();
        assert!((expected_payoff(&g, &g, 2, &h).unwrap() - 0.5).abs() < 1e-12);
        let atom = PiecewisePolyDist::point_mass(0.7, 0.0, 1.0).unwrap();
        assert!((expected_payoff(&atom, &g, 2, &h).unwrap() - 0.7).abs() < 1e-12);
        let zero = PiecewisePolyDist::point_mass(0.0, 0.0, 1.0).unwrap();
        assert_eq!(expected_payoff(&zero, &g, 2, &h).unwrap(), 0.0);
    }

    #[test]
    fn payoff_identity_examples() {
        let d = PiecewisePolyDist::point_mass(0.5, 0.0, 1.0).unwrap();
        assert!(equilibrium_payoff_identity(&d, 3, &costs()).unwrap() < 1e-10);
        assert!(equilibrium_payoff_identity(&u04(), 2, &costs()).unwrap() < 1e-10);
        assert!(equilibrium_payoff_identity(&unif(), 2, &costs()).unwrap() < 1e-10);
    }

    #[test]
    fn tie_share_sums_to_one() {
        let g = u04();
        let n = 4;
        // One firm at the atom, everyone else drawn from g.
        let w = win_share(&g, 0.7, n);
        let gl: f64 = 0.4;
        assert!((w - (1.0 - gl.powi(4)) / (4.0 * 0.6)).abs() < 1e-15);
    }
}
