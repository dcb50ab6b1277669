//! Consumer welfare under upper censorship.
//!
//! A consumer with cost `c` stops at the first firm whose signal clears
//! `t = min(a, a_c)` where `a_c = c_F⁻¹(c)`, and otherwise buys the best of
//! all `n`. Her expected purchased value is `∫_0^t x dF^n + k_t (1 - F(t)^n)`
//! and she pays `c` for each of `(1 - F(t)^n) / (1 - F(t))` expected visits.

use crate::censor::{solve_a_max, threshold_of_cost};
use crate::dist::PiecewisePolyDist;
use crate::error::Result;
use crate::poly::integrate_pieces;
use serde::{Deserialize, Serialize};

const QUAD_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeWelfare {
    /// Expected value of the purchased product.
    pub benefit: f64,
    /// Expected accumulated search cost.
    pub search_cost: f64,
    pub surplus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeRow {
    pub quantile: f64,
    pub c: f64,
    #[serde(flatten)]
    pub welfare: TypeWelfare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelfareRow {
    pub a: f64,
    pub n: usize,
    pub types: Vec<TypeRow>,
    pub cs_total: f64,
    pub search_length: f64,
}

/// `∫_0^t x dF(x)^n = t F(t)^n - ∫_0^t F^n`.
fn top_of_n_below(f: &PiecewisePolyDist, t: f64, n: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let ni = n as i32;
    t * f.cdf(t).powi(ni) - integrate_pieces(|x| f.cdf(x).powi(ni), 0.0, t, f.knots(), QUAD_TOL)
}

/// Expected number of visits when every signal below `t` sends the consumer on.
fn visits(ft: f64, n: usize) -> f64 {
    if ft >= 1.0 {
        n as f64
    } else {
        (1.0 - ft.powi(n as i32)) / (1.0 - ft)
    }
}

pub fn consumer_surplus_type(f: &PiecewisePolyDist, a: f64, c: f64, n: usize) -> Result<TypeWelfare> {
    let t = if c > 0.0 { a.min(threshold_of_cost(f, c)?) } else { a };
    let ft = f.cdf(t);
    let mut benefit = top_of_n_below(f, t, n);
    if ft < 1.0 {
        benefit += f.truncated_mean_above(t)? * (1.0 - ft.powi(n as i32));
    }
    let search_cost = c * visits(ft, n);
    Ok(TypeWelfare { benefit, search_cost, surplus: benefit - search_cost })
}

pub fn consumer_surplus(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64, n: usize) -> Result<f64> {
    // The branch switches where a_c = a, i.e. at c = c_F(a).
    let mut breaks: Vec<f64> = h.knots().to_vec();
    breaks.push(f.incremental_benefit(a));
    let err = std::cell::RefCell::new(None);
    let mut total = 0.0;
    for s in h.segments() {
        let p = crate::poly::Poly::new(s.coef.clone());
        if p.is_zero() {
            continue;
        }
        total += integrate_pieces(
            |c| match consumer_surplus_type(f, a, c, n) {
                Ok(w) => w.surplus * p.eval(c),
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            s.lo,
            s.hi,
            &breaks,
            1e-12,
        );
    }
    for atom in h.atoms() {
        total += atom.mass * consumer_surplus_type(f, a, atom.at, n)?.surplus;
    }
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

pub fn expected_search_length(f: &PiecewisePolyDist, a: f64, n: usize) -> f64 {
    visits(f.cdf(a), n)
}

/// Search length of a `c`-consumer, who stops searching above `min(a, a_c)`.
pub fn expected_search_length_type(f: &PiecewisePolyDist, a: f64, c: f64, n: usize) -> Result<f64> {
    let t = if c > 0.0 { a.min(threshold_of_cost(f, c)?) } else { a };
    Ok(visits(f.cdf(t), n))
}

/// Expected search length averaged over `H`.
pub fn mean_search_length(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64, n: usize) -> Result<f64> {
    let mut breaks: Vec<f64> = h.knots().to_vec();
    breaks.push(f.incremental_benefit(a));
    let mut total = 0.0;
    for s in h.segments() {
        let p = crate::poly::Poly::new(s.coef.clone());
        total += integrate_pieces(
            |c| expected_search_length_type(f, a, c, n).unwrap_or(f64::NAN) * p.eval(c),
            s.lo,
            s.hi,
            &breaks,
            1e-12,
        );
    }
    Ok(total)
}

pub fn welfare_row(f: &PiecewisePolyDist, h: &PiecewisePolyDist, a: f64, n: usize, quantiles: &[f64]) -> Result<WelfareRow> {
    let types = quantiles
        .iter()
        .map(|&q| {
            let c = h.quantile(q);
            Ok(TypeRow { quantile: q, c, welfare: consumer_surplus_type(f, a, c, n)? })
        })
        .collect::<Result<_>>()?;
    Ok(WelfareRow {
        a,
        n,
        types,
        cs_total: consumer_surplus(f, h, a, n)?,
        search_length: expected_search_length(f, a, n),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SurplusComparison {
    /// Thresholds out of order after sorting, or above `a_{c̄}`.
    HypothesisNotMet { a_max: [f64; 2], a_cbar: [f64; 2] },
    Compared {
        /// Index (0 or 1) of the distribution with the smaller threshold.
        lower: usize,
        a_max: [f64; 2],
        /// Surplus at each distribution's own threshold.
        cs: [f64; 2],
        /// Surplus of the higher-threshold distribution at the lower threshold.
        cs_cross: f64,
    },
}

/// Compares consumer surplus at the maximal thresholds of two equal-mean
/// cost distributions. Valid only when both thresholds lie below `a_{c̄}`.
pub fn compare_equal_mean(f: &PiecewisePolyDist, h1: &PiecewisePolyDist, h2: &PiecewisePolyDist, n: usize) -> Result<SurplusComparison> {
    let a1 = solve_a_max(f, h1)?.a_max;
    let a2 = solve_a_max(f, h2)?.a_max;
    let cb1 = threshold_of_cost(f, h1.max_support())?;
    let cb2 = threshold_of_cost(f, h2.max_support())?;
    if a1 > cb1 + 1e-12 || a2 > cb2 + 1e-12 {
        return Ok(SurplusComparison::HypothesisNotMet { a_max: [a1, a2], a_cbar: [cb1, cb2] });
    }
    let (lower, lo_h, hi_h, lo_a, hi_a) = if a1 <= a2 { (0, h1, h2, a1, a2) } else { (1, h2, h1, a2, a1) };
    let cs_lo = consumer_surplus(f, lo_h, lo_a, n)?;
    let cs_hi = consumer_surplus(f, hi_h, hi_a, n)?;
    let cs_cross = consumer_surplus(f, hi_h, lo_a, n)?;
    let cs = if lower == 0 { [cs_lo, cs_hi] } else { [cs_hi, cs_lo] };
    Ok(SurplusComparison::Compared { lower, a_max: [a1, a2], cs, cs_cross })
}
