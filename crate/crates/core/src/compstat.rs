//! Transforms of the cost distribution and the resulting movement of `a^M`.

use crate::censor::solve_a_max;
use crate::cost::TheoremCase;
use crate::dist::{Atom, PiecewisePolyDist, Segment, Side};
use crate::error::{config, Result};
use crate::welfare::consumer_surplus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const CDF_TOL: f64 = 1e-12;
const SCAN_PER_PIECE: usize = 256;

/// `H₂(αc) = H₁(c)` for any `α > 0`.
pub fn scale_stretch(h: &PiecewisePolyDist, alpha: f64) -> Result<PiecewisePolyDist> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return config(format!("scale factor must be positive, got {alpha}"));
    }
    let (lo, hi) = h.support();
    let segs = h
        .segments()
        .iter()
        .map(|s| Segment {
            lo: s.lo * alpha,
            hi: s.hi * alpha,
            coef: s.coef.iter().enumerate().map(|(k, &a)| a / alpha.powi(k as i32 + 1)).collect(),
        })
        .collect();
    let atoms = h.atoms().iter().map(|t| Atom { at: t.at * alpha, mass: t.mass }).collect();
    PiecewisePolyDist::new(lo * alpha, hi * alpha, segs, atoms)
}

/// Stretch restricted to `1 < α < μ / c̄`.
pub fn alpha_stretch(h: &PiecewisePolyDist, alpha: f64, mu: f64) -> Result<PiecewisePolyDist> {
    let cap = mu / h.max_support();
    if !(alpha > 1.0 && alpha < cap) {
        return config(format!("stretch factor {alpha} outside (1, {cap})"));
    }
    scale_stretch(h, alpha)
}

/// `H_k`: the cost distribution shrunk `k` times by a factor of two.
pub fn halving_sequence(h0: &PiecewisePolyDist, k: u32) -> Result<PiecewisePolyDist> {
    scale_stretch(h0, 0.5f64.powi(k as i32))
}

/// Continuous densities on `[0, c̄]` piling up at `c̄`: weight `1/k` on
/// `U[0, c̄]` and `1 - 1/k` on a triangular ramp over `[c̄(1 - 1/k), c̄]`.
/// `k = 1` is the uniform distribution.
pub fn ramp_sequence(c_bar: f64, k: u32) -> Result<PiecewisePolyDist> {
    if !(c_bar > 0.0) || k == 0 {
        return config("ramp needs c̄ > 0 and k >= 1");
    }
    let lambda = 1.0 / k as f64;
    if k == 1 {
        return PiecewisePolyDist::uniform(0.0, c_bar);
    }
    let start = c_bar * (1.0 - lambda);
    let w = c_bar - start;
    // 2 (c - start) / w² on [start, c̄].
    let slope = 2.0 / (w * w);
    let ramp = PiecewisePolyDist::new(
        0.0,
        c_bar,
        vec![Segment { lo: start, hi: c_bar, coef: vec![-slope * start, slope] }],
        vec![],
    )?;
    uniform_interpolate(&ramp, lambda, c_bar)
}

/// `λ U[0, c̄] + (1 - λ) H₀`.
pub fn uniform_interpolate(h0: &PiecewisePolyDist, lambda: f64, c_bar: f64) -> Result<PiecewisePolyDist> {
    if !(0.0..=1.0).contains(&lambda) {
        return config(format!("interpolation weight {lambda} outside [0, 1]"));
    }
    if lambda == 0.0 {
        return Ok(h0.clone());
    }
    let u = PiecewisePolyDist::uniform(0.0, c_bar)?;
    if lambda == 1.0 {
        return Ok(u);
    }
    PiecewisePolyDist::mixture(&[(lambda, &u), (1.0 - lambda, h0)])
}

fn scan_points(a: &PiecewisePolyDist, b: &PiecewisePolyDist) -> Vec<f64> {
    let mut knots: Vec<f64> = a.knots().iter().chain(b.knots()).copied().collect();
    knots.extend([a.support().0, a.support().1, b.support().0, b.support().1]);
    knots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    knots.dedup();
    let mut xs = Vec::new();
    for w in knots.windows(2) {
        for i in 0..SCAN_PER_PIECE {
            xs.push(w[0] + (w[1] - w[0]) * i as f64 / SCAN_PER_PIECE as f64);
        }
    }
    xs.push(*knots.last().unwrap());
    xs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dominance {
    Equal,
    /// `H₁ ≤ H₂` pointwise: `H₁` puts more weight on high costs.
    FirstDominates,
    SecondDominates,
    Incomparable,
}

pub fn fosd_compare(h1: &PiecewisePolyDist, h2: &PiecewisePolyDist) -> Dominance {
    let (mut above, mut below) = (false, false);
    for x in scan_points(h1, h2) {
        let d = h2.cdf(x) - h1.cdf(x);
        above |= d > CDF_TOL;
        below |= d < -CDF_TOL;
    }
    match (above, below) {
        (false, false) => Dominance::Equal,
        (false, true) => Dominance::SecondDominates,
        (true, false) => Dominance::FirstDominates,
        (true, true) => Dominance::Incomparable,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpsReport {
    pub mean_gap: f64,
    /// `min_x ∫_0^x (H₂ - H₁)`; nonnegative when `H₂` is a spread of `H₁`.
    pub min_integral_gap: f64,
    pub is_spread: bool,
}

/// Whether `H₂` is a mean-preserving spread of `H₁`.
pub fn mps_check(h1: &PiecewisePolyDist, h2: &PiecewisePolyDist) -> MpsReport {
    let mean_gap = h2.mean() - h1.mean();
    let min_integral_gap = scan_points(h1, h2)
        .into_iter()
        .map(|x| h2.int_cdf(x) - h1.int_cdf(x))
        .fold(f64::INFINITY, f64::min);
    MpsReport {
        mean_gap,
        min_integral_gap,
        is_spread: mean_gap.abs() <= 1e-10 && min_integral_gap >= -1e-10,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityShape {
    /// Strictly falls then strictly rises.
    InteriorDip,
    /// Strictly rises then strictly falls.
    InteriorPeak,
    Monotone,
    Other,
}

pub fn classify_density_shape(h: &PiecewisePolyDist) -> DensityShape {
    let (lo, hi) = h.support();
    let xs: Vec<f64> = scan_points(h, h).into_iter().filter(|&x| x > lo && x < hi).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| h.density(x, Side::Right)).collect();
    let tol = 1e-12 * ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let signs: Vec<i8> = ys
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > tol {
                1
            } else if d < -tol {
                -1
            } else {
                0
            }
        })
        .collect();
    if signs.contains(&0) {
        return if signs.iter().all(|&s| s >= 0) || signs.iter().all(|&s| s <= 0) {
            DensityShape::Monotone
        } else {
            DensityShape::Other
        };
    }
    let turns = signs.windows(2).filter(|w| w[0] != w[1]).count();
    match (turns, signs.first()) {
        (0, _) => DensityShape::Monotone,
        (1, Some(-1)) => DensityShape::InteriorDip,
        (1, Some(1)) => DensityShape::InteriorPeak,
        _ => DensityShape::Other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompstatRow {
    pub family_param: f64,
    #[serde(rename = "aM")]
    pub a_max: f64,
    pub case: TheoremCase,
    /// `S(c_loc)`; equals `h(c^M)` when `H` is smooth at `c^M`.
    pub stat: f64,
    pub cs: f64,
}

/// One row per family member, in input order.
pub fn compstat_table(f: &PiecewisePolyDist, family: &[(f64, PiecewisePolyDist)], n: usize) -> Result<Vec<CompstatRow>> {
    family
        .par_iter()
        .map(|(param, h)| {
            let m = solve_a_max(f, h)?;
            Ok(CompstatRow {
                family_param: *param,
                a_max: m.a_max,
                case: m.case,
                stat: m.cost_shape.s_loc,
                cs: consumer_surplus(f, h, m.a_max, n)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unif() -> PiecewisePolyDist {
        PiecewisePolyDist::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn stretch_keeps_the_uniform_family() {
        let h = PiecewisePolyDist::uniform(0.0, 0.18).unwrap();
        let s = alpha_stretch(&h, 1.5, 0.5).unwrap();
        assert!((s.max_support() - 0.27).abs() < 1e-15);
        assert!((s.density(0.1, Side::Right) - 1.0 / 0.27).abs() < 1e-12);
        assert!(alpha_stretch(&h, 1.0, 0.5).is_err());
        assert!(alpha_stretch(&h, 2.8, 0.5).is_err());
        let near = alpha_stretch(&h, 1.0 + 1e-12, 0.5).unwrap();
        assert!((near.cdf(0.09) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn stretch_of_a_polynomial_density() {
        let h = PiecewisePolyDist::from_pieces(0.0, &[(0.3, vec![0.0, 1.0 / 0.045])], vec![]).unwrap();
        let s = scale_stretch(&h, 0.5).unwrap();
        for x in [0.02, 0.07, 0.13] {
            assert!((s.cdf(x) - h.cdf(2.0 * x)).abs() < 1e-13);
        }
    }

    #[test]
    fn fosd_directions() {
        let a = PiecewisePolyDist::uniform(0.0, 0.18).unwrap();
        let b = PiecewisePolyDist::step_density(&[0.0, 0.12, 0.18], &[2.5, 0.7 / 0.06]).unwrap();
        assert_eq!(fosd_compare(&a, &b), Dominance::SecondDominates);
        assert_eq!(fosd_compare(&b, &a), Dominance::FirstDominates);
        assert_eq!(fosd_compare(&a, &a), Dominance::Equal);
    }

    #[test]
    fn tents_are_a_spread_pair() {
        let peaked = PiecewisePolyDist::from_pieces(0.0, &[(0.1, vec![3.0, 40.0]), (0.2, vec![11.0, -40.0])], vec![]).unwrap();
        let flat = PiecewisePolyDist::from_pieces(0.0, &[(0.1, vec![4.0, 20.0]), (0.2, vec![8.0, -20.0])], vec![]).unwrap();
        assert!(mps_check(&peaked, &flat).is_spread);
        assert!(!mps_check(&flat, &peaked).is_spread);
        assert_eq!(fosd_compare(&peaked, &flat), Dominance::Incomparable);
        assert_eq!(classify_density_shape(&peaked), DensityShape::InteriorPeak);
    }

    #[test]
    fn interpolation_endpoints() {
        let h0 = PiecewisePolyDist::step_density(&[0.0, 0.05, 0.15, 0.2], &[8.0, 2.0, 8.0]).unwrap();
        let at0 = uniform_interpolate(&h0, 0.0, 0.2).unwrap();
        let at1 = uniform_interpolate(&h0, 1.0, 0.2).unwrap();
        let mid = uniform_interpolate(&h0, 0.5, 0.2).unwrap();
        assert_eq!(fosd_compare(&at0, &h0), Dominance::Equal);
        assert_eq!(fosd_compare(&at1, &PiecewisePolyDist::uniform(0.0, 0.2).unwrap()), Dominance::Equal);
        assert!((mid.density(0.1, Side::Right) - 3.5).abs() < 1e-12);
        assert_eq!(classify_density_shape(&h0), DensityShape::Other);
    }

    #[test]
    fn ramps_have_unit_mass_and_pile_up() {
        for k in 1..8u32 {
            let h = ramp_sequence(0.18, k).unwrap();
            assert!((h.cdf(0.18) - 1.0).abs() < 1e-12);
            let edge = 0.18 * (1.0 - 1.0 / k as f64);
            assert!((h.cdf(edge) - edge / 0.18 / k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn table_rows_follow_input_order() {
        let h = PiecewisePolyDist::uniform(0.0, 0.18).unwrap();
        let fam: Vec<_> = [1.2, 1.5].iter().map(|&a| (a, alpha_stretch(&h, a, 0.5).unwrap())).collect();
        let rows = compstat_table(&unif(), &fam, 2).unwrap();
        assert_eq!(rows[0].family_param, 1.2);
        assert!(rows[0].a_max > rows[1].a_max);
        assert!((rows[1].a_max - (1.0 - 0.54f64.sqrt())).abs() < 1e-9);
    }
}
