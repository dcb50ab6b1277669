#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use uce_core::{Atom, PiecewisePolyDist, Segment};

pub fn prior() -> PiecewisePolyDist {
    PiecewisePolyDist::uniform(0.0, 1.0).unwrap()
}

pub fn uniform_costs() -> PiecewisePolyDist {
    PiecewisePolyDist::uniform(0.0, 0.18).unwrap()
}

/// `H(c) = (c / 0.3)²`.
pub fn convex_costs() -> PiecewisePolyDist {
    PiecewisePolyDist::from_pieces(0.0, &[(0.3, vec![0.0, 2.0 / 0.09])], vec![]).unwrap()
}

pub fn step_costs() -> PiecewisePolyDist {
    PiecewisePolyDist::step_density(&[0.0, 0.1, 0.3, 0.4], &[4.0, 0.8, 4.4]).unwrap()
}

pub fn bimodal_costs() -> PiecewisePolyDist {
    PiecewisePolyDist::step_density(&[0.0, 0.1, 0.15, 0.17, 0.25], &[8.0, 0.4, 7.0, 0.5]).unwrap()
}

/// `H(c)/c` has no interior local minimum here.
pub fn falling_costs() -> PiecewisePolyDist {
    PiecewisePolyDist::from_pieces(0.0, &[(0.1, vec![10.0, -40.0]), (0.15, vec![0.5]), (0.2, vec![3.5])], vec![]).unwrap()
}

pub fn corpus() -> Vec<(&'static str, PiecewisePolyDist)> {
    vec![
        ("uniform", uniform_costs()),
        ("convex", convex_costs()),
        ("step", step_costs()),
        ("bimodal", bimodal_costs()),
        ("falling", falling_costs()),
    ]
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Random contraction of `U[0, 1]`: cut `[0, 1]` at random points and either
/// reveal each piece or pool it into an atom at its mean.
pub fn random_contraction(seed: u64) -> PiecewisePolyDist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 1 + (rng.next_u64() % 6) as usize;
    let mut cuts: Vec<f64> = (0..k).map(|_| 0.02 + 0.96 * unit(&mut rng)).collect();
    cuts.extend([0.0, 1.0]);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|b, a| *b - *a < 1e-3);
    let mut segs = Vec::new();
    let mut atoms = Vec::new();
    for w in cuts.windows(2) {
        if unit(&mut rng) < 0.5 {
            segs.push(Segment { lo: w[0], hi: w[1], coef: vec![1.0] });
        } else {
            atoms.push(Atom { at: 0.5 * (w[0] + w[1]), mass: w[1] - w[0] });
        }
    }
    PiecewisePolyDist::new(0.0, 1.0, segs, atoms).unwrap()
}

/// Atomless prior on `[0, 1]` with 1 to 5 random step heights.
pub fn random_prior(seed: u64) -> PiecewisePolyDist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 1 + (rng.next_u64() % 5) as usize;
    let mut edges: Vec<f64> = (0..k - 1).map(|_| 0.05 + 0.9 * unit(&mut rng)).collect();
    edges.extend([0.0, 1.0]);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|b, a| *b - *a < 1e-3);
    let raw: Vec<f64> = edges.windows(2).map(|_| 0.2 + unit(&mut rng)).collect();
    let mass: f64 = edges.windows(2).zip(&raw).map(|(w, h)| (w[1] - w[0]) * h).sum();
    let heights: Vec<f64> = raw.iter().map(|h| h / mass).collect();
    PiecewisePolyDist::step_density(&edges, &heights).unwrap()
}
