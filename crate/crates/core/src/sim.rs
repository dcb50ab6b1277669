//! Monte Carlo market: random search order with recall, reservation
//! stopping and uniform tie-breaking.
//!
//! Every consumer owns a ChaCha8 stream addressed by its index, and draws a
//! fixed number of uniforms in a fixed order (cost, firm signals, visiting
//! order, tie-break). Swapping one firm's strategy therefore leaves every
//! other draw untouched, which is what the paired deviation estimate uses.

use crate::demand::DemandCurve;
use crate::dist::{PiecewisePolyDist, Side};
use crate::error::{config, Result};
use crate::poly::gauss;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const CHUNK: u64 = 8192;
const COST_QUANTILE_BINS: usize = 10;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub n: usize,
    /// Symmetric strategy of the firms, also the consumers' conjecture.
    pub strategy: PiecewisePolyDist,
    pub costs: PiecewisePolyDist,
    pub consumers: u64,
    pub seed: u64,
    pub bins: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn from_sums(sum: f64, sq: f64, m: u64) -> Self {
        if m == 0 {
            return Estimate { mean: f64::NAN, se: f64::NAN };
        }
        let m = m as f64;
        let mean = sum / m;
        let var = (sq / m - mean * mean).max(0.0);
        Estimate { mean, se: (var / m).sqrt() }
    }

    fn proportion(hits: u64, m: u64) -> Self {
        let h = hits as f64;
        Self::from_sums(h, h, m)
    }

    /// `(mean - target) / se`; infinite when the estimate has no spread.
    pub fn z(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.se > 0.0 {
            d / self.se
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandBin {
    pub lo: f64,
    pub hi: f64,
    /// Firm-signal draws that fell in the bin.
    pub count: u64,
    pub demand: Estimate,
}

impl DemandBin {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieCheck {
    pub at: f64,
    pub mass: f64,
    /// Win rate of firm 0 drawing the atom when every signal is compared.
    pub win_rate: Estimate,
    /// `(G(x)^n - G(x-)^n) / (n α)`.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub n: usize,
    pub consumers: u64,
    pub seed: u64,
    pub firm_payoffs: Vec<Estimate>,
    pub empirical_demand: Vec<DemandBin>,
    pub cs: Estimate,
    pub search_length: Estimate,
    /// Share of consumers who stopped before exhausting the market, by cost decile.
    pub stop_rate_by_cost_quantile: Vec<Estimate>,
    pub ties: Vec<TieCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationOutcome {
    /// Firm 0's payoff under the deviation.
    pub payoff: Estimate,
    /// Firm 0's payoff on the same consumers without the deviation.
    pub baseline: Estimate,
    /// Paired difference of the two.
    pub gain: Estimate,
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniforms of one consumer, in draw order.
struct Draws {
    cost: f64,
    signals: Vec<f64>,
    order: Vec<f64>,
    tie: f64,
}

impl Draws {
    fn new(n: usize) -> Self {
        Draws { cost: 0.0, signals: vec![0.0; n], order: vec![0.0; n.saturating_sub(1)], tie: 0.0 }
    }

    fn fill(&mut self, seed: u64, index: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.cost = uniform01(&mut rng);
        for u in self.signals.iter_mut().chain(self.order.iter_mut()) {
            *u = uniform01(&mut rng);
        }
        self.tie = uniform01(&mut rng);
    }
}

struct Trip {
    buyer: usize,
    visits: usize,
    value: f64,
    stopped: bool,
}

/// Uniform choice among the tied maxima of `xs` restricted to `among`.
fn best_of(xs: &[f64], among: impl Iterator<Item = usize> + Clone, tie: f64) -> usize {
    let top = among.clone().map(|i| xs[i]).fold(f64::NEG_INFINITY, f64::max);
    let tied = among.clone().filter(|&i| xs[i] == top).count();
    let pick = ((tie * tied as f64) as usize).min(tied - 1);
    among.filter(|&i| xs[i] == top).nth(pick).unwrap()
}

struct Market<'a> {
    n: usize,
    strategy: &'a PiecewisePolyDist,
    costs: &'a PiecewisePolyDist,
}

impl Market<'_> {
    /// Firm signals, with firm 0 optionally on its own strategy.
    fn signals(&self, d: &Draws, dev: Option<&PiecewisePolyDist>, xs: &mut [f64]) {
        for (j, (x, &u)) in xs.iter_mut().zip(&d.signals).enumerate() {
            let g = match (j, dev) {
                (0, Some(g)) => g,
                _ => self.strategy,
            };
            *x = g.quantile(u);
        }
    }

    fn shop(&self, c: f64, xs: &[f64], d: &Draws, order: &mut Vec<usize>) -> Trip {
        order.clear();
        order.extend(0..self.n);
        for i in (1..self.n).rev() {
            let j = ((d.order[i - 1] * (i + 1) as f64) as usize).min(i);
            order.swap(i, j);
        }
        for (k, &j) in order.iter().enumerate() {
            // r(c) <= x  iff  c_G(x) <= c, under the conjectured strategy.
            if c > 0.0 && self.strategy.incremental_benefit(xs[j]) <= c {
                return Trip { buyer: j, visits: k + 1, value: xs[j], stopped: true };
            }
        }
        let buyer = best_of(xs, 0..self.n, d.tie);
        Trip { buyer, visits: self.n, value: xs[buyer], stopped: false }
    }
}

#[derive(Clone)]
struct Acc {
    wins: Vec<u64>,
    cs: (f64, f64),
    visits: (f64, f64),
    bin_count: Vec<u64>,
    bin_wins: Vec<u64>,
    stop: Vec<(u64, u64)>,
    ties: Vec<(u64, u64)>,
}

impl Acc {
    fn new(n: usize, bins: usize, atoms: usize) -> Self {
        Acc {
            wins: vec![0; n],
            cs: (0.0, 0.0),
            visits: (0.0, 0.0),
            bin_count: vec![0; bins],
            bin_wins: vec![0; bins],
            stop: vec![(0, 0); COST_QUANTILE_BINS],
            ties: vec![(0, 0); atoms],
        }
    }

    fn merge(mut self, o: &Acc) -> Self {
        for (a, b) in self.wins.iter_mut().zip(&o.wins) {
            *a += b;
        }
        self.cs = (self.cs.0 + o.cs.0, self.cs.1 + o.cs.1);
        self.visits = (self.visits.0 + o.visits.0, self.visits.1 + o.visits.1);
        for (a, b) in self.bin_count.iter_mut().zip(&o.bin_count) {
            *a += b;
        }
        for (a, b) in self.bin_wins.iter_mut().zip(&o.bin_wins) {
            *a += b;
        }
        for (a, b) in self.stop.iter_mut().zip(&o.stop) {
            a.0 += b.0;
            a.1 += b.1;
        }
        for (a, b) in self.ties.iter_mut().zip(&o.ties) {
            a.0 += b.0;
            a.1 += b.1;
        }
        self
    }
}

fn check(cfg: &SimConfig) -> Result<()> {
    if cfg.n < 2 {
        return config("simulation needs at least two firms");
    }
    if cfg.consumers == 0 || cfg.bins == 0 {
        return config("simulation needs consumers and bins");
    }
    if cfg.costs.has_atoms() {
        return config("cost distribution must be atomless");
    }
    Ok(())
}

fn chunks(consumers: u64) -> Vec<(u64, u64)> {
    (0..consumers.div_ceil(CHUNK)).map(|k| (k * CHUNK, ((k + 1) * CHUNK).min(consumers))).collect()
}

pub fn simulate_market(cfg: &SimConfig) -> Result<SimOutcome> {
    check(cfg)?;
    let n = cfg.n;
    let g = &cfg.strategy;
    let market = Market { n, strategy: g, costs: &cfg.costs };
    let (lo, hi) = g.support();
    let width = (hi - lo) / cfg.bins as f64;
    let atoms = g.atoms().to_vec();

    let parts: Vec<Acc> = chunks(cfg.consumers)
        .par_iter()
        .map(|&(from, to)| {
            let mut acc = Acc::new(n, cfg.bins, atoms.len());
            let mut d = Draws::new(n);
            let mut xs = vec![0.0; n];
            let mut order = Vec::with_capacity(n);
            for i in from..to {
                d.fill(cfg.seed, i);
                let c = market.costs.quantile(d.cost);
                market.signals(&d, None, &mut xs);
                let trip = market.shop(c, &xs, &d, &mut order);
                acc.wins[trip.buyer] += 1;
                let cs = trip.value - c * trip.visits as f64;
                acc.cs.0 += cs;
                acc.cs.1 += cs * cs;
                let v = trip.visits as f64;
                acc.visits.0 += v;
                acc.visits.1 += v * v;
                for (j, &x) in xs.iter().enumerate() {
                    let b = (((x - lo) / width) as usize).min(cfg.bins - 1);
                    acc.bin_count[b] += 1;
                    acc.bin_wins[b] += (trip.buyer == j) as u64;
                }
                let q = ((d.cost * COST_QUANTILE_BINS as f64) as usize).min(COST_QUANTILE_BINS - 1);
                acc.stop[q].0 += 1;
                acc.stop[q].1 += trip.stopped as u64;
                for (t, a) in atoms.iter().enumerate() {
                    if xs[0] == a.at {
                        acc.ties[t].0 += 1;
                        acc.ties[t].1 += (best_of(&xs, 0..n, d.tie) == 0) as u64;
                    }
                }
            }
            acc
        })
        .collect();
    let acc = parts.iter().fold(Acc::new(n, cfg.bins, atoms.len()), |a, b| a.merge(b));

    let m = cfg.consumers;
    Ok(SimOutcome {
        n,
        consumers: m,
        seed: cfg.seed,
        firm_payoffs: acc.wins.iter().map(|&w| Estimate::proportion(w, m)).collect(),
        empirical_demand: (0..cfg.bins)
            .map(|b| DemandBin {
                lo: lo + width * b as f64,
                hi: if b + 1 == cfg.bins { hi } else { lo + width * (b + 1) as f64 },
                count: acc.bin_count[b],
                demand: Estimate::proportion(acc.bin_wins[b], acc.bin_count[b]),
            })
            .collect(),
        cs: Estimate::from_sums(acc.cs.0, acc.cs.1, m),
        search_length: Estimate::from_sums(acc.visits.0, acc.visits.1, m),
        stop_rate_by_cost_quantile: acc.stop.iter().map(|&(k, s)| Estimate::proportion(s, k)).collect(),
        ties: atoms
            .iter()
            .zip(&acc.ties)
            .map(|(a, &(k, w))| TieCheck {
                at: a.at,
                mass: a.mass,
                win_rate: Estimate::proportion(w, k),
                predicted: (g.cdf(a.at).powi(n as i32) - g.cdf_left(a.at).powi(n as i32)) / (n as f64 * a.mass),
            })
            .collect(),
    })
}

/// Firm 0 switches to `dev` while consumers keep conjecturing the common
/// strategy. The gain is estimated from paired consumers.
pub fn simulate_deviation(cfg: &SimConfig, dev: &PiecewisePolyDist) -> Result<DeviationOutcome> {
    check(cfg)?;
    let n = cfg.n;
    let market = Market { n, strategy: &cfg.strategy, costs: &cfg.costs };
    let parts: Vec<[f64; 6]> = chunks(cfg.consumers)
        .par_iter()
        .map(|&(from, to)| {
            let mut s = [0.0; 6];
            let mut d = Draws::new(n);
            let mut xs = vec![0.0; n];
            let mut order = Vec::with_capacity(n);
            for i in from..to {
                d.fill(cfg.seed, i);
                let c = market.costs.quantile(d.cost);
                market.signals(&d, Some(dev), &mut xs);
                let with = (market.shop(c, &xs, &d, &mut order).buyer == 0) as u8 as f64;
                market.signals(&d, None, &mut xs);
                let without = (market.shop(c, &xs, &d, &mut order).buyer == 0) as u8 as f64;
                let diff = with - without;
                s[0] += with;
                s[1] += with;
                s[2] += without;
                s[3] += without;
                s[4] += diff;
                s[5] += diff * diff;
            }
            s
        })
        .collect();
    let mut t = [0.0; 6];
    for p in &parts {
        for (a, b) in t.iter_mut().zip(p) {
            *a += b;
        }
    }
    let m = cfg.consumers;
    Ok(DeviationOutcome {
        payoff: Estimate::from_sums(t[0], t[1], m),
        baseline: Estimate::from_sums(t[2], t[3], m),
        gain: Estimate::from_sums(t[4], t[5], m),
    })
}

/// `E_G[D(X; G) | X in bin]` for each bin of a simulation outcome; `NaN`
/// where the strategy puts no mass.
pub fn analytic_bin_demand(curve: &DemandCurve, bins: &[DemandBin]) -> Vec<f64> {
    let g = curve.conjecture();
    let mut cuts = curve.breakpoints();
    cuts.extend(g.knots().iter().copied());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bins.iter()
        .map(|b| {
            let last = std::ptr::eq(b, bins.last().unwrap());
            let mut mass = 0.0;
            let mut total = 0.0;
            for s in g.segments() {
                let (p, q) = (s.lo.max(b.lo), s.hi.min(b.hi));
                if q <= p {
                    continue;
                }
                let mut pts = vec![p];
                pts.extend(cuts.iter().copied().filter(|&t| t > p && t < q));
                pts.push(q);
                for w in pts.windows(2) {
                    total += gauss(&|x: f64| curve.value(x) * g.density(x, Side::Right), w[0], w[1]);
                    mass += gauss(&|x: f64| g.density(x, Side::Right), w[0], w[1]);
                }
            }
            for a in g.atoms() {
                if a.at >= b.lo && (a.at < b.hi || (last && a.at <= b.hi)) {
                    total += a.mass * curve.value(a.at);
                    mass += a.mass;
                }
            }
            if mass > 0.0 {
                total / mass
            } else {
                f64::NAN
            }
        })
        .collect()
}
