//! Upper-censorship equilibria of an oligopoly search market in which firms
//! choose how much match-value information to disclose and consumers differ
//! in their search costs.
//!
//! The crate is organised bottom-up:
//!
//! * [`dist`]: piecewise-polynomial distributions with exact integrals;
//! * [`cost`]: shape statistics of the search-cost distribution;
//! * [`demand`]: per-type and interim demand under a symmetric conjecture;
//! * [`censor`]: upper censorship, the virtual demand `φ_a` and the solver for
//!   the maximal threshold;
//! * [`price`]: the convex price-function certificate for general candidates;
//! * [`oracle`]: an LP best-response oracle over discretised contractions;
//! * [`welfare`] and [`compstat`]: surplus accounting and cost-distribution
//!   transforms;
//! * [`sim`]: a Monte Carlo market with counter-based random streams;
//! * [`registry`]: named equilibrium checks selectable at runtime.

pub mod censor;
pub mod compstat;
pub mod cost;
pub mod demand;
pub mod dist;
pub mod error;
pub mod market;
pub mod oracle;
pub mod poly;
pub mod price;
pub mod registry;
pub mod schema;
pub mod sim;
pub mod simplex;
pub mod welfare;

pub use dist::{Atom, PiecewisePolyDist, Segment, Side};
pub use error::{Result, UceError};
pub use market::{GridConfig, MarketConfig, Tolerances};
