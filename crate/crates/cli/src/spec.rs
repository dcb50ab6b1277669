//! Experiment file format.
//!
//! ```json
//! {
//!   "version": 1,
//!   "market": {
//!     "prior": {"kind": "uniform", "support": [0, 1]},
//!     "costs": {"kind": "uniform", "support": [0, 0.18]},
//!     "n": 2
//!   },
//!   "verify": {"a": 0.3, "n_sweep": [2, 5, 10, 50]}
//! }
//! ```

use serde::{Deserialize, Serialize};
use uce_core::schema::DistSpec;
use uce_core::{GridConfig, MarketConfig, Result, Tolerances, UceError};

pub const VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub version: u32,
    pub market: MarketSpec,
    #[serde(default)]
    pub verify: Option<VerifyBlock>,
    #[serde(default)]
    pub oracle: Option<OracleBlock>,
    #[serde(default)]
    pub simulate: Option<SimulateBlock>,
    #[serde(default)]
    pub compstat: Option<CompstatBlock>,
    #[serde(default)]
    pub welfare: Option<WelfareBlock>,
    #[serde(default)]
    pub plot: Option<PlotBlock>,
    /// Default output directory; `--out` wins.
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub prior: DistSpec,
    pub costs: DistSpec,
    pub n: usize,
    #[serde(default)]
    pub tol: Tolerances,
    #[serde(default)]
    pub grid: GridConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    pub a: f64,
    #[serde(default)]
    pub n_sweep: Vec<usize>,
    #[serde(default)]
    pub method: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    pub a: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    /// Censorship threshold of the symmetric strategy.
    pub a: f64,
    pub consumers: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub seed: u64,
    /// Firm 0 plays this instead.
    #[serde(default)]
    pub deviation: Option<DistSpec>,
}

fn default_bins() -> usize {
    50
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// Market costs stretched by each factor.
    AlphaStretch { alphas: Vec<f64> },
    /// Market costs halved `k` times.
    Halving { ks: Vec<u32> },
    /// Ramps piling up at the market's `c̄`.
    Ramp { ks: Vec<u32> },
    /// Market costs mixed with `U[0, c̄]`.
    Interpolate { lambdas: Vec<f64> },
    Explicit { members: Vec<Member> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Member {
    pub param: f64,
    pub costs: DistSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompstatBlock {
    pub family: Family,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelfareBlock {
    /// Thresholds to report; the maximal one when empty.
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default = "default_quantiles")]
    pub quantiles: Vec<f64>,
    /// Equal-mean alternative to compare against the market costs.
    #[serde(default)]
    pub compare_costs: Option<DistSpec>,
}

fn default_quantiles() -> Vec<f64> {
    vec![0.1, 0.5, 0.9]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotBlock {
    /// Threshold for the demand panel; the maximal one when absent.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    201
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| UceError::Config(format!("spec: {e}")))?;
        if spec.version != VERSION {
            return Err(UceError::Config(format!("spec version {} not supported (expected {VERSION})", spec.version)));
        }
        Ok(spec)
    }

    pub fn market(&self) -> Result<MarketConfig> {
        let m = &self.market;
        let mut cfg = MarketConfig::new(m.prior.build()?, m.costs.build()?, m.n)?;
        cfg.tol = m.tol;
        cfg.grid = m.grid;
        Ok(cfg)
    }
}
