//! Interchangeable tests of "is `U_a` an equilibrium with `n` firms",
//! looked up by name.

use crate::censor::{cost_condition, upper_censorship, verify_uce_with};
use crate::error::{config, Result};
use crate::market::MarketConfig;
use crate::oracle::{build_problem, solve_br};
use crate::price::verify_price_function;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub method: String,
    pub a: f64,
    pub n: usize,
    pub passes: bool,
    /// Method-specific report.
    pub detail: Value,
}

pub trait EquilibriumCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn check(&self, m: &MarketConfig, a: f64) -> Result<(bool, Value)>;
}

struct PhiSecant;

impl EquilibriumCheck for PhiSecant {
    fn name(&self) -> &'static str {
        "phi-secant"
    }
    fn describe(&self) -> &'static str {
        "finite-n convexity and dominance of the secant certificate"
    }
    fn check(&self, m: &MarketConfig, a: f64) -> Result<(bool, Value)> {
        let r = verify_uce_with(&m.prior, &m.costs, a, m.n, m.grid.phi)?;
        Ok((r.passes(), serde_json::to_value(&r).expect("report serializes")))
    }
}

struct CostLimit;

impl EquilibriumCheck for CostLimit {
    fn name(&self) -> &'static str {
        "cost-limit"
    }
    fn describe(&self) -> &'static str {
        "large-market condition on the cost distribution"
    }
    fn check(&self, m: &MarketConfig, a: f64) -> Result<(bool, Value)> {
        let ok = cost_condition(&m.prior, &m.costs, a)?;
        Ok((ok, json!({ "cost_condition": ok })))
    }
}

struct LpOracle;

impl EquilibriumCheck for LpOracle {
    fn name(&self) -> &'static str {
        "lp-oracle"
    }
    fn describe(&self) -> &'static str {
        "best-response LP over discretised contractions of the prior"
    }
    fn check(&self, m: &MarketConfig, a: f64) -> Result<(bool, Value)> {
        let g = upper_censorship(&m.prior, a)?;
        let p = build_problem(&g, &m.prior, &m.costs, m.n, m.grid.lp)?;
        let s = solve_br(&p)?;
        let gap = (s.value - 1.0 / m.n as f64 - p.chord_slack).max(0.0);
        Ok((
            gap <= m.tol.lp,
            json!({
                "gap": gap,
                "value": s.value,
                "chord_slack": p.chord_slack,
                "duality_gap": s.duality_gap,
                "support": s.support,
            }),
        ))
    }
}

struct PriceFunction;

impl EquilibriumCheck for PriceFunction {
    fn name(&self) -> &'static str {
        "price-function"
    }
    fn describe(&self) -> &'static str {
        "convex price function built from the candidate's pooling gaps"
    }
    fn check(&self, m: &MarketConfig, a: f64) -> Result<(bool, Value)> {
        let g = upper_censorship(&m.prior, a)?;
        let r = verify_price_function(&g, &m.prior, &m.costs, m.n)?;
        Ok((r.passes, serde_json::to_value(&r).expect("report serializes")))
    }
}

pub struct Registry {
    checks: Vec<Box<dyn EquilibriumCheck>>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry { checks: vec![Box::new(PhiSecant), Box::new(CostLimit), Box::new(LpOracle), Box::new(PriceFunction)] }
    }
}

impl Registry {
    pub fn register(&mut self, check: Box<dyn EquilibriumCheck>) {
        self.checks.retain(|c| c.name() != check.name());
        self.checks.push(check);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn EquilibriumCheck> {
        match self.checks.iter().find(|c| c.name() == name) {
            Some(c) => Ok(c.as_ref()),
            None => config(format!("unknown method {name:?}; known: {}", self.names().join(", "))),
        }
    }

    pub fn run(&self, name: &str, m: &MarketConfig, a: f64) -> Result<CheckOutcome> {
        let (passes, detail) = self.get(name)?.check(m, a)?;
        Ok(CheckOutcome { method: name.to_string(), a, n: m.n, passes, detail })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::PiecewisePolyDist;

    fn market(n: usize) -> MarketConfig {
        MarketConfig::new(PiecewisePolyDist::uniform(0.0, 1.0).unwrap(), PiecewisePolyDist::uniform(0.0, 0.18).unwrap(), n)
            .unwrap()
    }

    #[test]
    fn every_method_agrees_on_clear_cases() {
        let reg = Registry::default();
        let mut m = market(2);
        m.grid.lp = 201;
        for name in reg.names() {
            assert!(reg.run(name, &m, 0.3).unwrap().passes, "{name} at 0.3");
            assert!(!reg.run(name, &m, 0.6).unwrap().passes, "{name} at 0.6");
        }
    }

    #[test]
    fn unknown_method_is_a_config_error() {
        let err = Registry::default().run("bisection", &market(2), 0.3).unwrap_err();
        assert!(err.to_string().contains("phi-secant"));
    }
}
