use crate::spec::{ExperimentSpec, Family};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use uce_core::censor::{phi_rows, solve_a_max, upper_censorship, Censorship};
use uce_core::compstat::{alpha_stretch, compstat_table, halving_sequence, ramp_sequence, uniform_interpolate};
use uce_core::demand::DemandCurve;
use uce_core::oracle::{build_problem, deviation_dist, deviation_payoff, dump_lp, solve_br};
use uce_core::registry::Registry;
use uce_core::sim::{analytic_bin_demand, simulate_deviation, simulate_market, SimConfig};
use uce_core::welfare::{compare_equal_mean, welfare_row};
use uce_core::{MarketConfig, PiecewisePolyDist, UceError};

#[derive(Debug)]
pub enum CliError {
    Core(UceError),
    Io(String),
    /// The computation ran but the candidate is not an equilibrium.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(UceError::Numeric(_)) => 3,
            CliError::Core(_) | CliError::Io(_) => 2,
            CliError::Failed(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Failed(e) => write!(f, "verification failed: {e}"),
        }
    }
}

impl From<UceError> for CliError {
    fn from(e: UceError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Where results go: files under a directory, or stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> CliResult<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Sink { dir })
    }

    fn writer(&self, name: &str) -> CliResult<Box<dyn Write>> {
        Ok(match &self.dir {
            Some(d) => Box::new(fs::File::create(d.join(name))?),
            None => Box::new(std::io::stdout()),
        })
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut w = self.writer(&format!("{name}.json"))?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(self.writer(&format!("{name}.csv"))?);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Only files; CSV and JSON side outputs are skipped on stdout.
    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }
}

fn block<'a, T>(b: &'a Option<T>, name: &str) -> CliResult<&'a T> {
    b.as_ref().ok_or_else(|| CliError::Core(UceError::Config(format!("spec has no \"{name}\" block"))))
}

pub fn solve(spec: &ExperimentSpec, sink: &Sink) -> CliResult<()> {
    let m = spec.market()?;
    let r = solve_a_max(&m.prior, &m.costs)?;
    sink.json("solve", &r)
}

pub fn verify(spec: &ExperimentSpec, method: Option<&str>, emit_phi: Option<&PathBuf>, sink: &Sink) -> CliResult<()> {
    let m = spec.market()?;
    let v = block(&spec.verify, "verify")?;
    let reg = Registry::default();
    let method = method.or(v.method.as_deref()).unwrap_or("phi-secant");
    reg.get(method)?;
    if let Some(path) = emit_phi {
        let cen = Censorship::new(&m.prior, &m.costs, v.a, m.n)?;
        let rows: Vec<PhiRow> = phi_rows(&cen, 1001).into_iter().map(|[x, d, phi]| PhiRow { x, d, phi }).collect();
        let mut w = csv::Writer::from_path(path)?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    if v.n_sweep.is_empty() {
        let out = reg.run(method, &m, v.a)?;
        sink.json("verify", &out)?;
        return if out.passes { Ok(()) } else { Err(CliError::Failed(format!("{method} rejects a = {} at n = {}", v.a, m.n))) };
    }
    let outs = v
        .n_sweep
        .par_iter()
        .map(|&n| {
            let mut mn = m.clone();
            mn.n = n;
            mn.validate()?;
            reg.run(method, &mn, v.a)
        })
        .collect::<uce_core::Result<Vec<_>>>()?;
    let smallest = outs.iter().filter(|o| o.passes).map(|o| o.n).min();
    sink.json("verify", &json!({ "method": method, "a": v.a, "smallest_passing_n": smallest, "reports": outs }))?;
    match smallest {
        Some(_) => Ok(()),
        None => Err(CliError::Failed(format!("{method} rejects a = {} at every n in the sweep", v.a))),
    }
}

#[derive(Serialize)]
struct PhiRow {
    x: f64,
    #[serde(rename = "D")]
    d: f64,
    phi: f64,
}

pub fn oracle(spec: &ExperimentSpec, dump: Option<&PathBuf>, sink: &Sink) -> CliResult<()> {
    let m = spec.market()?;
    let o = block(&spec.oracle, "oracle")?;
    let g = upper_censorship(&m.prior, o.a)?;
    let p = build_problem(&g, &m.prior, &m.costs, m.n, m.grid.lp)?;
    if let Some(path) = dump {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        dump_lp(&p, &mut w)?;
        w.flush()?;
    }
    let s = solve_br(&p)?;
    let gap = (s.value - 1.0 / m.n as f64 - p.chord_slack).max(0.0);
    let dev = deviation_dist(&p, &s)?;
    let payoff = deviation_payoff(&g, &m.costs, m.n, &dev)?;
    sink.json(
        "oracle",
        &json!({
            "a": o.a,
            "n": m.n,
            "grid": m.grid.lp,
            "equilibrium_gap": gap,
            "chord_slack": p.chord_slack,
            "deviation_payoff": payoff,
            "solution": s,
        }),
    )?;
    if gap > m.tol.lp {
        return Err(CliError::Failed(format!("profitable deviation from a = {} (gap {gap:e})", o.a)));
    }
    Ok(())
}

#[derive(Serialize)]
struct BinRow {
    bin_mid: f64,
    #[serde(rename = "D_emp")]
    d_emp: f64,
    se: f64,
    count: u64,
    #[serde(rename = "D_analytic")]
    d_analytic: f64,
}

pub fn simulate(spec: &ExperimentSpec, seed: Option<u64>, sink: &Sink) -> CliResult<()> {
    let m = spec.market()?;
    let b = block(&spec.simulate, "simulate")?;
    let cfg = SimConfig {
        n: m.n,
        strategy: upper_censorship(&m.prior, b.a)?,
        costs: m.costs.clone(),
        consumers: b.consumers,
        seed: seed.unwrap_or(b.seed),
        bins: b.bins,
    };
    let out = simulate_market(&cfg)?;
    let curve = DemandCurve::new(&cfg.strategy, &cfg.costs, cfg.n)?;
    let analytic = analytic_bin_demand(&curve, &out.empirical_demand);
    let rows: Vec<BinRow> = out
        .empirical_demand
        .iter()
        .zip(analytic)
        .map(|(bin, d)| BinRow { bin_mid: bin.mid(), d_emp: bin.demand.mean, se: bin.demand.se, count: bin.count, d_analytic: d })
        .collect();
    let deviation = match &b.deviation {
        Some(d) => Some(simulate_deviation(&cfg, &d.build()?)?),
        None => None,
    };
    sink.json("simulate", &json!({ "a": b.a, "outcome": out, "deviation": deviation }))?;
    if sink.has_dir() {
        sink.csv("demand_bins", &rows)?;
    }
    Ok(())
}

fn family_members(m: &MarketConfig, family: &Family) -> CliResult<Vec<(f64, PiecewisePolyDist)>> {
    let h = &m.costs;
    let cb = m.c_bar();
    let out: uce_core::Result<Vec<_>> = match family {
        Family::AlphaStretch { alphas } => alphas.iter().map(|&a| alpha_stretch(h, a, m.mu()).map(|d| (a, d))).collect(),
        Family::Halving { ks } => ks.iter().map(|&k| halving_sequence(h, k).map(|d| (k as f64, d))).collect(),
        Family::Ramp { ks } => ks.iter().map(|&k| ramp_sequence(cb, k).map(|d| (k as f64, d))).collect(),
        Family::Interpolate { lambdas } => lambdas.iter().map(|&l| uniform_interpolate(h, l, cb).map(|d| (l, d))).collect(),
        Family::Explicit { members } => members.iter().map(|x| x.costs.build().map(|d| (x.param, d))).collect(),
    };
    Ok(out?)
}

pub fn compstat(spec: &ExperimentSpec, sink: &Sink) -> CliResult<()> {
    let m = spec.market()?;
    let b = block(&spec.compstat, "compstat")?;
    let members = family_members(&m, &b.family)?;
    for (_, h) in &members {
        uce_core::market::check_costs(h, m.mu())?;
    }
    let rows = compstat_table(&m.prior, &members, m.n)?;
    sink.csv("compstat", &rows)
}

pub fn welfare(spec: &ExperimentSpec, sink: &Sink) -> CliResult<()> {
    let m = spec.market()?;
    let default = crate::spec::WelfareBlock { a: vec![], quantiles: vec![0.1, 0.5, 0.9], compare_costs: None };
    let b = spec.welfare.as_ref().unwrap_or(&default);
    let thresholds = if b.a.is_empty() { vec![solve_a_max(&m.prior, &m.costs)?.a_max] } else { b.a.clone() };
    let rows = thresholds
        .par_iter()
        .map(|&a| welfare_row(&m.prior, &m.costs, a, m.n, &b.quantiles))
        .collect::<uce_core::Result<Vec<_>>>()?;
    let comparison = match &b.compare_costs {
        Some(h2) => Some(compare_equal_mean(&m.prior, &m.costs, &h2.build()?, m.n)?),
        None => None,
    };
    sink.json("welfare", &json!({ "rows": rows, "comparison": comparison }))
}

#[derive(Serialize)]
struct TangentRow {
    c: f64,
    #[serde(rename = "H")]
    cdf: f64,
    tangent: f64,
}

pub fn emit_plot(spec: &ExperimentSpec, sink: &Sink) -> CliResult<()> {
    if !sink.has_dir() {
        return Err(CliError::Core(UceError::Config("emit-plot writes two CSV panels and needs --out".into())));
    }
    let m = spec.market()?;
    let default = crate::spec::PlotBlock { a: None, points: 201 };
    let b = spec.plot.as_ref().unwrap_or(&default);
    if b.points < 2 {
        return Err(CliError::Core(UceError::Config("plot needs at least 2 points".into())));
    }
    let sol = solve_a_max(&m.prior, &m.costs)?;
    let slope = sol.cost_shape.hc_m;
    let cb = m.c_bar();
    let tangent: Vec<TangentRow> = (0..b.points)
        .map(|i| {
            let c = cb * i as f64 / (b.points - 1) as f64;
            TangentRow { c, cdf: m.costs.cdf(c), tangent: slope * c }
        })
        .collect();
    sink.csv("cost_tangent", &tangent)?;
    let a = b.a.unwrap_or(sol.a_max);
    let cen = Censorship::new(&m.prior, &m.costs, a, m.n)?;
    let rows: Vec<PhiRow> = phi_rows(&cen, b.points).into_iter().map(|[x, d, phi]| PhiRow { x, d, phi }).collect();
    sink.csv("phi_panel", &rows)?;
    sink.json("plot", &json!({ "a": a, "cM": sol.cost_shape.c_m, "tangent_slope": slope, "k_a": cen.k_a }))
}
