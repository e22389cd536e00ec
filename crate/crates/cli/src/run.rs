//! Dispatch from a validated config to the core operations, producing a JSON
//! report and a flat table.

use meandim::algebraic::rdim_prodim_experiment;
use meandim::ergodic::nice_measure_pipeline;
use meandim::experiments::{covering_profile, rd_profile_from};
use meandim::hausdorff::{dim_profile, frostman_measure, mean_hausdorff_estimate, verify_scaling_law};
use meandim::measure::{MeasureOnSystem, Provenance};
use meandim::metric::DIAM_TOL;
use meandim::ratedist::{dynamical_rd, product_rd, BA_GAP};
use meandim::systems::Alphabet;
use meandim::tiling::{boundary_density, lemma_trace, tile, EQUIVARIANCE_TOL};
use meandim::{lp::LP_TOL, orbit_metric, Mode, OrbitKind, RdCurve, RdPoint, SystemSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Kind, TraceSource};
use crate::error::{at, CliError, Result};
use crate::suite::run_suite;

/// Rows for `results.csv`; every cell is already formatted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub report: Value,
    pub table: Table,
}

pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Output(e.to_string()))
}

/// Tolerances the emitted numbers were computed under.
pub fn tolerances() -> Value {
    json!({
        "diameter": DIAM_TOL,
        "blahut_arimoto_gap": BA_GAP,
        "lp": LP_TOL,
        "equivariance": EQUIVARIANCE_TOL,
        "slope": meandim::algebraic::SLOPE_TOL,
    })
}

pub fn execute(kind: Kind, cfg: &ExperimentConfig) -> Result<Artifacts> {
    match kind {
        Kind::CoveringProfile => covering(cfg),
        Kind::DimProfile => dim(cfg),
        Kind::RdCurve => rd_curve(cfg),
        Kind::Frostman => frostman(cfg),
        Kind::NiceMeasure => nice(cfg),
        Kind::Tiling => tiling(cfg),
        Kind::Algebraic => algebraic(cfg),
        Kind::ExampleSuite => run_suite(cfg.suite.expect("validated")),
    }
}

fn system(cfg: &ExperimentConfig) -> Result<&SystemSpec> {
    let sys = cfg.system.as_ref().expect("validated");
    sys.validate().map_err(at("systems", "validate"))?;
    Ok(sys)
}

pub(crate) fn covering_table(samples: &[meandim::experiments::CoveringSample]) -> Table {
    let mut t = Table::new(&["epsilon", "N", "log2_upper", "log2_lower", "s_upper", "s_lower"]);
    for s in samples {
        t.push(vec![num(s.epsilon), s.n.to_string(), num(s.log2_upper), num(s.log2_lower), num(s.s_upper), num(s.s_lower)]);
    }
    t
}

fn covering(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sys = system(cfg)?;
    let p = covering_profile("covering profile", sys, &cfg.epsilon, &cfg.n, cfg.weighting)
        .map_err(at("metric", "covering profile"))?;
    Ok(Artifacts { table: covering_table(&p.samples), report: to_value(&p)? })
}

fn dim(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let tau = cfg.tau.unwrap_or(0.0);
    if let Some(space) = &cfg.space {
        let mode = cfg.mode.unwrap_or(Mode::Exact);
        let dims = cfg
            .epsilon
            .par_iter()
            .map(|&e| dim_profile(space, e, tau, mode, &cfg.budget))
            .collect::<meandim::Result<Vec<f64>>>()
            .map_err(at("hausdorff", "dim profile"))?;
        let mut t = Table::new(&["epsilon", "dim"]);
        for (e, d) in cfg.epsilon.iter().zip(&dims) {
            t.push(vec![num(*e), num(*d)]);
        }
        let report = json!({ "tau": tau, "mode": mode, "epsilon": cfg.epsilon, "dim": dims });
        return Ok(Artifacts { report, table: t });
    }
    let sys = system(cfg)?;
    let kind = cfg.orbit.unwrap_or(OrbitKind::Max);
    let est = mean_hausdorff_estimate(sys, &cfg.epsilon, &cfg.n, tau, kind, &cfg.budget)
        .map_err(at("hausdorff", "mean dimension"))?;
    let mut t = Table::new(&["epsilon", "N", "dim", "per_symbol", "mode"]);
    for s in &est.samples {
        t.push(vec![num(s.epsilon), s.n.to_string(), num(s.dim), num(s.per_symbol), format!("{:?}", s.mode).to_lowercase()]);
    }
    Ok(Artifacts { table: t, report: to_value(&est)? })
}

fn rd_point(sys: &SystemSpec, cfg: &ExperimentConfig, n: usize, eps: f64) -> meandim::Result<RdPoint> {
    let product = sys.constraint.is_none() && !matches!(sys.alphabet, Alphabet::TorusQuantized { r, .. } if r > 1);
    if product {
        let k = sys.alphabet.size();
        product_rd(sys, &vec![1.0 / k as f64; k], n, eps)
    } else {
        let words = sys.words(sys.depth_len(n), &cfg.budget)?;
        dynamical_rd(sys, &MeasureOnSystem::uniform(words, Provenance::Haar), n, eps, None)
    }
}

fn rd_curve(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sys = system(cfg)?;
    let grid: Vec<(usize, f64)> = cfg.n.iter().flat_map(|&n| cfg.epsilon.iter().map(move |&e| (n, e))).collect();
    // Collecting an indexed parallel iterator keeps grid order.
    let points = grid
        .par_iter()
        .map(|&(n, e)| rd_point(sys, cfg, n, e))
        .collect::<meandim::Result<Vec<_>>>()
        .map_err(at("ratedist", "rate-distortion"))?;
    let mut t = Table::new(&["epsilon", "N", "rate", "lower", "distortion", "converged", "iterations"]);
    for p in &points {
        t.push(vec![
            num(p.epsilon),
            p.n.to_string(),
            num(p.rate),
            num(p.lower),
            num(p.distortion),
            p.converged.to_string(),
            p.iterations.to_string(),
        ]);
    }
    let curve = RdCurve { source: "uniform".into(), points };
    let profile = rd_profile_from("rd curve", curve, &cfg.n, cfg.weighting, sys.truncation_error())
        .map_err(at("estimate", "slope fit"))?;
    Ok(Artifacts { table: t, report: to_value(&profile)? })
}

fn frostman(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let (s, delta, tau) = (cfg.s.expect("validated"), cfg.delta.expect("validated"), cfg.tau.unwrap_or(0.0));
    let space = match &cfg.space {
        Some(sp) => sp.clone(),
        None => orbit_metric(system(cfg)?, cfg.n[0], cfg.orbit.unwrap_or(OrbitKind::Avg), &cfg.budget)
            .map_err(at("systems", "orbit metric"))?
            .0,
    };
    let cert = frostman_measure(&space, s, delta, tau, cfg.family, &cfg.budget).map_err(at("hausdorff", "frostman"))?;
    let mut t = Table::new(&["point", "label", "mass"]);
    for (i, m) in cert.measure.iter().enumerate() {
        t.push(vec![i.to_string(), space.points.get(i).cloned().unwrap_or_default(), num(*m)]);
    }
    let scaling = if cert.mass > 0.0 {
        let nu = cert.normalized().map_err(at("hausdorff", "normalize"))?;
        Some(verify_scaling_law(&space, &nu, s, delta, tau, cfg.family, &cfg.budget).map_err(at("hausdorff", "scaling law"))?)
    } else {
        None
    };
    Ok(Artifacts { table: t, report: json!({ "certificate": to_value(&cert)?, "scaling": to_value(&scaling)? }) })
}

fn nice(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sys = system(cfg)?;
    let rep = nice_measure_pipeline(
        sys,
        cfg.s.expect("validated"),
        cfg.delta.expect("validated"),
        cfg.tau.unwrap_or(0.0),
        &cfg.n,
        &cfg.epsilon,
        cfg.cylinder.unwrap_or(3),
        &cfg.budget,
    )
    .map_err(at("ergodic", "nice measure"))?;
    let mut t = Table::new(&["N", "epsilon", "rate", "gmt_bound", "certificate_accepted", "holds"]);
    for st in &rep.stages {
        for c in &st.checks {
            t.push(vec![st.n.to_string(), num(c.epsilon), num(c.rate), opt(c.gmt_bound), opt(c.certificate_accepted), opt(c.holds)]);
        }
    }
    Ok(Artifacts { table: t, report: to_value(&rep)? })
}

fn tiling(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let trace = match cfg.trace.as_ref().expect("validated") {
        TraceSource::Explicit(t) => t.clone(),
        TraceSource::Lemma { start, len, n } => {
            lemma_trace(&mut ChaCha8Rng::seed_from_u64(cfg.seed.expect("validated")), *start, *len, *n)
        }
    };
    trace.validate().map_err(at("tiling", "trace"))?;
    let tl = tile(&trace).map_err(at("tiling", "voronoi"))?;
    let density = match cfg.radius {
        Some(r) => Some(boundary_density(std::slice::from_ref(&trace), r).map_err(at("tiling", "boundary density"))?),
        None => None,
    };
    // Plot-ready: one row per positive site, with its cell when nonempty.
    let mut t = Table::new(&["a", "height", "left", "right"]);
    for (i, &v) in trace.values.iter().enumerate() {
        if v > 0.0 {
            let a = trace.start + i as i64;
            let cell = tl.intervals.get(&a);
            t.push(vec![a.to_string(), num(1.0 / v), opt(cell.map(|c| num(c.0))), opt(cell.map(|c| num(c.1)))]);
        }
    }
    Ok(Artifacts { table: t, report: json!({ "tiling": to_value(&tl)?, "density": to_value(&density)? }) })
}

pub(crate) fn algebraic_table(rep: &meandim::algebraic::AlgebraicReport) -> Table {
    let mut t = Table::new(&["curve", "epsilon", "N", "rate"]);
    let mut add = |name: &str, pts: &[RdPoint]| {
        for p in pts {
            t.push(vec![name.to_string(), num(p.epsilon), p.n.to_string(), num(p.rate)]);
        }
    };
    add("rd", &rep.rd.curve.points);
    if let Some(lo) = &rep.rd_lower {
        add("rd_lower", &lo.curve.points);
    }
    t
}

fn algebraic(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let spec = cfg.algebraic.as_ref().expect("validated");
    let rep = rdim_prodim_experiment(spec, &cfg.epsilon, &cfg.n, cfg.weighting, &cfg.budget)
        .map_err(at("algebraic", "rdim/prodim"))?;
    Ok(Artifacts { table: algebraic_table(&rep), report: to_value(&rep)? })
}
