//! Pre-registered example configurations with their expected values.

use meandim::algebraic::{linked_spec, rdim_prodim_experiment, SLOPE_TOL};
use meandim::estimate::half_octave_grid;
use meandim::experiments::{hilbert_grid, hilbert_mdim, sequence_mdim, CoveringProfile};
use meandim::systems::Variant;
use meandim::{Budget, Weighting};
use serde::Serialize;
use serde_json::json;

use crate::config::SuiteName;
use crate::error::{at, CliError, Result};
use crate::run::{algebraic_table, covering_table, num, Artifacts, Table};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub quantity: String,
    pub value: f64,
    pub target: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

fn check(quantity: &str, value: f64, target: f64, lo: f64, hi: f64) -> SuiteCheck {
    SuiteCheck { quantity: quantity.into(), value, target, lo, hi, pass: (lo..=hi).contains(&value) }
}

fn covering_suite(name: SuiteName, p: &CoveringProfile, target: f64, lo: f64, hi: f64) -> Result<Artifacts> {
    let checks = vec![check("covering slope", p.estimate.slope, target, lo, hi)];
    finish(name, checks, json!(p), covering_table(&p.samples))
}

fn finish(name: SuiteName, checks: Vec<SuiteCheck>, detail: serde_json::Value, samples: Table) -> Result<Artifacts> {
    let mut t = Table::new(&["quantity", "value", "target", "lo", "hi", "pass"]);
    for c in &checks {
        t.push(vec![c.quantity.clone(), num(c.value), num(c.target), num(c.lo), num(c.hi), c.pass.to_string()]);
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = json!({ "suite": name, "pass": pass, "checks": checks, "detail": detail, "samples": samples.rows.len() });
    Ok(Artifacts { report, table: t })
}

pub fn run_suite(name: SuiteName) -> Result<Artifacts> {
    let w = Weighting::LogInverseEps;
    match name {
        SuiteName::Hilbert => {
            let p = hilbert_mdim(8, 3, 5, w).map_err(at("experiments", "hilbert"))?;
            covering_suite(name, &p, 1.0, 0.8, 1.2)
        }
        SuiteName::Harmonic => {
            let p = sequence_mdim(Variant::Harmonic, 64, 2, 32, &half_octave_grid(2, 20), w)
                .map_err(at("experiments", "harmonic"))?;
            covering_suite(name, &p, 0.5, 0.35, 0.65)
        }
        SuiteName::Geometric => {
            let p = sequence_mdim(Variant::Geometric, 32, 2, 32, &half_octave_grid(2, 60), w)
                .map_err(at("experiments", "geometric"))?;
            covering_suite(name, &p, 0.0, f64::NEG_INFINITY, 0.1)
        }
        SuiteName::AlgebraicLinked => {
            let rep = rdim_prodim_experiment(&linked_spec(8, 3), &hilbert_grid(8), &[1, 2, 3], w, &Budget::default())
                .map_err(at("algebraic", "linked"))?;
            let limit = rep
                .prodim
                .exact_limit
                .ok_or_else(|| CliError::Output("linked example has no exact prodim limit".into()))?;
            let checks = vec![
                check("prodim", limit as f64, 1.0, 1.0, 1.0),
                check("rd slope", rep.rd.estimate.slope, 1.0, 1.0 - SLOPE_TOL, 1.0 + SLOPE_TOL),
                check("covering slope", rep.covering.slope, 1.0, 1.0 - SLOPE_TOL, 1.0 + SLOPE_TOL),
            ];
            let samples = algebraic_table(&rep);
            finish(name, checks, json!(rep), samples)
        }
    }
}
