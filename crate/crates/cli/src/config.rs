//! JSON experiment configuration. The shipped schema lives in
//! `schema/config.schema.json`; serde enforces the same shape here.

use std::path::Path;

use meandim::algebraic::AlgebraicActionSpec;
use meandim::tiling::MarkerTrace;
use meandim::{Budget, Family, FiniteMetricSpace, Mode, OrbitKind, SystemSpec, Weighting};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Environment override for [`Budget::enumeration_points`].
pub const BUDGET_ENV: &str = "MEANDIM_BUDGET_POINTS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CoveringProfile,
    DimProfile,
    RdCurve,
    Frostman,
    NiceMeasure,
    Tiling,
    Algebraic,
    ExampleSuite,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::CoveringProfile => "covering-profile",
            Kind::DimProfile => "dim-profile",
            Kind::RdCurve => "rd-curve",
            Kind::Frostman => "frostman",
            Kind::NiceMeasure => "nice-measure",
            Kind::Tiling => "tiling",
            Kind::Algebraic => "algebraic",
            Kind::ExampleSuite => "example-suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Hilbert,
    Harmonic,
    Geometric,
    AlgebraicLinked,
}

/// A marker trace given explicitly or generated the way the boundary-density
/// argument builds one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSource {
    Explicit(MarkerTrace),
    Lemma { start: i64, len: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default)]
    pub experiment: Option<Kind>,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub space: Option<FiniteMetricSpace>,
    #[serde(default)]
    pub algebraic: Option<AlgebraicActionSpec>,
    #[serde(default)]
    pub trace: Option<TraceSource>,
    #[serde(default)]
    pub suite: Option<SuiteName>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default, rename = "N")]
    pub n: Vec<usize>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub family: Family,
    #[serde(default)]
    pub orbit: Option<OrbitKind>,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Cylinder length for distances between measures.
    #[serde(default)]
    pub cylinder: Option<usize>,
    /// Window `[0, R]` for boundary density.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl ExperimentConfig {
    /// An otherwise empty config naming one registered example.
    pub fn for_suite(name: SuiteName) -> Self {
        let mut cfg: ExperimentConfig = serde_json::from_str("{}").expect("empty config parses");
        cfg.suite = Some(name);
        cfg
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { stage: "config", path: path.to_path_buf(), source })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|e| CliError::Config(format!("{}: not UTF-8: {e}", path.display())))?;
        Ok((Self::parse(&text, path)?, bytes))
    }

    /// Applies the budget environment override, if set.
    pub fn apply_env(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.budget.enumeration_points = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{BUDGET_ENV}={v:?} is not a nonnegative integer")))?;
        }
        Ok(())
    }

    /// Checks the fields `kind` needs; shapes of nested specs are checked by
    /// the core constructors.
    pub fn validate(&self, kind: Kind) -> Result<()> {
        if let Some(k) = self.experiment {
            if k != kind {
                return Err(CliError::Config(format!(
                    "config is for `{}` but the subcommand is `{}`",
                    k.name(),
                    kind.name()
                )));
            }
        }
        if self.formats.is_empty() {
            return Err(CliError::Config("formats must name at least one of json, csv".into()));
        }
        let need = |ok: bool, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(format!("`{}` needs {what}", kind.name())))
            }
        };
        let eps_ok = !self.epsilon.is_empty();
        let n_ok = !self.n.is_empty();
        match kind {
            Kind::CoveringProfile | Kind::RdCurve => {
                need(self.system.is_some(), "a `system`")?;
                need(eps_ok, "a nonempty `epsilon` grid")?;
                need(n_ok, "a nonempty `N` list")?;
            }
            Kind::DimProfile => {
                need(self.system.is_some() != self.space.is_some(), "exactly one of `system` and `space`")?;
                need(eps_ok, "a nonempty `epsilon` grid")?;
                need(self.space.is_some() || n_ok, "a nonempty `N` list")?;
            }
            Kind::Frostman => {
                need(self.system.is_some() != self.space.is_some(), "exactly one of `system` and `space`")?;
                need(self.s.is_some() && self.delta.is_some(), "`s` and `delta`")?;
                need(self.space.is_some() || self.n.len() == 1, "a single `N` with a system")?;
            }
            Kind::NiceMeasure => {
                need(self.system.is_some(), "a `system`")?;
                need(self.s.is_some() && self.delta.is_some(), "`s` and `delta`")?;
                need(eps_ok, "a nonempty `epsilon` grid")?;
                need(n_ok, "a nonempty `N` schedule")?;
            }
            Kind::Tiling => {
                need(self.trace.is_some(), "a `trace`")?;
                if matches!(self.trace, Some(TraceSource::Lemma { .. })) {
                    need(self.seed.is_some(), "a `seed` to generate a trace")?;
                }
            }
            Kind::Algebraic => {
                need(self.algebraic.is_some(), "an `algebraic` spec")?;
                need(eps_ok, "a nonempty `epsilon` grid")?;
                need(n_ok, "a nonempty `N` list")?;
            }
            Kind::ExampleSuite => need(self.suite.is_some(), "a `suite` name")?,
        }
        if self.epsilon.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(CliError::Config("epsilon values must be positive and finite".into()));
        }
        if self.n.contains(&0) {
            return Err(CliError::Config("N values must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_has_position() {
        let err = ExperimentConfig::parse("{\n  \"epsilon\": [0.5,\n}", Path::new("x.json")).unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (3, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::parse(r#"{"epsilom": [0.5]}"#, Path::new("x")).is_err());
    }

    #[test]
    fn env_override_and_kind_mismatch() {
        let mut cfg = ExperimentConfig::parse(r#"{"experiment": "tiling"}"#, Path::new("x")).unwrap();
        cfg.apply_env(Some("77")).unwrap();
        assert_eq!(cfg.budget.enumeration_points, 77);
        assert!(cfg.apply_env(Some("lots")).is_err());
        assert_eq!(cfg.validate(Kind::RdCurve).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn lemma_trace_needs_seed() {
        let cfg = ExperimentConfig::parse(r#"{"trace": {"lemma": {"start": 0, "len": 50, "n": 3}}}"#, Path::new("x")).unwrap();
        assert!(cfg.validate(Kind::Tiling).is_err());
    }
}
