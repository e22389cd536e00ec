//! A desk-scale laboratory for mean dimension and rate-distortion theory on
//! finite, window-truncated shift systems.
//!
//! The modules follow the data flow: [`metric`] spaces come from [`systems`],
//! are measured by covering numbers and [`hausdorff`] contents, and carry
//! measures whose [`ratedist`] curves are fitted by [`estimate`].
//! [`ergodic`], [`tiling`] and [`algebraic`] implement the remaining
//! constructions.

pub mod algebraic;
pub mod budget;
pub mod ergodic;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod hausdorff;
pub mod info;
pub mod lp;
pub mod measure;
pub mod metric;
pub mod ratedist;
pub mod shift_cover;
pub mod systems;
pub mod tiling;

pub use budget::Budget;
pub use error::{Error, Result};
pub use estimate::{fit_slope, DimensionEstimate, Weighting};
pub use hausdorff::{Family, FrostmanCertificate};
pub use info::{DiscreteDistribution, JointDistribution};
pub use measure::{MeasureOnSystem, Provenance};
pub use metric::{covering_number, separating_number, tame_transform, validate_metric, Cover, FiniteMetricSpace, Mode};
pub use ratedist::{RdCurve, RdPoint};
pub use systems::{build_full_shift, build_sequence_example, orbit_metric, Alphabet, OrbitKind, Policy, SystemSpec, Variant};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
