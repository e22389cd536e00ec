//! Registered experiments on the worked examples: covering-number and
//! rate-distortion slopes for the Hilbert cube surrogate, the harmonic and
//! geometric sequence spaces, and the linked algebraic action.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimate::{fit_slope, half_octave_grid, DimensionEstimate, Weighting};
use crate::ratedist::{product_rd, RdCurve, RdPoint};
use crate::shift_cover::{box_cover_bounds, shift_kernel, CoverBounds, Letter};
use crate::systems::{build_sequence_example, Alphabet, Policy, SystemSpec, Variant};

/// Letter geometry of a one-dimensional alphabet.
pub fn letter_of(alphabet: &Alphabet) -> Result<Letter> {
    match alphabet {
        Alphabet::QuantizedInterval { levels } => Ok(Letter::Line((0..*levels).map(|s| alphabet.value(s)).collect())),
        Alphabet::ExplicitSet { values } => Ok(Letter::Line(values.clone())),
        Alphabet::TorusQuantized { r: 1, q } => Ok(Letter::Cycle(*q)),
        Alphabet::TorusQuantized { .. } => invalid("box covers need a one-dimensional alphabet"),
    }
}

/// Bounds on `log₂ #(X, d_N, ε)` for an unconstrained shift.
pub fn shift_cover_bounds(sys: &SystemSpec, n: usize, eps: f64) -> Result<CoverBounds> {
    if sys.constraint.is_some() {
        return invalid("shift_cover_bounds needs an unconstrained shift");
    }
    box_cover_bounds(&letter_of(&sys.alphabet)?, &shift_kernel(sys.window), n, eps, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringSample {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub log2_upper: f64,
    pub log2_lower: f64,
    /// `log₂ #/N` from the upper bound.
    pub s_upper: f64,
    pub s_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringProfile {
    pub label: String,
    pub samples: Vec<CoveringSample>,
    /// Slope of `S(ε) = log₂ #(d_N, ε)/N` at the largest `N`, upper bound.
    pub estimate: DimensionEstimate,
    /// Same fit on the lower bound.
    pub estimate_lower: DimensionEstimate,
    pub truncation_error: f64,
}

pub fn covering_profile(
    label: &str,
    sys: &SystemSpec,
    eps: &[f64],
    ns: &[usize],
    weighting: Weighting,
) -> Result<CoveringProfile> {
    let mut samples = Vec::new();
    for &n in ns {
        for &e in eps {
            let b = shift_cover_bounds(sys, n, e)?;
            samples.push(CoveringSample {
                epsilon: e,
                n,
                log2_upper: b.log2_upper,
                log2_lower: b.log2_lower,
                s_upper: b.log2_upper / n as f64,
                s_lower: b.log2_lower / n as f64,
            });
        }
    }
    let nmax = *ns.iter().max().ok_or_else(|| crate::Error::Invalid("empty N list".into()))?;
    let at: Vec<&CoveringSample> = samples.iter().filter(|s| s.n == nmax).collect();
    let xs: Vec<f64> = at.iter().map(|s| s.epsilon).collect();
    let up: Vec<f64> = at.iter().map(|s| s.s_upper).collect();
    let lo: Vec<f64> = at.iter().map(|s| s.s_lower).collect();
    Ok(CoveringProfile {
        label: label.to_string(),
        estimate: fit_slope(&xs, &up, weighting)?,
        estimate_lower: fit_slope(&xs, &lo, weighting)?,
        samples,
        truncation_error: sys.truncation_error(),
    })
}

/// `ε = 2^{-j/2}` over `[1/k, 1/2]`.
pub fn hilbert_grid(k: usize) -> Vec<f64> {
    half_octave_grid(2, (2.0 * (k as f64).log2()).round() as u32)
}

pub fn hilbert_system(k: usize, window: usize) -> SystemSpec {
    SystemSpec {
        alphabet: Alphabet::QuantizedInterval { levels: k },
        window,
        policy: Policy::Exhaustive,
        transform: None,
        constraint: None,
    }
}

/// Covering slope of the `k`-level Hilbert cube surrogate.
pub fn hilbert_mdim(k: usize, window: usize, n_max: usize, weighting: Weighting) -> Result<CoveringProfile> {
    let sys = hilbert_system(k, window);
    let ns: Vec<usize> = (1..=n_max).collect();
    covering_profile(&format!("hilbert k={k}"), &sys, &hilbert_grid(k), &ns, weighting)
}

/// Covering slope of the harmonic or geometric sequence space.
pub fn sequence_mdim(
    variant: Variant,
    k: usize,
    window: usize,
    n_max: usize,
    eps: &[f64],
    weighting: Weighting,
) -> Result<CoveringProfile> {
    let sys = build_sequence_example(k, variant, window, Policy::Exhaustive)?;
    let ns: Vec<usize> = (1..=n_max).collect();
    covering_profile(&format!("{variant:?} k={k}"), &sys, eps, &ns, weighting)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdProfile {
    pub label: String,
    pub curve: RdCurve,
    /// Slope of `inf_N R_N(ε)` over the supplied block lengths.
    pub estimate: DimensionEstimate,
    /// Slope at each block length.
    pub per_n: Vec<(usize, DimensionEstimate)>,
    pub truncation_error: f64,
}

pub fn rd_profile_from(label: &str, curve: RdCurve, ns: &[usize], weighting: Weighting, trunc: f64) -> Result<RdProfile> {
    let inf = curve.infimum();
    let estimate = fit_slope(
        &inf.iter().map(|p| p.0).collect::<Vec<_>>(),
        &inf.iter().map(|p| p.1).collect::<Vec<_>>(),
        weighting,
    )?;
    let per_n = ns
        .iter()
        .map(|&n| {
            let at = curve.at_n(n);
            fit_slope(
                &at.iter().map(|p| p.0).collect::<Vec<_>>(),
                &at.iter().map(|p| p.1).collect::<Vec<_>>(),
                weighting,
            )
            .map(|e| (n, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RdProfile { label: label.to_string(), curve, estimate, per_n, truncation_error: trunc })
}

/// Rate-distortion slope of the uniform product measure on the `k`-level
/// Hilbert cube surrogate.
pub fn hilbert_rdim(k: usize, window: usize, ns: &[usize], eps: &[f64], weighting: Weighting) -> Result<RdProfile> {
    let sys = hilbert_system(k, window);
    let p = vec![1.0 / k as f64; k];
    let mut points: Vec<RdPoint> = Vec::new();
    for &n in ns {
        for &e in eps {
            points.push(product_rd(&sys, &p, n, e)?);
        }
    }
    let curve = RdCurve { source: format!("uniform product, {k} levels, W={window}"), points };
    rd_profile_from(&format!("hilbert rdim k={k}"), curve, ns, weighting, sys.truncation_error())
}
