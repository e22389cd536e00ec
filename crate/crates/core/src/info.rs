//! Finite distributions, channels and mutual information in bits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub mass: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        let d = DiscreteDistribution { mass };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(n: usize) -> Self {
        DiscreteDistribution { mass: vec![1.0 / n as f64; n] }
    }

    pub fn delta(n: usize, at: usize) -> Self {
        let mut mass = vec![0.0; n];
        mass[at] = 1.0;
        DiscreteDistribution { mass }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mass.is_empty() {
            return invalid("distribution has empty support");
        }
        if let Some(v) = self.mass.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return invalid(format!("negative or non-finite mass {v}"));
        }
        let s: f64 = self.mass.iter().sum();
        if (s - 1.0).abs() > NORM_TOL * self.mass.len().max(1) as f64 {
            return invalid(format!("mass sums to {s}, not 1"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.mass)
    }
}

/// Joint mass over (source row, reproduction column).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub mass: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(mass: Vec<Vec<f64>>) -> Result<Self> {
        let j = JointDistribution { mass };
        j.validate()?;
        Ok(j)
    }

    /// Joint of a source and a row-stochastic channel `ν(y|x)`.
    pub fn from_channel(source: &[f64], channel: &[Vec<f64>]) -> Self {
        JointDistribution {
            mass: source
                .iter()
                .zip(channel)
                .map(|(p, row)| row.iter().map(|q| p * q).collect())
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cols = self.mass.first().map_or(0, |r| r.len());
        if cols == 0 {
            return invalid("joint distribution is empty");
        }
        if self.mass.iter().any(|r| r.len() != cols) {
            return invalid("joint distribution rows differ in length");
        }
        if self.mass.iter().flatten().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return invalid("joint distribution has negative or non-finite mass");
        }
        let s: f64 = self.mass.iter().flatten().sum();
        let n = self.mass.len() * cols;
        if (s - 1.0).abs() > NORM_TOL * n as f64 {
            return invalid(format!("joint mass sums to {s}, not 1"));
        }
        Ok(())
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.mass.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let cols = self.mass.first().map_or(0, |r| r.len());
        let mut m = vec![0.0; cols];
        for r in &self.mass {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        m
    }

    /// Conditional `ν(y|x)`; rows with zero mass are left uniform.
    pub fn channel(&self) -> Vec<Vec<f64>> {
        self.mass
            .iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                if s > 0.0 {
                    r.iter().map(|v| v / s).collect()
                } else {
                    vec![1.0 / r.len() as f64; r.len()]
                }
            })
            .collect()
    }

    pub fn expected(&self, cost: &[Vec<f64>]) -> f64 {
        self.mass
            .iter()
            .zip(cost)
            .map(|(r, c)| r.iter().zip(c).map(|(p, d)| p * d).sum::<f64>())
            .sum()
    }
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

/// `I(X;Y) = Σ p(x,y) log₂(p(x,y) / (p(x)p(y)))`, zero cells contributing 0.
pub fn mutual_information(joint: &JointDistribution) -> Result<f64> {
    joint.validate()?;
    Ok(mi_unchecked(&joint.mass))
}

pub(crate) fn mi_unchecked(mass: &[Vec<f64>]) -> f64 {
    let px: Vec<f64> = mass.iter().map(|r| r.iter().sum()).collect();
    let cols = mass.first().map_or(0, |r| r.len());
    let mut py = vec![0.0; cols];
    for r in mass {
        for (a, v) in py.iter_mut().zip(r) {
            *a += v;
        }
    }
    let mut i = 0.0;
    for (r, &pxv) in mass.iter().zip(&px) {
        for (&v, &pyv) in r.iter().zip(&py) {
            if v > 0.0 {
                i += v * (v / pxv / pyv).log2();
            }
        }
    }
    i.max(0.0)
}

/// Mutual information of a source and a channel.
pub fn mi_of(source: &[f64], channel: &[Vec<f64>]) -> f64 {
    mi_unchecked(&JointDistribution::from_channel(source, channel).mass)
}
