use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::info::NORM_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Frostman,
    Averaged,
    Product,
    Haar,
    Custom,
}

/// Probability mass on a list of words of one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOnSystem {
    pub words: Vec<Vec<u32>>,
    pub mass: Vec<f64>,
    pub provenance: Provenance,
}

impl MeasureOnSystem {
    pub fn uniform(words: Vec<Vec<u32>>, provenance: Provenance) -> Self {
        let n = words.len();
        MeasureOnSystem { words, mass: vec![1.0 / n as f64; n], provenance }
    }

    pub fn validate(&self) -> Result<()> {
        if self.words.is_empty() || self.words.len() != self.mass.len() {
            return invalid("measure needs one mass per word and a nonempty support");
        }
        if self.mass.iter().any(|m| !(*m >= 0.0)) {
            return invalid("measure has negative mass");
        }
        let s: f64 = self.mass.iter().sum();
        if (s - 1.0).abs() > NORM_TOL * self.mass.len() as f64 {
            return invalid(format!("measure mass sums to {s}"));
        }
        Ok(())
    }

    pub fn word_len(&self) -> usize {
        self.words.first().map_or(0, |w| w.len())
    }

    /// Mass of the word, zero if absent.
    pub fn mass_of(&self, w: &[u32]) -> f64 {
        self.words.iter().zip(&self.mass).filter(|(v, _)| v.as_slice() == w).map(|(_, m)| m).sum()
    }
}
