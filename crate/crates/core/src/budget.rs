use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Limits on exhaustive work. Knob names match the CLI config keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Largest point count accepted by exact (branch-and-bound) solvers.
    pub exact_points: usize,
    /// Largest point count accepted by exhaustive enumeration of a system.
    pub enumeration_points: u128,
    /// Largest number of candidate blocks for the all-subsets family.
    pub subset_points: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            exact_points: 20,
            enumeration_points: 1 << 12,
            subset_points: 15,
        }
    }
}

impl Budget {
    pub(crate) fn check_exact(&self, what: &str, n: usize) -> Result<()> {
        if n > self.exact_points {
            return Err(Error::Capacity {
                what: format!("{what} (exact mode; use greedy for large spaces)"),
                needed: n as u128,
                limit: self.exact_points as u128,
                knob: "exact_points",
            });
        }
        Ok(())
    }

    pub(crate) fn check_enumeration(&self, what: &str, n: u128) -> Result<()> {
        if n > self.enumeration_points {
            return Err(Error::Capacity {
                what: what.to_string(),
                needed: n,
                limit: self.enumeration_points,
                knob: "enumeration_points",
            });
        }
        Ok(())
    }

    pub(crate) fn check_subsets(&self, n: usize) -> Result<()> {
        if n > self.subset_points {
            return Err(Error::Capacity {
                what: "all-subsets block family".to_string(),
                needed: n as u128,
                limit: self.subset_points as u128,
                knob: "subset_points",
            });
        }
        Ok(())
    }
}
