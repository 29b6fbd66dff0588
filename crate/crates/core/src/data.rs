//! Trial groups and per-group data summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three arms of the gold standard design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Test,
    Reference,
    Placebo,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Test, Group::Reference, Group::Placebo];

    /// One-letter code used in input files and reports.
    pub fn code(&self) -> char {
        match self {
            Group::Test => 'T',
            Group::Reference => 'R',
            Group::Placebo => 'P',
        }
    }

    pub fn from_code(c: &str) -> Option<Group> {
        match c.trim().to_ascii_uppercase().as_str() {
            "T" | "TEST" => Some(Group::Test),
            "R" | "REFERENCE" => Some(Group::Reference),
            "P" | "PLACEBO" => Some(Group::Placebo),
            _ => None,
        }
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Sufficient statistic of one group's sample.
///
/// `sum` and `sum_sq` are the first two power sums of the observations; they
/// carry everything the built-in families need (success count for binary,
/// event total for Poisson, first two moments for normal, total for
/// exponential).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStat {
    /// Number of observations, at least 1.
    pub n: u64,
    /// Sum of the observations.
    pub sum: f64,
    /// Sum of squared observations.
    pub sum_sq: f64,
}

impl SufficientStat {
    pub fn new(n: u64, sum: f64, sum_sq: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("group size n must be at least 1".into()));
        }
        if !sum.is_finite() || !sum_sq.is_finite() {
            return Err(Error::Invalid("group statistics must be finite".into()));
        }
        Ok(SufficientStat { n, sum, sum_sq })
    }

    /// Count-style statistic (binary successes, Poisson event totals).
    pub fn from_count(n: u64, count: u64) -> Result<Self> {
        Self::new(n, count as f64, count as f64)
    }

    pub fn from_observations(obs: &[f64]) -> Result<Self> {
        if obs.is_empty() {
            return Err(Error::Invalid("group sample must be non-empty".into()));
        }
        if obs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("observations must be finite".into()));
        }
        Ok(SufficientStat {
            n: obs.len() as u64,
            sum: obs.iter().sum(),
            sum_sq: obs.iter().map(|x| x * x).sum(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
}

/// Per-group data for the three-armed trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupData {
    pub test: SufficientStat,
    pub reference: SufficientStat,
    pub placebo: SufficientStat,
}

impl GroupData {
    pub fn new(test: SufficientStat, reference: SufficientStat, placebo: SufficientStat) -> Self {
        GroupData {
            test,
            reference,
            placebo,
        }
    }

    pub fn get(&self, group: Group) -> &SufficientStat {
        match group {
            Group::Test => &self.test,
            Group::Reference => &self.reference,
            Group::Placebo => &self.placebo,
        }
    }

    /// Total sample size n = n_T + n_R + n_P.
    pub fn total_n(&self) -> u64 {
        self.test.n + self.reference.n + self.placebo.n
    }

    /// Empirical allocation fractions (n_T/n, n_R/n, n_P/n).
    pub fn fractions(&self) -> [f64; 3] {
        let n = self.total_n() as f64;
        [
            self.test.n as f64 / n,
            self.reference.n as f64 / n,
            self.placebo.n as f64 / n,
        ]
    }
}
