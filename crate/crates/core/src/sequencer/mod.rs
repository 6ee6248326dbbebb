//! Next-waypoint selection: greedy nearest neighbour, exhaustive best-cost path (BCP)
//! over constrained orderings, and the probabilistic fractional search that scans a
//! shuffled subset of the BCP orderings.

mod permutations;
mod search;
mod trial;

pub use permutations::{factorial, HeapPermutations, LexPermutations};
pub use search::{
    bcp_next, euclidean_dist, greedy_next, probabilistic_next, retained_optimal_count,
    dist_metric, retained_count, Sequencer, SequencerResult, DEFAULT_ENUMERATION_CAP,
};
pub use trial::{accuracy_trial, decision_seed, AccuracyStats, TrialRow, TRIAL_CSV_HEADER};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used when deciding whether two tour costs are equal.
pub const COST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequencerError {
    #[error("no pending waypoints to choose from")]
    EmptyPending,
    #[error("{m} intermediates exceed the enumeration cap of {cap}")]
    EnumerationBudgetExceeded { m: usize, cap: usize },
    #[error("search fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Greedy,
    Bcp,
    Probabilistic,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Greedy => "GREEDY",
            Method::Bcp => "BCP",
            Method::Probabilistic => "PROBABILISTIC",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Fraction of the shuffled ordering space the probabilistic search keeps.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SearchFraction(f64);

impl SearchFraction {
    pub const FULL: SearchFraction = SearchFraction(1.0);

    pub fn new(gamma: f64) -> Result<Self, SequencerError> {
        if gamma > 0.0 && gamma <= 1.0 {
            Ok(Self(gamma))
        } else {
            Err(SequencerError::InvalidFraction(gamma))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// `max(1, ⌈gamma · total⌉)`, with products that are integral up to rounding noise
    /// (e.g. `0.1 · 720`) treated as exact.
    pub fn retained(&self, total: u64) -> u64 {
        let exact = self.0 * total as f64;
        let nearest = exact.round();
        let kept = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            exact.ceil()
        };
        (kept as u64).clamp(1, total.max(1))
    }
}

impl TryFrom<f64> for SearchFraction {
    type Error = SequencerError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<SearchFraction> for f64 {
    fn from(g: SearchFraction) -> f64 {
        g.0
    }
}
