//! Constructing payoff laws that rationalize observed stopping probabilities.

mod moments;
mod naive;
mod sophisticated;

pub use moments::moment_renormalize;
pub use naive::{naive_law, naive_operator, rationalize_naive, NaiveOptions};
pub use sophisticated::{c1_lower_bound, rationalize_sophisticated};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::model::{EquilibriumProfile, Preferences, StoppingProblem, TerminalValue};
use serde::{Deserialize, Serialize};

/// Conditional stopping probabilities `p_1..p_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingData {
    pub p: Vec<f64>,
}

impl StoppingData {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let d = StoppingData { p };
        d.validate()?;
        Ok(d)
    }

    pub fn horizon(&self) -> usize {
        self.p.len()
    }

    /// Checks `0 < p_1 <= ... <= p_T < 1`.
    pub fn validate(&self) -> Result<()> {
        let p = &self.p;
        if p.is_empty() {
            return Err(Error::invalid("stopping data must cover at least one period"));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("stopping probabilities must be finite"));
        }
        if !(p[0] > 0.0) {
            return Err(Error::invalid(format!("p_1 must be positive, got {}", p[0])));
        }
        if let Some(i) = p.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::invalid(format!(
                "stopping probabilities decrease at period {} ({} < {})",
                i + 2,
                p[i + 1],
                p[i]
            )));
        }
        let last = p[p.len() - 1];
        if !(last < 1.0) {
            return Err(Error::invalid(format!("p_T must be below 1, got {last}")));
        }
        Ok(())
    }
}

/// Naive fixed-point iteration diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations_from_bottom: usize,
    pub iterations_from_top: usize,
    /// Sup-norm distance between the bottom- and top-started limits.
    pub top_bottom_gap: f64,
    /// Sup-norm size of the last bottom-started step.
    pub final_step: f64,
}

/// The internal mass points and weights of a construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionLog {
    Sophisticated {
        /// `π_0 < π_1 < ... < π_{T+1}`.
        atoms: Vec<f64>,
        weights: Vec<f64>,
        /// The same atoms and weights as exact `p/q` strings.
        exact_atoms: Vec<String>,
        exact_weights: Vec<String>,
        c1: f64,
        c1_bound: f64,
        c1_retries: usize,
        /// Number of downward f64 adjustments of interior atoms.
        polish_moves: usize,
        /// Sup-error of the f64 re-solve against the input probabilities.
        f64_round_trip_error: f64,
    },
    Naive {
        /// Segment endpoints `π_0 <= ... <= π_{T+1}`.
        breakpoints: Vec<f64>,
        weights: Vec<f64>,
        c1: f64,
        c2: f64,
        iteration: Option<IterationReport>,
    },
    Renormalized {
        base: Box<ConstructionLog>,
        shift: f64,
        scale: f64,
        exact_atoms: Option<Vec<String>>,
        f64_round_trip_error: f64,
    },
}

impl ConstructionLog {
    /// Exact atoms and weights if the construction carries them.
    pub fn exact_law(&self) -> Option<Result<crate::exact::ExactDiscrete>> {
        use crate::exact::{parse, ExactDiscrete};
        let (atoms, weights) = match self {
            ConstructionLog::Sophisticated { exact_atoms, exact_weights, .. } => (exact_atoms, exact_weights),
            ConstructionLog::Renormalized { exact_atoms: Some(a), base, .. } => match base.as_ref() {
                ConstructionLog::Sophisticated { exact_weights, .. } => (a, exact_weights),
                _ => return None,
            },
            _ => return None,
        };
        let parse_all = |xs: &Vec<String>| xs.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>();
        Some(parse_all(atoms).and_then(|a| ExactDiscrete::new(a, parse_all(weights)?)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalizationResult {
    pub distribution: Distribution,
    pub prefs: Preferences,
    pub terminal_value: TerminalValue,
    /// Equilibrium induced by `distribution`.
    pub profile: EquilibriumProfile,
    pub construction_log: ConstructionLog,
}

impl RationalizationResult {
    pub fn horizon(&self) -> usize {
        self.profile.p.len()
    }

    /// The stationary problem the construction solves.
    pub fn problem(&self) -> Result<StoppingProblem> {
        StoppingProblem::stationary(self.distribution.clone(), self.horizon(), self.terminal_value)
    }
}

/// Sup-norm distance between two equally long vectors.
pub(crate) fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
