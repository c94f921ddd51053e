//! Parametric misspecification harness: fit β by grid search to observed
//! stopping probabilities under a moment-matched parametric family.

use crate::distributions::{Distribution, Family};
use crate::error::{Error, Result};
use crate::hazard;
use crate::identification::Grid;
use crate::model::{solve_equilibrium, EquilibriumProfile, Preferences, StoppingProblem, TerminalValue};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    SquaredDistance,
    /// Cross-entropy `-Σ q_data ln q_model` over completion times (minimized).
    Likelihood,
}

/// Which probabilities the squared distance compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceSpace {
    /// Conditional stopping probabilities `p_t`.
    Conditional,
    /// Unconditional completion masses `q_t`; this is the reading that
    /// reproduces the published distance column.
    #[default]
    Unconditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSpec {
    pub family: Family,
    pub mean: f64,
    pub sd: f64,
    pub delta: f64,
    /// `β̂ = β` when true, `β̂ = 1` otherwise.
    pub sophisticated: bool,
    pub criterion: Criterion,
    #[serde(default)]
    pub distance_space: DistanceSpace,
    pub beta_grid: Grid,
    pub horizon: usize,
    pub terminal_value: TerminalValue,
}

impl EstimationSpec {
    pub fn validate(&self) -> Result<()> {
        self.beta_grid.validate()?;
        if !(self.beta_grid.lo < self.beta_grid.hi) {
            return Err(Error::invalid("beta grid needs lo < hi"));
        }
        if !(self.beta_grid.lo > 0.0 && self.beta_grid.hi <= 1.0) {
            return Err(Error::invalid("beta grid must lie in (0, 1]"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        Distribution::from_mean_sd(self.family, self.mean, self.sd)?;
        Ok(())
    }

    pub fn law(&self) -> Result<Distribution> {
        Distribution::from_mean_sd(self.family, self.mean, self.sd)
    }

    pub fn prefs(&self, beta: f64) -> Result<Preferences> {
        let beta_hat = if self.sophisticated { beta } else { 1.0 };
        Preferences::new(beta, beta_hat, self.delta)
    }

    pub fn problem(&self) -> Result<StoppingProblem> {
        StoppingProblem::stationary(self.law()?, self.horizon, self.terminal_value)
    }

    pub fn label(&self) -> String {
        let kind = if self.sophisticated { "sophisticated" } else { "naive" };
        format!("{} {kind}", self.family.name())
    }
}

/// The equilibrium of the spec's model at `beta`.
pub fn model_profile(spec: &EstimationSpec, beta: f64) -> Result<EquilibriumProfile> {
    solve_equilibrium(&spec.problem()?, &spec.prefs(beta)?)
}

/// Completion-time masses with the never-completed mass as a last outcome.
fn outcomes(p: &[f64]) -> Vec<f64> {
    let (mut q, residual) = hazard::unconditional(p);
    q.push(residual);
    q
}

/// Fit criterion between model and data stopping probabilities (smaller is better).
///
/// A model that gives zero mass to an observed outcome scores `+inf` under
/// the likelihood criterion.
pub fn criterion_value(model_p: &[f64], data_p: &[f64], criterion: Criterion, space: DistanceSpace) -> Result<f64> {
    if model_p.len() != data_p.len() || model_p.is_empty() {
        return Err(Error::invalid(format!(
            "model and data need equal non-empty horizons (got {} and {})",
            model_p.len(),
            data_p.len()
        )));
    }
    let value = match (criterion, space) {
        (Criterion::SquaredDistance, DistanceSpace::Conditional) => {
            model_p.iter().zip(data_p).map(|(a, b)| (a - b).powi(2)).sum()
        }
        (Criterion::SquaredDistance, DistanceSpace::Unconditional) => {
            let (qm, qd) = (outcomes(model_p), outcomes(data_p));
            qm.iter().zip(&qd).map(|(a, b)| (a - b).powi(2)).sum()
        }
        (Criterion::Likelihood, _) => {
            let (qm, qd) = (outcomes(model_p), outcomes(data_p));
            let mut total = 0.0;
            for (m, d) in qm.iter().zip(&qd) {
                if *d > 0.0 {
                    if *m <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    total -= d * m.ln();
                }
            }
            total
        }
    };
    Ok(value)
}

/// Entropy of the data's completion-time distribution; the likelihood
/// criterion of a perfectly fitting model.
pub fn data_entropy(data_p: &[f64]) -> f64 {
    outcomes(data_p).iter().filter(|&&q| q > 0.0).map(|q| -q * q.ln()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub beta: f64,
    #[serde(with = "crate::extended::scalar")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub beta_hat: f64,
    pub criterion_value: f64,
    /// The table's column: the Euclidean distance (square root of the sum of
    /// squares) for the distance criterion, the cross-entropy otherwise.
    pub reported_value: f64,
    pub per_beta_curve: Vec<CurvePoint>,
    /// Grid points whose model profile has a falling hazard (should be none).
    pub hazard_violations: Vec<f64>,
}

/// Exhaustive scan over the β grid; ties go to the smaller β.
pub fn estimate_beta(spec: &EstimationSpec, data_p: &[f64]) -> Result<EstimateResult> {
    spec.validate()?;
    if data_p.len() != spec.horizon {
        return Err(Error::invalid(format!(
            "data covers {} periods but the spec has horizon {}",
            data_p.len(),
            spec.horizon
        )));
    }
    let problem = spec.problem()?;
    let betas = spec.beta_grid.values();
    let evaluated: Vec<(f64, bool)> = betas
        .par_iter()
        .map(|&b| {
            let profile = solve_equilibrium(&problem, &spec.prefs(b)?)?;
            let monotone = profile.p.windows(2).all(|w| w[1] >= w[0] - 1e-12);
            let value = criterion_value(&profile.p, data_p, spec.criterion, spec.distance_space)?;
            Ok((value, monotone))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, f64)> = None;
    for (&b, &(value, _)) in betas.iter().zip(&evaluated) {
        if value.is_finite() && best.is_none_or(|(_, v)| value < v) {
            best = Some((b, value));
        }
    }
    let Some((beta_hat, criterion_value)) = best else {
        return Err(Error::Numerical("criterion is infinite on the whole beta grid".into()));
    };
    let reported_value = match spec.criterion {
        Criterion::SquaredDistance => criterion_value.sqrt(),
        Criterion::Likelihood => criterion_value,
    };
    Ok(EstimateResult {
        beta_hat,
        criterion_value,
        reported_value,
        per_beta_curve: betas.iter().zip(&evaluated).map(|(&beta, &(value, _))| CurvePoint { beta, value }).collect(),
        hazard_violations: betas.iter().zip(&evaluated).filter(|(_, e)| !e.1).map(|(&b, _)| b).collect(),
    })
}

/// Completion-time distribution of an agent facing `problem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionHistogram {
    /// Conditional stopping probabilities.
    pub p: Vec<f64>,
    /// Unconditional completion masses.
    pub q: Vec<f64>,
    /// Mass that never completes (zero for mandatory tasks).
    pub residual: f64,
}

pub fn completion_histogram(problem: &StoppingProblem, prefs: &Preferences) -> Result<CompletionHistogram> {
    let profile = solve_equilibrium(problem, prefs)?;
    let (q, residual) = hazard::unconditional(&profile.p);
    Ok(CompletionHistogram { p: profile.p, q, residual })
}

/// Ready-made setups for the worked examples.
pub mod presets {
    use super::*;

    /// Stopping probabilities of a time-consistent agent with uniform[-1,1]
    /// payoffs and a mandatory five-period deadline, as published.
    pub const UNIFORM_DATA: [f64; 5] = [0.25827, 0.304687, 0.375, 0.5, 1.0];

    /// Standard deviation of uniform[-1,1] as the analyst knows it.
    pub const UNIFORM_SD: f64 = 0.577;

    /// The β grid of the table: step 0.0005 on (0, 1].
    pub fn table_grid() -> Grid {
        Grid { lo: 0.3, hi: 1.0, step: 0.0005 }
    }

    /// The six (family, sophistication) rows under one criterion.
    pub fn table_specs(criterion: Criterion) -> Vec<EstimationSpec> {
        let mut specs = Vec::new();
        for family in [Family::Normal, Family::ExtremeValue, Family::Logistic] {
            for sophisticated in [true, false] {
                specs.push(EstimationSpec {
                    family,
                    mean: 0.0,
                    sd: UNIFORM_SD,
                    delta: 1.0,
                    sophisticated,
                    criterion,
                    distance_space: DistanceSpace::Unconditional,
                    beta_grid: table_grid(),
                    horizon: 5,
                    terminal_value: TerminalValue::Mandatory,
                });
            }
        }
        specs
    }

    /// How to read the second lognormal parameter.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "snake_case")]
    pub enum SpreadReading {
        /// `η` is the variance of the underlying normal.
        Variance,
        /// `η` is its standard deviation.
        Sd,
    }

    /// How the stated penalty of -5 enters.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "snake_case")]
    pub enum PenaltyReading {
        /// Self T's continuation value is -5.
        Raw,
        /// -5 is the period-(T+1) utility, so the continuation value is `βδ·(-5)`.
        BetaScaled,
    }

    /// One of the two parking-fine agents.
    #[derive(Debug, Clone, PartialEq)]
    pub struct ParkingAgent {
        pub problem: StoppingProblem,
        pub prefs: Preferences,
    }

    /// The time-consistent agent (`μ=1, η=1`) and the present-biased
    /// sophisticate (`β=0.7, μ=0, η=2.3`), ten days, `δ=1`, penalty -5.
    pub fn parking_agents(spread: SpreadReading, penalty: PenaltyReading) -> Result<(ParkingAgent, ParkingAgent)> {
        let sigma = |eta: f64| match spread {
            SpreadReading::Variance => eta.sqrt(),
            SpreadReading::Sd => eta,
        };
        let make = |beta: f64, mu: f64, eta: f64| -> Result<ParkingAgent> {
            let prefs = Preferences::sophisticated(beta, 1.0)?;
            let y = match penalty {
                PenaltyReading::Raw => -5.0,
                PenaltyReading::BetaScaled => crate::model::penalty_to_terminal(-5.0, &prefs),
            };
            let law = Distribution::lognormal_negated(mu, sigma(eta));
            let problem = StoppingProblem::stationary(law, 10, TerminalValue::Finite(y))?;
            Ok(ParkingAgent { problem, prefs })
        };
        Ok((make(1.0, 1.0, 1.0)?, make(0.7, 0.0, 2.3)?))
    }
}
