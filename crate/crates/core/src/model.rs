//! Preferences, stopping problems, and the backward-recursion equilibrium solver.

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::extended;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Present bias `beta`, perceived present bias `beta_hat`, long-run discount `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preferences {
    pub beta: f64,
    pub beta_hat: f64,
    pub delta: f64,
}

impl Preferences {
    pub fn new(beta: f64, beta_hat: f64, delta: f64) -> Result<Self> {
        let p = Preferences { beta, beta_hat, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn sophisticated(beta: f64, delta: f64) -> Result<Self> {
        Preferences::new(beta, beta, delta)
    }

    pub fn naive(beta: f64, delta: f64) -> Result<Self> {
        Preferences::new(beta, 1.0, delta)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("beta", self.beta), ("beta_hat", self.beta_hat), ("delta", self.delta)] {
            if !(x > 0.0 && x <= 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1], got {x}")));
            }
        }
        Ok(())
    }

    pub fn is_sophisticated(&self) -> bool {
        self.beta_hat == self.beta
    }

    pub fn is_fully_naive(&self) -> bool {
        self.beta_hat == 1.0
    }

    /// `beta_hat / beta`, the factor mapping actual to perceived cutoffs.
    pub fn perception_ratio(&self) -> f64 {
        self.beta_hat / self.beta
    }
}

/// Self T's continuation value when not completing: a finite `ȳ`, or a mandatory task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalValue {
    Finite(f64),
    Mandatory,
}

impl TerminalValue {
    /// `ȳ` as an extended real (`-inf` for mandatory tasks).
    pub fn value(&self) -> f64 {
        match self {
            TerminalValue::Finite(y) => *y,
            TerminalValue::Mandatory => f64::NEG_INFINITY,
        }
    }

    pub fn from_value(y: f64) -> Result<Self> {
        if y == f64::NEG_INFINITY {
            Ok(TerminalValue::Mandatory)
        } else if y.is_finite() {
            Ok(TerminalValue::Finite(y))
        } else {
            Err(Error::invalid(format!("terminal value must be finite or -inf, got {y}")))
        }
    }

    pub fn is_mandatory(&self) -> bool {
        matches!(self, TerminalValue::Mandatory)
    }
}

impl Serialize for TerminalValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TerminalValue::Finite(y) => s.serialize_f64(*y),
            TerminalValue::Mandatory => s.serialize_str("mandatory"),
        }
    }
}

impl<'de> Deserialize<'de> for TerminalValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let y = extended::scalar::deserialize(d)?;
        TerminalValue::from_value(y).map_err(serde::de::Error::custom)
    }
}

/// Converts a period-(T+1) utility penalty into Self T's continuation value `ȳ = βδ·penalty`.
pub fn penalty_to_terminal(penalty: f64, prefs: &Preferences) -> f64 {
    penalty * prefs.beta * prefs.delta
}

/// Inverse of [`penalty_to_terminal`].
pub fn terminal_to_penalty(terminal: f64, prefs: &Preferences) -> f64 {
    terminal / (prefs.beta * prefs.delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffLaws {
    /// One law repeated in every period.
    Stationary(Distribution),
    /// One law per period, in period order.
    PerPeriod(Vec<Distribution>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "ProblemRepr")]
pub struct StoppingProblem {
    horizon: usize,
    payoff_laws: PayoffLaws,
    terminal_value: TerminalValue,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemRepr {
    horizon: usize,
    payoff_laws: PayoffLaws,
    terminal_value: TerminalValue,
}

impl TryFrom<ProblemRepr> for StoppingProblem {
    type Error = Error;
    fn try_from(r: ProblemRepr) -> Result<Self> {
        StoppingProblem::new(r.horizon, r.payoff_laws, r.terminal_value)
    }
}

impl StoppingProblem {
    pub fn new(horizon: usize, payoff_laws: PayoffLaws, terminal_value: TerminalValue) -> Result<Self> {
        let p = StoppingProblem { horizon, payoff_laws, terminal_value };
        p.validate()?;
        Ok(p)
    }

    pub fn stationary(law: Distribution, horizon: usize, terminal_value: TerminalValue) -> Result<Self> {
        StoppingProblem::new(horizon, PayoffLaws::Stationary(law), terminal_value)
    }

    pub fn per_period(laws: Vec<Distribution>, terminal_value: TerminalValue) -> Result<Self> {
        StoppingProblem::new(laws.len(), PayoffLaws::PerPeriod(laws), terminal_value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        match &self.payoff_laws {
            PayoffLaws::Stationary(d) => d.validate()?,
            PayoffLaws::PerPeriod(laws) => {
                if laws.len() != self.horizon {
                    return Err(Error::invalid(format!(
                        "expected {} payoff laws, got {}",
                        self.horizon,
                        laws.len()
                    )));
                }
                for d in laws {
                    d.validate()?;
                }
            }
        }
        if let TerminalValue::Finite(y) = self.terminal_value {
            if !y.is_finite() {
                return Err(Error::invalid("terminal value must be finite or mandatory"));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn terminal_value(&self) -> TerminalValue {
        self.terminal_value
    }

    pub fn payoff_laws(&self) -> &PayoffLaws {
        &self.payoff_laws
    }

    /// Law of `y_t` for period `t` in `1..=horizon`.
    pub fn law(&self, t: usize) -> &Distribution {
        assert!(t >= 1 && t <= self.horizon, "period {t} outside 1..={}", self.horizon);
        match &self.payoff_laws {
            PayoffLaws::Stationary(d) => d,
            PayoffLaws::PerPeriod(laws) => &laws[t - 1],
        }
    }

    pub fn is_stationary(&self) -> bool {
        match &self.payoff_laws {
            PayoffLaws::Stationary(_) => true,
            PayoffLaws::PerPeriod(laws) => laws.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// Same problem with a different horizon (stationary laws only).
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        match &self.payoff_laws {
            PayoffLaws::Stationary(d) => StoppingProblem::stationary(d.clone(), horizon, self.terminal_value),
            PayoffLaws::PerPeriod(_) => Err(Error::invalid("with_horizon needs stationary payoff laws")),
        }
    }
}

/// Actual cutoffs `v`, perceived cutoffs `c`, conditional stopping probabilities `p`.
/// Index 0 is period 1. A mandatory task has `v_T = c_T = -inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumProfile {
    #[serde(with = "extended::vec")]
    pub v: Vec<f64>,
    #[serde(with = "extended::vec")]
    pub c: Vec<f64>,
    pub p: Vec<f64>,
}

impl EquilibriumProfile {
    pub fn horizon(&self) -> usize {
        self.p.len()
    }
}

/// `E[z; z > w]` made safe for `w = -inf` and checked for finiteness.
fn checked_pe(law: &Distribution, w: f64) -> Result<f64> {
    let pe = law.partial_expectation(w);
    if pe.is_finite() {
        Ok(pe)
    } else {
        Err(Error::NonIntegrable(format!("partial expectation above {w} is {pe} for {law:?}")))
    }
}

/// `F(w)·x` with the convention `0·(-inf) = 0`.
fn mass_times(law: &Distribution, w: f64, x: f64) -> f64 {
    let mass = law.cdf(w);
    if mass == 0.0 {
        0.0
    } else {
        mass * x
    }
}

/// Solves for the perception-perfect equilibrium by backward recursion.
///
/// `v_T = ȳ` and `v_t = βδ·PE_{t+1}(c_{t+1}) + F_{t+1}(c_{t+1})·δ·v_{t+1}` with
/// `c = (β̂/β)·v`. Self t stops iff `y_t > v_t`, so `p_t = P(y_t > v_t)`.
pub fn solve_equilibrium(problem: &StoppingProblem, prefs: &Preferences) -> Result<EquilibriumProfile> {
    problem.validate()?;
    prefs.validate()?;
    let t_max = problem.horizon();
    let r = prefs.perception_ratio();
    let mut v = vec![0.0; t_max];
    let mut c = vec![0.0; t_max];
    v[t_max - 1] = problem.terminal_value().value();
    c[t_max - 1] = r * v[t_max - 1];
    for t in (0..t_max - 1).rev() {
        let next = problem.law(t + 2);
        let w = c[t + 1];
        let pe = checked_pe(next, w)?;
        v[t] = prefs.beta * prefs.delta * pe + mass_times(next, w, prefs.delta * v[t + 1]);
        if !v[t].is_finite() {
            return Err(Error::Numerical(format!("continuation value at t={} is {}", t + 1, v[t])));
        }
        c[t] = r * v[t];
    }
    let p = (0..t_max)
        .map(|t| {
            if v[t] == f64::NEG_INFINITY {
                1.0
            } else {
                problem.law(t + 1).sf(v[t])
            }
        })
        .collect();
    Ok(EquilibriumProfile { v, c, p })
}

/// `g(w) = β̂δ·PE(w) + F(w)·δ·w`.
pub fn g_eval(law: &Distribution, prefs: &Preferences, w: f64) -> Result<f64> {
    let pe = checked_pe(law, w)?;
    Ok(prefs.beta_hat * prefs.delta * pe + mass_times(law, w, prefs.delta * w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareReport {
    /// `W_t` for t = 1..T: expected value of entering period t, long-run weights only.
    pub self_values: Vec<f64>,
    /// Self 1's objective, with β applied to every payoff after period 1.
    pub self1_value_beta: f64,
    /// Value owed after the deadline, `ȳ/(βδ)`; `-inf` flags a mandatory task,
    /// whose equilibrium completes with certainty so the sentinel never enters `W`.
    #[serde(with = "extended::scalar")]
    pub post_deadline_value: f64,
    pub mandatory: bool,
}

/// Welfare of the equilibrium `profile` evaluated at long-run weights.
///
/// `W_t = PE_t(v_t) + F_t(v_t)·δ·W_{t+1}` with `δ·W_{T+1} = ȳ/β`.
pub fn evaluate_welfare(
    problem: &StoppingProblem,
    prefs: &Preferences,
    profile: &EquilibriumProfile,
) -> Result<WelfareReport> {
    let t_max = problem.horizon();
    if profile.v.len() != t_max || profile.p.len() != t_max || profile.c.len() != t_max {
        return Err(Error::invalid(format!(
            "profile has length {} but the problem horizon is {t_max}",
            profile.v.len()
        )));
    }
    let terminal = problem.terminal_value();
    let post = terminal_to_penalty(terminal.value(), prefs);
    let mut w = vec![0.0; t_max];
    let mut next = prefs.delta * post;
    for t in (0..t_max).rev() {
        let law = problem.law(t + 1);
        w[t] = checked_pe(law, profile.v[t])? + mass_times(law, profile.v[t], next);
        next = prefs.delta * w[t];
    }
    let first = problem.law(1);
    let after = if t_max > 1 { prefs.beta * prefs.delta * w[1] } else { prefs.beta * prefs.delta * post };
    let self1 = checked_pe(first, profile.v[0])? + mass_times(first, profile.v[0], after);
    Ok(WelfareReport {
        self_values: w,
        self1_value_beta: self1,
        post_deadline_value: post,
        mandatory: terminal.is_mandatory(),
    })
}
