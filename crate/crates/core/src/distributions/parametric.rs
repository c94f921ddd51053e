//! Closed-form CDFs, partial expectations and moments for the parametric families.

use super::special::{gumbel_tail_weight, std_normal_cdf, std_normal_pdf, std_normal_sf, EULER_GAMMA};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution as _, Gumbel, LogNormal, Normal, StandardUniform};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Family identifier, used by the `(mean, sd)` constructors and estimation specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    Normal,
    LognormalNegated,
    ExtremeValue,
    Logistic,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Uniform,
        Family::Normal,
        Family::LognormalNegated,
        Family::ExtremeValue,
        Family::Logistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Normal => "normal",
            Family::LognormalNegated => "lognormal_negated",
            Family::ExtremeValue => "extreme_value",
            Family::Logistic => "logistic",
        }
    }
}

/// A parametric payoff law in family-native parameters.
///
/// `LognormalNegated` is the law of `-C` with `ln C ~ N(mu, sigma^2)`;
/// `ExtremeValue` is the Gumbel law for maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParametricLaw {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    LognormalNegated { mu: f64, sigma: f64 },
    ExtremeValue { location: f64, scale: f64 },
    Logistic { location: f64, scale: f64 },
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl ParametricLaw {
    pub fn family(&self) -> Family {
        match self {
            ParametricLaw::Uniform { .. } => Family::Uniform,
            ParametricLaw::Normal { .. } => Family::Normal,
            ParametricLaw::LognormalNegated { .. } => Family::LognormalNegated,
            ParametricLaw::ExtremeValue { .. } => Family::ExtremeValue,
            ParametricLaw::Logistic { .. } => Family::Logistic,
        }
    }

    /// Builds the member of `family` with the given mean and standard deviation.
    pub fn from_mean_sd(family: Family, mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::invalid(format!(
                "mean must be finite and sd positive (got mean={mean}, sd={sd})"
            )));
        }
        let law = match family {
            Family::Uniform => {
                let half = sd * 3f64.sqrt();
                ParametricLaw::Uniform { lo: mean - half, hi: mean + half }
            }
            Family::Normal => ParametricLaw::Normal { mean, sd },
            Family::LognormalNegated => {
                if mean >= 0.0 {
                    return Err(Error::invalid(format!(
                        "lognormal_negated needs a strictly negative mean (got {mean})"
                    )));
                }
                let m = -mean;
                let s2 = (1.0 + (sd / m).powi(2)).ln();
                ParametricLaw::LognormalNegated { mu: m.ln() - 0.5 * s2, sigma: s2.sqrt() }
            }
            Family::ExtremeValue => {
                let scale = sd * 6f64.sqrt() / PI;
                ParametricLaw::ExtremeValue { location: mean - EULER_GAMMA * scale, scale }
            }
            Family::Logistic => ParametricLaw::Logistic { location: mean, scale: sd * 3f64.sqrt() / PI },
        };
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ParametricLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            ParametricLaw::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            ParametricLaw::LognormalNegated { mu, sigma } => {
                // mean e^{mu + sigma^2/2} must be representable
                mu.is_finite() && sigma.is_finite() && sigma > 0.0 && (mu + 0.5 * sigma * sigma) < 700.0
            }
            ParametricLaw::ExtremeValue { location, scale }
            | ParametricLaw::Logistic { location, scale } => {
                location.is_finite() && scale.is_finite() && scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NonIntegrable(format!("{self:?} has invalid parameters")))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ParametricLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            ParametricLaw::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            ParametricLaw::LognormalNegated { mu, sigma } => {
                if x >= 0.0 {
                    1.0
                } else {
                    std_normal_sf(((-x).ln() - mu) / sigma)
                }
            }
            ParametricLaw::ExtremeValue { location, scale } => {
                (-(-(x - location) / scale).exp()).exp()
            }
            ParametricLaw::Logistic { location, scale } => sigmoid((x - location) / scale),
        }
    }

    /// `1 - cdf(x)`, computed without cancellation where the family allows.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            ParametricLaw::Normal { mean, sd } => std_normal_sf((x - mean) / sd),
            ParametricLaw::LognormalNegated { mu, sigma } => {
                if x >= 0.0 {
                    0.0
                } else {
                    std_normal_cdf(((-x).ln() - mu) / sigma)
                }
            }
            ParametricLaw::ExtremeValue { location, scale } => {
                -(-(-(x - location) / scale).exp()).exp_m1()
            }
            ParametricLaw::Logistic { location, scale } => sigmoid(-(x - location) / scale),
            ParametricLaw::Uniform { .. } => 1.0 - self.cdf(x),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ParametricLaw::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            ParametricLaw::Normal { mean, sd } => std_normal_pdf((x - mean) / sd) / sd,
            ParametricLaw::LognormalNegated { mu, sigma } => {
                if x >= 0.0 {
                    0.0
                } else {
                    let c = -x;
                    std_normal_pdf((c.ln() - mu) / sigma) / (c * sigma)
                }
            }
            ParametricLaw::ExtremeValue { location, scale } => {
                let z = (x - location) / scale;
                (-z - (-z).exp()).exp() / scale
            }
            ParametricLaw::Logistic { location, scale } => {
                let z = (x - location) / scale;
                sigmoid(z) * sigmoid(-z) / scale
            }
        }
    }

    /// Upper partial expectation `E[Y; Y > w]`. Continuous, so strict and weak agree.
    pub fn partial_expectation(&self, w: f64) -> f64 {
        if w == f64::NEG_INFINITY {
            return self.mean();
        }
        if w == f64::INFINITY {
            return 0.0;
        }
        match *self {
            ParametricLaw::Uniform { lo, hi } => {
                if w >= hi {
                    0.0
                } else {
                    let a = w.max(lo);
                    (hi - a) * (hi + a) / (2.0 * (hi - lo))
                }
            }
            ParametricLaw::Normal { mean, sd } => {
                let z = (w - mean) / sd;
                mean * std_normal_sf(z) + sd * std_normal_pdf(z)
            }
            ParametricLaw::LognormalNegated { mu, sigma } => {
                if w >= 0.0 {
                    0.0
                } else {
                    let z = ((-w).ln() - mu - sigma * sigma) / sigma;
                    -(mu + 0.5 * sigma * sigma).exp() * std_normal_cdf(z)
                }
            }
            ParametricLaw::ExtremeValue { location, scale } => {
                let a = (-(w - location) / scale).exp();
                if a == 0.0 {
                    return 0.0;
                }
                if a.is_infinite() {
                    return self.mean();
                }
                let above = -(-a).exp_m1();
                location * above + scale * gumbel_tail_weight(a)
            }
            ParametricLaw::Logistic { location, scale } => {
                let c = (w - location) / scale;
                let tail = if c > 0.0 {
                    (-c).exp().ln_1p() + c * sigmoid(-c)
                } else {
                    c.exp().ln_1p() - c * sigmoid(c)
                };
                location * sigmoid(-c) + scale * tail
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ParametricLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            ParametricLaw::Normal { mean, .. } => mean,
            ParametricLaw::LognormalNegated { mu, sigma } => -(mu + 0.5 * sigma * sigma).exp(),
            ParametricLaw::ExtremeValue { location, scale } => location + EULER_GAMMA * scale,
            ParametricLaw::Logistic { location, .. } => location,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ParametricLaw::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            ParametricLaw::Normal { sd, .. } => sd * sd,
            ParametricLaw::LognormalNegated { mu, sigma } => {
                let s2 = sigma * sigma;
                s2.exp_m1() * (2.0 * mu + s2).exp()
            }
            ParametricLaw::ExtremeValue { scale, .. } => PI * PI * scale * scale / 6.0,
            ParametricLaw::Logistic { scale, .. } => PI * PI * scale * scale / 3.0,
        }
    }

    /// Support endpoints (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ParametricLaw::Uniform { lo, hi } => (lo, hi),
            ParametricLaw::LognormalNegated { .. } => (f64::NEG_INFINITY, 0.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ParametricLaw::Uniform { lo, hi } => {
                let u: f64 = rng.sample(StandardUniform);
                lo + u * (hi - lo)
            }
            ParametricLaw::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            ParametricLaw::LognormalNegated { mu, sigma } => {
                -LogNormal::new(mu, sigma).expect("validated").sample(rng)
            }
            ParametricLaw::ExtremeValue { location, scale } => {
                Gumbel::new(location, scale).expect("validated").sample(rng)
            }
            ParametricLaw::Logistic { location, scale } => {
                // inverse CDF on the open unit interval
                let u: f64 = rng.sample(rand_distr::Open01);
                location + scale * (u / (1.0 - u)).ln()
            }
        }
    }
}
