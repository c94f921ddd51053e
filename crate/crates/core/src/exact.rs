//! Exact rational arithmetic for discrete laws.
//!
//! Discrete constructions put atoms exactly on cutoffs, where the stop/wait
//! tie-break decides the outcome; a one-ulp error in f64 flips it. This
//! module re-runs the recursion over `BigRational` so such constructions can
//! be checked without rounding.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// The exact value of a finite `f64`.
pub fn rational(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::invalid(format!("{x} has no exact rational value")))
}

/// Nearest `f64` (saturating to ±inf when out of range).
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// `p/q` text form (integers print without a denominator).
pub fn format(x: &Rational) -> String {
    x.to_string()
}

pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Ok(r) = s.parse::<BigRational>() {
        return Ok(r);
    }
    let x: f64 = s.parse().map_err(|_| Error::invalid(format!("cannot parse '{s}' as a rational")))?;
    rational(x)
}

/// A discrete law with rational atoms and weights; atoms sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDiscrete {
    pub points: Vec<Rational>,
    pub weights: Vec<Rational>,
}

impl ExactDiscrete {
    pub fn new(points: Vec<Rational>, weights: Vec<Rational>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::invalid("exact discrete law needs matching non-empty points/weights"));
        }
        if points.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("exact discrete atoms must be sorted"));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::invalid("exact weights must be non-negative"));
        }
        let total: Rational = weights.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::invalid(format!("exact weights sum to {total}, not 1")));
        }
        Ok(ExactDiscrete { points, weights })
    }

    /// `P(Y <= x)`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| *p <= x)
            .map(|(_, w)| w.clone())
            .sum()
    }

    /// `P(Y > x)`.
    pub fn sf(&self, x: &Rational) -> Rational {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| *p > x)
            .map(|(_, w)| w.clone())
            .sum()
    }

    /// `E[Y; Y > x]`.
    pub fn partial_expectation(&self, x: &Rational) -> Rational {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| *p > x)
            .map(|(p, w)| p * w)
            .sum()
    }

    pub fn mean(&self) -> Rational {
        self.points.iter().zip(&self.weights).map(|(p, w)| p * w).sum()
    }

    /// `scale * Y + shift`, exactly.
    pub fn affine(&self, shift: &Rational, scale: &Rational) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::invalid("affine scale must be positive"));
        }
        Ok(ExactDiscrete {
            points: self.points.iter().map(|p| p * scale + shift).collect(),
            weights: self.weights.clone(),
        })
    }

    pub fn to_distribution(&self) -> Result<crate::distributions::Distribution> {
        crate::distributions::Distribution::discrete(
            self.points.iter().map(to_f64).collect(),
            self.weights.iter().map(to_f64).collect(),
        )
    }
}

/// Exact preferences.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPreferences {
    pub beta: Rational,
    pub beta_hat: Rational,
    pub delta: Rational,
}

impl ExactPreferences {
    pub fn from_f64(prefs: &crate::model::Preferences) -> Result<Self> {
        Ok(ExactPreferences {
            beta: rational(prefs.beta)?,
            beta_hat: rational(prefs.beta_hat)?,
            delta: rational(prefs.delta)?,
        })
    }
}

/// Exact equilibrium; `None` in `v` is the mandatory `-inf` sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactProfile {
    pub v: Vec<Option<Rational>>,
    pub p: Vec<Rational>,
}

impl ExactProfile {
    pub fn p_f64(&self) -> Vec<f64> {
        self.p.iter().map(to_f64).collect()
    }

    pub fn v_f64(&self) -> Vec<f64> {
        self.v
            .iter()
            .map(|x| x.as_ref().map(to_f64).unwrap_or(f64::NEG_INFINITY))
            .collect()
    }
}

/// Backward recursion for a stationary discrete law, in exact arithmetic.
pub fn solve_stationary(
    law: &ExactDiscrete,
    horizon: usize,
    terminal: Option<&Rational>,
    prefs: &ExactPreferences,
) -> Result<ExactProfile> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let ratio = &prefs.beta_hat / &prefs.beta;
    let bd = &prefs.beta * &prefs.delta;
    let mut v: Vec<Option<Rational>> = vec![None; horizon];
    v[horizon - 1] = terminal.cloned();
    for t in (0..horizon - 1).rev() {
        let next = match &v[t + 1] {
            None => &bd * law.mean(),
            Some(vn) => {
                let c = &ratio * vn;
                &bd * law.partial_expectation(&c) + law.cdf(&c) * &prefs.delta * vn
            }
        };
        v[t] = Some(next);
    }
    let p = v
        .iter()
        .map(|x| match x {
            None => Rational::one(),
            Some(vt) => law.sf(vt),
        })
        .collect();
    Ok(ExactProfile { v, p })
}

/// Largest `|a_i - b_i|` as f64.
pub fn max_abs_gap(a: &[Rational], b: &[Rational]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| to_f64(&(x - y).abs()))
        .fold(0.0, f64::max)
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn tax_exact() {
        let law = ExactDiscrete::new(vec![q(1, 4), q(3, 2)], vec![q(1, 4), q(3, 4)]).unwrap();
        let prefs = ExactPreferences { beta: q(1, 8), beta_hat: q(1, 8), delta: int(1) };
        let prof = solve_stationary(&law, 3, Some(&zero()), &prefs).unwrap();
        assert_eq!(prof.v, vec![Some(q(19, 128)), Some(q(19, 128)), Some(zero())]);
        let taxed = law.affine(&q(-1, 8), &int(1)).unwrap();
        let prof = solve_stationary(&taxed, 3, Some(&zero()), &prefs).unwrap();
        assert_eq!(prof.v, vec![Some(q(83, 512)), Some(q(17, 128)), Some(zero())]);
    }

    #[test]
    fn rational_is_exact() {
        let x = 0.1f64;
        let r = rational(x).unwrap();
        assert_eq!(to_f64(&r), x);
        assert_ne!(r, q(1, 10));
        assert_eq!(parse("3/8").unwrap(), q(3, 8));
        assert_eq!(parse("0.5").unwrap(), q(1, 2));
    }

    #[test]
    fn mandatory_sentinel() {
        let law = ExactDiscrete::new(vec![int(-1), int(1)], vec![q(1, 2), q(1, 2)]).unwrap();
        let prefs = ExactPreferences { beta: int(1), beta_hat: int(1), delta: int(1) };
        let prof = solve_stationary(&law, 2, None, &prefs).unwrap();
        assert_eq!(prof.v, vec![Some(zero()), None]);
        assert_eq!(prof.p, vec![q(1, 2), int(1)]);
    }
}
