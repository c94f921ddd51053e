//! Fully naive rationalization: a continuous piecewise-uniform law found as a
//! fixed point of a monotone operator on non-increasing cutoff vectors.

use super::{sup_gap, ConstructionLog, IterationReport, RationalizationResult, StoppingData};
use crate::distributions::{Distribution, Segment};
use crate::error::{Error, Result};
use crate::model::{solve_equilibrium, Preferences, StoppingProblem, TerminalValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveOptions {
    pub c1: f64,
    pub c2: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NaiveOptions {
    fn default() -> Self {
        NaiveOptions { c1: 1.0, c2: 1.0, tol: 1e-10, max_iter: 100_000 }
    }
}

fn segment_weights(p: &[f64]) -> Vec<f64> {
    let t_max = p.len();
    let mut f = Vec::with_capacity(t_max + 1);
    f.push(1.0 - p[t_max - 1]);
    for k in 1..t_max {
        f.push(p[t_max - k] - p[t_max - k - 1]);
    }
    f.push(p[0]);
    f
}

fn breakpoints(v: &[f64], y_lower: f64, c1: f64, c2: f64) -> Vec<f64> {
    // v holds v_1..v_{T-1}; π_k = v_{T-k+1} for k = 2..T
    let t_max = v.len() + 1;
    let mut pi = Vec::with_capacity(t_max + 2);
    pi.push(y_lower - c1);
    pi.push(y_lower);
    for k in 2..=t_max {
        pi.push(v[t_max - k]);
    }
    let v1 = if v.is_empty() { y_lower } else { v[0] };
    pi.push(v1 + c2);
    pi
}

/// The law `F(·; v)`: mass `f_k` spread uniformly on `[π_k, π_{k+1}]`.
pub fn naive_law(data: &StoppingData, y_lower: f64, c1: f64, c2: f64, v: &[f64]) -> Result<Distribution> {
    if v.len() + 1 != data.horizon() {
        return Err(Error::invalid(format!(
            "cutoff vector needs {} entries, got {}",
            data.horizon() - 1,
            v.len()
        )));
    }
    let pi = breakpoints(v, y_lower, c1, c2);
    let f = segment_weights(&data.p);
    let segments = f
        .iter()
        .enumerate()
        .map(|(k, &w)| Segment { lo: pi[k], hi: pi[k + 1].max(pi[k]), weight: w })
        .collect();
    Distribution::piecewise_uniform(segments)
}

/// The operator `L`: cutoffs `v_1..v_{T-1}` of the naive equilibrium under `F(·; v)`.
pub fn naive_operator(
    data: &StoppingData,
    prefs: &Preferences,
    y_lower: f64,
    c1: f64,
    c2: f64,
    v: &[f64],
) -> Result<Vec<f64>> {
    let law = naive_law(data, y_lower, c1, c2, v)?;
    let prob = StoppingProblem::stationary(law, data.horizon(), TerminalValue::Finite(y_lower))?;
    let mut w = solve_equilibrium(&prob, prefs)?.v;
    w.pop();
    Ok(w)
}

fn iterate(
    data: &StoppingData,
    prefs: &Preferences,
    y_lower: f64,
    opts: &NaiveOptions,
    start: f64,
) -> Result<(Vec<f64>, usize, f64)> {
    let mut v = vec![start; data.horizon() - 1];
    let mut gap = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = naive_operator(data, prefs, y_lower, opts.c1, opts.c2, &v)?;
        gap = sup_gap(&next, &v);
        v = next;
        if gap < opts.tol {
            // keep going while the step still shrinks, which settles v to
            // rounding level; steep densities need it for the round trip
            let mut iterations = it;
            while iterations < opts.max_iter {
                let next = naive_operator(data, prefs, y_lower, opts.c1, opts.c2, &v)?;
                let step = sup_gap(&next, &v);
                if !(step < gap) {
                    break;
                }
                v = next;
                gap = step;
                iterations += 1;
            }
            return Ok((v, iterations, gap));
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, gap })
}

/// Builds a continuous piecewise-uniform law under which a fully naive agent
/// with `prefs` and terminal value `y_lower < 0` stops with probabilities `data.p`.
///
/// `L` is iterated from the bottom `(ȳ, …, ȳ)` and from the top
/// `(δc₂/(1-δ), …)` of the lattice; the bottom limit is returned and the
/// distance between the two limits is reported.
pub fn rationalize_naive(
    data: &StoppingData,
    prefs: &Preferences,
    y_lower: f64,
    opts: &NaiveOptions,
) -> Result<RationalizationResult> {
    data.validate()?;
    prefs.validate()?;
    if !prefs.is_fully_naive() {
        return Err(Error::invalid("naive rationalization needs beta_hat == 1"));
    }
    if !(prefs.delta < 1.0) {
        return Err(Error::invalid("naive rationalization needs delta < 1"));
    }
    if !(y_lower < 0.0 && y_lower.is_finite()) {
        return Err(Error::invalid(format!("naive rationalization needs a negative terminal value, got {y_lower}")));
    }
    if !(opts.c1 > 0.0 && opts.c2 > 0.0 && opts.c1.is_finite() && opts.c2.is_finite()) {
        return Err(Error::invalid("c1 and c2 must be positive and finite"));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::invalid("tol must be positive and max_iter at least 1"));
    }

    let (v, iteration) = if data.horizon() == 1 {
        (Vec::new(), None)
    } else {
        let (bottom, it_b, step) = iterate(data, prefs, y_lower, opts, y_lower)?;
        let top_start = prefs.delta * opts.c2 / (1.0 - prefs.delta);
        let (top, it_t, _) = iterate(data, prefs, y_lower, opts, top_start)?;
        let report = IterationReport {
            iterations_from_bottom: it_b,
            iterations_from_top: it_t,
            top_bottom_gap: sup_gap(&top, &bottom),
            final_step: step,
        };
        (bottom, Some(report))
    };

    let distribution = naive_law(data, y_lower, opts.c1, opts.c2, &v)?;
    let terminal = TerminalValue::Finite(y_lower);
    let prob = StoppingProblem::stationary(distribution.clone(), data.horizon(), terminal)?;
    let profile = solve_equilibrium(&prob, prefs)?;
    Ok(RationalizationResult {
        distribution,
        prefs: *prefs,
        terminal_value: terminal,
        profile,
        construction_log: ConstructionLog::Naive {
            breakpoints: breakpoints(&v, y_lower, opts.c1, opts.c2),
            weights: segment_weights(&data.p),
            c1: opts.c1,
            c2: opts.c2,
            iteration,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_period_round_trip() {
        let data = StoppingData::new(vec![0.3, 0.6]).unwrap();
        let prefs = Preferences::naive(0.6, 0.9).unwrap();
        let res = rationalize_naive(&data, &prefs, -1.0, &NaiveOptions::default()).unwrap();
        assert!(sup_gap(&res.profile.p, &data.p) < 1e-9);
        assert!(res.distribution.is_continuous());
        assert!(res.profile.v[0] > res.profile.v[1]);
    }

    #[test]
    fn longer_horizon_round_trip() {
        let data = StoppingData::new(vec![0.05, 0.1, 0.1, 0.3, 0.55, 0.7]).unwrap();
        let prefs = Preferences::naive(0.4, 0.97).unwrap();
        let res = rationalize_naive(&data, &prefs, -3.0, &NaiveOptions::default()).unwrap();
        assert!(sup_gap(&res.profile.p, &data.p) < 1e-8);
        assert!(res.profile.v.windows(2).all(|w| w[0] > w[1]));
        let (lo, hi) = res.distribution.support();
        assert_eq!(lo, -4.0);
        assert!((hi - (res.profile.v[0] + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn operator_is_monotone() {
        let data = StoppingData::new(vec![0.2, 0.4, 0.5, 0.9]).unwrap();
        let prefs = Preferences::naive(0.7, 0.8).unwrap();
        let lo = [0.5, -0.2, -0.5];
        let hi = [1.5, 0.3, -0.4];
        let a = naive_operator(&data, &prefs, -1.0, 1.0, 1.0, &lo).unwrap();
        let b = naive_operator(&data, &prefs, -1.0, 1.0, 1.0, &hi).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
    }

    #[test]
    fn rejects_hypothesis_violations() {
        let data = StoppingData::new(vec![0.3, 0.6]).unwrap();
        let o = NaiveOptions::default();
        assert!(rationalize_naive(&data, &Preferences::naive(0.6, 1.0).unwrap(), -1.0, &o).is_err());
        assert!(rationalize_naive(&data, &Preferences::naive(0.6, 0.9).unwrap(), 0.0, &o).is_err());
        assert!(rationalize_naive(&data, &Preferences::sophisticated(0.6, 0.9).unwrap(), -1.0, &o).is_err());
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let data = StoppingData::new(vec![0.3, 0.6, 0.7]).unwrap();
        let prefs = Preferences::naive(0.6, 0.9).unwrap();
        let o = NaiveOptions { max_iter: 1, ..NaiveOptions::default() };
        assert!(matches!(
            rationalize_naive(&data, &prefs, -1.0, &o),
            Err(Error::NoConvergence { .. })
        ));
    }
}
