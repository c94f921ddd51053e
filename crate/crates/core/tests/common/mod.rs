//! Random problem generators shared by the integration tests.
#![allow(dead_code)]

use qh_stopping::distributions::{Distribution, Family, Segment};
use qh_stopping::model::{Preferences, StoppingProblem, TerminalValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random law from any variant, with support roughly inside [-6, 6].
pub fn random_law(r: &mut ChaCha8Rng) -> Distribution {
    match r.random_range(0..4) {
        0 => random_discrete(r),
        1 => random_piecewise(r),
        2 => random_parametric(r),
        _ => {
            let inner = match r.random_range(0..3) {
                0 => random_discrete(r),
                1 => random_piecewise(r),
                _ => random_parametric(r),
            };
            inner.affine(r.random_range(-1.0..1.0), r.random_range(0.3..2.0)).unwrap()
        }
    }
}

pub fn random_weights(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // land the sum on 1 to the last bit
    let rest: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - rest;
    w
}

pub fn random_discrete(r: &mut ChaCha8Rng) -> Distribution {
    let n = r.random_range(1..6);
    let mut points: Vec<f64> = (0..n).map(|_| r.random_range(-4.0..4.0)).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let w = random_weights(r, points.len());
    Distribution::discrete(points, w).unwrap()
}

pub fn random_piecewise(r: &mut ChaCha8Rng) -> Distribution {
    let n = r.random_range(1..5);
    let w = random_weights(r, n);
    let segments = w
        .into_iter()
        .map(|weight| {
            let lo = r.random_range(-4.0..4.0);
            let hi = if r.random_bool(0.2) { lo } else { lo + r.random_range(0.1..3.0) };
            Segment { lo, hi, weight }
        })
        .collect();
    Distribution::piecewise_uniform(segments).unwrap()
}

pub fn random_parametric(r: &mut ChaCha8Rng) -> Distribution {
    let family = Family::ALL[r.random_range(0..Family::ALL.len())];
    let sd = r.random_range(0.2..2.0);
    let mean = if family == Family::LognormalNegated { -r.random_range(0.3..3.0) } else { r.random_range(-1.5..1.5) };
    Distribution::from_mean_sd(family, mean, sd).unwrap()
}

/// Continuous laws only (no atoms), for tests that must avoid ties.
pub fn random_continuous(r: &mut ChaCha8Rng) -> Distribution {
    if r.random_bool(0.5) {
        random_parametric(r)
    } else {
        let n = r.random_range(1..4);
        let w = random_weights(r, n);
        let segments = w
            .into_iter()
            .map(|weight| {
                let lo = r.random_range(-4.0..4.0);
                Segment { lo, hi: lo + r.random_range(0.2..3.0), weight }
            })
            .collect();
        Distribution::piecewise_uniform(segments).unwrap()
    }
}

pub fn random_terminal(r: &mut ChaCha8Rng) -> TerminalValue {
    if r.random_bool(0.3) {
        TerminalValue::Mandatory
    } else {
        TerminalValue::Finite(r.random_range(-3.0..=0.0))
    }
}

/// A parameter in (0, 1], equal to 1 a quarter of the time.
pub fn unit_param(r: &mut ChaCha8Rng, lo: f64) -> f64 {
    if r.random_bool(0.25) {
        1.0
    } else {
        r.random_range(lo..1.0)
    }
}

/// Random `(β, β̂, δ)` covering sophisticated, naive, partially naive, and
/// over-pessimistic (`β̂ < β`) agents.
pub fn random_prefs(r: &mut ChaCha8Rng) -> Preferences {
    let beta = unit_param(r, 0.2);
    let delta = unit_param(r, 0.5);
    let beta_hat = match r.random_range(0..4) {
        0 => beta,
        1 => 1.0,
        2 => r.random_range(0.1..1.0),
        _ => beta * r.random_range(0.3..1.0),
    };
    Preferences::new(beta, beta_hat, delta).unwrap()
}

pub fn random_problem(r: &mut ChaCha8Rng, t_max: usize) -> StoppingProblem {
    StoppingProblem::stationary(random_law(r), t_max, random_terminal(r)).unwrap()
}

/// `0 < p_1 <= ... <= p_T < 1`, with occasional ties.
pub fn random_plausible_p(r: &mut ChaCha8Rng, t_max: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..t_max).map(|_| r.random_range(0.01..0.99)).collect();
    p.sort_by(f64::total_cmp);
    for i in 1..t_max {
        if r.random_bool(0.1) {
            p[i] = p[i - 1];
        }
    }
    p
}

pub fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}
