//! Sophisticated rationalization: `T + 2` atoms placed on the continuation values.

use super::{sup_gap, ConstructionLog, RationalizationResult, StoppingData};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::exact::{self, ExactDiscrete, ExactPreferences, Rational};
use crate::model::{solve_equilibrium, EquilibriumProfile, Preferences, StoppingProblem, TerminalValue};
use num_traits::{One, Signed};

const MAX_RETRIES: usize = 5;
const MAX_POLISH: usize = 256;

/// Lower bound on `c_1` that makes the forward solution increasing:
/// `max{0, -(1-β)δȳ (1-γ^{T-1}) / ((1-γ)γ^{T-1})}` with `γ = δ(1-p_T)/2`.
pub fn c1_lower_bound(p_last: f64, horizon: usize, beta: f64, delta: f64, y_lower: f64) -> f64 {
    let gamma = delta * (1.0 - p_last) / 2.0;
    let g = gamma.powi(horizon as i32 - 1);
    let alpha = (1.0 - beta) * delta * y_lower;
    let bound = -alpha * (1.0 - g) / ((1.0 - gamma) * g);
    if bound.is_nan() {
        0.0
    } else {
        bound.max(0.0)
    }
}

/// Atoms `π_0..π_{T+1}` from the forward recursion and the closing equation.
fn forward_atoms(f: &[Rational], beta: &Rational, delta: &Rational, y: &Rational, c1: &Rational) -> Vec<Rational> {
    let t_max = f.len() - 2;
    let one = Rational::one();
    let mut pi = Vec::with_capacity(t_max + 2);
    pi.push(y - c1);
    pi.push(y.clone());
    // running S_{k-2} = f_0 + ... + f_{k-2}
    let mut s = f[0].clone();
    for k in 2..=t_max {
        let step = (&one - beta) * delta * &f[k - 1] * &pi[k - 1] + delta * &s * (&pi[k - 1] - &pi[k - 2]);
        let next = &pi[k - 1] + step;
        pi.push(next);
        s += &f[k - 1];
    }
    // s is now S_{T-1}
    let bd = beta * delta;
    let top = (&pi[t_max] - &bd * &f[t_max] * &pi[t_max] - delta * &pi[t_max - 1] * &s) / (&bd * &f[t_max + 1]);
    pi.push(top);
    pi
}

fn strictly_increasing(pi: &[Rational]) -> bool {
    pi.windows(2).all(|w| w[0] < w[1])
}

/// Lowers interior atoms that the f64 recursion places a hair above the
/// cutoff they are meant to sit on, so the tie-break matches the exact law.
/// Only rounding-sized moves are made; a misclassified atom further down can
/// make a cutoff look far off, and that one is left for a later pass.
fn polish(mut atoms: Vec<f64>, solve: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<(Vec<f64>, usize)> {
    let t_max = atoms.len() - 2;
    let mut moves = 0;
    for _ in 0..MAX_POLISH {
        let v = solve(&atoms)?;
        let mut moved = false;
        // atom k sits on v_{T-k+1}
        for k in 2..=t_max {
            let vt = v[t_max - k];
            let near = (atoms[k] - vt).abs() <= 1e-9 * atoms[k].abs().max(1.0);
            if vt < atoms[k] && vt > atoms[k - 1] && near {
                atoms[k] = vt;
                moved = true;
                moves += 1;
            }
        }
        if !moved {
            break;
        }
    }
    Ok((atoms, moves))
}

/// An exact atom law rounded to f64 and polished against the f64 solver.
pub(super) struct RoundedLaw {
    pub distribution: Distribution,
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    pub polish_moves: usize,
    /// Stopping probabilities the f64 solver gives for `distribution`.
    pub resolved_p: Vec<f64>,
}

pub(super) fn rounded_law(
    law: &ExactDiscrete,
    horizon: usize,
    terminal: TerminalValue,
    prefs: &Preferences,
) -> Result<RoundedLaw> {
    let weights: Vec<f64> = law.weights.iter().map(exact::to_f64).collect();
    let rounded: Vec<f64> = law.points.iter().map(exact::to_f64).collect();
    if rounded.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("atoms overflow f64".into()));
    }
    let (atoms, polish_moves) = polish(rounded, |atoms| {
        let d = Distribution::discrete(atoms.to_vec(), weights.clone())?;
        Ok(solve_equilibrium(&StoppingProblem::stationary(d, horizon, terminal)?, prefs)?.v)
    })?;
    let distribution = Distribution::discrete(atoms.clone(), weights.clone())?;
    let resolved_p = solve_equilibrium(&StoppingProblem::stationary(distribution.clone(), horizon, terminal)?, prefs)?.p;
    Ok(RoundedLaw { distribution, atoms, weights, polish_moves, resolved_p })
}

/// Builds a discrete law with `T + 2` atoms under which a sophisticate with
/// `prefs` and terminal value `y_lower` stops with probabilities `data.p`.
///
/// The construction runs in exact rational arithmetic and is verified there;
/// the returned f64 law is the rounded construction after a downward polish.
pub fn rationalize_sophisticated(
    data: &StoppingData,
    prefs: &Preferences,
    y_lower: f64,
    c1: Option<f64>,
) -> Result<RationalizationResult> {
    data.validate()?;
    prefs.validate()?;
    if !prefs.is_sophisticated() {
        return Err(Error::invalid("sophisticated rationalization needs beta_hat == beta"));
    }
    if !y_lower.is_finite() {
        return Err(Error::invalid("sophisticated rationalization needs a finite terminal value"));
    }
    let t_max = data.horizon();
    let p_last = data.p[t_max - 1];
    let bound = c1_lower_bound(p_last, t_max, prefs.beta, prefs.delta, y_lower);
    if !bound.is_finite() {
        return Err(Error::Numerical(format!("c1 lower bound overflows ({bound})")));
    }
    let mut c1 = match c1 {
        Some(c) if c > 0.0 && c.is_finite() => c,
        Some(c) => return Err(Error::invalid(format!("c1 must be positive and finite, got {c}"))),
        None if bound > 0.0 => 2.0 * bound,
        None => 1.0,
    };

    let p: Vec<Rational> = data.p.iter().map(|x| exact::rational(*x)).collect::<Result<_>>()?;
    let eprefs = ExactPreferences::from_f64(prefs)?;
    let y = exact::rational(y_lower)?;
    let half = Rational::new(1.into(), 2.into());
    let one = Rational::one();
    let mut f = Vec::with_capacity(t_max + 2);
    f.push((&one - &p[t_max - 1]) * &half);
    f.push(f[0].clone());
    for k in 2..=t_max {
        f.push(&p[t_max - k + 1] - &p[t_max - k]);
    }
    f.push(p[0].clone());

    let mut retries = 0;
    let atoms = loop {
        let pi = forward_atoms(&f, &eprefs.beta, &eprefs.delta, &y, &exact::rational(c1)?);
        let ok = strictly_increasing(&pi) && (t_max < 2 || pi[t_max].is_positive());
        if ok {
            break pi;
        }
        if retries == MAX_RETRIES {
            return Err(Error::Numerical(format!(
                "atoms not strictly increasing after {MAX_RETRIES} c1 inflations (last c1 = {c1:e})"
            )));
        }
        retries += 1;
        c1 *= 10.0;
    };

    let law = ExactDiscrete::new(atoms, f)?;
    let exact_prof = exact::solve_stationary(&law, t_max, Some(&y), &eprefs)?;
    if exact_prof.p != p {
        return Err(Error::Numerical(format!(
            "exact round trip failed (gap {:e})",
            exact::max_abs_gap(&exact_prof.p, &p)
        )));
    }

    let terminal = TerminalValue::Finite(y_lower);
    let rounded = rounded_law(&law, t_max, terminal, prefs)?;
    let f64_err = sup_gap(&rounded.resolved_p, &data.p);
    let (distribution, atoms_f64, weights, passes) =
        (rounded.distribution, rounded.atoms, rounded.weights, rounded.polish_moves);

    let v = exact_prof.v_f64();
    let profile = EquilibriumProfile { c: v.clone(), v, p: data.p.clone() };
    Ok(RationalizationResult {
        distribution,
        prefs: *prefs,
        terminal_value: terminal,
        profile,
        construction_log: ConstructionLog::Sophisticated {
            atoms: atoms_f64,
            weights,
            exact_atoms: law.points.iter().map(exact::format).collect(),
            exact_weights: law.weights.iter().map(exact::format).collect(),
            c1,
            c1_bound: bound,
            c1_retries: retries,
            polish_moves: passes,
            f64_round_trip_error: f64_err,
        },
    })
}
