//! Mean/variance renormalization of a rationalization with `β = β̂ = δ = 1`.

use super::sophisticated::rounded_law;
use super::{sup_gap, ConstructionLog, RationalizationResult};
use crate::error::{Error, Result};
use crate::exact::{self, ExactPreferences};
use crate::model::{solve_equilibrium, EquilibriumProfile, StoppingProblem, TerminalValue};

/// Maps `F` to `κ₂F + κ` with the given mean and sd, and the terminal value
/// to `κ₂ȳ + κ`. With `β = β̂ = δ = 1` every cutoff moves the same way, so the
/// stopping probabilities are unchanged; this is checked before returning
/// (exactly when the construction carries exact atoms).
pub fn moment_renormalize(
    result: &RationalizationResult,
    target_mean: f64,
    target_sd: f64,
) -> Result<RationalizationResult> {
    let prefs = result.prefs;
    if prefs.beta != 1.0 || prefs.beta_hat != 1.0 || prefs.delta != 1.0 {
        return Err(Error::invalid("moment renormalization needs beta = beta_hat = delta = 1"));
    }
    if !(target_sd > 0.0 && target_sd.is_finite() && target_mean.is_finite()) {
        return Err(Error::invalid("target mean must be finite and target sd positive"));
    }
    let (mean, var) = result.distribution.moment_stats();
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(Error::invalid("cannot renormalize a law with zero variance"));
    }
    let scale = target_sd / sd;
    let shift = target_mean - scale * mean;
    let horizon = result.horizon();

    let (distribution, terminal, profile, exact_atoms, f64_err) = match result.construction_log.exact_law() {
        Some(law) => {
            // move the exact atoms, then round and re-polish: the affine map
            // in f64 would knock atoms off the cutoffs they sit on
            let (eshift, escale) = (exact::rational(shift)?, exact::rational(scale)?);
            let moved = law?.affine(&eshift, &escale)?;
            let y = match result.terminal_value {
                TerminalValue::Finite(y0) => Some(exact::rational(y0)? * &escale + &eshift),
                TerminalValue::Mandatory => None,
            };
            let eprof = exact::solve_stationary(&moved, horizon, y.as_ref(), &ExactPreferences::from_f64(&prefs)?)?;
            let want: Vec<_> = result.profile.p.iter().map(|x| exact::rational(*x)).collect::<Result<_>>()?;
            if eprof.p != want {
                return Err(Error::Numerical(format!(
                    "renormalized law changes p (exact gap {:e})",
                    exact::max_abs_gap(&eprof.p, &want)
                )));
            }
            let terminal = y.as_ref().map_or(TerminalValue::Mandatory, |y| TerminalValue::Finite(exact::to_f64(y)));
            let rounded = rounded_law(&moved, horizon, terminal, &prefs)?;
            let f64_err = sup_gap(&rounded.resolved_p, &result.profile.p);
            let v = eprof.v_f64();
            (
                rounded.distribution,
                terminal,
                EquilibriumProfile { c: v.clone(), v, p: result.profile.p.clone() },
                Some(moved.points.iter().map(exact::format).collect()),
                f64_err,
            )
        }
        None => {
            let distribution = result.distribution.clone().affine(shift, scale)?;
            let terminal = match result.terminal_value {
                TerminalValue::Finite(y) => TerminalValue::Finite(scale * y + shift),
                TerminalValue::Mandatory => TerminalValue::Mandatory,
            };
            let resolved =
                solve_equilibrium(&StoppingProblem::stationary(distribution.clone(), horizon, terminal)?, &prefs)?;
            let f64_err = sup_gap(&resolved.p, &result.profile.p);
            if f64_err > 1e-10 {
                return Err(Error::Numerical(format!("renormalized law changes p by {f64_err:e}")));
            }
            (distribution, terminal, resolved, None, f64_err)
        }
    };

    Ok(RationalizationResult {
        distribution,
        prefs,
        terminal_value: terminal,
        profile,
        construction_log: ConstructionLog::Renormalized {
            base: Box::new(result.construction_log.clone()),
            shift,
            scale,
            exact_atoms,
            f64_round_trip_error: f64_err,
        },
    })
}
