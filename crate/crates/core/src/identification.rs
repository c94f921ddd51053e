//! Partial identification of `(β, δ)` from rich data: stopping probabilities
//! together with elicited continuation values, under sophistication.

use crate::distributions::{Discrete, Distribution};
use crate::error::{Error, Result};
use crate::hazard;
use crate::model::{EquilibriumProfile, TerminalValue};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Slack allowed on the weak inequality of the consistency test; the strict
/// ones get only a rounding allowance.
pub const SLACK: f64 = 1e-12;
/// A zero-mass band needs its numerator to vanish to this tolerance.
pub const ZERO_BAND_TOL: f64 = 1e-9;
/// Mass mismatch allowed between a law and the data when reducing.
pub const BAND_MASS_TOL: f64 = 1e-9;

/// Observed continuation values `v` and conditional stopping probabilities `p`.
/// A mandatory task shows up as `v_T = -inf` with `p_T = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RichData {
    #[serde(with = "crate::extended::vec")]
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl RichData {
    pub fn new(v: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let d = RichData { v, p };
        d.check_shape()?;
        Ok(d)
    }

    pub fn from_profile(profile: &EquilibriumProfile) -> Self {
        RichData { v: profile.v.clone(), p: profile.p.clone() }
    }

    pub fn horizon(&self) -> usize {
        self.v.len()
    }

    /// The first `horizon` periods.
    pub fn prefix(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(Error::invalid(format!("prefix length {horizon} outside 1..={}", self.horizon())));
        }
        Ok(RichData { v: self.v[..horizon].to_vec(), p: self.p[..horizon].to_vec() })
    }

    fn check_shape(&self) -> Result<()> {
        if self.v.is_empty() || self.v.len() != self.p.len() {
            return Err(Error::invalid(format!(
                "rich data needs equal non-empty v and p (got {} and {})",
                self.v.len(),
                self.p.len()
            )));
        }
        let t_max = self.v.len();
        for (i, &x) in self.v.iter().enumerate() {
            let last_mandatory = i + 1 == t_max && x == f64::NEG_INFINITY;
            if !(x.is_finite() || last_mandatory) {
                return Err(Error::invalid(format!("v_{} = {x} is not allowed", i + 1)));
            }
        }
        if self.v[t_max - 1] == f64::NEG_INFINITY && self.p[t_max - 1] != 1.0 {
            return Err(Error::invalid("v_T = -inf (mandatory) requires p_T = 1"));
        }
        Ok(())
    }
}

/// One failed monotonicity or range condition; `period` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ValueRises { period: usize, before: f64, after: f64 },
    ProbabilityFalls { period: usize, before: f64, after: f64 },
    ProbabilityOutOfRange { period: usize, value: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ValueRises { period, before, after } => {
                write!(f, "v rises at period {period} ({before} -> {after})")
            }
            Violation::ProbabilityFalls { period, before, after } => {
                write!(f, "p falls at period {period} ({before} -> {after})")
            }
            Violation::ProbabilityOutOfRange { period, value } => {
                write!(f, "p_{period} = {value} is outside [0, 1]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityReport {
    pub plausible: bool,
    pub violations: Vec<Violation>,
}

/// Relative slack in the plausibility test, so that rounding noise in
/// computed equilibria is not reported as a violation.
pub const PLAUSIBLE_SLACK: f64 = 1e-12;

/// Weak monotonicity: `v` non-increasing and `p` non-decreasing, up to
/// [`PLAUSIBLE_SLACK`].
pub fn check_plausible(data: &RichData) -> Result<PlausibilityReport> {
    data.check_shape()?;
    let mut violations = Vec::new();
    for (i, &p) in data.p.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            violations.push(Violation::ProbabilityOutOfRange { period: i + 1, value: p });
        }
    }
    for i in 1..data.horizon() {
        let scale = data.v[i - 1].abs().max(1.0);
        if data.v[i] > data.v[i - 1] + PLAUSIBLE_SLACK * scale {
            violations.push(Violation::ValueRises { period: i + 1, before: data.v[i - 1], after: data.v[i] });
        }
        if data.p[i] < data.p[i - 1] - PLAUSIBLE_SLACK {
            violations.push(Violation::ProbabilityFalls { period: i + 1, before: data.p[i - 1], after: data.p[i] });
        }
    }
    Ok(PlausibilityReport { plausible: violations.is_empty(), violations })
}

fn require_plausible(data: &RichData) -> Result<()> {
    let report = check_plausible(data)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::invalid(format!("data is not plausible: {v}")));
    }
    if !(data.p[0] > 0.0) {
        return Err(Error::invalid("consistency test needs p_1 > 0"));
    }
    Ok(())
}

/// `(1-p)·v` with `0·(-inf) = 0`.
fn tail(p: f64, v: f64) -> f64 {
    if p >= 1.0 {
        0.0
    } else {
        (1.0 - p) * v
    }
}

fn check_params(beta: f64, delta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite() && delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("beta and delta must be positive and finite (got {beta}, {delta})")));
    }
    Ok(())
}

/// `β·π_{T-t}` times the band weight `p_{t+1} - p_t`, for 1-based `t` in `2..T`.
///
/// Equals `v_{t+1}(p_{t+1}-p_t) - N_t` where `N_t` is the numerator inside `a(δ,t)`.
fn band_numerator(data: &RichData, delta: f64, t: usize) -> f64 {
    let (v, p) = (&data.v, &data.p);
    let (vm, vt, vp) = (v[t - 2], v[t - 1], v[t]);
    let (pt, pp) = (p[t - 1], p[t]);
    -(vm - vt) / delta + tail(pt, vt) - tail(pp, vp)
}

/// The `t = 1` condition: `β·(v_2(p_2-p_1) + v_1 p_1) < δ⁻¹v_1 - (1-p_2)v_2`.
fn first_condition(data: &RichData, beta: f64, delta: f64) -> bool {
    let (v, p) = (&data.v, &data.p);
    let dp = p[1] - p[0];
    let band = if dp <= 0.0 { 0.0 } else { v[1] * dp };
    let lhs = beta * (band + v[0] * p[0]);
    let rhs = v[0] / delta - tail(p[1], v[1]);
    let err = ROUNDOFF * (lhs.abs() + (v[0] / delta).abs() + tail(p[1], v[1]).abs());
    lhs < rhs + err
}

/// Rounding allowance per unit of magnitude in a condition's terms. Data whose
/// bands are thinner than this cannot be resolved in double precision and get
/// the benefit of the doubt.
const ROUNDOFF: f64 = 8.0 * f64::EPSILON;

/// Bound on the rounding error of `band_numerator(..) / dp`.
fn band_roundoff(data: &RichData, delta: f64, t: usize, dp: f64, scaled: f64) -> f64 {
    let (v, p) = (&data.v, &data.p);
    let terms = (v[t - 2].abs() + v[t - 1].abs()) / delta + tail(p[t - 1], v[t - 1]).abs() + tail(p[t], v[t]).abs();
    ROUNDOFF * (terms / dp.abs() + scaled.abs())
}

/// Whether the data can come from a sophisticated agent with these `(β, δ)`.
///
/// Interior conditions are evaluated as `v_{t+1}β < v_{t+1}a(δ,t) <= v_tβ`
/// with `v_{t+1}a(δ,t)` expanded so that nothing is divided by `v`.
/// A band with `p_{t+1} = p_t` carries no mass; it is consistent only when
/// the numerator of `a(δ,t)` vanishes.
pub fn check_consistent(data: &RichData, beta: f64, delta: f64) -> Result<bool> {
    require_plausible(data)?;
    check_params(beta, delta)?;
    Ok(consistent_unchecked(data, beta, delta))
}

fn consistent_unchecked(data: &RichData, beta: f64, delta: f64) -> bool {
    let t_max = data.horizon();
    if t_max == 1 {
        return true;
    }
    if !first_condition(data, beta, delta) {
        return false;
    }
    for t in 2..t_max {
        let num = band_numerator(data, delta, t);
        let dp = data.p[t] - data.p[t - 1];
        if dp <= 0.0 {
            if num.abs() > ZERO_BAND_TOL {
                return false;
            }
            continue;
        }
        let scaled = num / dp; // v_{t+1}·a(δ,t)
        let err = band_roundoff(data, delta, t, dp, scaled);
        let lower = data.v[t] * beta;
        let upper = data.v[t - 1] * beta;
        if !(lower < scaled + err || lower == f64::NEG_INFINITY) {
            return false;
        }
        if !(scaled <= upper + SLACK + err) {
            return false;
        }
    }
    true
}

/// An explicit `T+1`-atom law (atom `k` with weight `f_k`) rationalizing
/// rich data at a consistent `(β, δ)`. The bottom atom is dropped for
/// mandatory data, where it has no mass and would sit at `-inf`.
pub fn witness(data: &RichData, beta: f64, delta: f64) -> Result<Distribution> {
    if !check_consistent(data, beta, delta)? {
        return Err(Error::invalid(format!("data is not consistent with beta={beta}, delta={delta}")));
    }
    let t_max = data.horizon();
    let (v, p) = (&data.v, &data.p);
    let f = mass_weights(&data.p);
    let mut atoms = vec![0.0; t_max + 1];

    // interior bands, atom T-t sits in (v_{t+1}, v_t]
    for t in 2..t_max {
        let dp = p[t] - p[t - 1];
        atoms[t_max - t] = if dp <= 0.0 { v[t - 1] } else { band_numerator(data, delta, t) / (beta * dp) };
    }

    // the top pair only has to match one sum; keep atom T-1 inside its band
    // and let the top atom take up the rest
    if t_max >= 2 {
        let r1 = (v[0] / delta - tail(p[1], v[1])) / beta;
        let (f_mid, f_top) = (f[t_max - 1], f[t_max]);
        let mid = if f_mid == 0.0 {
            v[0]
        } else {
            // upper limit keeping the top atom above v_1
            let room = (r1 - f_top * v[0]) / f_mid;
            // stay off both ends, an atom on a cutoff is a tie
            let top = room.min(v[0]);
            if v[1].is_finite() {
                0.5 * (v[1] + top)
            } else {
                top - top.abs().max(1.0)
            }
        };
        atoms[t_max - 1] = mid;
        atoms[t_max] = (r1 - f_mid * mid) / f_top;
    } else {
        atoms[1] = v[0] + v[0].abs().max(1.0);
    }

    let last = v[t_max - 1];
    let pairs: Vec<(f64, f64)> = if last.is_finite() {
        atoms[0] = last - last.abs().max(1.0);
        atoms.into_iter().zip(f).collect()
    } else {
        atoms.into_iter().zip(f).skip(1).collect()
    };
    let (points, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if !interleaved_support(&points, &weights, v) {
        return Err(Error::Numerical("witness atoms lost their ordering in floating point".into()));
    }
    Ok(Distribution::Discrete(Discrete::new(points, weights)?))
}

/// Atom weights `f_0 = 1-p_T`, `f_k = p_{T-k+1} - p_{T-k}`, `f_T = p_1`.
pub fn mass_weights(p: &[f64]) -> Vec<f64> {
    let t_max = p.len();
    let mut f = vec![0.0; t_max + 1];
    f[0] = 1.0 - p[t_max - 1];
    for k in 1..t_max {
        f[k] = (p[t_max - k] - p[t_max - k - 1]).max(0.0);
    }
    f[t_max] = p[0];
    f
}

/// Checks `π_0 <= v_T < π_1 <= v_{T-1} < ... <= π_{T-1} <= v_1 < π_T`.
/// `atoms` has `T+1` entries; a `-inf` bottom atom is accepted for mandatory data.
pub fn interleaved(atoms: &[f64], v: &[f64]) -> bool {
    let t_max = v.len();
    if atoms.len() != t_max + 1 {
        return false;
    }
    (0..t_max).all(|k| {
        let cut = v[t_max - 1 - k];
        atoms[k] <= cut && cut < atoms[k + 1]
    })
}

// Interleaving as above, except that a zero-weight atom may sit on the
// cutoff below it: with tied values its band is empty and nothing fits.
// The bottom atom may have been dropped (mandatory data).
fn interleaved_support(points: &[f64], weights: &[f64], v: &[f64]) -> bool {
    let t_max = v.len();
    let skip = t_max + 1 - points.len();
    let atom = |k: usize| if k < skip { f64::NEG_INFINITY } else { points[k - skip] };
    let weight = |k: usize| if k < skip { 0.0 } else { weights[k - skip] };
    (0..t_max).all(|k| {
        let cut = v[t_max - 1 - k];
        let above = atom(k + 1);
        atom(k) <= cut && (cut < above || (cut == above && weight(k + 1) == 0.0))
    })
}

/// Output of [`reduce_to_mass_points`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassPoints {
    /// `π_0..π_T`; `π_0 = -inf` for mandatory data.
    #[serde(with = "crate::extended::vec")]
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    /// The atoms as a law, without a massless infinite bottom atom.
    pub distribution: Distribution,
}

/// Collapses `law` onto one atom per band between consecutive continuation
/// values, placed at the conditional mean of the band. The bands are
/// `(-inf, v_T]`, `(v_{t+1}, v_t]` and `(v_1, inf)`.
///
/// A massless band keeps a zero-weight atom at its upper end (or just above
/// `v_1` for the top band).
pub fn reduce_to_mass_points(data: &RichData, law: &Distribution) -> Result<MassPoints> {
    data.check_shape()?;
    law.validate()?;
    let t_max = data.horizon();
    let f = mass_weights(&data.p);
    let mut atoms = Vec::with_capacity(t_max + 1);
    for (k, &fk) in f.iter().enumerate() {
        let lo = if k == 0 { f64::NEG_INFINITY } else { data.v[t_max - k] };
        let hi = if k == t_max { f64::INFINITY } else { data.v[t_max - 1 - k] };
        let cdf = |x: f64| if x == f64::INFINITY { 1.0 } else if x == f64::NEG_INFINITY { 0.0 } else { law.cdf(x) };
        let pe = |x: f64| if x == f64::INFINITY { 0.0 } else { law.partial_expectation(x) };
        let mass = cdf(hi) - cdf(lo);
        if (mass - fk).abs() > BAND_MASS_TOL {
            return Err(Error::invalid(format!(
                "law puts mass {mass} on band {k} but the data needs {fk}"
            )));
        }
        let atom = if mass <= 0.0 || fk == 0.0 {
            if hi.is_finite() {
                hi
            } else if lo.is_finite() {
                lo + lo.abs().max(1.0)
            } else {
                f64::NEG_INFINITY
            }
        } else {
            let mean = (pe(lo) - pe(hi)) / mass;
            if !mean.is_finite() {
                return Err(Error::Numerical(format!("band {k} has non-finite conditional mean")));
            }
            // the band mean can land a rounding step outside a thin band
            let mean = if lo.is_finite() && mean <= lo { lo.next_up() } else { mean };
            if hi.is_finite() { mean.min(hi) } else { mean }
        };
        atoms.push(atom);
    }
    let (points, weights): (Vec<f64>, Vec<f64>) = atoms
        .iter()
        .zip(&f)
        .filter(|(a, _)| a.is_finite())
        .map(|(&a, &w)| (a, w))
        .unzip();
    let distribution = Distribution::Discrete(Discrete::new(points, weights)?);
    Ok(MassPoints { atoms, weights: f, distribution })
}

/// An evenly spaced grid `lo, lo+step, ...` up to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = Grid { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    pub fn point(x: f64) -> Self {
        Grid { lo: x, hi: x, step: 1.0 }
    }

    pub fn default_beta() -> Self {
        Grid { lo: 0.3, hi: 1.5, step: 0.005 }
    }

    /// Fine enough to catch the thin δ slivers that long data sets leave.
    pub fn default_delta() -> Self {
        Grid { lo: 0.8, hi: 1.0, step: 0.0005 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::invalid(format!("grid needs finite lo <= hi (got {}, {})", self.lo, self.hi)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid(format!("grid step must be positive, got {}", self.step)));
        }
        Ok(())
    }

    /// Points are computed as `lo + i·step` and rounded to 12 decimals so that
    /// grids like 0.3, 0.305, ... print cleanly.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let x = self.lo + i as f64 * self.step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub beta: f64,
    pub delta: f64,
    pub distribution: Distribution,
}

/// The consistent region of a `(β, δ)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedSet {
    pub beta_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    /// `mask[i][j]` is the cell `(beta_grid[i], delta_grid[j])`.
    pub mask: Vec<Vec<bool>>,
    pub witness: Option<Witness>,
}

impl IdentifiedSet {
    pub fn is_consistent(&self, i: usize, j: usize) -> bool {
        self.mask[i][j]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().flatten().filter(|&&b| b).count()
    }

    /// Smallest and largest consistent β at the δ column closest to `delta`.
    pub fn beta_interval(&self, delta: f64) -> Option<(f64, f64)> {
        let j = self
            .delta_grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - delta).abs().total_cmp(&(b.1 - delta).abs()))?
            .0;
        let hits: Vec<f64> = (0..self.beta_grid.len())
            .filter(|&i| self.mask[i][j])
            .map(|i| self.beta_grid[i])
            .collect();
        Some((*hits.first()?, *hits.last()?))
    }

    /// δ values at which `beta` (nearest grid row) is consistent.
    pub fn deltas_for_beta(&self, beta: f64) -> Vec<f64> {
        let Some(i) = self
            .beta_grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - beta).abs().total_cmp(&(b.1 - beta).abs()))
            .map(|x| x.0)
        else {
            return Vec::new();
        };
        (0..self.delta_grid.len())
            .filter(|&j| self.mask[i][j])
            .map(|j| self.delta_grid[j])
            .collect()
    }

    /// Long format `(beta, delta, consistent)` in grid order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, bool)> + '_ {
        self.beta_grid.iter().enumerate().flat_map(move |(i, &b)| {
            self.delta_grid.iter().enumerate().map(move |(j, &d)| (b, d, self.mask[i][j]))
        })
    }
}

/// Evaluates the consistency test on every grid cell, in parallel.
///
/// The witness is built for the first consistent cell with `β <= 1`
/// (scanning β, then δ) where construction succeeds, so that it can be
/// re-solved as a proper agent.
pub fn identified_set(data: &RichData, beta_grid: &Grid, delta_grid: &Grid) -> Result<IdentifiedSet> {
    require_plausible(data)?;
    beta_grid.validate()?;
    delta_grid.validate()?;
    let betas = beta_grid.values();
    let deltas = delta_grid.values();
    if betas.iter().chain(&deltas).any(|&x| !(x > 0.0)) {
        return Err(Error::invalid("grid values must be positive"));
    }
    let mask: Vec<Vec<bool>> = betas
        .par_iter()
        .map(|&b| deltas.iter().map(|&d| consistent_unchecked(data, b, d)).collect())
        .collect();
    // cells admitted only by the rounding allowance can sit exactly on a
    // strict boundary, where no atom fits its band; move on to the next one
    let mut first_err = None;
    let mut found = None;
    let mask_ref = &mask;
    let deltas_ref = &deltas;
    let candidates = betas.iter().enumerate().filter(|(_, &b)| b <= 1.0).flat_map(|(i, &b)| {
        deltas_ref.iter().enumerate().filter(move |(j, &d)| mask_ref[i][*j] && d <= 1.0).map(move |(_, &d)| (b, d))
    });
    for (beta, delta) in candidates {
        match witness(data, beta, delta) {
            Ok(distribution) => {
                found = Some(Witness { beta, delta, distribution });
                break;
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let witness = match (found, first_err) {
        (Some(w), _) => Some(w),
        (None, Some(e)) => return Err(e),
        (None, None) => None,
    };
    Ok(IdentifiedSet { beta_grid: betas, delta_grid: deltas, mask, witness })
}

/// The terminal value implied by the data's last period.
pub fn terminal_value(data: &RichData) -> Result<TerminalValue> {
    TerminalValue::from_value(data.v[data.horizon() - 1])
}

/// Checks `v_T = ȳ` when the penalty is observed.
pub fn check_terminal(data: &RichData, terminal: TerminalValue) -> bool {
    let last = data.v[data.horizon() - 1];
    match terminal {
        TerminalValue::Mandatory => last == f64::NEG_INFINITY,
        TerminalValue::Finite(y) => last == y,
    }
}

/// Population-level conditional stopping probabilities from a mixture of types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Unconditional completion masses per period.
    pub q: Vec<f64>,
    /// Mass that never completes.
    pub residual: f64,
    pub p: Vec<f64>,
}

/// Mixes types `(weight, p)` through their unconditional completion masses.
pub fn aggregate_mixture(profiles: &[(f64, Vec<f64>)]) -> Result<Aggregate> {
    let Some((_, first)) = profiles.first() else {
        return Err(Error::invalid("mixture needs at least one type"));
    };
    let t_max = first.len();
    if t_max == 0 {
        return Err(Error::invalid("types need at least one period"));
    }
    let total: f64 = profiles.iter().map(|(w, _)| w).sum();
    if profiles.iter().any(|(w, _)| !(*w > 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("type weights must be positive and sum to 1 (sum {total})")));
    }
    let mut q = vec![0.0; t_max];
    let mut residual = 0.0;
    for (w, p) in profiles {
        if p.len() != t_max {
            return Err(Error::invalid("all types need the same horizon"));
        }
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid("stopping probabilities must lie in [0, 1]"));
        }
        let (qi, ri) = hazard::unconditional(p);
        for (acc, x) in q.iter_mut().zip(qi) {
            *acc += w * x;
        }
        residual += w * ri;
    }
    let p = hazard::conditional(&q, residual)?;
    Ok(Aggregate { q, residual, p })
}
