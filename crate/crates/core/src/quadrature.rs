//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used as an independent check on the closed-form partial expectations and
//! as a fallback for densities without one.

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_REFINEMENTS: usize = 1 << 20;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
fn integrate_finite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, err: e });
    let mut total = v;
    let mut err = e;
    let mut refinements = 0;
    while err > tol {
        if refinements >= MAX_REFINEMENTS {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] stalled at error {err:e} after {refinements} refinements"
            )));
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in f64
            heap.push(Piece { err: 0.0, ..worst });
            err = heap.iter().map(|p| p.err).sum();
            if err > tol && heap.peek().map(|p| p.err) == Some(0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Piece { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, err: e2 });
        refinements += 1;
        if refinements % 64 == 0 {
            // refresh sums to shed rounding drift
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    if !total.is_finite() {
        return Err(Error::Numerical("quadrature produced a non-finite value".into()));
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integrates `f` over `[a, b]`, where either end may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(&f, a, b, tol),
        (true, false) => integrate_finite(
            &|t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, true) => integrate_finite(
            &|t: f64| f(b - (1.0 - t) / t) / (t * t),
            0.0,
            1.0,
            tol,
        ),
        (false, false) => integrate_finite(
            &|t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * (1.0 + t * t) / (s * s)
            },
            -1.0,
            1.0,
            tol,
        ),
    }
}

/// Integrates over `[a, b]` split at the given interior `breaks`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![a];
    edges.extend(cuts);
    edges.push(b);
    let share = tol / (edges.len() - 1) as f64;
    edges.windows(2).map(|w| integrate(&f, w[0], w[1], share)).sum()
}

/// `E[Y; Y > w]` by integrating the density; errors for laws with atoms.
pub fn partial_expectation(dist: &Distribution, w: f64, tol: f64) -> Result<f64> {
    if dist.pdf(0.0).is_none() {
        return Err(Error::invalid("quadrature needs a law without atoms"));
    }
    let (lo, hi) = dist.support();
    let from = w.max(lo);
    if from >= hi {
        return Ok(0.0);
    }
    let breaks = dist.breakpoints();
    integrate_with_breaks(|z| z * dist.pdf(z).unwrap_or(0.0), from, hi, &breaks, tol)
}

/// `P(Y <= x)` by integrating the density.
pub fn cdf(dist: &Distribution, x: f64, tol: f64) -> Result<f64> {
    if dist.pdf(0.0).is_none() {
        return Err(Error::invalid("quadrature needs a law without atoms"));
    }
    let (lo, _) = dist.support();
    if x <= lo {
        return Ok(0.0);
    }
    let breaks = dist.breakpoints();
    integrate_with_breaks(|z| dist.pdf(z).unwrap_or(0.0), lo, x, &breaks, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, -1.0, 3.0, 1e-12).unwrap();
        assert!((v - 12.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_over_real_line() {
        let v = integrate(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn uniform_partial_mean_matches_closed_form() {
        let u = Distribution::uniform(-1.0, 1.0);
        let q = partial_expectation(&u, 0.25, DEFAULT_TOL).unwrap();
        assert!((q - 15.0 / 64.0).abs() < 1e-12);
        assert!((q - u.partial_expectation(0.25)).abs() < 1e-12);
    }

    #[test]
    fn normal_partial_mean_matches_closed_form() {
        let n = Distribution::from_mean_sd(Family::Normal, 0.0, 0.577).unwrap();
        let q = partial_expectation(&n, 0.0, DEFAULT_TOL).unwrap();
        assert!((q - n.partial_expectation(0.0)).abs() < 1e-10);
    }

    #[test]
    fn rejects_atoms() {
        let d = Distribution::point_mass(1.0).unwrap();
        assert!(partial_expectation(&d, 0.0, DEFAULT_TOL).is_err());
    }
}
