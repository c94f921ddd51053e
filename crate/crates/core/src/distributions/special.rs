//! Scalar special functions used by the closed-form partial expectations.

use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Φ(z)`, accurate for large `z`.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series below 1, modified Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > 700.0 {
        return 0.0;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let k = k as f64;
            term *= -x / k;
            let add = term / k;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let i = i as f64;
            let a = -i * i;
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `∫_0^a (-ln u) e^{-u} du + γ`-type helper for the Gumbel partial mean:
/// returns `H(a) = γ + E1(a) + e^{-a} ln a`, which equals
/// `∫_0^a (-ln u) e^{-u} du` and tends to `γ` as `a → ∞`.
pub fn gumbel_tail_weight(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    if a < 1.0 {
        // -(1 - e^{-a}) ln a + Σ_{k≥1} (-1)^{k+1} a^k / (k k!)
        let lead = -(-(-a).exp_m1()) * a.ln();
        let mut sum = 0.0;
        let mut fact_pow = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            fact_pow *= a / kf;
            let add = fact_pow / kf;
            if k % 2 == 1 {
                sum += add;
            } else {
                sum -= add;
            }
            if add < 1e-18 {
                break;
            }
        }
        lead + sum
    } else {
        EULER_GAMMA + exp_integral_e1(a) + (-a).exp() * a.ln()
    }
}
