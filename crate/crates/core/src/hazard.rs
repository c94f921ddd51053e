//! Conversions between conditional stopping probabilities and unconditional
//! completion-time masses.

use crate::error::{Error, Result};

/// `q_t = p_t·Π_{s<t}(1 - p_s)` plus the never-completed mass `Π_t (1 - p_t)`.
pub fn unconditional(p: &[f64]) -> (Vec<f64>, f64) {
    let mut survive = 1.0;
    let q = p
        .iter()
        .map(|&pt| {
            let q = pt * survive;
            survive *= 1.0 - pt;
            q
        })
        .collect();
    (q, survive)
}

/// Inverse of [`unconditional`]: `p_t = q_t / (Σ_{s≥t} q_s + residual)`.
///
/// Periods nobody reaches get `p_t = 0`, except that a final period with
/// no residual mass gets 1.
pub fn conditional(q: &[f64], residual: f64) -> Result<Vec<f64>> {
    if q.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || !(residual >= 0.0) {
        return Err(Error::invalid("completion masses must be non-negative"));
    }
    let total: f64 = q.iter().sum::<f64>() + residual;
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("completion masses sum to {total}, not 1")));
    }
    let n = q.len();
    let mut tail = residual;
    let mut p = vec![0.0; n];
    for t in (0..n).rev() {
        tail += q[t];
        p[t] = if tail > 0.0 {
            (q[t] / tail).min(1.0)
        } else if t == n - 1 && residual == 0.0 {
            1.0
        } else {
            0.0
        };
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = [0.25827, 0.304687, 0.375, 0.5, 1.0];
        let (q, r) = unconditional(&p);
        assert_eq!(r, 0.0);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let back = conditional(&q, r).unwrap();
        for (a, b) in back.iter().zip(p) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_mass() {
        let (q, r) = unconditional(&[0.5, 0.5]);
        assert_eq!(q, vec![0.5, 0.25]);
        assert_eq!(r, 0.25);
        assert_eq!(conditional(&q, r).unwrap(), vec![0.5, 0.5]);
    }
}
