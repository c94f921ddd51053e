//! Monte-Carlo agent: draws `y_t` and stops at the first `t` with `y_t > v_t`.

use crate::model::{EquilibriumProfile, StoppingProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub paths: usize,
    /// Paths still undecided when period t begins.
    pub at_risk: Vec<u64>,
    /// Paths that stop in period t.
    pub stopped: Vec<u64>,
}

impl SimulationSummary {
    /// Empirical conditional stopping frequencies.
    pub fn frequencies(&self) -> Vec<f64> {
        self.at_risk
            .iter()
            .zip(&self.stopped)
            .map(|(&n, &k)| if n == 0 { f64::NAN } else { k as f64 / n as f64 })
            .collect()
    }

    /// Binomial standard errors `sqrt(p(1-p)/n)` at the given probabilities.
    pub fn standard_errors(&self, p: &[f64]) -> Vec<f64> {
        self.at_risk
            .iter()
            .zip(p)
            .map(|(&n, &pt)| if n == 0 { f64::NAN } else { (pt * (1.0 - pt) / n as f64).sqrt() })
            .collect()
    }

    /// Largest `|freq - p| / se` over periods with at least one path at risk.
    /// A degenerate `p` (se = 0) counts as infinite unless matched exactly.
    pub fn max_z(&self, p: &[f64]) -> f64 {
        let f = self.frequencies();
        let se = self.standard_errors(p);
        let mut worst: f64 = 0.0;
        for t in 0..p.len() {
            if self.at_risk[t] == 0 {
                continue;
            }
            let gap = (f[t] - p[t]).abs();
            let z = if se[t] > 0.0 {
                gap / se[t]
            } else if gap == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
        worst
    }
}

/// Simulates `paths` agents using the cutoffs in `profile`. Work is split into
/// fixed chunks with independent ChaCha streams, so results do not depend on
/// the thread count.
pub fn simulate(
    problem: &StoppingProblem,
    profile: &EquilibriumProfile,
    paths: usize,
    seed: u64,
) -> SimulationSummary {
    let t_max = problem.horizon();
    let samplers: Vec<_> = (1..=t_max).map(|t| problem.law(t).sampler()).collect();
    let chunks = paths.div_ceil(CHUNK);
    let (at_risk, stopped) = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let n = CHUNK.min(paths - k * CHUNK);
            let mut at_risk = vec![0u64; t_max];
            let mut stopped = vec![0u64; t_max];
            for _ in 0..n {
                for t in 0..t_max {
                    at_risk[t] += 1;
                    let y = samplers[t].draw(&mut rng);
                    if y > profile.v[t] {
                        stopped[t] += 1;
                        break;
                    }
                }
            }
            (at_risk, stopped)
        })
        .reduce(
            || (vec![0u64; t_max], vec![0u64; t_max]),
            |(mut a1, mut s1), (a2, s2)| {
                for t in 0..t_max {
                    a1[t] += a2[t];
                    s1[t] += s2[t];
                }
                (a1, s1)
            },
        );
    SimulationSummary { paths, at_risk, stopped }
}
