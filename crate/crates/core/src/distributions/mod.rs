//! One-dimensional payoff laws.
//!
//! Every variant answers the same queries: right-continuous CDF, upper partial
//! expectation `E[Y; Y > w]` (plus the weak `Y >= w` version), moments,
//! sampling and, for continuous laws, a density.

mod parametric;
pub mod special;

pub use parametric::{Family, ParametricLaw};

use crate::error::{Error, Result};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

/// Tolerance on the total mass of a discrete or piecewise law.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Distribution {
    Discrete(Discrete),
    PiecewiseUniform(PiecewiseUniform),
    Parametric(ParametricLaw),
    Affine(Affine),
}

/// Finitely many atoms. Points are sorted; zero weights are allowed so that
/// constructions with tied probabilities keep a fixed atom count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscreteRepr")]
pub struct Discrete {
    points: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscreteRepr {
    #[serde(deserialize_with = "exact_numbers")]
    points: Vec<f64>,
    #[serde(deserialize_with = "exact_numbers")]
    weights: Vec<f64>,
}

impl TryFrom<DiscreteRepr> for Discrete {
    type Error = Error;
    fn try_from(r: DiscreteRepr) -> Result<Self> {
        Discrete::new(r.points, r.weights)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrString {
    Number(f64),
    Text(String),
}

/// Parses a number written either as a JSON double or as a decimal / `p/q` string.
pub fn parse_exact_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.contains('/') {
        let r: BigRational = s
            .parse()
            .map_err(|_| Error::invalid(format!("cannot parse rational '{s}'")))?;
        return r
            .to_f64()
            .ok_or_else(|| Error::invalid(format!("rational '{s}' out of range")));
    }
    s.parse::<f64>()
        .map_err(|_| Error::invalid(format!("cannot parse number '{s}'")))
}

fn exact_numbers<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    let raw = Vec::<NumberOrString>::deserialize(d)?;
    raw.into_iter()
        .map(|x| match x {
            NumberOrString::Number(v) => Ok(v),
            NumberOrString::Text(s) => parse_exact_number(&s).map_err(serde::de::Error::custom),
        })
        .collect()
}

impl Discrete {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "discrete law needs matching non-empty points/weights (got {} and {})",
                points.len(),
                weights.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("discrete atoms must be finite"));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::invalid(format!("discrete atoms not sorted at index {}", i + 1)));
        }
        check_weights(&weights)?;
        Ok(Discrete { points, weights })
    }

    /// Sorts `(point, weight)` pairs before building.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (points, weights) = pairs.into_iter().unzip();
        Discrete::new(points, weights)
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Discrete::new(vec![x], vec![1.0])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    // sums fold from +0.0; an empty f64 `sum()` is -0.0
    fn cdf(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= x);
        self.weights[..k].iter().fold(0.0, |a, b| a + b).min(1.0)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|&p| p < x);
        self.weights[..k].iter().fold(0.0, |a, b| a + b).min(1.0)
    }

    fn sf(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= x);
        self.weights[k..].iter().fold(0.0, |a, b| a + b).min(1.0)
    }

    fn pe(&self, w: f64, weak: bool) -> f64 {
        let k = if weak {
            self.points.partition_point(|&p| p < w)
        } else {
            self.points.partition_point(|&p| p <= w)
        };
        self.points[k..].iter().zip(&self.weights[k..]).map(|(x, p)| x * p).fold(0.0, |a, b| a + b)
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::invalid(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// One piece of a [`PiecewiseUniform`] law; `lo == hi` is an atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

impl Segment {
    fn is_atom(&self) -> bool {
        self.lo == self.hi
    }

    /// Fraction of this piece at or below `x`.
    fn frac(&self, x: f64) -> f64 {
        if x < self.lo {
            0.0
        } else if x >= self.hi {
            1.0
        } else {
            (x - self.lo) / (self.hi - self.lo)
        }
    }

    /// `E[Y; Y > w]` restricted to this piece, unweighted.
    fn tail_mean(&self, w: f64) -> f64 {
        if w >= self.hi {
            return 0.0;
        }
        let a = w.max(self.lo);
        (self.hi - a) * (self.hi + a) / (2.0 * (self.hi - self.lo))
    }
}

/// Mixture of uniform pieces and atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseRepr")]
pub struct PiecewiseUniform {
    segments: Vec<Segment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseRepr {
    segments: Vec<Segment>,
}

impl TryFrom<PiecewiseRepr> for PiecewiseUniform {
    type Error = Error;
    fn try_from(r: PiecewiseRepr) -> Result<Self> {
        PiecewiseUniform::new(r.segments)
    }
}

impl PiecewiseUniform {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("piecewise-uniform law needs at least one segment"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.lo.is_finite() && s.hi.is_finite() && s.lo <= s.hi) {
                return Err(Error::invalid(format!("segment {i} must satisfy lo <= hi (finite)")));
            }
        }
        let w: Vec<f64> = segments.iter().map(|s| s.weight).collect();
        check_weights(&w)?;
        Ok(PiecewiseUniform { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn cdf(&self, x: f64) -> f64 {
        self.segments.iter().map(|s| s.weight * s.frac(x)).fold(0.0, |a, b| a + b).min(1.0)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                if s.is_atom() {
                    if s.lo < x { s.weight } else { 0.0 }
                } else {
                    s.weight * s.frac(x)
                }
            })
            .fold(0.0, |a, b| a + b)
            .min(1.0)
    }

    fn sf(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.weight * (1.0 - s.frac(x)))
            .fold(0.0, |a, b| a + b)
            .min(1.0)
    }

    fn pe(&self, w: f64, weak: bool) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                if s.is_atom() {
                    let above = if weak { s.lo >= w } else { s.lo > w };
                    if above { s.weight * s.lo } else { 0.0 }
                } else {
                    s.weight * s.tail_mean(w)
                }
            })
            .fold(0.0, |a, b| a + b)
    }

    fn has_atoms(&self) -> bool {
        self.segments.iter().any(|s| s.is_atom() && s.weight > 0.0)
    }
}

/// The law of `scale * X + shift` for `X ~ inner`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Affine {
    pub inner: Box<Distribution>,
    pub shift: f64,
    pub scale: f64,
}

impl Affine {
    fn pull(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    /// Discrete and piecewise inners are mapped pointwise so that comparisons
    /// against thresholds happen on the transformed atoms.
    fn flattened(&self) -> Option<Distribution> {
        match self.inner.as_ref() {
            Distribution::Discrete(d) => Some(Distribution::Discrete(Discrete {
                points: d.points.iter().map(|x| self.scale * x + self.shift).collect(),
                weights: d.weights.clone(),
            })),
            Distribution::PiecewiseUniform(p) => Some(Distribution::PiecewiseUniform(PiecewiseUniform {
                segments: p
                    .segments
                    .iter()
                    .map(|s| Segment {
                        lo: self.scale * s.lo + self.shift,
                        hi: self.scale * s.hi + self.shift,
                        weight: s.weight,
                    })
                    .collect(),
            })),
            Distribution::Affine(a) => {
                let composed = Affine {
                    inner: a.inner.clone(),
                    shift: self.scale * a.shift + self.shift,
                    scale: self.scale * a.scale,
                };
                Some(composed.flattened().unwrap_or(Distribution::Affine(composed)))
            }
            Distribution::Parametric(_) => None,
        }
    }
}

impl Distribution {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Distribution::Parametric(ParametricLaw::Uniform { lo, hi })
    }

    pub fn normal(mean: f64, sd: f64) -> Self {
        Distribution::Parametric(ParametricLaw::Normal { mean, sd })
    }

    pub fn lognormal_negated(mu: f64, sigma: f64) -> Self {
        Distribution::Parametric(ParametricLaw::LognormalNegated { mu, sigma })
    }

    pub fn discrete(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Discrete::new(points, weights).map(Distribution::Discrete)
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Discrete::point_mass(x).map(Distribution::Discrete)
    }

    pub fn piecewise_uniform(segments: Vec<Segment>) -> Result<Self> {
        PiecewiseUniform::new(segments).map(Distribution::PiecewiseUniform)
    }

    /// Member of `family` with the given mean and standard deviation.
    pub fn from_mean_sd(family: Family, mean: f64, sd: f64) -> Result<Self> {
        ParametricLaw::from_mean_sd(family, mean, sd).map(Distribution::Parametric)
    }

    /// `scale * self + shift`; `scale` must be positive.
    pub fn affine(self, shift: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(Error::invalid(format!(
                "affine map needs finite shift and positive scale (got {shift}, {scale})"
            )));
        }
        Ok(Distribution::Affine(Affine { inner: Box::new(self), shift, scale }))
    }

    /// Checks the invariants that serde alone cannot enforce.
    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Discrete(d) => Discrete::new(d.points.clone(), d.weights.clone()).map(|_| ()),
            Distribution::PiecewiseUniform(p) => PiecewiseUniform::new(p.segments.clone()).map(|_| ()),
            Distribution::Parametric(law) => law.validate(),
            Distribution::Affine(a) => {
                if !(a.scale > 0.0 && a.scale.is_finite() && a.shift.is_finite()) {
                    return Err(Error::invalid("affine map needs finite shift and positive scale"));
                }
                a.inner.validate()
            }
        }
    }

    /// `P(Y <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.cdf(x),
            Distribution::PiecewiseUniform(p) => p.cdf(x),
            Distribution::Parametric(law) => law.cdf(x),
            Distribution::Affine(a) => match a.flattened() {
                Some(flat) => flat.cdf(x),
                None => a.inner.cdf(a.pull(x)),
            },
        }
    }

    /// `P(Y < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.cdf_left(x),
            Distribution::PiecewiseUniform(p) => p.cdf_left(x),
            Distribution::Parametric(law) => law.cdf(x),
            Distribution::Affine(a) => match a.flattened() {
                Some(flat) => flat.cdf_left(x),
                None => a.inner.cdf_left(a.pull(x)),
            },
        }
    }

    /// `P(Y > x)`, summed directly rather than as `1 - cdf`.
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.sf(x),
            Distribution::PiecewiseUniform(p) => p.sf(x),
            Distribution::Parametric(law) => law.sf(x),
            Distribution::Affine(a) => match a.flattened() {
                Some(flat) => flat.sf(x),
                None => a.inner.sf(a.pull(x)),
            },
        }
    }

    /// Upper partial expectation `E[Y; Y > w]` (atoms at `w` excluded).
    /// `w = -inf` gives the mean.
    pub fn partial_expectation(&self, w: f64) -> f64 {
        self.pe(w, false)
    }

    /// `E[Y; Y >= w]` (atoms at `w` included).
    pub fn partial_expectation_weak(&self, w: f64) -> f64 {
        self.pe(w, true)
    }

    fn pe(&self, w: f64, weak: bool) -> f64 {
        match self {
            Distribution::Discrete(d) => d.pe(w, weak),
            Distribution::PiecewiseUniform(p) => p.pe(w, weak),
            Distribution::Parametric(law) => law.partial_expectation(w),
            Distribution::Affine(a) => match a.flattened() {
                Some(flat) => flat.pe(w, weak),
                None => {
                    let wp = a.pull(w);
                    let above = if weak { 1.0 - a.inner.cdf_left(wp) } else { a.inner.sf(wp) };
                    a.scale * a.inner.pe(wp, weak) + a.shift * above
                }
            },
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Discrete(d) => d.points.iter().zip(&d.weights).map(|(x, p)| x * p).sum(),
            Distribution::PiecewiseUniform(p) => {
                p.segments.iter().map(|s| s.weight * 0.5 * (s.lo + s.hi)).sum()
            }
            Distribution::Parametric(law) => law.mean(),
            Distribution::Affine(a) => a.scale * a.inner.mean() + a.shift,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Distribution::Discrete(d) => {
                let m = self.mean();
                d.points.iter().zip(&d.weights).map(|(x, p)| p * (x - m).powi(2)).sum()
            }
            Distribution::PiecewiseUniform(p) => {
                let m = self.mean();
                p.segments
                    .iter()
                    .map(|s| {
                        let mid = 0.5 * (s.lo + s.hi);
                        s.weight * ((s.hi - s.lo).powi(2) / 12.0 + (mid - m).powi(2))
                    })
                    .sum()
            }
            Distribution::Parametric(law) => law.variance(),
            Distribution::Affine(a) => a.scale * a.scale * a.inner.variance(),
        }
    }

    /// `(mean, variance)`.
    pub fn moment_stats(&self) -> (f64, f64) {
        (self.mean(), self.variance())
    }

    /// Density for laws without atoms, `None` otherwise.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match self {
            Distribution::Discrete(_) => None,
            Distribution::PiecewiseUniform(p) => {
                if p.has_atoms() {
                    return None;
                }
                Some(
                    p.segments
                        .iter()
                        .filter(|s| s.weight > 0.0 && x >= s.lo && x <= s.hi)
                        .map(|s| s.weight / (s.hi - s.lo))
                        .sum(),
                )
            }
            Distribution::Parametric(law) => Some(law.pdf(x)),
            Distribution::Affine(a) => a.inner.pdf(a.pull(x)).map(|d| d / a.scale),
        }
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            Distribution::Discrete(_) => false,
            Distribution::PiecewiseUniform(p) => !p.has_atoms(),
            Distribution::Parametric(_) => true,
            Distribution::Affine(a) => a.inner.is_continuous(),
        }
    }

    /// Smallest and largest points of the support (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Discrete(d) => {
                let live: Vec<f64> = d
                    .points
                    .iter()
                    .zip(&d.weights)
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(x, _)| *x)
                    .collect();
                (live[0], live[live.len() - 1])
            }
            Distribution::PiecewiseUniform(p) => {
                let live = p.segments.iter().filter(|s| s.weight > 0.0);
                let lo = live.clone().map(|s| s.lo).fold(f64::INFINITY, f64::min);
                let hi = live.map(|s| s.hi).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            Distribution::Parametric(law) => law.support(),
            Distribution::Affine(a) => {
                let (lo, hi) = a.inner.support();
                (a.scale * lo + a.shift, a.scale * hi + a.shift)
            }
        }
    }

    /// Atoms and segment endpoints, where the CDF may have kinks or jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Distribution::Discrete(d) => d.points.clone(),
            Distribution::PiecewiseUniform(p) => {
                p.segments.iter().flat_map(|s| [s.lo, s.hi]).collect()
            }
            Distribution::Parametric(law) => {
                let (lo, hi) = law.support();
                [lo, hi].into_iter().filter(|x| x.is_finite()).collect()
            }
            Distribution::Affine(a) => a
                .inner
                .breakpoints()
                .into_iter()
                .map(|x| a.scale * x + a.shift)
                .collect(),
        }
    }

    /// A reusable draw source (precomputes cumulative weights).
    pub fn sampler(&self) -> Sampler {
        let kind = match self {
            Distribution::Discrete(d) => SamplerKind::Atoms {
                points: d.points.clone(),
                cumulative: cumulative(&d.weights),
            },
            Distribution::PiecewiseUniform(p) => SamplerKind::Pieces {
                segments: p.segments.clone(),
                cumulative: cumulative(&p.segments.iter().map(|s| s.weight).collect::<Vec<_>>()),
            },
            Distribution::Parametric(law) => SamplerKind::Parametric(*law),
            Distribution::Affine(a) => SamplerKind::Affine {
                inner: Box::new(a.inner.sampler()),
                shift: a.shift,
                scale: a.scale,
            },
        };
        Sampler { kind }
    }

    /// `n` i.i.d. draws from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = self.sampler();
        (0..n).map(|_| s.draw(&mut rng)).collect()
    }
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY; // absorb rounding in the total
    }
    out
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Atoms { points: Vec<f64>, cumulative: Vec<f64> },
    Pieces { segments: Vec<Segment>, cumulative: Vec<f64> },
    Parametric(ParametricLaw),
    Affine { inner: Box<Sampler>, shift: f64, scale: f64 },
}

#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Atoms { points, cumulative } => {
                let u: f64 = rng.random();
                points[pick(cumulative, u)]
            }
            SamplerKind::Pieces { segments, cumulative } => {
                let u: f64 = rng.random();
                let s = segments[pick(cumulative, u)];
                if s.is_atom() {
                    s.lo
                } else {
                    let v: f64 = rng.random();
                    s.lo + v * (s.hi - s.lo)
                }
            }
            SamplerKind::Parametric(law) => law.sample(rng),
            SamplerKind::Affine { inner, shift, scale } => scale * inner.draw(rng) + shift,
        }
    }
}

impl rand_distr::Distribution<f64> for Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.draw(rng)
    }
}

/// Grid on which [`fosd_geq`] compares CDFs: all breakpoints of both laws,
/// midpoints between them, and a uniform mesh over the joint bulk.
pub fn canonical_grid(f: &Distribution, g: &Distribution) -> Vec<f64> {
    let mut pts: Vec<f64> = f.breakpoints();
    pts.extend(g.breakpoints());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in [f, g] {
        let (m, v) = d.moment_stats();
        let sd = v.sqrt();
        let (a, b) = d.support();
        lo = lo.min(a.max(m - 12.0 * sd));
        hi = hi.max(b.min(m + 12.0 * sd));
    }
    for x in &pts {
        lo = lo.min(*x);
        hi = hi.max(*x);
    }
    if lo.is_finite() && hi.is_finite() {
        let n = 2000;
        let span = (hi - lo).max(1e-9);
        let pad = 0.01 * span;
        for i in 0..=n {
            pts.push(lo - pad + (span + 2.0 * pad) * i as f64 / n as f64);
        }
    }
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    pts.extend(mids);
    pts.sort_by(f64::total_cmp);
    pts
}

/// `true` iff `f` first-order stochastically dominates `g` on the grid
/// (`cdf_f <= cdf_g` at every point, and for left limits too).
pub fn fosd_geq(f: &Distribution, g: &Distribution, grid: Option<&[f64]>) -> bool {
    const SLACK: f64 = 1e-12;
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = canonical_grid(f, g);
            &owned
        }
    };
    grid.iter().all(|&x| {
        f.cdf(x) <= g.cdf(x) + SLACK && f.cdf_left(x) <= g.cdf_left(x) + SLACK
    })
}
