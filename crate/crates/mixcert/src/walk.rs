//! Nearest-neighbor random-walk distributions, total variation distances,
//! per-vertex mixing times, well-mixing sets, walk counting, and the
//! reversibility identity.
//!
//! Two numeric backends: exact rationals (walk counts over the common
//! denominator D^t) and float64. Exact verdicts are decided by integer
//! arithmetic only; float verdicts carry a 1e-10 guard band where the
//! calling module requires one.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::scalar::{rational_from_f64, Backend, Scalar};

/// Default mixing-time cap: 64 * ceil(log2 n).
pub fn default_t_max(n: usize) -> usize {
    64 * n.max(2).next_power_of_two().trailing_zeros() as usize
}

/// Walks need a regular graph of degree at least one; a 0-regular graph has
/// no transition matrix.
pub(crate) fn require_walkable(g: &Graph) -> Result<usize> {
    let d = g.require_regular()?;
    if d == 0 {
        return Err(Error::Infeasible(
            "the nearest-neighbor walk needs degree D >= 1".into(),
        ));
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// Exact kernel: integer walk counts with denominator D^t.
// ---------------------------------------------------------------------------

enum CountsRepr {
    Small(Vec<u64>),
    Big(Vec<BigUint>),
}

/// Exact distribution of a walk on a D-regular graph, stored as the vector
/// of t-step walk counts; the probability at u is counts[u] / D^t.
pub(crate) struct ExactWalk {
    d: u64,
    t: usize,
    dpow: BigUint,
    dpow_small: Option<u128>,
    counts: CountsRepr,
}

impl ExactWalk {
    pub fn point(g: &Graph, v: usize) -> Result<ExactWalk> {
        let d = require_walkable(g)? as u64;
        let mut c = vec![0u64; g.n()];
        c[v] = 1;
        Ok(ExactWalk::new(d, c))
    }

    pub fn indicator(g: &Graph, set: &VertexSet) -> Result<ExactWalk> {
        let d = require_walkable(g)? as u64;
        let mut c = vec![0u64; g.n()];
        for v in set.iter() {
            c[v] = 1;
        }
        Ok(ExactWalk::new(d, c))
    }

    fn new(d: u64, counts: Vec<u64>) -> ExactWalk {
        ExactWalk {
            d,
            t: 0,
            dpow: BigUint::one(),
            dpow_small: Some(1),
            counts: CountsRepr::Small(counts),
        }
    }

    fn promote(&mut self) {
        if let CountsRepr::Small(c) = &self.counts {
            self.counts = CountsRepr::Big(c.iter().map(|&x| BigUint::from(x)).collect());
        }
    }

    pub fn advance(&mut self, g: &Graph) {
        debug_assert_eq!(g.regular_degree(), Some(self.d as usize));
        if let CountsRepr::Small(c) = &self.counts {
            let max = c.iter().copied().max().unwrap_or(0);
            if self.d > 0 && max > u64::MAX / self.d {
                self.promote();
            }
        }
        match &mut self.counts {
            CountsRepr::Small(c) => {
                let mut next = vec![0u64; c.len()];
                for (u, slot) in next.iter_mut().enumerate() {
                    let mut acc = 0u64;
                    for &w in g.neighbors(u) {
                        acc += c[w as usize];
                    }
                    *slot = acc;
                }
                *c = next;
            }
            CountsRepr::Big(c) => {
                let mut next = vec![BigUint::zero(); c.len()];
                for (u, slot) in next.iter_mut().enumerate() {
                    let mut acc = BigUint::zero();
                    for &w in g.neighbors(u) {
                        acc += &c[w as usize];
                    }
                    *slot = acc;
                }
                *c = next;
            }
        }
        self.t += 1;
        self.dpow *= self.d;
        self.dpow_small = self.dpow_small.and_then(|x| x.checked_mul(self.d as u128));
    }

    pub fn advance_by(&mut self, g: &Graph, steps: usize) {
        for _ in 0..steps {
            self.advance(g);
        }
    }

    fn count_at(&self, u: usize) -> BigUint {
        match &self.counts {
            CountsRepr::Small(c) => BigUint::from(c[u]),
            CountsRepr::Big(c) => c[u].clone(),
        }
    }

    /// Sum over u of |n * counts[u] - D^t|; TV to uniform is this over 2nD^t.
    fn tv_uniform_numer(&self) -> BigUint {
        let n = self.len() as u128;
        match (&self.counts, &self.dpow_small) {
            (CountsRepr::Small(c), Some(dp)) => {
                let mut acc: u128 = 0;
                for &x in c {
                    let lhs = n * x as u128;
                    acc += lhs.abs_diff(*dp);
                }
                BigUint::from(acc)
            }
            _ => {
                let n = BigUint::from(self.len());
                let mut acc = BigUint::zero();
                for u in 0..self.len() {
                    let lhs = &n * self.count_at(u);
                    if lhs >= self.dpow {
                        acc += lhs - &self.dpow;
                    } else {
                        acc += &self.dpow - lhs;
                    }
                }
                acc
            }
        }
    }

    pub fn len(&self) -> usize {
        match &self.counts {
            CountsRepr::Small(c) => c.len(),
            CountsRepr::Big(c) => c.len(),
        }
    }

    pub fn tv_uniform(&self) -> BigRational {
        let numer = self.tv_uniform_numer();
        let denom = BigUint::from(2usize * self.len()) * &self.dpow;
        BigRational::new(numer.into(), denom.into())
    }

    /// Strict comparison TV < threshold without constructing the rational.
    pub fn tv_uniform_lt(&self, threshold: &BigRational) -> bool {
        let numer = BigInt::from(self.tv_uniform_numer());
        let denom = BigInt::from(BigUint::from(2usize * self.len()) * &self.dpow);
        &numer * threshold.denom() < threshold.numer() * denom
    }

    pub fn mass_in(&self, set: &VertexSet) -> BigUint {
        match &self.counts {
            CountsRepr::Small(c) => {
                let mut acc: u128 = 0;
                for v in set.iter() {
                    acc += c[v] as u128;
                }
                BigUint::from(acc)
            }
            CountsRepr::Big(c) => {
                let mut acc = BigUint::zero();
                for v in set.iter() {
                    acc += &c[v];
                }
                acc
            }
        }
    }

    pub fn prob_in(&self, set: &VertexSet) -> BigRational {
        BigRational::new(self.mass_in(set).into(), self.dpow.clone().into())
    }

    pub fn prob_at(&self, u: usize) -> BigRational {
        BigRational::new(self.count_at(u).into(), self.dpow.clone().into())
    }

    pub fn total(&self) -> BigRational {
        let sum = match &self.counts {
            CountsRepr::Small(c) => c.iter().fold(BigUint::zero(), |a, &x| a + x),
            CountsRepr::Big(c) => c.iter().fold(BigUint::zero(), |a, x| a + x),
        };
        BigRational::new(sum.into(), self.dpow.clone().into())
    }

    /// Zero out the mass on `set` (taboo step).
    pub fn zero_on(&mut self, set: &VertexSet) {
        match &mut self.counts {
            CountsRepr::Small(c) => {
                for v in set.iter() {
                    c[v] = 0;
                }
            }
            CountsRepr::Big(c) => {
                for v in set.iter() {
                    c[v] = BigUint::zero();
                }
            }
        }
    }

    pub fn counts_big(&self) -> Vec<BigUint> {
        (0..self.len()).map(|u| self.count_at(u)).collect()
    }

    pub fn denom(&self) -> BigUint {
        self.dpow.clone()
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        (0..self.len())
            .map(|u| BigRational::new(self.count_at(u).into(), self.dpow.clone().into()))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Float kernel.
// ---------------------------------------------------------------------------

pub(crate) struct FloatWalk {
    probs: Vec<f64>,
    t: usize,
}

impl FloatWalk {
    pub fn point(g: &Graph, v: usize) -> Result<FloatWalk> {
        require_walkable(g)?;
        let mut probs = vec![0.0; g.n()];
        probs[v] = 1.0;
        Ok(FloatWalk { probs, t: 0 })
    }

    /// Indicator start: propagating it k steps yields, at v, the sum over
    /// u in `set` of Pr[Q_v^k = u] (the adjacency matrix is symmetric).
    pub fn indicator(g: &Graph, set: &VertexSet) -> Result<FloatWalk> {
        require_walkable(g)?;
        let mut probs = vec![0.0; g.n()];
        for v in set.iter() {
            probs[v] = 1.0;
        }
        Ok(FloatWalk { probs, t: 0 })
    }

    pub fn zero_on(&mut self, set: &VertexSet) {
        for v in set.iter() {
            self.probs[v] = 0.0;
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn advance(&mut self, g: &Graph) {
        let d = g.regular_degree().expect("regular") as f64;
        let mut next = vec![0.0; self.probs.len()];
        for (u, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &w in g.neighbors(u) {
                acc += self.probs[w as usize];
            }
            *slot = acc / d;
        }
        self.probs = next;
        self.t += 1;
    }

    pub fn tv_uniform(&self) -> f64 {
        let n = self.probs.len() as f64;
        0.5 * self.probs.iter().map(|p| (p - 1.0 / n).abs()).sum::<f64>()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

// ---------------------------------------------------------------------------
// Public distribution type and operations.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Vertex(u32),
    Mixture,
}

#[derive(Clone, Debug)]
pub enum Mass {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Probability vector over the vertices at a given walk time.
#[derive(Clone, Debug)]
pub struct Distribution {
    pub(crate) mass: Mass,
    pub time: usize,
    pub origin: Origin,
}

impl Distribution {
    pub fn point(n: usize, v: usize, backend: Backend) -> Distribution {
        let mass = match backend {
            Backend::Exact => {
                let mut m = vec![BigRational::zero(); n];
                m[v] = BigRational::one();
                Mass::Exact(m)
            }
            Backend::Float => {
                let mut m = vec![0.0; n];
                m[v] = 1.0;
                Mass::Float(m)
            }
        };
        Distribution {
            mass,
            time: 0,
            origin: Origin::Vertex(v as u32),
        }
    }

    pub fn uniform(n: usize, backend: Backend) -> Distribution {
        let mass = match backend {
            Backend::Exact => Mass::Exact(vec![
                BigRational::new(BigInt::one(), BigInt::from(n));
                n
            ]),
            Backend::Float => Mass::Float(vec![1.0 / n as f64; n]),
        };
        Distribution {
            mass,
            time: 0,
            origin: Origin::Mixture,
        }
    }

    pub fn len(&self) -> usize {
        match &self.mass {
            Mass::Exact(m) => m.len(),
            Mass::Float(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn backend(&self) -> Backend {
        match &self.mass {
            Mass::Exact(_) => Backend::Exact,
            Mass::Float(_) => Backend::Float,
        }
    }

    pub fn prob(&self, u: usize) -> Scalar {
        match &self.mass {
            Mass::Exact(m) => Scalar::Exact(m[u].clone()),
            Mass::Float(m) => Scalar::Float(m[u]),
        }
    }

    pub fn mass_f64(&self) -> Vec<f64> {
        match &self.mass {
            Mass::Exact(m) => m.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
            Mass::Float(m) => m.clone(),
        }
    }

    /// Masses nonnegative and summing to 1 (exactly, or within 1e-12).
    pub fn validate(&self) -> Result<()> {
        match &self.mass {
            Mass::Exact(m) => {
                let sum: BigRational = m.iter().cloned().sum();
                if m.iter().any(|x| x.is_negative()) || !sum.is_one() {
                    return Err(Error::InvalidParameter(
                        "exact distribution must be nonnegative and sum to 1".into(),
                    ));
                }
            }
            Mass::Float(m) => {
                let sum: f64 = m.iter().sum();
                if m.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "float distribution sums to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise average of two distributions on the same vertex set.
    pub fn average(a: &Distribution, b: &Distribution) -> Result<Distribution> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let mass = match (&a.mass, &b.mass) {
            (Mass::Exact(x), Mass::Exact(y)) => Mass::Exact(
                x.iter()
                    .zip(y)
                    .map(|(p, q)| (p + q) / BigRational::from_integer(2.into()))
                    .collect(),
            ),
            _ => Mass::Float(
                a.mass_f64()
                    .iter()
                    .zip(b.mass_f64())
                    .map(|(p, q)| (p + q) / 2.0)
                    .collect(),
            ),
        };
        Ok(Distribution {
            mass,
            time: a.time.max(b.time),
            origin: Origin::Mixture,
        })
    }
}

/// One step of the nearest-neighbor walk: mass'(u) = sum over neighbors v of
/// mass(v)/D. Requires a regular graph.
pub fn step(g: &Graph, dist: &Distribution) -> Result<Distribution> {
    let d = require_walkable(g)?;
    if dist.len() != g.n() {
        return Err(Error::LengthMismatch {
            left: dist.len(),
            right: g.n(),
        });
    }
    let mass = match &dist.mass {
        Mass::Exact(m) => {
            let dd = BigRational::from_integer(BigInt::from(d));
            Mass::Exact(
                (0..g.n())
                    .map(|u| {
                        g.neighbors(u)
                            .iter()
                            .map(|&w| &m[w as usize] / &dd)
                            .sum()
                    })
                    .collect(),
            )
        }
        Mass::Float(m) => Mass::Float(
            (0..g.n())
                .map(|u| {
                    g.neighbors(u)
                        .iter()
                        .map(|&w| m[w as usize])
                        .sum::<f64>()
                        / d as f64
                })
                .collect(),
        ),
    };
    Ok(Distribution {
        mass,
        time: dist.time + 1,
        origin: dist.origin.clone(),
    })
}

/// The distribution Q_v^t.
pub fn distribution_at(g: &Graph, v: usize, t: usize, backend: Backend) -> Result<Distribution> {
    match backend {
        Backend::Exact => {
            let mut w = ExactWalk::point(g, v)?;
            w.advance_by(g, t);
            Ok(Distribution {
                mass: Mass::Exact(w.to_rationals()),
                time: t,
                origin: Origin::Vertex(v as u32),
            })
        }
        Backend::Float => {
            let mut w = FloatWalk::point(g, v)?;
            for _ in 0..t {
                w.advance(g);
            }
            Ok(Distribution {
                mass: Mass::Float(w.probs().to_vec()),
                time: t,
                origin: Origin::Vertex(v as u32),
            })
        }
    }
}

/// Total variation distance, half the L1 distance.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<Scalar> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    match (&p.mass, &q.mass) {
        (Mass::Exact(a), Mass::Exact(b)) => {
            let sum: BigRational = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
            Ok(Scalar::Exact(
                sum / BigRational::from_integer(BigInt::from(2)),
            ))
        }
        _ => {
            let (a, b) = (p.mass_f64(), q.mass_f64());
            Ok(Scalar::Float(
                0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>(),
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Mixing times and profiles.
// ---------------------------------------------------------------------------

/// Result of a mixing-time scan: the least step count, or the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingOutcome {
    Mixed(usize),
    Capped(usize),
}

impl MixingOutcome {
    pub fn is_capped(&self) -> bool {
        matches!(self, MixingOutcome::Capped(_))
    }

    /// The mixing time when finite.
    pub fn finite(&self) -> Option<usize> {
        match self {
            MixingOutcome::Mixed(t) => Some(*t),
            MixingOutcome::Capped(_) => None,
        }
    }

    /// The scan bound that was reported (the time itself, or the cap).
    pub fn value(&self) -> usize {
        match self {
            MixingOutcome::Mixed(t) | MixingOutcome::Capped(t) => *t,
        }
    }
}

/// Least t <= t_max with TV(Q_v^t, U) < threshold (strict), else the cap.
pub fn vertex_mixing_time(
    g: &Graph,
    v: usize,
    threshold: f64,
    t_max: usize,
    backend: Backend,
) -> Result<MixingOutcome> {
    if !(0.0..1.0).contains(&threshold) || threshold <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be in (0,1), got {threshold}"
        )));
    }
    match backend {
        Backend::Exact => {
            let thr = rational_from_f64(threshold);
            let mut w = ExactWalk::point(g, v)?;
            for t in 0..=t_max {
                if t > 0 {
                    w.advance(g);
                }
                if w.tv_uniform_lt(&thr) {
                    return Ok(MixingOutcome::Mixed(t));
                }
            }
            Ok(MixingOutcome::Capped(t_max))
        }
        Backend::Float => {
            let mut w = FloatWalk::point(g, v)?;
            for t in 0..=t_max {
                if t > 0 {
                    w.advance(g);
                }
                if w.tv_uniform() < threshold {
                    return Ok(MixingOutcome::Mixed(t));
                }
            }
            Ok(MixingOutcome::Capped(t_max))
        }
    }
}

/// Parameters of the well-mixing hypothesis.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MixingParams {
    pub tau: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub threshold: f64,
}

impl MixingParams {
    pub fn new(tau: usize, delta: f64, epsilon: f64, threshold: f64) -> Result<MixingParams> {
        if tau < 1 {
            return Err(Error::InvalidParameter("tau must be >= 1".into()));
        }
        for (name, x) in [("delta", delta), ("epsilon", epsilon), ("threshold", threshold)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be in (0,1), got {x}"
                )));
            }
        }
        Ok(MixingParams {
            tau,
            delta,
            epsilon,
            threshold,
        })
    }
}

impl Default for MixingParams {
    fn default() -> Self {
        MixingParams {
            tau: 1,
            delta: 0.25,
            epsilon: 0.25,
            threshold: 0.25,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub vertex: u32,
    pub tv_at_tau: Scalar,
    pub mixing_time: MixingOutcome,
    pub capped: bool,
}

/// Per-vertex TV at time tau and mixing time up to t_max.
#[derive(Clone, Debug, Serialize)]
pub struct MixingProfile {
    pub tau: usize,
    pub threshold: f64,
    pub t_max: usize,
    pub backend: Backend,
    pub rows: Vec<ProfileRow>,
}

impl MixingProfile {
    /// Max over vertices; capped if any vertex is capped.
    pub fn max_mixing_time(&self) -> MixingOutcome {
        let mut max = 0usize;
        for row in &self.rows {
            match row.mixing_time {
                MixingOutcome::Mixed(t) => max = max.max(t),
                MixingOutcome::Capped(cap) => return MixingOutcome::Capped(cap),
            }
        }
        MixingOutcome::Mixed(max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,tv_at_tau,mixing_time,capped\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.vertex,
                row.tv_at_tau.to_f64(),
                row.mixing_time.value(),
                row.capped
            ));
        }
        out
    }
}

/// Compute the mixing profile: a parallel map over start vertices.
pub fn mixing_profile(
    g: &Graph,
    tau: usize,
    threshold: f64,
    t_max: usize,
    backend: Backend,
) -> Result<MixingProfile> {
    require_walkable(g)?;
    if g.n() == 0 {
        return Err(Error::EmptySet);
    }
    let thr = rational_from_f64(threshold);
    let rows: Vec<ProfileRow> = (0..g.n())
        .into_par_iter()
        .map(|v| match backend {
            Backend::Exact => {
                let mut w = ExactWalk::point(g, v).expect("regular checked");
                let mut mixing_time = None;
                let mut tv_at_tau = None;
                let horizon = t_max.max(tau);
                for t in 0..=horizon {
                    if t > 0 {
                        w.advance(g);
                    }
                    if mixing_time.is_none() && t <= t_max && w.tv_uniform_lt(&thr) {
                        mixing_time = Some(t);
                    }
                    if t == tau {
                        tv_at_tau = Some(Scalar::Exact(w.tv_uniform()));
                    }
                    if mixing_time.is_some() && t >= tau {
                        break;
                    }
                }
                let outcome = mixing_time
                    .map(MixingOutcome::Mixed)
                    .unwrap_or(MixingOutcome::Capped(t_max));
                ProfileRow {
                    vertex: v as u32,
                    tv_at_tau: tv_at_tau.expect("tau visited"),
                    mixing_time: outcome,
                    capped: outcome.is_capped(),
                }
            }
            Backend::Float => {
                let mut w = FloatWalk::point(g, v).expect("regular checked");
                let mut mixing_time = None;
                let mut tv_at_tau = None;
                let horizon = t_max.max(tau);
                for t in 0..=horizon {
                    if t > 0 {
                        w.advance(g);
                    }
                    if mixing_time.is_none() && t <= t_max && w.tv_uniform() < threshold {
                        mixing_time = Some(t);
                    }
                    if t == tau {
                        tv_at_tau = Some(Scalar::Float(w.tv_uniform()));
                    }
                    if mixing_time.is_some() && t >= tau {
                        break;
                    }
                }
                let outcome = mixing_time
                    .map(MixingOutcome::Mixed)
                    .unwrap_or(MixingOutcome::Capped(t_max));
                ProfileRow {
                    vertex: v as u32,
                    tv_at_tau: tv_at_tau.expect("tau visited"),
                    mixing_time: outcome,
                    capped: outcome.is_capped(),
                }
            }
        })
        .collect();
    Ok(MixingProfile {
        tau,
        threshold,
        t_max,
        backend,
        rows,
    })
}

/// The set { v : TV(Q_v^tau, U) < delta }, strict inequality.
pub fn well_mixing_set(g: &Graph, tau: usize, delta: f64, backend: Backend) -> Result<VertexSet> {
    require_walkable(g)?;
    let thr = rational_from_f64(delta);
    let members: Vec<usize> = (0..g.n())
        .into_par_iter()
        .filter(|&v| match backend {
            Backend::Exact => {
                let mut w = ExactWalk::point(g, v).expect("regular checked");
                w.advance_by(g, tau);
                w.tv_uniform_lt(&thr)
            }
            Backend::Float => {
                let mut w = FloatWalk::point(g, v).expect("regular checked");
                for _ in 0..tau {
                    w.advance(g);
                }
                w.tv_uniform() < delta
            }
        })
        .collect();
    Ok(VertexSet::from_iter(g.n(), members))
}

/// (tau, eps, del)-mixing test: all but at most del*n of the time-tau
/// probabilities lie in [(1-eps)/n, (1+eps)/n].
pub fn is_mixing_vertex(
    g: &Graph,
    v: usize,
    tau: usize,
    eps: f64,
    del: f64,
    backend: Backend,
) -> Result<bool> {
    require_walkable(g)?;
    let n = g.n();
    match backend {
        Backend::Exact => {
            let mut w = ExactWalk::point(g, v)?;
            w.advance_by(g, tau);
            let lo = rational_from_f64(1.0 - eps);
            let hi = rational_from_f64(1.0 + eps);
            let denom = BigInt::from(w.denom());
            let mut outside = 0usize;
            for u in 0..n {
                // n * prob(u) = count[u] * n / D^tau; outside the band iff
                // it falls below 1-eps or above 1+eps.
                let scaled = BigRational::new(
                    BigInt::from(w.count_at(u)) * BigInt::from(n),
                    denom.clone(),
                );
                if scaled < lo || scaled > hi {
                    outside += 1;
                }
            }
            let budget = rational_from_f64(del) * BigInt::from(n);
            Ok(BigRational::from_integer(BigInt::from(outside)) <= budget)
        }
        Backend::Float => {
            let mut w = FloatWalk::point(g, v)?;
            for _ in 0..tau {
                w.advance(g);
            }
            let lo = (1.0 - eps) / n as f64;
            let hi = (1.0 + eps) / n as f64;
            let outside = w.probs().iter().filter(|&&p| p < lo || p > hi).count();
            Ok(outside as f64 <= del * n as f64)
        }
    }
}

/// Average probability that a tau-step walk from a uniform vertex of X ends
/// in X: (1/|X|) * sum over v in X of Pr[Q_v^k in X].
pub fn stay_probability(g: &Graph, x: &VertexSet, k: usize, backend: Backend) -> Result<Scalar> {
    if x.is_empty() {
        return Err(Error::EmptySet);
    }
    require_walkable(g)?;
    match backend {
        Backend::Exact => {
            // By symmetry of the adjacency matrix, propagating the indicator
            // of X for k steps gives sum over v in X of walk counts into u.
            let mut w = ExactWalk::indicator(g, x)?;
            w.advance_by(g, k);
            let numer = w.mass_in(x);
            let denom = w.denom() * BigUint::from(x.len());
            Ok(Scalar::Exact(BigRational::new(numer.into(), denom.into())))
        }
        Backend::Float => {
            let d = g.regular_degree().unwrap() as f64;
            let mut probs: Vec<f64> = (0..g.n())
                .map(|v| if x.contains(v) { 1.0 } else { 0.0 })
                .collect();
            for _ in 0..k {
                let mut next = vec![0.0; g.n()];
                for (u, slot) in next.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for &wv in g.neighbors(u) {
                        acc += probs[wv as usize];
                    }
                    *slot = acc / d;
                }
                probs = next;
            }
            let total: f64 = x.iter().map(|u| probs[u]).sum();
            Ok(Scalar::Float(total / x.len() as f64))
        }
    }
}

/// Exact number of k-walks (direction matters: a walk and its reverse are
/// counted separately).
pub fn count_walks(g: &Graph, k: usize) -> BigUint {
    let mut counts = vec![BigUint::one(); g.n()];
    for _ in 0..k {
        let mut next = vec![BigUint::zero(); g.n()];
        for (u, slot) in next.iter_mut().enumerate() {
            let mut acc = BigUint::zero();
            for &w in g.neighbors(u) {
                acc += &counts[w as usize];
            }
            *slot = acc;
        }
        counts = next;
    }
    counts.into_iter().sum()
}

/// Average degree 2E/n as an exact rational.
pub fn average_degree(g: &Graph) -> BigRational {
    BigRational::new(
        BigInt::from(2 * g.edge_count()),
        BigInt::from(g.n().max(1)),
    )
}

/// |sum over v in A of Pr[Q_v^k in B]  -  sum over v in B of Pr[Q_v^k in A]|.
/// Zero for every pair on regular graphs by reversibility.
pub fn flow_symmetry_defect(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    k: usize,
    backend: Backend,
) -> Result<Scalar> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    require_walkable(g)?;
    match backend {
        Backend::Exact => {
            let mut from_a = ExactWalk::indicator(g, a)?;
            from_a.advance_by(g, k);
            let lhs = from_a.mass_in(b);
            let mut from_b = ExactWalk::indicator(g, b)?;
            from_b.advance_by(g, k);
            let rhs = from_b.mass_in(a);
            let diff = if lhs >= rhs { lhs - &rhs } else { rhs - &lhs };
            Ok(Scalar::Exact(BigRational::new(
                diff.into(),
                BigInt::from(from_a.denom()),
            )))
        }
        Backend::Float => {
            let side = |from: &VertexSet, to: &VertexSet| -> Result<f64> {
                let d = g.regular_degree().unwrap() as f64;
                let mut probs: Vec<f64> = (0..g.n())
                    .map(|v| if from.contains(v) { 1.0 } else { 0.0 })
                    .collect();
                for _ in 0..k {
                    let mut next = vec![0.0; g.n()];
                    for (u, slot) in next.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for &w in g.neighbors(u) {
                            acc += probs[w as usize];
                        }
                        *slot = acc / d;
                    }
                    probs = next;
                }
                Ok(to.iter().map(|u| probs[u]).sum())
            };
            Ok(Scalar::Float((side(a, b)? - side(b, a)?).abs()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{generate, ConstructionSpec};

    fn complete(n: usize) -> Graph {
        generate(&ConstructionSpec::parse(&format!("complete:n={n}")).unwrap()).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        generate(&ConstructionSpec::parse(&format!("cycle:n={n}")).unwrap()).unwrap()
    }

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn step_point_mass_on_k4() {
        let g = complete(4);
        let d0 = Distribution::point(4, 0, Backend::Exact);
        let d1 = step(&g, &d0).unwrap();
        assert_eq!(d1.prob(0).as_exact().unwrap(), &BigRational::zero());
        for u in 1..4 {
            assert_eq!(d1.prob(u).as_exact().unwrap(), &rational(1, 3));
        }
        assert_eq!(d1.time, 1);
    }

    #[test]
    fn uniform_is_stationary() {
        let g = generate(&ConstructionSpec::parse("random_regular:n=12,D=4,seed=3").unwrap())
            .unwrap();
        let u = Distribution::uniform(12, Backend::Exact);
        let stepped = step(&g, &u).unwrap();
        for v in 0..12 {
            assert_eq!(stepped.prob(v).as_exact(), u.prob(v).as_exact());
        }
    }

    #[test]
    fn parity_on_c4() {
        let g = cycle(4);
        let d = distribution_at(&g, 0, 2, Backend::Exact).unwrap();
        assert_eq!(d.prob(0).as_exact().unwrap(), &rational(1, 2));
        assert_eq!(d.prob(2).as_exact().unwrap(), &rational(1, 2));
        assert!(d.prob(1).is_zero() && d.prob(3).is_zero());
    }

    #[test]
    fn k4_two_step_distribution() {
        // Two-step hand computation: 1/3 at the origin, 2/9 elsewhere.
        let g = complete(4);
        let d = distribution_at(&g, 0, 2, Backend::Exact).unwrap();
        assert_eq!(d.prob(0).as_exact().unwrap(), &rational(1, 3));
        for u in 1..4 {
            assert_eq!(d.prob(u).as_exact().unwrap(), &rational(2, 9));
        }
    }

    #[test]
    fn k5_one_step() {
        let g = complete(5);
        let d = distribution_at(&g, 2, 1, Backend::Exact).unwrap();
        assert!(d.prob(2).is_zero());
        for u in [0usize, 1, 3, 4] {
            assert_eq!(d.prob(u).as_exact().unwrap(), &rational(1, 4));
        }
    }

    #[test]
    fn tv_distance_cases() {
        let p = Distribution::point(4, 0, Backend::Exact);
        let q = Distribution::point(4, 2, Backend::Exact);
        assert_eq!(
            tv_distance(&p, &p).unwrap().as_exact().unwrap(),
            &BigRational::zero()
        );
        assert_eq!(
            tv_distance(&p, &q).unwrap().as_exact().unwrap(),
            &BigRational::one()
        );
        // Uniform on half vs uniform on all: 1/2.
        let mut half = vec![BigRational::zero(); 4];
        half[0] = rational(1, 2);
        half[1] = rational(1, 2);
        let half = Distribution {
            mass: Mass::Exact(half),
            time: 0,
            origin: Origin::Mixture,
        };
        let u = Distribution::uniform(4, Backend::Exact);
        assert_eq!(
            tv_distance(&half, &u).unwrap().as_exact().unwrap(),
            &rational(1, 2)
        );
    }

    #[test]
    fn tv_length_mismatch() {
        let p = Distribution::point(4, 0, Backend::Exact);
        let q = Distribution::point(5, 0, Backend::Exact);
        assert!(matches!(
            tv_distance(&p, &q),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mixing_time_k5_is_one() {
        // TV after one step is (2/(D+1))/2 = 1/5 < 1/4.
        let g = complete(5);
        assert_eq!(
            vertex_mixing_time(&g, 0, 0.25, 64, Backend::Exact).unwrap(),
            MixingOutcome::Mixed(1)
        );
    }

    #[test]
    fn mixing_time_k4_is_two() {
        // TV after one step is exactly 1/4: not strict, so the answer is 2.
        let g = complete(4);
        assert_eq!(
            vertex_mixing_time(&g, 0, 0.25, 64, Backend::Exact).unwrap(),
            MixingOutcome::Mixed(2)
        );
    }

    #[test]
    fn bipartite_cycle_caps() {
        let g = cycle(4);
        assert_eq!(
            vertex_mixing_time(&g, 0, 0.25, 128, Backend::Exact).unwrap(),
            MixingOutcome::Capped(128)
        );
    }

    #[test]
    fn well_mixing_k5_all_vertices() {
        let g = complete(5);
        let set = well_mixing_set(&g, 1, 0.25, Backend::Exact).unwrap();
        assert_eq!(set.len(), 5);
        // delta = 0 admits nothing.
        // (strictly below zero is impossible)
        let set = well_mixing_set(&g, 1, f64::MIN_POSITIVE, Backend::Exact).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn clique_vertices_never_well_mixing() {
        let g = generate(
            &ConstructionSpec::parse("expander_plus_clique:n=40,D=3,seed=11").unwrap(),
        )
        .unwrap();
        // Clique vertices are the last D+1 = 4; their walk stays in the
        // clique so TV >= 1 - (D+1)/n.
        let delta = 0.5 - 4.0 / 40.0 - 0.01;
        let set = well_mixing_set(&g, 8, delta, Backend::Exact).unwrap();
        for v in 36..40 {
            assert!(!set.contains(v));
        }
    }

    #[test]
    fn is_mixing_vertex_cases() {
        let g = complete(5);
        // Point mass at tau=0: all but one coordinate is 0, outside any
        // (1±eps)/n band with eps < 1.
        assert!(!is_mixing_vertex(&g, 0, 0, 0.5, 0.5, Backend::Exact).unwrap());
        // Large tau on K5: every coordinate converges into the band.
        assert!(is_mixing_vertex(&g, 0, 30, 0.01, 0.0, Backend::Exact).unwrap());
    }

    #[test]
    fn tv_bound_implies_band_mixing() {
        // If TV(Q_v^tau, U) <= delta' then v is (tau, eps, 2 delta'/eps)-mixing.
        let g = generate(&ConstructionSpec::parse("random_regular:n=14,D=4,seed=2").unwrap())
            .unwrap();
        for v in 0..14 {
            for tau in [1usize, 2, 4, 8] {
                let d = distribution_at(&g, v, tau, Backend::Exact).unwrap();
                let u = Distribution::uniform(14, Backend::Exact);
                let tv = tv_distance(&d, &u).unwrap().to_f64();
                for eps in [0.1, 0.3, 0.7] {
                    let del = 2.0 * tv / eps;
                    if del < 1.0 {
                        assert!(
                            is_mixing_vertex(&g, v, tau, eps, del + 1e-15, Backend::Exact)
                                .unwrap(),
                            "v={v} tau={tau} eps={eps}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn stay_probability_cases() {
        let g = complete(4);
        let all = VertexSet::full(4);
        assert_eq!(
            stay_probability(&g, &all, 5, Backend::Exact)
                .unwrap()
                .as_exact()
                .unwrap(),
            &BigRational::one()
        );
        let single = VertexSet::from_iter(4, [1]);
        assert_eq!(
            stay_probability(&g, &single, 2, Backend::Exact)
                .unwrap()
                .as_exact()
                .unwrap(),
            &rational(1, 3)
        );
        let q3 = generate(&ConstructionSpec::parse("hypercube:D=3").unwrap()).unwrap();
        let sub = VertexSet::from_iter(8, 0..4);
        assert_eq!(
            stay_probability(&q3, &sub, 1, Backend::Exact)
                .unwrap()
                .as_exact()
                .unwrap(),
            &rational(2, 3)
        );
    }

    #[test]
    fn walk_counts() {
        // Regular graph: exactly n*D^k.
        let g = cycle(6);
        assert_eq!(count_walks(&g, 5), BigUint::from(6u32 * 32));
        // Single edge, k=1: two walks.
        let e = Graph::parse_edge_list("0 1").unwrap();
        assert_eq!(count_walks(&e, 1), BigUint::from(2u32));
        // Star K_{1,3}: 12 two-step walks, and 12 >= n d^2 = 9.
        let star = Graph::parse_edge_list("0 1\n0 2\n0 3").unwrap();
        assert_eq!(count_walks(&star, 2), BigUint::from(12u32));
    }

    #[test]
    fn flow_symmetry_is_exactly_zero() {
        let g = generate(&ConstructionSpec::parse("random_regular:n=10,D=3,seed=9").unwrap())
            .unwrap();
        let a = VertexSet::from_iter(10, [0, 2, 5]);
        let b = VertexSet::from_iter(10, [1, 2, 7, 9]);
        let defect = flow_symmetry_defect(&g, &a, &b, 7, Backend::Exact).unwrap();
        assert!(defect.is_zero());

        let q3 = generate(&ConstructionSpec::parse("hypercube:D=3").unwrap()).unwrap();
        let sub = VertexSet::from_iter(8, 0..4);
        let defect = flow_symmetry_defect(&q3, &sub, &sub.complement(), 3, Backend::Exact).unwrap();
        assert!(defect.is_zero());
    }

    #[test]
    fn tv_monotone_in_t() {
        let g = generate(&ConstructionSpec::parse("random_regular:n=12,D=3,seed=4").unwrap())
            .unwrap();
        let u = Distribution::uniform(12, Backend::Exact);
        for v in 0..12 {
            let mut prev: Option<BigRational> = None;
            for t in 0..20 {
                let d = distribution_at(&g, v, t, Backend::Exact).unwrap();
                let tv = tv_distance(&d, &u).unwrap().as_exact().unwrap().clone();
                if let Some(p) = prev {
                    assert!(tv <= p, "TV increased at v={v}, t={t}");
                }
                prev = Some(tv);
            }
        }
    }

    #[test]
    fn profile_csv_and_max() {
        let g = complete(4);
        let p = mixing_profile(&g, 1, 0.25, 16, Backend::Exact).unwrap();
        assert_eq!(p.max_mixing_time(), MixingOutcome::Mixed(2));
        let csv = p.to_csv();
        assert!(csv.starts_with("vertex,tv_at_tau,mixing_time,capped\n"));
        assert_eq!(csv.lines().count(), 5);
        // TV at tau=1 on K4 is exactly 1/4 for every vertex.
        for row in &p.rows {
            assert_eq!(row.tv_at_tau.as_exact().unwrap(), &rational(1, 4));
        }
    }

    #[test]
    fn step_rejects_irregular() {
        let star = Graph::parse_edge_list("0 1\n0 2\n0 3").unwrap();
        let d = Distribution::point(4, 0, Backend::Exact);
        assert!(matches!(step(&star, &d), Err(Error::NotRegular { .. })));
    }

    #[test]
    fn mixing_params_validation() {
        assert!(MixingParams::new(1, 0.1, 0.3, 0.25).is_ok());
        assert!(MixingParams::new(0, 0.1, 0.3, 0.25).is_err());
        assert!(MixingParams::new(1, 0.0, 0.3, 0.25).is_err());
        assert!(MixingParams::new(1, 0.1, 1.0, 0.25).is_err());
        assert_eq!(MixingParams::default().threshold, 0.25);
    }

    #[test]
    fn zero_regular_graphs_cannot_walk() {
        // Isolated vertices parse as a 0-regular graph; the walk must
        // reject it instead of dividing by zero.
        let g = Graph::parse_edge_list("n=4").unwrap();
        assert_eq!(g.regular_degree(), Some(0));
        assert!(vertex_mixing_time(&g, 0, 0.25, 8, Backend::Exact).is_err());
        assert!(distribution_at(&g, 0, 1, Backend::Float).is_err());
        assert!(well_mixing_set(&g, 1, 0.25, Backend::Exact).is_err());
    }

    #[test]
    fn edge_list_roundtrip_with_isolated_tail() {
        let g = Graph::parse_edge_list("n=5\n0 1\n1 2").unwrap();
        let text = g.to_edge_list();
        assert!(text.starts_with("n=5\n"));
        let back = Graph::parse_edge_list(&text).unwrap();
        assert_eq!(back.n(), 5);
        assert_eq!(back.edge_count(), 2);
    }
}
