//! The well-mixing amplification apparatus: delta_0, the eta schedule, the
//! bad-set ladder B_0 and B_1..B_M with cumulative unions, exact no-visit
//! probabilities via taboo chains, and the per-claim verification report.
//!
//! Set thresholds mirror the definitions verbatim: strict "< eps/2" for B_0
//! and strict "> eta_i" for B_i. The exact backend decides borderline cases;
//! the float backend flags anything within 1e-10 of a threshold.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::report::Verdict;
use crate::scalar::{rational_from_f64, Backend, Scalar};
use crate::walk::{require_walkable, well_mixing_set, ExactWalk, FloatWalk};

/// Exact ladder arithmetic is affordable well past the generic walk limit;
/// verdict exactness is the point of this module.
pub const EXACT_LADDER_LIMIT: usize = 512;

/// Membership lists are embedded in reports up to this many vertices;
/// larger graphs report sizes only.
const FULL_MEMBERSHIP_LIMIT: usize = 256;

const FLOAT_GUARD: f64 = 1e-10;
const MARKOV_TOLERANCE: f64 = 1e-9;
const MARKOV_SAMPLES: usize = 16;
const DELTA0_MAX_M: usize = 8;

pub fn ladder_backend(n: usize) -> Backend {
    if n <= EXACT_LADDER_LIMIT {
        Backend::Exact
    } else {
        Backend::Float
    }
}

/// delta_0(eps, M) = eps * 3^(-M*4^M) / 10^8, evaluated exactly (the value
/// underflows float64 already at modest M).
pub fn delta0(eps: f64, m: usize) -> Result<Scalar> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::InvalidParameter(format!(
            "delta0 needs eps in (0, 1/4), got {eps}"
        )));
    }
    if !(1..=DELTA0_MAX_M).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "delta0 needs 1 <= M <= {DELTA0_MAX_M}, got {m}"
        )));
    }
    let exponent = m * 4usize.pow(m as u32);
    let denom = BigUint::from(10u32).pow(8) * BigUint::from(3u32).pow(exponent as u32);
    let value = rational_from_f64(eps) / BigRational::from_integer(BigInt::from(denom));
    Ok(Scalar::Exact(value))
}

/// eta_i = 2 * 3^(i+1) * (delta/eps)^(2^-i) for 0 <= i <= M.
#[derive(Clone, Debug, Serialize)]
pub struct EtaSchedule {
    pub eps: f64,
    pub delta: f64,
    pub m: usize,
    pub values: Vec<f64>,
}

pub fn eta_schedule(eps: f64, delta: f64, m: usize) -> Result<EtaSchedule> {
    if eps <= 0.0 || delta <= 0.0 || eps.is_nan() || delta.is_nan() {
        return Err(Error::InvalidParameter(
            "eta schedule needs eps > 0 and delta > 0".into(),
        ));
    }
    let ratio = delta / eps;
    let mut values = Vec::with_capacity(m + 1);
    let mut root = ratio; // (delta/eps)^(2^-i) via repeated square roots
    let mut power3 = 3.0f64;
    for _ in 0..=m {
        power3 *= 3.0;
        values.push(2.0 * (power3 / 3.0) * root);
        root = root.sqrt();
    }
    // The recursion eta_i <= eta_{i+1}^2 / 9 holds with a factor
    // 2*3^(i+1) margin; assert it at construction.
    for i in 0..m {
        assert!(
            values[i] <= values[i + 1] * values[i + 1] / 9.0,
            "eta recursion violated at i = {i}"
        );
    }
    Ok(EtaSchedule {
        eps,
        delta,
        m,
        values,
    })
}

/// The sets of the amplification argument: A (well-mixing), the layers
/// B_0..B_M, and the cumulative unions B^0..B^M.
#[derive(Clone, Debug, Serialize)]
pub struct BadSetLadder {
    pub a: VertexSet,
    pub levels: Vec<VertexSet>,
    pub cumulative: Vec<VertexSet>,
    pub schedule: EtaSchedule,
    pub tau: usize,
    pub m: usize,
    pub backend: Backend,
    /// (level, vertex) pairs whose float-mode membership test landed within
    /// the 1e-10 guard band of the threshold.
    pub borderline: Vec<(usize, u32)>,
}

/// Per-vertex probabilities Pr[Q_v^tau in `set`], exact or float. One
/// indicator propagation serves every start vertex at once.
fn probs_into_set_exact(g: &Graph, set: &VertexSet, tau: usize) -> Result<ExactWalk> {
    let mut w = ExactWalk::indicator(g, set)?;
    w.advance_by(g, tau);
    Ok(w)
}

fn probs_into_set_float(g: &Graph, set: &VertexSet, tau: usize) -> Result<Vec<f64>> {
    let mut w = FloatWalk::indicator(g, set)?;
    for _ in 0..tau {
        w.advance(g);
    }
    Ok(w.probs().to_vec())
}

/// Build the ladder: A = well-mixing set at (tau, delta); B_0 collects the
/// vertices unlikely to land in A; B_i the vertices likely to land in the
/// previous bad union.
pub fn bad_set_ladder(
    g: &Graph,
    tau: usize,
    delta: f64,
    eps: f64,
    m: usize,
    backend: Backend,
) -> Result<BadSetLadder> {
    require_walkable(g)?;
    let n = g.n();
    let schedule = eta_schedule(eps, delta, m)?;
    let a = well_mixing_set(g, tau, delta, backend)?;
    let mut levels: Vec<VertexSet> = Vec::with_capacity(m + 1);
    let mut cumulative: Vec<VertexSet> = Vec::with_capacity(m + 1);
    let mut borderline: Vec<(usize, u32)> = Vec::new();

    // B_0 = { v : Pr[Q_v^tau in A] < eps/2 }.
    let half_eps = rational_from_f64(eps) / BigRational::from_integer(BigInt::from(2));
    let b0 = match backend {
        Backend::Exact => {
            let w = probs_into_set_exact(g, &a, tau)?;
            VertexSet::from_iter(n, (0..n).filter(|&v| w.prob_at(v) < half_eps))
        }
        Backend::Float => {
            let probs = probs_into_set_float(g, &a, tau)?;
            let thr = eps / 2.0;
            for (v, &p) in probs.iter().enumerate() {
                if (p - thr).abs() <= FLOAT_GUARD {
                    borderline.push((0, v as u32));
                }
            }
            VertexSet::from_iter(n, (0..n).filter(|&v| probs[v] < thr))
        }
    };
    levels.push(b0.clone());
    cumulative.push(b0);

    // B_i = { v : Pr[Q_v^tau in B^{i-1}] > eta_i }.
    for i in 1..=m {
        let prev = &cumulative[i - 1];
        let eta = schedule.values[i];
        let level = match backend {
            Backend::Exact => {
                let w = probs_into_set_exact(g, prev, tau)?;
                let thr = rational_from_f64(eta);
                VertexSet::from_iter(n, (0..n).filter(|&v| w.prob_at(v) > thr))
            }
            Backend::Float => {
                let probs = probs_into_set_float(g, prev, tau)?;
                for (v, &p) in probs.iter().enumerate() {
                    if (p - eta).abs() <= FLOAT_GUARD {
                        borderline.push((i, v as u32));
                    }
                }
                VertexSet::from_iter(n, (0..n).filter(|&v| probs[v] > eta))
            }
        };
        let cum = cumulative[i - 1].union(&level);
        assert!(
            cumulative[i - 1].is_subset_of(&cum),
            "cumulative bad sets must be monotone"
        );
        levels.push(level);
        cumulative.push(cum);
    }
    Ok(BadSetLadder {
        a,
        levels,
        cumulative,
        schedule,
        tau,
        m,
        backend,
        borderline,
    })
}

/// Probability that the chunked chain Q_v^(i*tau), i = 1..M, never lies in
/// A: advance tau steps, absorb (zero out) the mass on A, repeat.
pub fn no_visit_probability(
    g: &Graph,
    v: usize,
    a: &VertexSet,
    tau: usize,
    m: usize,
    backend: Backend,
) -> Result<Scalar> {
    require_walkable(g)?;
    match backend {
        Backend::Exact => {
            let mut w = ExactWalk::point(g, v)?;
            for _ in 0..m {
                w.advance_by(g, tau);
                w.zero_on(a);
            }
            Ok(Scalar::Exact(w.total()))
        }
        Backend::Float => {
            let mut w = FloatWalk::point(g, v)?;
            for _ in 0..m {
                for _ in 0..tau {
                    w.advance(g);
                }
                w.zero_on(a);
            }
            Ok(Scalar::Float(w.total()))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexFinal {
    pub vertex: u32,
    /// TV to uniform in the conclusion report, no-visit probability in the
    /// no-visit report.
    pub value: Scalar,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConclusionReport {
    /// 2 e^(-eps M / 2) + 6 delta.
    pub bound: f64,
    /// Vertices (over all of V) whose TV at (M+1)tau is strictly below the
    /// bound.
    pub satisfied: usize,
    pub exceptional: usize,
    /// (delta/eps)^(1/4^M) * n, the allowance for the exceptional set.
    pub allowance: f64,
    pub holds: bool,
    /// Conclusion violations among vertices outside B^M.
    pub violations_outside_bm: usize,
    pub per_vertex: Option<Vec<VertexFinal>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoVisitReport {
    /// 2 e^(-eps M / 2).
    pub bound: f64,
    pub max_outside_bm: Scalar,
    pub violations_outside_bm: usize,
    pub per_vertex: Option<Vec<VertexFinal>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovSample {
    pub vertex: u32,
    pub max_abs_diff: Scalar,
    pub within: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovCheck {
    pub tolerance: f64,
    pub samples: Vec<MarkovSample>,
    pub all_within: bool,
}

/// Everything the amplification run verifies, claim by claim.
#[derive(Clone, Debug, Serialize)]
pub struct AmplificationReport {
    pub n: usize,
    /// Connected-component sizes, largest first: the conclusion's TV is
    /// measured against global uniform, so disconnected inputs need these
    /// to audit the component-mass slack.
    pub component_sizes: Vec<usize>,
    pub tau: usize,
    pub delta: f64,
    pub eps: f64,
    pub m: usize,
    pub backend: Backend,
    pub hypothesis_holds: bool,
    pub a_size: usize,
    pub schedule: EtaSchedule,
    pub eta_recursion_holds: bool,
    pub level_sizes: Vec<usize>,
    pub cumulative_sizes: Vec<usize>,
    /// Full membership lists when n <= 256.
    pub membership: Option<LadderMembership>,
    pub claim_b0: Verdict,
    pub claim_bm: Vec<Verdict>,
    pub conclusion: ConclusionReport,
    pub no_visit: NoVisitReport,
    pub identity: IdentityCheck,
    pub markov: MarkovCheck,
    pub delta0: Option<Scalar>,
    pub delta_feasible: Option<bool>,
    pub borderline_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderMembership {
    pub a: VertexSet,
    pub levels: Vec<VertexSet>,
    pub cumulative: Vec<VertexSet>,
}

/// Run the full amplification verification. The hypothesis |A| >= eps*n is
/// reported, not enforced: a failing hypothesis downgrades the run to
/// diagnostic mode but every quantity is still computed.
pub fn verify_amplification(
    g: &Graph,
    tau: usize,
    delta: f64,
    eps: f64,
    m: usize,
    backend: Backend,
) -> Result<AmplificationReport> {
    require_walkable(g)?;
    if m < 1 {
        return Err(Error::InvalidParameter("need M >= 1".into()));
    }
    let n = g.n();
    let ladder = bad_set_ladder(g, tau, delta, eps, m, backend)?;
    let a = &ladder.a;

    let hypothesis_holds = BigRational::from_integer(BigInt::from(a.len()))
        >= rational_from_f64(eps) * BigInt::from(n);

    // Claim "B0": |B_0| < 6 delta n / eps.
    let b0_size = ladder.levels[0].len();
    let b0_rhs = rational_from_f64(delta) * BigInt::from(6 * n) / rational_from_f64(eps);
    let claim_b0 = Verdict::new(
        "claim_b0",
        BigRational::from_integer(BigInt::from(b0_size)) < b0_rhs,
        Scalar::from_usize(b0_size),
        Scalar::Exact(b0_rhs),
    );

    // Claim "bm": |B^i| < eta_i n for every i.
    let claim_bm: Vec<Verdict> = (0..=m)
        .map(|i| {
            let size = ladder.cumulative[i].len();
            let rhs = rational_from_f64(ladder.schedule.values[i]) * BigInt::from(n);
            Verdict::new(
                format!("claim_bm[{i}]"),
                BigRational::from_integer(BigInt::from(size)) < rhs,
                Scalar::from_usize(size),
                Scalar::Exact(rhs),
            )
        })
        .collect();

    let bm = &ladder.cumulative[m];
    let outside: Vec<usize> = (0..n).filter(|&v| !bm.contains(v)).collect();
    let horizon = (m + 1) * tau;

    // Conclusion: TV(Q_v^{(M+1)tau}, U) < 2 e^{-eps M/2} + 6 delta.
    let conclusion_bound = 2.0 * (-eps * m as f64 / 2.0).exp() + 6.0 * delta;
    let bound_rat = rational_from_f64(conclusion_bound);
    let finals: Vec<(u32, Scalar, bool)> = (0..n)
        .into_par_iter()
        .map(|v| match backend {
            Backend::Exact => {
                let mut w = ExactWalk::point(g, v).expect("regular checked");
                w.advance_by(g, horizon);
                let tv = w.tv_uniform();
                let holds = tv < bound_rat;
                (v as u32, Scalar::Exact(tv), holds)
            }
            Backend::Float => {
                let mut w = FloatWalk::point(g, v).expect("regular checked");
                for _ in 0..horizon {
                    w.advance(g);
                }
                let tv = w.tv_uniform();
                (v as u32, Scalar::Float(tv), tv < conclusion_bound)
            }
        })
        .collect();
    let satisfied = finals.iter().filter(|(_, _, h)| *h).count();
    let exceptional = n - satisfied;
    let allowance = (delta / eps).powf(0.25f64.powi(m as i32)) * n as f64;
    let violations_outside_bm = finals
        .iter()
        .filter(|(v, _, h)| !h && !bm.contains(*v as usize))
        .count();
    let include_lists = n <= FULL_MEMBERSHIP_LIMIT;
    let conclusion = ConclusionReport {
        bound: conclusion_bound,
        satisfied,
        exceptional,
        allowance,
        holds: exceptional as f64 <= allowance,
        violations_outside_bm,
        per_vertex: include_lists.then(|| {
            finals
                .iter()
                .filter(|(v, _, _)| !bm.contains(*v as usize))
                .map(|(v, tv, h)| VertexFinal {
                    vertex: *v,
                    value: tv.clone(),
                    holds: *h,
                })
                .collect()
        }),
    };

    // No-visit probabilities for vertices outside B^M, against 2e^{-eps M/2}.
    let nv_bound = 2.0 * (-eps * m as f64 / 2.0).exp();
    let nv_bound_rat = rational_from_f64(nv_bound);
    let no_visits: Vec<(u32, Scalar, bool)> = outside
        .par_iter()
        .map(|&v| {
            let p = no_visit_probability(g, v, a, tau, m, backend).expect("regular checked");
            let holds = match &p {
                Scalar::Exact(r) => r <= &nv_bound_rat,
                Scalar::Float(x) => *x <= nv_bound,
            };
            (v as u32, p, holds)
        })
        .collect();
    let nv_violations = no_visits.iter().filter(|(_, _, h)| !h).count();
    let nv_max = no_visits
        .iter()
        .map(|(_, p, _)| p)
        .max_by(|a, b| a.cmp_value(b).unwrap_or(std::cmp::Ordering::Equal))
        .cloned()
        .unwrap_or(Scalar::zero(backend));
    let no_visit = NoVisitReport {
        bound: nv_bound,
        max_outside_bm: nv_max,
        violations_outside_bm: nv_violations,
        per_vertex: include_lists.then(|| {
            no_visits
                .iter()
                .map(|(v, p, h)| VertexFinal {
                    vertex: *v,
                    value: p.clone(),
                    holds: *h,
                })
                .collect()
        }),
    };

    // Reversibility identity behind Claim "B0":
    // sum over v in A of Pr[Q_v^tau in B_0] = sum over v in B_0 of
    // Pr[Q_v^tau in A].
    let b0 = &ladder.levels[0];
    let identity = match backend {
        Backend::Exact => {
            let from_a = probs_into_set_exact(g, a, tau)?;
            let from_b0 = probs_into_set_exact(g, b0, tau)?;
            let lhs = from_a.prob_in(b0);
            let rhs = from_b0.prob_in(a);
            IdentityCheck {
                holds: lhs == rhs,
                lhs: Scalar::Exact(lhs),
                rhs: Scalar::Exact(rhs),
            }
        }
        Backend::Float => {
            let from_a = probs_into_set_float(g, a, tau)?;
            let from_b0 = probs_into_set_float(g, b0, tau)?;
            let lhs: f64 = b0.iter().map(|v| from_a[v]).sum();
            let rhs: f64 = a.iter().map(|v| from_b0[v]).sum();
            IdentityCheck {
                holds: (lhs - rhs).abs() <= FLOAT_GUARD,
                lhs: Scalar::Float(lhs),
                rhs: Scalar::Float(rhs),
            }
        }
    };

    // Markov first-visit decomposition on sample vertices outside B^M.
    let samples: Vec<usize> = outside.iter().copied().take(MARKOV_SAMPLES).collect();
    let markov = markov_decomposition_check(g, a, tau, m, &samples, backend)?;

    let (delta0_scalar, delta_feasible) = match delta0(eps, m) {
        Ok(d0) => {
            let feasible = rational_from_f64(delta) < d0.as_exact().expect("exact").clone();
            (Some(d0), Some(feasible))
        }
        Err(_) => (None, None),
    };

    let mut component_sizes = g.components().sizes;
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(AmplificationReport {
        n,
        component_sizes,
        tau,
        delta,
        eps,
        m,
        backend,
        hypothesis_holds,
        a_size: a.len(),
        eta_recursion_holds: true, // asserted at schedule construction
        level_sizes: ladder.levels.iter().map(|s| s.len()).collect(),
        cumulative_sizes: ladder.cumulative.iter().map(|s| s.len()).collect(),
        membership: include_lists.then(|| LadderMembership {
            a: ladder.a.clone(),
            levels: ladder.levels.clone(),
            cumulative: ladder.cumulative.clone(),
        }),
        schedule: ladder.schedule.clone(),
        claim_b0,
        claim_bm,
        conclusion,
        no_visit,
        identity,
        markov,
        delta0: delta0_scalar,
        delta_feasible,
        borderline_count: ladder.borderline.len(),
    })
}

/// Check that the direct (M+1)tau-step distribution equals its first-visit
/// decomposition: mass routed through the first chunk time landing in A,
/// plus the never-visiting remainder. Exact backends must agree exactly;
/// float backends within 1e-9.
fn markov_decomposition_check(
    g: &Graph,
    a: &VertexSet,
    tau: usize,
    m: usize,
    samples: &[usize],
    backend: Backend,
) -> Result<MarkovCheck> {
    let n = g.n();
    let a_members: Vec<usize> = a.iter().collect();
    let mut out = Vec::with_capacity(samples.len());
    match backend {
        Backend::Exact => {
            // Q_u^{j tau} walk counts for every u in A, j = 1..M.
            let snapshots: Vec<Vec<(Vec<BigUint>, BigUint)>> = a_members
                .par_iter()
                .map(|&u| {
                    let mut w = ExactWalk::point(g, u).expect("regular checked");
                    let mut per_u = Vec::with_capacity(m);
                    for _ in 1..=m {
                        w.advance_by(g, tau);
                        per_u.push((w.counts_big(), w.denom()));
                    }
                    per_u
                })
                .collect();
            for &v in samples {
                // Direct counts at (M+1)tau.
                let mut direct = ExactWalk::point(g, v)?;
                direct.advance_by(g, (m + 1) * tau);
                let direct_counts = direct.counts_big();
                let full_denom = direct.denom();

                // Taboo chain recording first-visit masses p_{i,u}.
                let mut recomposed = vec![BigUint::zero(); n];
                let mut taboo = ExactWalk::point(g, v)?;
                for i in 1..=m {
                    taboo.advance_by(g, tau);
                    let taboo_counts = taboo.counts_big();
                    let taboo_denom = taboo.denom();
                    // Scale factor aligning p_{i,u} * Q_u^{(M+1-i)tau} onto
                    // the common denominator D^{(M+1)tau}.
                    for (ai, &u) in a_members.iter().enumerate() {
                        let p = &taboo_counts[u];
                        if p.is_zero() {
                            continue;
                        }
                        let (q_counts, q_denom) = &snapshots[ai][m - i];
                        debug_assert_eq!(&(&full_denom / &taboo_denom), q_denom);
                        for (w_idx, qc) in q_counts.iter().enumerate() {
                            if !qc.is_zero() {
                                recomposed[w_idx] += p * qc;
                            }
                        }
                    }
                    taboo.zero_on(a);
                }
                // Survivors advance the final tau steps.
                taboo.advance_by(g, tau);
                let survivor_counts = taboo.counts_big();
                for (w_idx, sc) in survivor_counts.iter().enumerate() {
                    recomposed[w_idx] += sc;
                }
                let max_diff_counts = direct_counts
                    .iter()
                    .zip(&recomposed)
                    .map(|(d, r)| if d >= r { d - r } else { r - d })
                    .max()
                    .unwrap_or_else(BigUint::zero);
                let diff = BigRational::new(
                    BigInt::from(max_diff_counts),
                    BigInt::from(full_denom.clone()),
                );
                out.push(MarkovSample {
                    vertex: v as u32,
                    within: diff.is_zero(),
                    max_abs_diff: Scalar::Exact(diff),
                });
            }
        }
        Backend::Float => {
            let snapshots: Vec<Vec<Vec<f64>>> = a_members
                .par_iter()
                .map(|&u| {
                    let mut w = FloatWalk::point(g, u).expect("regular checked");
                    let mut per_u = Vec::with_capacity(m);
                    for _ in 1..=m {
                        for _ in 0..tau {
                            w.advance(g);
                        }
                        per_u.push(w.probs().to_vec());
                    }
                    per_u
                })
                .collect();
            for &v in samples {
                let mut direct = FloatWalk::point(g, v)?;
                for _ in 0..(m + 1) * tau {
                    direct.advance(g);
                }
                let mut recomposed = vec![0.0f64; n];
                let mut taboo = FloatWalk::point(g, v)?;
                for i in 1..=m {
                    for _ in 0..tau {
                        taboo.advance(g);
                    }
                    for (ai, &u) in a_members.iter().enumerate() {
                        let p = taboo.probs()[u];
                        if p == 0.0 {
                            continue;
                        }
                        for (w_idx, q) in snapshots[ai][m - i].iter().enumerate() {
                            recomposed[w_idx] += p * q;
                        }
                    }
                    taboo.zero_on(a);
                }
                for _ in 0..tau {
                    taboo.advance(g);
                }
                for (w_idx, s) in taboo.probs().iter().enumerate() {
                    recomposed[w_idx] += s;
                }
                let max_diff = direct
                    .probs()
                    .iter()
                    .zip(&recomposed)
                    .map(|(d, r)| (d - r).abs())
                    .fold(0.0f64, f64::max);
                out.push(MarkovSample {
                    vertex: v as u32,
                    max_abs_diff: Scalar::Float(max_diff),
                    within: max_diff <= MARKOV_TOLERANCE,
                });
            }
        }
    }
    Ok(MarkovCheck {
        tolerance: MARKOV_TOLERANCE,
        all_within: out.iter().all(|s| s.within),
        samples: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{generate, ConstructionSpec};
    use num::One;

    fn gen(desc: &str) -> Graph {
        generate(&ConstructionSpec::parse(desc).unwrap()).unwrap()
    }

    #[test]
    fn delta0_examples() {
        // eps = 0.2, M = 1: 0.2 * 3^-4 / 1e8 = 2/(81e9).
        let d = delta0(0.2, 1).unwrap();
        let expect = rational_from_f64(0.2)
            / BigRational::from_integer(BigInt::from(81u64 * 100_000_000));
        assert_eq!(d.as_exact().unwrap(), &expect);
        assert!((d.to_f64() - 2.469e-11).abs() < 1e-13);

        // Linear in eps.
        let d1 = delta0(0.01, 2).unwrap().to_f64();
        let d2 = delta0(0.02, 2).unwrap().to_f64();
        assert!((d2 / d1 - 2.0).abs() < 1e-9);

        // M = 2, eps = 0.1: 0.1 * 3^-32 / 1e8, exact rational retained.
        let d = delta0(0.1, 2).unwrap();
        let expect = rational_from_f64(0.1)
            / BigRational::from_integer(
                BigInt::from(3u64).pow(32) * BigInt::from(100_000_000u64),
            );
        assert_eq!(d.as_exact().unwrap(), &expect);
    }

    #[test]
    fn delta0_range_checks() {
        assert!(delta0(0.3, 1).is_err());
        assert!(delta0(0.1, 0).is_err());
        assert!(delta0(0.1, 99).is_err());
    }

    #[test]
    fn eta_schedule_values() {
        // i = 0: eta_0 = 6 delta / eps.
        let s = eta_schedule(0.2, 0.001, 3).unwrap();
        assert!((s.values[0] - 6.0 * 0.001 / 0.2).abs() < 1e-15);
        // delta = eps: eta_i = 2*3^(i+1).
        let s = eta_schedule(0.1, 0.1, 2).unwrap();
        assert_eq!(s.values, vec![6.0, 18.0, 54.0]);
        // Strictly increasing for small delta/eps, recursion asserted inside.
        let s = eta_schedule(0.2, 1e-6, 3).unwrap();
        for i in 0..3 {
            assert!(s.values[i] < s.values[i + 1]);
        }
    }

    #[test]
    fn ladder_trivial_cases() {
        // A = V: Pr[Q_v^tau in A] = 1 >= eps/2, so B_0 and every level are
        // empty.
        let g = gen("complete:n=8");
        let ladder = bad_set_ladder(&g, 2, 0.9, 0.2, 2, Backend::Exact).unwrap();
        assert_eq!(ladder.a.len(), 8);
        assert!(ladder.levels.iter().all(|l| l.is_empty()));

        // A empty: probability 0 < eps/2, so B_0 = V.
        let ladder = bad_set_ladder(&g, 1, 1e-12, 0.2, 1, Backend::Exact).unwrap();
        assert!(ladder.a.is_empty());
        assert_eq!(ladder.levels[0].len(), 8);
    }

    #[test]
    fn ladder_monotone_cumulative() {
        let g = gen("merged_expanders:n=32,D=4,m=8,seed=2");
        let ladder = bad_set_ladder(&g, 4, 0.2, 0.1, 3, Backend::Exact).unwrap();
        for i in 1..ladder.cumulative.len() {
            assert!(ladder.cumulative[i - 1].is_subset_of(&ladder.cumulative[i]));
        }
    }

    #[test]
    fn no_visit_edge_cases() {
        let g = gen("complete:n=5");
        let all = VertexSet::full(5);
        let none = VertexSet::empty(5);
        assert!(no_visit_probability(&g, 0, &all, 1, 1, Backend::Exact)
            .unwrap()
            .is_zero());
        let p = no_visit_probability(&g, 0, &none, 1, 3, Backend::Exact).unwrap();
        assert_eq!(p.as_exact().unwrap(), &BigRational::one());
        // K5, A = {u}, v != u, tau = 1, M = 1: 1 - Pr[Q_v^1 = u] = 3/4.
        let single = VertexSet::from_iter(5, [1]);
        let p = no_visit_probability(&g, 0, &single, 1, 1, Backend::Exact).unwrap();
        assert_eq!(
            p.as_exact().unwrap(),
            &BigRational::new(BigInt::from(3), BigInt::from(4))
        );
    }

    #[test]
    fn no_visit_complements_visit() {
        // Survived mass plus absorbed mass telescopes back to 1.
        let g = gen("random_regular:n=12,D=4,seed=7");
        let a = VertexSet::from_iter(12, [0, 3, 5]);
        let mut w = ExactWalk::point(&g, 1).unwrap();
        let mut absorbed = BigRational::zero();
        for _ in 0..3 {
            w.advance_by(&g, 2);
            absorbed += w.prob_in(&a);
            w.zero_on(&a);
        }
        let survived = w.total();
        assert_eq!(absorbed + survived, BigRational::one());
        let direct = no_visit_probability(&g, 1, &a, 2, 3, Backend::Exact).unwrap();
        assert_eq!(direct.as_exact().unwrap(), &w.total());
    }

    #[test]
    fn verify_amplification_trivial_instance() {
        // K8 at tau = 3: every vertex is well-mixing at delta = 0.3, so
        // A = V, the ladder is empty, and the exceptional set is empty.
        let g = gen("complete:n=8");
        let r = verify_amplification(&g, 3, 0.3, 0.2, 2, Backend::Exact).unwrap();
        assert!(r.hypothesis_holds);
        assert_eq!(r.a_size, 8);
        assert!(r.claim_b0.holds);
        assert!(r.claim_bm.iter().all(|c| c.holds));
        assert_eq!(r.conclusion.exceptional, 0);
        assert!(r.conclusion.holds);
        assert!(r.identity.holds);
        assert!(r.markov.all_within);
        assert_eq!(r.delta_feasible, Some(false));
    }

    #[test]
    fn verify_amplification_diagnostic_mode() {
        // eps too large for the instance: hypothesis flagged false, ladder
        // still produced.
        let g = gen("cycle:n=12");
        let r = verify_amplification(&g, 2, 0.05, 0.9, 1, Backend::Exact).unwrap();
        assert!(!r.hypothesis_holds);
        assert_eq!(r.a_size, 0);
        assert_eq!(r.level_sizes[0], 12);
    }

    #[test]
    fn markov_decomposition_exact_on_merged_instance() {
        let g = gen("merged_expanders:n=24,D=4,m=6,seed=3");
        let r = verify_amplification(&g, 3, 0.25, 0.15, 2, Backend::Exact).unwrap();
        assert!(r.markov.all_within);
        for s in &r.markov.samples {
            assert!(s.max_abs_diff.is_zero(), "exact decomposition is an identity");
        }
    }

    #[test]
    fn float_backend_matches_exact_closely() {
        let g = gen("random_regular:n=20,D=4,seed=11");
        let e = verify_amplification(&g, 4, 0.3, 0.3, 2, Backend::Exact).unwrap();
        let f = verify_amplification(&g, 4, 0.3, 0.3, 2, Backend::Float).unwrap();
        assert_eq!(e.a_size, f.a_size);
        assert_eq!(e.level_sizes, f.level_sizes);
        assert!(f.markov.all_within);
    }
}
