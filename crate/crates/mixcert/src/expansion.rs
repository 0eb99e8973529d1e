//! Edge-expansion and conductance certification, the conductance/mixing
//! sandwich, separator search, and the expander extraction procedure.
//!
//! Exact modes enumerate subsets over bitmasks and decide every comparison
//! in integer arithmetic; sweep modes combine spectral orderings, seeded
//! random sets, and greedy shrinks, and never claim exact certification.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSummary, VertexSet};
use crate::scalar::{rational_from_f64, Backend, Scalar};
use crate::spectral::sweep_order;
use crate::walk::{mixing_profile, well_mixing_set, MixingOutcome};

pub const EXACT_CUT_LIMIT: usize = 26;
pub const EXACT_SEPARATOR_LIMIT: usize = 22;
const SWEEP_RANDOM_SETS: usize = 10_000;
const SWEEP_RESTARTS: usize = 32;
const EIG_TOL: f64 = 1e-8;
const EIG_MAX_ITER: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exact,
    Sweep,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertVerdict {
    #[serde(rename = "certified")]
    Certified,
    #[serde(rename = "certified(sampled)")]
    CertifiedSampled,
    #[serde(rename = "violated")]
    Violated,
}

impl CertVerdict {
    pub fn is_certified(&self) -> bool {
        !matches!(self, CertVerdict::Violated)
    }
}

// ---------------------------------------------------------------------------
// Ratio bookkeeping: boundary/size fractions compared exactly, ties by
// smaller size then lexicographically smaller vertex list.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct Candidate {
    boundary: u64,
    size: usize,
    members: Vec<u32>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        let lhs = self.boundary as u128 * other.size as u128;
        let rhs = other.boundary as u128 * self.size as u128;
        if lhs != rhs {
            return lhs < rhs;
        }
        if self.size != other.size {
            return self.size < other.size;
        }
        self.members < other.members
    }

    fn ratio_scalar(&self) -> Scalar {
        Scalar::from_ratio(self.boundary as i64, self.size as i64)
    }
}

fn mask_members(mask: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        v.push(m.trailing_zeros());
        m &= m - 1;
    }
    v
}

fn mask_boundary(adj: &[u32], mask: u32) -> u64 {
    let mut e = 0u64;
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        e += (adj[v] & !mask).count_ones() as u64;
    }
    e
}

/// Iterate all masks over n bits with popcount s in ascending numeric order.
fn for_each_mask_of_size(n: usize, s: usize, mut f: impl FnMut(u32)) {
    if s == 0 || s > n {
        return;
    }
    let full: u32 = if n == 32 { !0 } else { (1 << n) - 1 };
    let mut mask: u32 = (1 << s) - 1;
    loop {
        f(mask);
        let c = mask & mask.wrapping_neg();
        let r = mask.wrapping_add(c);
        if r == 0 || r > full {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}

// ---------------------------------------------------------------------------
// Conductance.
// ---------------------------------------------------------------------------

/// phi(Gamma) = min over proper nonempty A of n*e(A, V\A) / (D*|A|*(n-|A|)).
#[derive(Clone, Debug, Serialize)]
pub struct ConductanceResult {
    pub value: Scalar,
    pub argmin: VertexSet,
    pub mode: SearchMode,
    pub candidate_count: u64,
}

pub fn conductance(g: &Graph, mode: SearchMode, seed: u64) -> Result<ConductanceResult> {
    let d = g.require_regular()?;
    let n = g.n();
    if n < 2 {
        return Err(Error::Infeasible("conductance needs n >= 2".into()));
    }
    let comps = g.components();
    if !comps.is_connected() {
        // A component has empty boundary, so phi = 0; not an error.
        let argmin = comps.members(0);
        return Ok(ConductanceResult {
            value: Scalar::zero(Backend::Exact),
            argmin,
            mode,
            candidate_count: 1,
        });
    }
    let (cut, size, members, examined) = match mode {
        SearchMode::Exact => {
            if n > EXACT_CUT_LIMIT {
                return Err(Error::ExactTooLarge {
                    n,
                    limit: EXACT_CUT_LIMIT,
                });
            }
            exact_min_cut_ratio(g)
        }
        SearchMode::Sweep | SearchMode::Sampled => sweep_min_cut_ratio(g, mode, seed),
    };
    let argmin = VertexSet::from_iter(n, members.iter().map(|&v| v as usize));
    // Recompute the value through the independent VertexSet code path.
    let e = g.edge_boundary(&argmin)?;
    assert_eq!(e, cut, "enumerated boundary must match recomputation");
    let value = Scalar::Exact(BigRational::new(
        BigInt::from(n as u64 * e),
        BigInt::from(d as u64 * size as u64 * (n - size) as u64),
    ));
    Ok(ConductanceResult {
        value,
        argmin,
        mode,
        candidate_count: examined,
    })
}

/// Gray-code walk over all 2^(n-1)-1 proper cuts containing vertex 0, with
/// the boundary maintained incrementally. Minimizes e(X)/(|X|(n-|X|)).
fn exact_min_cut_ratio(g: &Graph) -> (u64, usize, Vec<u32>, u64) {
    let n = g.n();
    let adj = g.adj_masks_u32();
    let mut mask: u32 = 1; // vertex 0 fixed inside
    let mut cut = g.degree(0) as i64;
    let mut size = 1usize;
    let mut best: Option<(u64, usize, u32)> = None;
    let mut examined = 0u64;
    let total: u64 = 1u64 << (n - 1);
    for step in 0..total {
        if step > 0 {
            let bit = step.trailing_zeros() as usize + 1; // flips vertices 1..n-1
            let vbit = 1u32 << bit;
            if mask & vbit == 0 {
                let overlap = (adj[bit] & mask).count_ones() as i64;
                cut += g.degree(bit) as i64 - 2 * overlap;
                mask |= vbit;
                size += 1;
            } else {
                mask &= !vbit;
                size -= 1;
                let overlap = (adj[bit] & mask).count_ones() as i64;
                cut -= g.degree(bit) as i64 - 2 * overlap;
            }
        }
        if size == n {
            continue; // not a proper cut
        }
        examined += 1;
        let is_better = match &best {
            None => true,
            Some(b) => {
                let lhs = cut as u128 * (b.1 as u128 * (n - b.1) as u128);
                let rhs = b.0 as u128 * (size as u128 * (n - size) as u128);
                lhs < rhs
                    || (lhs == rhs
                        && (size < b.1
                            || (size == b.1 && mask_members(mask) < mask_members(b.2))))
            }
        };
        if is_better {
            best = Some((cut as u64, size, mask));
        }
    }
    let (c, s, m) = best.expect("at least one proper cut exists");
    (c, s, mask_members(m), examined)
}

fn sweep_min_cut_ratio(g: &Graph, mode: SearchMode, seed: u64) -> (u64, usize, Vec<u32>, u64) {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orders: Vec<Vec<u32>> = Vec::new();
    if mode == SearchMode::Sweep {
        orders.push(sweep_order(g, EIG_TOL, EIG_MAX_ITER));
    }
    for _ in 0..SWEEP_RESTARTS {
        let mut order: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        orders.push(order);
    }
    let mut best: Option<(u64, usize, Vec<u32>)> = None;
    let mut examined = 0u64;
    for order in &orders {
        let mut inside = VertexSet::empty(n);
        let mut cut: i64 = 0;
        for (idx, &v) in order.iter().enumerate().take(n - 1) {
            let v = v as usize;
            let overlap = g
                .neighbors(v)
                .iter()
                .filter(|&&w| inside.contains(w as usize))
                .count() as i64;
            cut += g.degree(v) as i64 - 2 * overlap;
            inside.insert(v);
            let size = idx + 1;
            examined += 1;
            let is_better = match &best {
                None => true,
                Some(b) => {
                    (cut as u128) * (b.1 as u128 * (n - b.1) as u128)
                        < (b.0 as u128) * (size as u128 * (n - size) as u128)
                }
            };
            if is_better {
                let members: Vec<u32> = inside.iter().map(|x| x as u32).collect();
                best = Some((cut as u64, size, members));
            }
        }
    }
    let (c, s, m) = best.expect("n >= 2");
    (c, s, m, examined)
}

// ---------------------------------------------------------------------------
// Conductance/mixing sandwich.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub n: usize,
    pub phi: Scalar,
    pub mix: Option<usize>,
    pub threshold: f64,
    pub t_max: usize,
    /// 1/phi.
    pub lower: Scalar,
    /// 16*log2(n)/phi^2.
    pub upper: f64,
    pub holds: Option<bool>,
    pub applicable: bool,
    pub reason: Option<String>,
}

/// Check 1/phi < mix < 16*log2(n)/phi^2 with exact phi and an exact mixing
/// scan at the given threshold.
pub fn sandwich_check(g: &Graph, threshold: f64, t_max: usize) -> Result<SandwichReport> {
    g.require_regular()?;
    let n = g.n();
    let cond = conductance(g, SearchMode::Exact, 0)?;
    let phi = cond.value.clone();
    let phi_rat = phi.as_exact().expect("exact mode").clone();
    let not_applicable = |reason: &str, phi: Scalar, lower: Scalar, upper: f64| SandwichReport {
        n,
        phi,
        mix: None,
        threshold,
        t_max,
        lower,
        upper,
        holds: None,
        applicable: false,
        reason: Some(reason.to_string()),
    };
    if phi_rat.is_zero() {
        return Ok(not_applicable(
            "disconnected graph (phi = 0)",
            phi,
            Scalar::Float(f64::INFINITY),
            f64::INFINITY,
        ));
    }
    let lower = Scalar::Exact(phi_rat.recip());
    let phi_f = phi.to_f64();
    let upper = 16.0 * (n as f64).log2() / (phi_f * phi_f);
    if g.is_bipartite() {
        return Ok(not_applicable(
            "bipartite graph never mixes",
            phi,
            lower,
            upper,
        ));
    }
    let profile = mixing_profile(g, 1, threshold, t_max, Backend::auto(n))?;
    let mix = match profile.max_mixing_time() {
        MixingOutcome::Mixed(t) => t,
        MixingOutcome::Capped(cap) => {
            return Ok(not_applicable(
                &format!("mixing capped at t_max = {cap}"),
                phi,
                lower,
                upper,
            ));
        }
    };
    let lower_ok = lower
        .as_exact()
        .map(|l| l < &BigRational::from_integer(BigInt::from(mix)))
        .unwrap_or(false);
    let upper_ok = (mix as f64) < upper;
    Ok(SandwichReport {
        n,
        phi,
        mix: Some(mix),
        threshold,
        t_max,
        lower,
        upper,
        holds: Some(lower_ok && upper_ok),
        applicable: true,
        reason: None,
    })
}

// ---------------------------------------------------------------------------
// Edge-expansion certificates.
// ---------------------------------------------------------------------------

/// A verified lower bound e(X, V\X) >= c*|X| over a size range, or a witness
/// set breaking it.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionCertificate {
    pub bound: f64,
    pub size_lo: usize,
    pub size_hi: usize,
    pub mode: SearchMode,
    pub verdict: CertVerdict,
    pub witness: Option<VertexSet>,
    /// Number of sets examined (the full enumeration count in exact mode).
    pub examined: u64,
    /// Smallest boundary/size ratio seen across examined sets.
    pub min_ratio: Option<Scalar>,
}

impl ExpansionCertificate {
    fn trivial(bound: f64, mode: SearchMode) -> ExpansionCertificate {
        ExpansionCertificate {
            bound,
            size_lo: 1,
            size_hi: 0,
            mode,
            verdict: if mode == SearchMode::Exact {
                CertVerdict::Certified
            } else {
                CertVerdict::CertifiedSampled
            },
            witness: None,
            examined: 0,
            min_ratio: None,
        }
    }
}

/// Check e(X, V\X) >= c*|X| for every X with |X| in [size_lo, size_hi].
pub fn check_edge_expansion(
    g: &Graph,
    c: f64,
    size_lo: usize,
    size_hi: usize,
    mode: SearchMode,
    seed: u64,
) -> Result<ExpansionCertificate> {
    let n = g.n();
    if !(1 <= size_lo && size_lo <= size_hi && size_hi <= n / 2) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= lo <= hi <= n/2, got [{size_lo}, {size_hi}] with n = {n}"
        )));
    }
    let c_rat = rational_from_f64(c);
    let (best, examined) = match mode {
        SearchMode::Exact => {
            if n > EXACT_CUT_LIMIT {
                return Err(Error::ExactTooLarge {
                    n,
                    limit: EXACT_CUT_LIMIT,
                });
            }
            let adj = g.adj_masks_u32();
            let mut best: Option<Candidate> = None;
            let mut examined = 0u64;
            for s in size_lo..=size_hi {
                for_each_mask_of_size(n, s, |mask| {
                    examined += 1;
                    let e = mask_boundary(&adj, mask);
                    let is_better = match &best {
                        None => true,
                        Some(b) => {
                            let lhs = e as u128 * b.size as u128;
                            let rhs = b.boundary as u128 * s as u128;
                            lhs < rhs
                                || (lhs == rhs
                                    && (s < b.size
                                        || (s == b.size && mask_members(mask) < b.members)))
                        }
                    };
                    if is_better {
                        best = Some(Candidate {
                            boundary: e,
                            size: s,
                            members: mask_members(mask),
                        });
                    }
                });
            }
            (best, examined)
        }
        SearchMode::Sweep | SearchMode::Sampled => {
            heuristic_min_ratio(g, size_lo, size_hi, mode, seed)
        }
    };
    let Some(best) = best else {
        return Ok(ExpansionCertificate::trivial(c, mode));
    };
    // Violation iff boundary < c * size, decided exactly.
    let violated = BigRational::from_integer(BigInt::from(best.boundary))
        < c_rat.clone() * BigInt::from(best.size);
    let min_ratio = Some(best.ratio_scalar());
    if violated {
        let witness = VertexSet::from_iter(n, best.members.iter().map(|&v| v as usize));
        // Independent recomputation of the witness boundary.
        let e = g.edge_boundary(&witness)?;
        assert_eq!(e, best.boundary, "witness boundary must recompute identically");
        assert!(
            BigRational::from_integer(BigInt::from(e)) < c_rat * BigInt::from(witness.len()),
            "witness must violate the bound after recomputation"
        );
        Ok(ExpansionCertificate {
            bound: c,
            size_lo,
            size_hi,
            mode,
            verdict: CertVerdict::Violated,
            witness: Some(witness),
            examined,
            min_ratio,
        })
    } else {
        Ok(ExpansionCertificate {
            bound: c,
            size_lo,
            size_hi,
            mode,
            verdict: if mode == SearchMode::Exact {
                CertVerdict::Certified
            } else {
                CertVerdict::CertifiedSampled
            },
            witness: None,
            examined,
            min_ratio,
        })
    }
}

/// Sweep/sampled candidate stream: spectral prefix and suffix cuts (sweep
/// only), singletons when allowed, seeded random sets, and greedy shrinks.
fn heuristic_min_ratio(
    g: &Graph,
    size_lo: usize,
    size_hi: usize,
    mode: SearchMode,
    seed: u64,
) -> (Option<Candidate>, u64) {
    let n = g.n();
    let mut best: Option<Candidate> = None;
    let mut examined = 0u64;
    let consider = |members: Vec<u32>, best: &mut Option<Candidate>, examined: &mut u64| {
        let size = members.len();
        if size < size_lo || size > size_hi {
            return;
        }
        *examined += 1;
        let set = VertexSet::from_iter(n, members.iter().map(|&v| v as usize));
        let boundary = g.edge_boundary(&set).expect("proper subset");
        let cand = Candidate {
            boundary,
            size,
            members,
        };
        if best.as_ref().is_none_or(|b| cand.better_than(b)) {
            *best = Some(cand);
        }
    };

    if mode == SearchMode::Sweep && g.is_regular() {
        let order = sweep_order(g, EIG_TOL, EIG_MAX_ITER);
        for s in size_lo..=size_hi {
            let mut prefix: Vec<u32> = order[..s].to_vec();
            prefix.sort_unstable();
            consider(prefix, &mut best, &mut examined);
            let mut suffix: Vec<u32> = order[n - s..].to_vec();
            suffix.sort_unstable();
            consider(suffix, &mut best, &mut examined);
        }
        for shrunk in greedy_shrink_states(g, &order[..size_hi], size_lo) {
            consider(shrunk, &mut best, &mut examined);
        }
    }
    if size_lo == 1 {
        for v in 0..n as u32 {
            consider(vec![v], &mut best, &mut examined);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u32> = (0..n as u32).collect();
    for _ in 0..SWEEP_RANDOM_SETS {
        let s = rng.gen_range(size_lo..=size_hi);
        for i in 0..s {
            let j = rng.gen_range(i..n);
            labels.swap(i, j);
        }
        let mut members = labels[..s].to_vec();
        members.sort_unstable();
        consider(members, &mut best, &mut examined);
    }
    // Shrink the best candidate found so far.
    if let Some(b) = best.clone() {
        for shrunk in greedy_shrink_states(g, &b.members, size_lo) {
            consider(shrunk, &mut best, &mut examined);
        }
    }
    (best, examined)
}

/// States visited by greedily removing the vertex that most improves the
/// boundary, down to size_lo.
fn greedy_shrink_states(g: &Graph, start: &[u32], size_lo: usize) -> Vec<Vec<u32>> {
    let n = g.n();
    let mut inside = VertexSet::from_iter(n, start.iter().map(|&v| v as usize));
    let mut states = Vec::new();
    while inside.len() > size_lo.max(1) {
        // Removing v changes the boundary by inside_deg(v) - outside_deg(v).
        let mut pick: Option<(i64, usize)> = None;
        for v in inside.iter() {
            let inside_deg = g
                .neighbors(v)
                .iter()
                .filter(|&&w| inside.contains(w as usize))
                .count() as i64;
            let outside_deg = g.degree(v) as i64 - inside_deg;
            let gain = outside_deg - inside_deg;
            if pick.is_none_or(|(best_gain, _)| gain > best_gain) {
                pick = Some((gain, v));
            }
        }
        let Some((_, v)) = pick else { break };
        inside.remove(v);
        let mut members: Vec<u32> = inside.iter().map(|x| x as u32).collect();
        members.sort_unstable();
        states.push(members);
    }
    states
}

// ---------------------------------------------------------------------------
// Expander extraction (delete few vertices, certify the rest).
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct PeelStep {
    /// Peeled set in original labels.
    pub set: VertexSet,
    pub boundary: u64,
    pub size: usize,
    pub graph_size_at_peel: usize,
    pub ratio: f64,
    pub mode: SearchMode,
}

/// Outcome of the extraction: deleted set V', kept graph, peel trace, and a
/// certificate on the kept graph.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractionResult {
    pub deleted: VertexSet,
    pub deleted_count: usize,
    /// The 5*delta*n budget and whether |V'| fits inside it.
    pub budget: f64,
    pub budget_holds: bool,
    pub kept: GraphSummary,
    pub kept_labels: Vec<u32>,
    #[serde(skip)]
    pub kept_graph: Graph,
    pub peel_trace: Vec<PeelStep>,
    pub certificate: ExpansionCertificate,
    /// The expansion constant eps*D/(16*tau).
    pub constant: f64,
    pub a_size: usize,
    pub eps: f64,
    pub delta: f64,
    pub tau: usize,
}

/// Expander extraction: check the well-mixing hypothesis, keep the giant
/// component, peel minimum-ratio violating sets until none is found, and
/// certify the remainder at eps*D/(16*tau).
pub fn extract_expander(
    g: &Graph,
    eps: f64,
    delta: f64,
    tau: usize,
    backend: Backend,
    seed: u64,
) -> Result<ExtractionResult> {
    let d = g.require_regular()?;
    let n = g.n();
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) || tau == 0 {
        return Err(Error::InvalidParameter(
            "need eps, delta in (0,1) and tau >= 1".into(),
        ));
    }
    let a = well_mixing_set(g, tau, delta, backend)?;
    let needed = (rational_from_f64(eps) * BigInt::from(n))
        .ceil()
        .to_integer()
        .to_usize()
        .unwrap_or(usize::MAX);
    if a.len() < needed {
        return Err(Error::HypothesisNotMet {
            have: a.len(),
            need: needed,
        });
    }
    let c = eps * d as f64 / (16.0 * tau as f64);

    let comps = g.components();
    let mut alive = comps.giant_members();
    let mut peel_trace: Vec<PeelStep> = Vec::new();
    loop {
        let cur = alive.len();
        if cur == 0 {
            return Err(Error::NoExpanderCore);
        }
        let limit = cur / 2;
        if limit == 0 {
            break;
        }
        let (local, table) = g.induced(&alive)?;
        let mode = if cur <= EXACT_CUT_LIMIT {
            SearchMode::Exact
        } else {
            SearchMode::Sweep
        };
        let cert = check_edge_expansion(&local, c, 1, limit, mode, seed)?;
        match (cert.verdict, cert.witness) {
            (CertVerdict::Violated, Some(local_set)) => {
                let boundary = local.edge_boundary(&local_set)?;
                let set =
                    VertexSet::from_iter(n, local_set.iter().map(|v| table[v] as usize));
                for v in set.iter() {
                    alive.remove(v);
                }
                peel_trace.push(PeelStep {
                    boundary,
                    size: set.len(),
                    ratio: boundary as f64 / set.len() as f64,
                    set,
                    graph_size_at_peel: cur,
                    mode,
                });
            }
            _ => break,
        }
    }
    if alive.is_empty() {
        return Err(Error::NoExpanderCore);
    }
    let (kept_graph, kept_labels) = g.induced(&alive)?;
    let np = kept_graph.n();
    let certificate = if np / 2 >= 1 {
        let mode = if np <= EXACT_CUT_LIMIT {
            SearchMode::Exact
        } else {
            SearchMode::Sweep
        };
        check_edge_expansion(&kept_graph, c, 1, np / 2, mode, seed)?
    } else {
        ExpansionCertificate::trivial(c, SearchMode::Exact)
    };
    let deleted = alive.complement();
    let budget_rat = rational_from_f64(delta) * BigInt::from(5 * n);
    let budget_holds = BigRational::from_integer(BigInt::from(deleted.len())) <= budget_rat;
    Ok(ExtractionResult {
        deleted_count: deleted.len(),
        deleted,
        budget: 5.0 * delta * n as f64,
        budget_holds,
        kept: GraphSummary::from(&kept_graph),
        kept_labels,
        kept_graph,
        peel_trace,
        certificate,
        constant: c,
        a_size: a.len(),
        eps,
        delta,
        tau,
    })
}

// ---------------------------------------------------------------------------
// Separators.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparatorMode {
    Exact,
    Heuristic,
}

/// A vertex set whose removal leaves every component with at most 2n/3
/// vertices.
#[derive(Clone, Debug, Serialize)]
pub struct SeparatorResult {
    pub separator: VertexSet,
    pub size: usize,
    pub largest_remaining_fraction: f64,
    pub mode: SeparatorMode,
    pub examined: u64,
}

/// Largest component size after deleting `removed`, via the independent
/// components code path.
fn validate_separator(g: &Graph, removed: &VertexSet) -> usize {
    let keep = removed.complement();
    if keep.is_empty() {
        return 0;
    }
    let (h, _) = g.induced(&keep).expect("nonempty");
    h.components().sizes.iter().copied().max().unwrap_or(0)
}

pub fn find_separator(g: &Graph, mode: SeparatorMode, seed: u64) -> Result<SeparatorResult> {
    let n = g.n();
    if n < 3 {
        return Err(Error::Infeasible("separator search needs n >= 3".into()));
    }
    // Component size cap: "at most 2n/3", i.e. 3*size <= 2*n.
    let limit = 2 * n / 3;
    match mode {
        SeparatorMode::Exact => {
            if n > EXACT_SEPARATOR_LIMIT {
                return Err(Error::ExactTooLarge {
                    n,
                    limit: EXACT_SEPARATOR_LIMIT,
                });
            }
            let adj = g.adj_masks_u32();
            let full: u32 = if n == 32 { !0 } else { (1 << n) - 1 };
            let mut examined = 0u64;
            for s in 0..=n {
                let mut found: Option<u32> = None;
                if s == 0 {
                    examined += 1;
                    if mask_components_ok(&adj, full, 0, limit as u32) {
                        found = Some(0);
                    }
                } else {
                    for_each_mask_of_size(n, s, |mask| {
                        if found.is_some() {
                            return;
                        }
                        examined += 1;
                        if mask_components_ok(&adj, full, mask, limit as u32) {
                            found = Some(mask);
                        }
                    });
                }
                if let Some(mask) = found {
                    let separator =
                        VertexSet::from_iter(n, (0..n).filter(|&v| mask >> v & 1 == 1));
                    let largest = validate_separator(g, &separator);
                    assert!(largest <= limit, "exact separator must revalidate");
                    return Ok(SeparatorResult {
                        size: separator.len(),
                        separator,
                        largest_remaining_fraction: largest as f64 / n as f64,
                        mode,
                        examined,
                    });
                }
            }
            unreachable!("removing all vertices is always a separator");
        }
        SeparatorMode::Heuristic => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut orders: Vec<Vec<u32>> = Vec::new();
            if g.is_regular() {
                orders.push(sweep_order(g, EIG_TOL, EIG_MAX_ITER));
            }
            for _ in 0..SWEEP_RESTARTS {
                let mut order: Vec<u32> = (0..n as u32).collect();
                for i in (1..n).rev() {
                    let j = rng.gen_range(0..=i);
                    order.swap(i, j);
                }
                orders.push(order);
            }
            let mut best: Option<VertexSet> = None;
            let mut examined = 0u64;
            let lo_split = n.div_ceil(3);
            for order in &orders {
                for split in lo_split..=n / 2 {
                    for side in [&order[..split], &order[n - split..]] {
                        let inside = VertexSet::from_iter(n, side.iter().map(|&v| v as usize));
                        let sep = VertexSet::from_iter(
                            n,
                            inside.iter().filter(|&v| {
                                g.neighbors(v).iter().any(|&w| !inside.contains(w as usize))
                            }),
                        );
                        examined += 1;
                        if best.as_ref().is_none_or(|b| sep.len() < b.len())
                            && validate_separator(g, &sep) <= limit
                        {
                            best = Some(sep);
                        }
                    }
                }
            }
            // Trivial fallback: removing all but the 2n/3 lowest labels
            // always separates.
            let fallback = VertexSet::from_iter(n, limit..n);
            let best = match best {
                Some(b) if b.len() <= fallback.len() => b,
                _ => fallback,
            };
            let largest = validate_separator(g, &best);
            assert!(largest <= limit);
            Ok(SeparatorResult {
                size: best.len(),
                separator: best,
                largest_remaining_fraction: largest as f64 / n as f64,
                mode,
                examined,
            })
        }
    }
}

/// Flood-fill components of (full & !removed); true when all are <= limit.
fn mask_components_ok(adj: &[u32], full: u32, removed: u32, limit: u32) -> bool {
    let mut rest = full & !removed;
    while rest != 0 {
        let seed = rest & rest.wrapping_neg();
        let mut comp = seed;
        let mut frontier = seed;
        while frontier != 0 {
            let mut grow = 0u32;
            let mut m = frontier;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                grow |= adj[v];
            }
            frontier = grow & rest & !comp;
            comp |= frontier;
        }
        if comp.count_ones() > limit {
            return false;
        }
        rest &= !comp;
    }
    true
}
