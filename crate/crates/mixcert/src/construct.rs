//! Deterministic generators for the named graph constructions. Random kinds
//! use ChaCha8 seeded from the descriptor, so identical descriptors
//! reproduce identical edge lists bit for bit.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

const REJECTION_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Hypercube,
    RandomRegular,
    ExpanderPlusClique,
    MatchedExpanders,
    MergedExpanders,
    Complete,
    Cycle,
}

impl ConstructionKind {
    fn name(self) -> &'static str {
        match self {
            ConstructionKind::Hypercube => "hypercube",
            ConstructionKind::RandomRegular => "random_regular",
            ConstructionKind::ExpanderPlusClique => "expander_plus_clique",
            ConstructionKind::MatchedExpanders => "matched_expanders",
            ConstructionKind::MergedExpanders => "merged_expanders",
            ConstructionKind::Complete => "complete",
            ConstructionKind::Cycle => "cycle",
        }
    }
}

/// A parsed construction descriptor such as `hypercube:D=3` or
/// `merged_expanders:n=512,D=8,m=32,seed=7`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
}

impl ConstructionSpec {
    pub fn parse(descriptor: &str) -> Result<ConstructionSpec> {
        let (kind_str, rest) = match descriptor.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => (descriptor.trim(), ""),
        };
        let kind = match kind_str {
            "hypercube" => ConstructionKind::Hypercube,
            "random_regular" => ConstructionKind::RandomRegular,
            "expander_plus_clique" => ConstructionKind::ExpanderPlusClique,
            "matched_expanders" => ConstructionKind::MatchedExpanders,
            "merged_expanders" => ConstructionKind::MergedExpanders,
            "complete" => ConstructionKind::Complete,
            "cycle" => ConstructionKind::Cycle,
            other => {
                return Err(Error::Infeasible(format!(
                    "unknown construction kind {other:?}"
                )))
            }
        };
        let mut spec = ConstructionSpec {
            kind,
            n: None,
            d: None,
            m: None,
            seed: None,
        };
        if !rest.is_empty() {
            for pair in rest.split(',') {
                let (key, value) = pair.split_once('=').ok_or_else(|| {
                    Error::Infeasible(format!("expected key=value, got {pair:?}"))
                })?;
                let key = key.trim();
                let value = value.trim();
                let as_usize = || {
                    value.parse::<usize>().map_err(|_| {
                        Error::Infeasible(format!("invalid value for {key}: {value:?}"))
                    })
                };
                match key {
                    "n" => spec.n = Some(as_usize()?),
                    "D" | "d" => spec.d = Some(as_usize()?),
                    "m" => spec.m = Some(as_usize()?),
                    "seed" => {
                        spec.seed = Some(value.parse::<u64>().map_err(|_| {
                            Error::Infeasible(format!("invalid seed: {value:?}"))
                        })?)
                    }
                    other => {
                        return Err(Error::Infeasible(format!(
                            "unknown construction parameter {other:?}"
                        )))
                    }
                }
            }
        }
        Ok(spec)
    }

    fn n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::Infeasible("missing parameter n".into()))
    }

    fn d(&self) -> Result<usize> {
        self.d
            .ok_or_else(|| Error::Infeasible("missing parameter D".into()))
    }

    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Infeasible("random construction requires a seed".into()))
    }
}

impl fmt::Display for ConstructionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        let mut sep = ':';
        if let Some(n) = self.n {
            write!(f, "{sep}n={n}")?;
            sep = ',';
        }
        if let Some(d) = self.d {
            write!(f, "{sep}D={d}")?;
            sep = ',';
        }
        if let Some(m) = self.m {
            write!(f, "{sep}m={m}")?;
            sep = ',';
        }
        if let Some(seed) = self.seed {
            write!(f, "{sep}seed={seed}")?;
        }
        Ok(())
    }
}

/// Generate the graph described by `spec`. Deterministic for a fixed spec.
pub fn generate(spec: &ConstructionSpec) -> Result<Graph> {
    match spec.kind {
        ConstructionKind::Hypercube => hypercube(spec.d()?),
        ConstructionKind::Complete => complete(spec.n()?),
        ConstructionKind::Cycle => cycle_graph(spec.n()?),
        ConstructionKind::RandomRegular => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed()?);
            random_regular(spec.n()?, spec.d()?, &mut rng)
        }
        ConstructionKind::ExpanderPlusClique => {
            let (n, d) = (spec.n()?, spec.d()?);
            if n < 2 * (d + 1) {
                return Err(Error::Infeasible(format!(
                    "expander_plus_clique needs n >= 2(D+1), got n={n}, D={d}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed()?);
            let expander = random_regular(n - (d + 1), d, &mut rng)?;
            Ok(expander.disjoint_union(&complete(d + 1)?))
        }
        ConstructionKind::MatchedExpanders => matched_expanders(spec.n()?, spec.d()?, spec.seed()?),
        ConstructionKind::MergedExpanders => {
            let m = spec
                .m
                .ok_or_else(|| Error::Infeasible("missing parameter m".into()))?;
            merged_expanders(spec.n()?, spec.d()?, m, spec.seed()?)
        }
    }
}

fn hypercube(d: usize) -> Result<Graph> {
    if d == 0 || d > 20 {
        return Err(Error::Infeasible(format!("hypercube dimension {d} out of range")));
    }
    let n = 1usize << d;
    let mut edges = Vec::with_capacity(n * d / 2);
    for v in 0..n as u32 {
        for bit in 0..d {
            let w = v ^ (1 << bit);
            if v < w {
                edges.push((v, w));
            }
        }
    }
    Graph::from_edges(Some(n), &edges)
}

fn complete(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::Infeasible("complete graph needs n >= 1".into()));
    }
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            edges.push((u, v));
        }
    }
    Graph::from_edges(Some(n), &edges)
}

fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Infeasible("cycle needs n >= 3".into()));
    }
    let edges: Vec<_> = (0..n as u32).map(|u| (u, (u + 1) % n as u32)).collect();
    Graph::from_edges(Some(n), &edges)
}

/// Pairing-model sampling: shuffle nD half-edge stubs, pair them up, and
/// reject until the pairing is simple.
fn random_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if d >= n {
        return Err(Error::Infeasible(format!(
            "regular degree {d} needs more than {d} vertices, got {n}"
        )));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::Infeasible(format!(
            "n*D must be even, got n={n}, D={d}"
        )));
    }
    if d == 0 {
        return Graph::from_edges(Some(n), &[]);
    }
    let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    for attempt in 1..=REJECTION_BUDGET {
        stubs.shuffle(rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut simple = true;
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                simple = false;
                break;
            }
            edges.push((u, v));
        }
        if simple {
            return Graph::from_edges(Some(n), &edges);
        }
        if attempt == REJECTION_BUDGET {
            return Err(Error::RejectionBudget { attempts: attempt });
        }
    }
    unreachable!()
}

/// Two disjoint random (D-1)-regular graphs on n vertices each, joined by the
/// perfect matching i <-> n+i.
fn matched_expanders(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d < 1 {
        return Err(Error::Infeasible("matched_expanders needs D >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half1 = random_regular(n, d - 1, &mut rng)?;
    let half2 = random_regular(n, d - 1, &mut rng)?;
    let mut edges: Vec<(u32, u32)> = half1.edges().collect();
    edges.extend(half2.edges().map(|(u, v)| (u + n as u32, v + n as u32)));
    edges.extend((0..n as u32).map(|i| (i, i + n as u32)));
    Graph::from_edges(Some(2 * n), &edges)
}

/// Two random D/2-regular graphs on n vertices, the lowest-labeled n/m
/// vertices of each identified pairwise, then degrees repaired greedily
/// outside the merged set. Vertex count is 2n - n/m.
fn merged_expanders(n: usize, d: usize, m: usize, seed: u64) -> Result<Graph> {
    if !d.is_multiple_of(2) || d == 0 {
        return Err(Error::Infeasible(format!(
            "merged_expanders needs even D >= 2, got D={d}"
        )));
    }
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::Infeasible(format!(
            "merged_expanders needs m | n, got n={n}, m={m}"
        )));
    }
    let q = n / m;
    if q >= n {
        return Err(Error::Infeasible(format!(
            "merged set of size {q} must be smaller than each half (n={n})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half1 = random_regular(n, d / 2, &mut rng)?;
    let half2 = random_regular(n, d / 2, &mut rng)?;

    // Half 1 keeps its labels; half 2's merged vertices (local 0..q) map onto
    // them, the rest shift up to n..2n-q.
    let total = 2 * n - q;
    let map2 = |v: u32| -> u32 {
        if (v as usize) < q {
            v
        } else {
            (v as usize - q + n) as u32
        }
    };
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (u, v) in half1.edges() {
        seen.insert((u.min(v), u.max(v)));
        edges.push((u, v));
    }
    for (u, v) in half2.edges() {
        let (a, b) = (map2(u), map2(v));
        let key = (a.min(b), a.max(b));
        // A collision can only happen when both endpoints are merged vertices
        // and the same pair is adjacent in both halves; keep one copy.
        if seen.insert(key) {
            edges.push(key);
        }
    }

    // Restore D-regularity, each half separately: greedy matching passes
    // among deficient vertices (paired across the two halves of the
    // deficient list so the same stragglers do not collide every pass), then
    // a rotation fallback for adjacent leftovers. Merged vertices belong to
    // both halves, so either pass may top up a collision deficit.
    let mut builder = EdgeSetBuilder::new(total, edges);
    let half1: Vec<usize> = (0..n).collect();
    let half2: Vec<usize> = (0..q).chain(n..total).collect();
    builder.complete_degrees(&half1, d);
    builder.complete_degrees(&half2, d);
    let g = builder.into_graph()?;
    debug_assert!(g.degree_max() <= d);
    Ok(g)
}

/// Mutable edge set with degree tracking, used by the merged-expanders
/// degree repair.
struct EdgeSetBuilder {
    total: usize,
    edges: HashSet<(u32, u32)>,
    degree: Vec<usize>,
}

impl EdgeSetBuilder {
    fn new(total: usize, edges: Vec<(u32, u32)>) -> EdgeSetBuilder {
        let mut set = HashSet::with_capacity(edges.len());
        let mut degree = vec![0usize; total];
        for (u, v) in edges {
            let key = (u.min(v), u.max(v));
            if set.insert(key) {
                degree[key.0 as usize] += 1;
                degree[key.1 as usize] += 1;
            }
        }
        EdgeSetBuilder {
            total,
            edges: set,
            degree,
        }
    }

    fn has(&self, u: usize, v: usize) -> bool {
        self.edges
            .contains(&((u.min(v)) as u32, (u.max(v)) as u32))
    }

    fn add(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && !self.has(u, v));
        self.edges.insert((u.min(v) as u32, u.max(v) as u32));
        self.degree[u] += 1;
        self.degree[v] += 1;
    }

    fn remove(&mut self, u: usize, v: usize) {
        debug_assert!(self.has(u, v));
        self.edges.remove(&(u.min(v) as u32, u.max(v) as u32));
        self.degree[u] -= 1;
        self.degree[v] -= 1;
    }

    /// Bring every member vertex up to degree d by adding edges among the
    /// members, using rotations when the remaining deficient vertices are
    /// pairwise adjacent.
    fn complete_degrees(&mut self, members: &[usize], d: usize) {
        loop {
            let deficient: Vec<usize> =
                members.iter().copied().filter(|&v| self.degree[v] < d).collect();
            if deficient.is_empty() {
                return;
            }
            // Matching pass: pair entry i with the first compatible entry in
            // the opposite half of the list.
            let mut used = vec![false; deficient.len()];
            let half = deficient.len().div_ceil(2);
            let mut added = false;
            for i in 0..deficient.len() {
                if used[i] {
                    continue;
                }
                let start = if i < half { half } else { 0 };
                for off in 0..deficient.len() {
                    let j = (start + off) % deficient.len();
                    if j == i || used[j] || self.has(deficient[i], deficient[j]) {
                        continue;
                    }
                    self.add(deficient[i], deficient[j]);
                    used[i] = true;
                    used[j] = true;
                    added = true;
                    break;
                }
            }
            if added {
                continue;
            }
            // All remaining deficient vertices are pairwise adjacent (or a
            // single vertex remains). Rotate: remove a member-internal edge
            // (x, y) disjoint from the targets and add the two target edges;
            // x and y keep their degrees.
            if !self.rotate(members, &deficient, d) {
                return; // no rotation candidate; leave the deficiency
            }
        }
    }

    fn rotate(&mut self, members: &[usize], deficient: &[usize], d: usize) -> bool {
        let (a, b) = if deficient.len() >= 2 {
            (deficient[0], deficient[1])
        } else {
            // A lone deficient vertex gains two edges in one rotation; skip
            // when that would overshoot degree d.
            if self.degree[deficient[0]] + 2 > d {
                return false;
            }
            (deficient[0], deficient[0])
        };
        let member = {
            let mut flag = vec![false; self.total];
            for &v in members {
                flag[v] = true;
            }
            flag
        };
        let mut candidates: Vec<(u32, u32)> = self
            .edges
            .iter()
            .copied()
            .filter(|&(x, y)| member[x as usize] && member[y as usize])
            .collect();
        candidates.sort_unstable();
        for (x, y) in candidates {
            let (x, y) = (x as usize, y as usize);
            if x == a || x == b || y == a || y == b {
                continue;
            }
            // Try both orientations of the rotation.
            for (p, q) in [(x, y), (y, x)] {
                if !self.has(a, p) && (a == b || !self.has(b, q)) && (a != b || !self.has(a, q)) {
                    self.remove(p, q);
                    self.add(a, p);
                    if a == b {
                        self.add(a, q);
                    } else {
                        self.add(b, q);
                    }
                    return true;
                }
            }
        }
        false
    }

    fn into_graph(self) -> Result<Graph> {
        let edges: Vec<(u32, u32)> = {
            let mut e: Vec<_> = self.edges.into_iter().collect();
            e.sort_unstable();
            e
        };
        Graph::from_edges(Some(self.total), &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_d3() {
        let g = generate(&ConstructionSpec::parse("hypercube:D=3").unwrap()).unwrap();
        assert_eq!(g.n(), 8);
        assert_eq!(g.edge_count(), 12);
        assert_eq!(g.regular_degree(), Some(3));
    }

    #[test]
    fn random_regular_degree_sum() {
        let g = generate(&ConstructionSpec::parse("random_regular:n=20,D=3,seed=5").unwrap())
            .unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        assert_eq!(g.n() * 3, 2 * g.edge_count());
    }

    #[test]
    fn random_regular_rejects_odd_sum() {
        assert!(generate(&ConstructionSpec::parse("random_regular:n=9,D=3,seed=1").unwrap())
            .is_err());
    }

    #[test]
    fn merged_expanders_vertex_count() {
        // 2n - n/m vertices.
        let g = generate(
            &ConstructionSpec::parse("merged_expanders:n=64,D=8,m=16,seed=7").unwrap(),
        )
        .unwrap();
        assert_eq!(g.n(), 2 * 64 - 64 / 16);
        assert!(g.degree_max() <= 8);
        // Merged vertices reach degree D from both halves; the repair should
        // bring the rest up to D as well on healthy instances.
        assert_eq!(g.regular_degree(), Some(8));
        assert!(g.components().is_connected());
    }

    #[test]
    fn matched_expanders_audit() {
        let g = generate(
            &ConstructionSpec::parse("matched_expanders:n=50,D=4,seed=1").unwrap(),
        )
        .unwrap();
        assert_eq!(g.n(), 100);
        assert_eq!(g.regular_degree(), Some(4));
        // The cross edges form exactly the perfect matching i <-> 50+i.
        let cross: Vec<(u32, u32)> = g
            .edges()
            .filter(|&(u, v)| (u < 50) != (v < 50))
            .collect();
        assert_eq!(cross.len(), 50);
        for (u, v) in cross {
            assert_eq!(v, u + 50);
        }
    }

    #[test]
    fn generation_is_bit_reproducible() {
        let spec = ConstructionSpec::parse("random_regular:n=24,D=4,seed=42").unwrap();
        let a = generate(&spec).unwrap().to_edge_list();
        let b = generate(&spec).unwrap().to_edge_list();
        assert_eq!(a, b);
        let other = generate(&ConstructionSpec::parse("random_regular:n=24,D=4,seed=43").unwrap())
            .unwrap()
            .to_edge_list();
        assert_ne!(a, other);
    }

    #[test]
    fn descriptor_roundtrip() {
        let s = ConstructionSpec::parse("merged_expanders:n=512,D=8,m=32,seed=7").unwrap();
        assert_eq!(s.to_string(), "merged_expanders:n=512,D=8,m=32,seed=7");
        assert_eq!(ConstructionSpec::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn seed_required_for_random_kinds() {
        assert!(generate(&ConstructionSpec::parse("random_regular:n=10,D=3").unwrap()).is_err());
    }
}
