//! Immutable simple graphs in compressed sparse row form, vertex sets over
//! `[n]`, connected components, and elementary boundary operations.

use std::collections::VecDeque;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Simple undirected graph. Neighbor lists are sorted and strictly
/// increasing; the adjacency relation is symmetric by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    degree_min: usize,
    degree_max: usize,
    regular_degree: Option<usize>,
}

impl Graph {
    /// Build from an undirected edge list. `n_hint` overrides the vertex
    /// count (must cover every label); otherwise n = 1 + max label.
    pub fn from_edges(n_hint: Option<usize>, edges: &[(u32, u32)]) -> Result<Graph> {
        let max_label = edges.iter().map(|&(u, v)| u.max(v)).max();
        let n = match (n_hint, max_label) {
            (Some(n), Some(mx)) => {
                if (mx as usize) >= n {
                    return Err(Error::Infeasible(format!(
                        "vertex label {mx} out of range for n={n}"
                    )));
                }
                n
            }
            (Some(n), None) => n,
            (None, Some(mx)) => mx as usize + 1,
            (None, None) => 0,
        };
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(Error::Infeasible(format!("self-loop at vertex {u}")));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut flat = Vec::with_capacity(2 * edges.len());
        offsets.push(0);
        for (u, row) in adj.iter_mut().enumerate() {
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Infeasible(format!(
                        "duplicate edge between {u} and {}",
                        w[0]
                    )));
                }
            }
            flat.extend_from_slice(row);
            offsets.push(flat.len());
        }
        let degree_min = (0..n).map(|v| offsets[v + 1] - offsets[v]).min().unwrap_or(0);
        let degree_max = (0..n).map(|v| offsets[v + 1] - offsets[v]).max().unwrap_or(0);
        let regular_degree = (degree_min == degree_max && n > 0).then_some(degree_min);
        Ok(Graph {
            n,
            offsets,
            neighbors: flat,
            degree_min,
            degree_max,
            regular_degree,
        })
    }

    /// Parse the edge-list text format: optional `# comment` lines, an
    /// optional `n=<count>` header, and one `u v` pair per line.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut n_hint = None;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("n=") {
                n_hint = Some(rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid vertex count {rest:?}"),
                })?);
                continue;
            }
            let mut it = line.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => {
                    let parse = |s: &str| {
                        s.parse::<u32>().map_err(|_| Error::Parse {
                            line: line_no,
                            msg: format!("invalid vertex label {s:?}"),
                        })
                    };
                    (parse(a)?, parse(b)?)
                }
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected \"u v\", got {line:?}"),
                    })
                }
            };
            if u == v {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("self-loop at vertex {u}"),
                });
            }
            if edges
                .iter()
                .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
            {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("duplicate edge {u} {v}"),
                });
            }
            edges.push((u, v));
        }
        Graph::from_edges(n_hint, &edges)
    }

    /// Render as edge-list text, one `u v` line per edge with u < v. An
    /// `n=` header is added only when the edges alone would not pin the
    /// vertex count (trailing isolated vertices).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let implied = self
            .edges()
            .map(|(_, v)| v as usize + 1)
            .max()
            .unwrap_or(0);
        if implied != self.n {
            out.push_str(&format!("n={}\n", self.n));
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degree_min(&self) -> usize {
        self.degree_min
    }

    pub fn degree_max(&self) -> usize {
        self.degree_max
    }

    pub fn is_regular(&self) -> bool {
        self.regular_degree.is_some()
    }

    /// Common degree D when the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    pub fn require_regular(&self) -> Result<usize> {
        self.regular_degree.ok_or(Error::NotRegular {
            min: self.degree_min,
            max: self.degree_max,
        })
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Iterator over edges (u, v) with u < v, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (u as u32) < v)
                .map(move |&v| (u as u32, v))
        })
    }

    /// Connected components; the giant is the largest, lowest id on ties.
    pub fn components(&self) -> ComponentDecomposition {
        let mut component_id = vec![u32::MAX; self.n];
        let mut sizes = Vec::new();
        let mut queue = VecDeque::new();
        for root in 0..self.n {
            if component_id[root] != u32::MAX {
                continue;
            }
            let id = sizes.len() as u32;
            let mut size = 0usize;
            component_id[root] = id;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                size += 1;
                for &w in self.neighbors(v) {
                    if component_id[w as usize] == u32::MAX {
                        component_id[w as usize] = id;
                        queue.push_back(w as usize);
                    }
                }
            }
            sizes.push(size);
        }
        let giant = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(id, _)| id)
            .unwrap_or(0);
        ComponentDecomposition {
            component_id,
            sizes,
            giant,
        }
    }

    /// Induced subgraph on X plus the relabeling table (new id -> old id).
    pub fn induced(&self, x: &VertexSet) -> Result<(Graph, Vec<u32>)> {
        if x.is_empty() {
            return Err(Error::EmptySet);
        }
        let old_of_new: Vec<u32> = x.iter().map(|v| v as u32).collect();
        let mut new_of_old = vec![u32::MAX; self.n];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old as usize] = new as u32;
        }
        let mut edges = Vec::new();
        for &old_u in &old_of_new {
            for &old_v in self.neighbors(old_u as usize) {
                if old_u < old_v && new_of_old[old_v as usize] != u32::MAX {
                    edges.push((new_of_old[old_u as usize], new_of_old[old_v as usize]));
                }
            }
        }
        let g = Graph::from_edges(Some(old_of_new.len()), &edges)?;
        Ok((g, old_of_new))
    }

    /// Number of edges with exactly one endpoint in X.
    pub fn edge_boundary(&self, x: &VertexSet) -> Result<u64> {
        if x.is_empty() || x.len() == self.n {
            return Err(Error::NotProperSubset);
        }
        let mut count = 0u64;
        for v in x.iter() {
            for &w in self.neighbors(v) {
                if !x.contains(w as usize) {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// External neighborhood N(W) = { v not in W adjacent to some w in W }.
    pub fn neighborhood(&self, w: &VertexSet) -> Result<VertexSet> {
        if w.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut out = VertexSet::empty(self.n);
        for v in w.iter() {
            for &u in self.neighbors(v) {
                if !w.contains(u as usize) {
                    out.insert(u as usize);
                }
            }
        }
        Ok(out)
    }

    /// Disjoint union; `other`'s vertices are shifted up by self.n().
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n as u32;
        let mut edges: Vec<(u32, u32)> = self.edges().collect();
        edges.extend(other.edges().map(|(u, v)| (u + shift, v + shift)));
        Graph::from_edges(Some(self.n + other.n), &edges)
            .expect("union of two valid graphs is valid")
    }

    /// BFS 2-coloring test.
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.n];
        let mut queue = VecDeque::new();
        for root in 0..self.n {
            if color[root] != u8::MAX {
                continue;
            }
            color[root] = 0;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                for &w in self.neighbors(v) {
                    let w = w as usize;
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[v];
                        queue.push_back(w);
                    } else if color[w] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Adjacency rows as u32 bitmasks; callers guarantee n <= 32.
    pub(crate) fn adj_masks_u32(&self) -> Vec<u32> {
        debug_assert!(self.n <= 32);
        (0..self.n)
            .map(|v| self.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
            .collect()
    }

    /// Adjacency rows as u64 bitmasks; callers guarantee n <= 64.
    pub(crate) fn adj_masks_u64(&self) -> Vec<u64> {
        debug_assert!(self.n <= 64);
        (0..self.n)
            .map(|v| self.neighbors(v).iter().fold(0u64, |m, &w| m | (1 << w)))
            .collect()
    }
}

/// Compact summary used in reports.
#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub edges: usize,
    pub degree_min: usize,
    pub degree_max: usize,
    pub regular_degree: Option<usize>,
}

impl From<&Graph> for GraphSummary {
    fn from(g: &Graph) -> Self {
        GraphSummary {
            n: g.n(),
            edges: g.edge_count(),
            degree_min: g.degree_min(),
            degree_max: g.degree_max(),
            regular_degree: g.regular_degree(),
        }
    }
}

/// Membership set over `[n]` with cached cardinality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
    size: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> VertexSet {
        VertexSet {
            n,
            words: vec![0; n.div_ceil(64)],
            size: 0,
        }
    }

    pub fn full(n: usize) -> VertexSet {
        let mut s = VertexSet::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_iter(n: usize, members: impl IntoIterator<Item = usize>) -> VertexSet {
        let mut s = VertexSet::empty(n);
        for v in members {
            s.insert(v);
        }
        s
    }

    /// Decode from a u32 mask over local labels.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn from_mask_u32(n: usize, mask: u32) -> VertexSet {
        VertexSet::from_iter(n, (0..n.min(32)).filter(|&v| mask >> v & 1 == 1))
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.n);
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    /// Returns true if v was newly inserted.
    pub fn insert(&mut self, v: usize) -> bool {
        debug_assert!(v < self.n);
        let w = &mut self.words[v / 64];
        let bit = 1u64 << (v % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.size += 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, v: usize) -> bool {
        debug_assert!(v < self.n);
        let w = &mut self.words[v / 64];
        let bit = 1u64 << (v % 64);
        if *w & bit != 0 {
            *w &= !bit;
            self.size -= 1;
            true
        } else {
            false
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.contains(v))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn complement(&self) -> VertexSet {
        VertexSet::from_iter(self.n, (0..self.n).filter(|&v| !self.contains(v)))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for v in other.iter() {
            out.insert(v);
        }
        out
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.size))?;
        for v in self.iter() {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

/// Partition of `[n]` into connected components.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentDecomposition {
    pub component_id: Vec<u32>,
    pub sizes: Vec<usize>,
    /// Id of the largest component (lowest id on ties).
    pub giant: usize,
}

impl ComponentDecomposition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_connected(&self) -> bool {
        self.sizes.len() <= 1
    }

    pub fn members(&self, id: usize) -> VertexSet {
        VertexSet::from_iter(
            self.component_id.len(),
            self.component_id
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c as usize == id)
                .map(|(v, _)| v),
        )
    }

    pub fn giant_members(&self) -> VertexSet {
        self.members(self.giant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{generate, ConstructionSpec};

    fn k(n: u32) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(None, &edges).unwrap()
    }

    fn cycle(n: u32) -> Graph {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Graph::from_edges(None, &edges).unwrap()
    }

    pub(crate) fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5u32 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, i + 5));
        }
        Graph::from_edges(None, &edges).unwrap()
    }

    #[test]
    fn parse_triangle() {
        let g = Graph::parse_edge_list("0 1\n1 2\n2 0").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.regular_degree(), Some(2));
    }

    #[test]
    fn parse_rejects_duplicate_edge() {
        let err = Graph::parse_edge_list("0 1\n0 1").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = Graph::parse_edge_list("0 1\n1 0").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn parse_rejects_self_loop() {
        let err = Graph::parse_edge_list("0 0").unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
    }

    #[test]
    fn parse_header_and_comments() {
        let g = Graph::parse_edge_list("# a triangle plus an isolated vertex\nn=4\n0 1\n1 2\n2 0").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.degree(3), 0);
        assert!(!g.is_regular());
    }

    #[test]
    fn components_of_triangle_and_union() {
        let g = k(3);
        let c = g.components();
        assert_eq!(c.sizes, vec![3]);

        let u = k(3).disjoint_union(&k(3));
        let c = u.components();
        assert_eq!(c.sizes, vec![3, 3]);
        assert_eq!(c.giant, 0, "tie broken by lowest id");
    }

    #[test]
    fn expander_plus_clique_component_sizes() {
        let g = generate(
            &ConstructionSpec::parse("expander_plus_clique:n=100,D=3,seed=7").unwrap(),
        )
        .unwrap();
        let c = g.components();
        let mut sizes = c.sizes.clone();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![4, 96]);
    }

    #[test]
    fn induced_examples() {
        let (g, table) = k(4).induced(&VertexSet::from_iter(4, [0, 2, 3])).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(table, vec![0, 2, 3]);

        let (p, _) = cycle(6).induced(&VertexSet::from_iter(6, [0, 1, 2])).unwrap();
        assert_eq!(p.edge_count(), 2);
        assert_eq!(p.degree_min(), 1);

        // Q^3 subcube (top bit = 0) induces Q^2.
        let q3 = generate(&ConstructionSpec::parse("hypercube:D=3").unwrap()).unwrap();
        let (q2, _) = q3.induced(&VertexSet::from_iter(8, 0..4)).unwrap();
        assert_eq!(q2.regular_degree(), Some(2));
        assert_eq!(q2.n(), 4);
    }

    #[test]
    fn induced_rejects_empty() {
        assert!(matches!(
            k(4).induced(&VertexSet::empty(4)),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn edge_boundary_examples() {
        let g = k(4);
        assert_eq!(g.edge_boundary(&VertexSet::from_iter(4, [1])).unwrap(), 3);

        let q3 = generate(&ConstructionSpec::parse("hypercube:D=3").unwrap()).unwrap();
        assert_eq!(q3.edge_boundary(&VertexSet::from_iter(8, 0..4)).unwrap(), 4);

        let c6 = cycle(6);
        assert_eq!(c6.edge_boundary(&VertexSet::from_iter(6, [0, 1, 2])).unwrap(), 2);
    }

    #[test]
    fn edge_boundary_rejects_empty_and_full() {
        let g = k(4);
        assert!(g.edge_boundary(&VertexSet::empty(4)).is_err());
        assert!(g.edge_boundary(&VertexSet::full(4)).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let c6 = cycle(6);
        let n = c6.neighborhood(&VertexSet::from_iter(6, [0])).unwrap();
        assert_eq!(n.to_vec(), vec![1, 5]);

        let g = k(4);
        let n = g.neighborhood(&VertexSet::from_iter(4, [0, 1])).unwrap();
        assert_eq!(n.to_vec(), vec![2, 3]);

        // Petersen is triangle-free: two adjacent vertices see 4 outside.
        let p = petersen();
        let n = p.neighborhood(&VertexSet::from_iter(10, [0, 1])).unwrap();
        assert_eq!(n.len(), 4);
    }

    #[test]
    fn boundary_complement_symmetry_exhaustive() {
        // e(X, V \ X) = e(V \ X, X) for every proper nonempty X; exhaustive
        // over a 10-vertex instance.
        let g = generate(&ConstructionSpec::parse("random_regular:n=10,D=3,seed=1").unwrap())
            .unwrap();
        for mask in 1u32..(1 << 10) - 1 {
            let x = VertexSet::from_mask_u32(10, mask);
            assert_eq!(
                g.edge_boundary(&x).unwrap(),
                g.edge_boundary(&x.complement()).unwrap()
            );
        }
    }

    #[test]
    fn neighborhood_properties() {
        let g = petersen();
        for mask in 1u32..1 << 10 {
            if mask.count_ones() > 3 {
                continue;
            }
            let w = VertexSet::from_mask_u32(10, mask);
            let nb = g.neighborhood(&w).unwrap();
            assert_eq!(nb.intersection_len(&w), 0);
            for v in nb.iter() {
                assert!(g.neighbors(v).iter().any(|&u| w.contains(u as usize)));
            }
        }
    }

    #[test]
    fn induced_roundtrip_maps_into_original_edges() {
        let g = petersen();
        let x = VertexSet::from_iter(10, [0, 1, 2, 5, 7]);
        let (h, table) = g.induced(&x).unwrap();
        for (u, v) in h.edges() {
            assert!(g.contains_edge(table[u as usize] as usize, table[v as usize] as usize));
        }
    }
}
