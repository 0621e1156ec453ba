//! Immutable simple graphs with bitset adjacency rows.

use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::{self, words_for, Ones, VertexSet};
use crate::error::{Error, Result};

/// Largest supported vertex count.
pub const MAX_VERTICES: usize = 4096;

/// A simple undirected graph on vertices `0..n`.
///
/// Adjacency is stored as `n` rows of `ceil(n/64)` words. Rows are symmetric
/// and the diagonal is clear; the only constructors go through
/// [`Graph::from_edges`] or the sampler, which maintain both invariants.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    stride: usize,
    adj: Vec<u64>,
}

impl core::fmt::Debug for Graph {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("m", &self.edge_count())
            .finish()
    }
}

pub(crate) fn check_vertex_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VERTICES {
        return Err(Error::VertexCount {
            got: n,
            max: MAX_VERTICES,
        });
    }
    Ok(())
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        check_vertex_count(n)?;
        let stride = words_for(n);
        Ok(Self {
            n,
            stride,
            adj: vec![0; n * stride],
        })
    }

    /// Builds a graph from an edge list. Self-loops, repeated pairs (in either
    /// orientation) and out-of-range endpoints are rejected.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if g.has_edge(u, v) {
                return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
            }
            g.link(u, v);
        }
        Ok(g)
    }

    #[inline]
    pub(crate) fn link(&mut self, u: usize, v: usize) {
        let stride = self.stride;
        bitset::set(&mut self.adj[u * stride..(u + 1) * stride], v);
        bitset::set(&mut self.adj[v * stride..(v + 1) * stride], u);
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v)))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(crate::error::param("a cycle needs at least 3 vertices"));
        }
        Self::from_edges(n, (0..n).map(|v| (v, (v + 1) % n)))
    }

    /// Star `K_{1,leaves}` with centre 0.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v)))
    }

    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Self::from_edges(10, outer.chain(spokes).chain(inner)).expect("fixed edge list")
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Result<Self> {
        let shift = self.n;
        Self::from_edges(
            self.n + other.n,
            self.edges().chain(other.edges().map(|(u, v)| (u + shift, v + shift))),
        )
    }

    /// Induced subgraph on `keep`, relabelled to `0..keep.len()` in ascending
    /// order.
    pub fn induced(&self, keep: &VertexSet) -> Result<Self> {
        self.check_set(keep)?;
        let verts = keep.to_vec();
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges()
            .filter(|&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|(u, v)| (index[u], index[v]));
        Self::from_edges(verts.len(), edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Words per adjacency row.
    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Adjacency row of `v` as raw words.
    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.stride..(v + 1) * self.stride]
    }

    pub fn neighbors(&self, v: usize) -> Ones<'_> {
        Ones::new(self.row(v))
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && bitset::test(self.row(u), v)
    }

    pub fn degree(&self, v: usize) -> usize {
        bitset::count(self.row(v))
    }

    pub fn edge_count(&self) -> usize {
        bitset::count(&self.adj) / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        if s.universe() > self.n {
            if let Some(v) = s.iter().find(|&v| v >= self.n) {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        Ok(())
    }

    /// Words of `s` padded or truncated to this graph's stride.
    fn set_words(&self, s: &VertexSet) -> Vec<u64> {
        let mut w = vec![0; self.stride];
        for (dst, src) in w.iter_mut().zip(s.words()) {
            *dst = *src;
        }
        w
    }

    /// Number of edges with both endpoints in `s`.
    pub fn induced_edge_count(&self, s: &VertexSet) -> Result<usize> {
        self.check_set(s)?;
        let w = self.set_words(s);
        let twice: usize = Ones::new(&w).map(|v| bitset::and_count(self.row(v), &w)).sum();
        Ok(twice / 2)
    }

    /// Number of connected components of the subgraph induced by `s`
    /// (0 for the empty set).
    pub fn component_count(&self, s: &VertexSet) -> Result<usize> {
        self.check_set(s)?;
        let mut remaining = self.set_words(s);
        let mut frontier = vec![0u64; self.stride];
        let mut components = 0;
        while let Some(start) = bitset::first(&remaining) {
            components += 1;
            frontier.iter_mut().for_each(|w| *w = 0);
            bitset::set(&mut frontier, start);
            bitset::clear(&mut remaining, start);
            while let Some(v) = bitset::first(&frontier) {
                bitset::clear(&mut frontier, v);
                for ((f, r), a) in frontier.iter_mut().zip(remaining.iter_mut()).zip(self.row(v)) {
                    let reached = *r & a;
                    *f |= reached;
                    *r &= !reached;
                }
            }
        }
        Ok(components)
    }

    /// True iff `s` induces an acyclic subgraph, i.e. it has exactly
    /// `|s| - components` edges. The empty set is a forest.
    pub fn is_induced_forest(&self, s: &VertexSet) -> Result<bool> {
        let edges = self.induced_edge_count(s)?;
        let comps = self.component_count(s)?;
        Ok(edges + comps == s.len())
    }

    /// True iff `s` is non-empty and induces a tree.
    pub fn is_induced_tree(&self, s: &VertexSet) -> Result<bool> {
        Ok(!s.is_empty() && self.is_induced_forest(s)? && self.component_count(s)? == 1)
    }

    /// Checks the structural invariants (symmetry, empty diagonal).
    pub fn validate(&self) -> bool {
        (0..self.n).all(|u| {
            !bitset::test(self.row(u), u) && self.neighbors(u).all(|v| v < self.n && bitset::test(self.row(v), u))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, vs: &[usize]) -> VertexSet {
        VertexSet::from_vertices(n, vs.iter().copied()).unwrap()
    }

    #[test]
    fn induced_edge_counts() {
        let k3 = Graph::complete(3).unwrap();
        assert_eq!(k3.induced_edge_count(&VertexSet::new(3)).unwrap(), 0);
        assert_eq!(k3.induced_edge_count(&VertexSet::full(3)).unwrap(), 3);
        let p3 = Graph::path(3).unwrap();
        assert_eq!(p3.induced_edge_count(&set(3, &[0, 2])).unwrap(), 0);
    }

    #[test]
    fn forest_predicates_on_fixtures() {
        let k4 = Graph::complete(4).unwrap();
        assert!(!k4.is_induced_forest(&set(4, &[0, 1, 3])).unwrap());

        let star = Graph::star(3).unwrap();
        let all = VertexSet::full(4);
        assert!(star.is_induced_forest(&all).unwrap());
        assert_eq!(star.component_count(&all).unwrap(), 1);

        let empty = Graph::empty(6).unwrap();
        let all = VertexSet::full(6);
        assert!(empty.is_induced_forest(&all).unwrap());
        assert_eq!(empty.component_count(&all).unwrap(), 6);

        assert!(k4.is_induced_forest(&VertexSet::new(4)).unwrap());
        assert_eq!(k4.component_count(&VertexSet::new(4)).unwrap(), 0);
    }

    #[test]
    fn out_of_range_sets_are_rejected() {
        let g = Graph::path(3).unwrap();
        let s = set(5, &[1, 4]);
        assert_eq!(
            g.induced_edge_count(&s),
            Err(Error::VertexOutOfRange { vertex: 4, n: 3 })
        );
        // a wider universe is fine as long as no bit is out of range
        assert_eq!(g.induced_edge_count(&set(5, &[0, 1])).unwrap(), 1);
    }

    #[test]
    fn edge_list_validation() {
        assert_eq!(Graph::from_edges(3, [(1, 1)]), Err(Error::SelfLoop(1)));
        assert_eq!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(0, 1))
        );
        assert!(matches!(Graph::empty(0), Err(Error::VertexCount { .. })));
        assert!(matches!(
            Graph::empty(MAX_VERTICES + 1),
            Err(Error::VertexCount { .. })
        ));
    }

    #[test]
    fn petersen_is_cubic() {
        let g = Graph::petersen();
        assert!(g.validate());
        assert_eq!(g.edge_count(), 15);
        assert!((0..10).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn induced_relabels() {
        let c5 = Graph::cycle(5).unwrap();
        let sub = c5.induced(&set(5, &[0, 1, 2, 4])).unwrap();
        assert_eq!(sub.edges().collect::<Vec<_>>(), [(0, 1), (0, 3), (1, 2)]);
    }
}
