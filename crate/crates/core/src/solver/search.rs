//! Branch-and-bound for the maximum induced forest and tree.
//!
//! Vertices are relabelled by degree (descending, ties by index). A node of
//! the search holds the partial set `S`, which induces a forest whose
//! components live in a [`RollbackUnionFind`], and the candidate set `C` of
//! vertices that can join `S` without closing a cycle (at most one neighbour in
//! every component of `S`).
//!
//! Bounds, both over a greedy clique cover of `C`:
//!
//! * weight: a clique holds at most two vertices of a forest, and at most one
//!   if all its members touch a common component of `S`;
//! * edge budget: the final forest has at most `|F| - 1` edges, and every
//!   candidate brings `d_S(u)` edges into `S` (see `edge_budget_bound`).
//!
//! Cliques whose cumulative weight fits under `best - |S|` are never branched
//! on; the rest are branched include/exclude, last clique first.
//!
//! Trees: candidates are restricted to the part of `G[S ∪ C]` reachable from
//! `S`, a node whose `S` is split across several such parts cannot become a
//! tree, and only connected `S` are recorded. [`Solver::solve_both`] runs a
//! single search for both optima, pruning against the tree incumbent only
//! while `S` can still grow into a tree.

use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::{self, Ones, VertexSet};
use crate::graph::Graph;

use super::union_find::RollbackUnionFind;
use super::{Mode, SolveResult, Status, DEFAULT_NODE_BUDGET};

/// Solves `mode` on `g` with the given node budget.
pub fn solve_max(mode: Mode, g: &Graph, budget: u64) -> SolveResult {
    Solver::new(g).budget(budget).solve(mode)
}

/// Forest and tree optima from one search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BothResult {
    pub forest: SolveResult,
    pub tree: SolveResult,
}

/// Search configuration.
#[derive(Debug, Clone)]
pub struct Solver<'g> {
    graph: &'g Graph,
    budget: u64,
    incumbents: Vec<VertexSet>,
}

impl<'g> Solver<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            budget: DEFAULT_NODE_BUDGET,
            incumbents: Vec::new(),
        }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Seeds the search with a known solution. It is used for every mode it
    /// is valid for (a tree also counts as a forest) and ignored otherwise.
    pub fn incumbent(mut self, witness: VertexSet) -> Self {
        self.incumbents.push(witness);
        self
    }

    pub fn solve(&self, mode: Mode) -> SolveResult {
        let (forest, tree) = self.run(mode == Mode::Forest, mode == Mode::Tree);
        match mode {
            Mode::Forest => forest,
            Mode::Tree => tree,
        }
    }

    pub fn solve_both(&self) -> BothResult {
        let (forest, tree) = self.run(true, true);
        BothResult { forest, tree }
    }

    fn run(&self, want_forest: bool, want_tree: bool) -> (SolveResult, SolveResult) {
        let g = self.graph;
        let n = g.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (core::cmp::Reverse(g.degree(v)), v));
        let mut position = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let relabelled = Graph::from_edges(n, g.edges().map(|(u, v)| (position[u], position[v])))
            .expect("relabelling preserves simplicity");

        let mut search = Search::new(&relabelled, want_forest, want_tree, self.budget);
        for w in &self.incumbents {
            if w.universe() != n {
                continue;
            }
            let mut mapped = vec![0u64; search.stride];
            for v in w.iter() {
                bitset::set(&mut mapped, position[v]);
            }
            if g.is_induced_forest(w) == Ok(true) {
                search.forest.offer(w.len(), &mapped);
            }
            if g.is_induced_tree(w) == Ok(true) {
                search.tree.offer(w.len(), &mapped);
            }
        }
        if want_forest {
            search.greedy_forest();
        }
        if want_tree && n > 0 {
            let mut single = vec![0u64; search.stride];
            bitset::set(&mut single, 0);
            search.tree.offer(1, &single);
        }
        let mut cand = vec![0u64; search.stride];
        for v in 0..n {
            bitset::set(&mut cand, v);
        }
        search.expand(&mut cand);

        let status = if search.exhausted {
            Status::Incomplete
        } else {
            Status::Complete
        };
        let result = |best: &Best, mode| SolveResult {
            size: best.size,
            witness: VertexSet::from_vertices(n, Ones::new(&best.set).map(|i| order[i])).expect("labels in range"),
            nodes_explored: search.nodes,
            mode,
            status,
        };
        (result(&search.forest, Mode::Forest), result(&search.tree, Mode::Tree))
    }
}

#[derive(Debug)]
struct Best {
    size: usize,
    set: Vec<u64>,
}

impl Best {
    fn offer(&mut self, size: usize, set: &[u64]) {
        if size > self.size {
            self.size = size;
            self.set.copy_from_slice(set);
        }
    }
}

/// Greedy clique cover of a candidate set: vertices listed clique by clique,
/// `ends[i]` closes clique `i`, `prefix[i + 1]` is the weight of cliques `0..=i`.
#[derive(Debug, Default)]
struct Cover {
    verts: Vec<usize>,
    ends: Vec<usize>,
    prefix: Vec<usize>,
}

impl Cover {
    fn clear(&mut self) {
        self.verts.clear();
        self.ends.clear();
        self.prefix.clear();
        self.prefix.push(0);
    }

    fn total(&self) -> usize {
        *self.prefix.last().expect("prefix starts with 0")
    }
}

struct Search<'a> {
    g: &'a Graph,
    stride: usize,
    want_forest: bool,
    want_tree: bool,
    uf: RollbackUnionFind,
    in_s: Vec<u64>,
    s_len: usize,
    forest: Best,
    tree: Best,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    // scratch, reused across nodes
    sets: Vec<Vec<u64>>,
    covers: Vec<Cover>,
    items: Vec<i64>,
    cost: Vec<i64>,
    touched: Vec<u64>,
    order: Vec<(usize, usize)>,
    used: Vec<bool>,
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph, want_forest: bool, want_tree: bool, budget: u64) -> Self {
        let stride = g.stride();
        let empty = || Best {
            size: 0,
            set: vec![0; stride],
        };
        Self {
            g,
            stride,
            want_forest,
            want_tree,
            uf: RollbackUnionFind::new(g.n()),
            in_s: vec![0; stride],
            s_len: 0,
            forest: empty(),
            tree: empty(),
            nodes: 0,
            budget,
            exhausted: false,
            sets: Vec::new(),
            covers: Vec::new(),
            items: Vec::new(),
            cost: vec![0; g.n()],
            touched: vec![0; g.n() * stride],
            order: Vec::new(),
            used: Vec::new(),
        }
    }

    fn take_set(&mut self) -> Vec<u64> {
        let mut s = self.sets.pop().unwrap_or_default();
        s.clear();
        s.resize(self.stride, 0);
        s
    }

    fn take_cover(&mut self) -> Cover {
        let mut c = self.covers.pop().unwrap_or_default();
        c.clear();
        c
    }

    /// Adds vertices in ascending degree order whenever they keep `S` acyclic.
    fn greedy_forest(&mut self) {
        let n = self.g.n();
        let t = self.uf.time();
        let mut chosen = vec![0u64; self.stride];
        let mut size = 0;
        let mut roots: Vec<usize> = Vec::new();
        for v in (0..n).rev() {
            roots.clear();
            roots.extend(self.g.neighbors(v).filter(|&u| bitset::test(&chosen, u)).map(|u| self.uf.find(u)));
            roots.sort_unstable();
            if roots.windows(2).all(|w| w[0] != w[1]) {
                for u in self.g.neighbors(v).filter(|&u| bitset::test(&chosen, u)) {
                    self.uf.union(v, u);
                }
                bitset::set(&mut chosen, v);
                size += 1;
            }
        }
        self.uf.rollback(t);
        self.forest.offer(size, &chosen);
    }

    fn s_is_tree(&self) -> bool {
        self.s_len > 0 && {
            let v = bitset::first(&self.in_s).expect("non-empty");
            self.uf.component_size(v) == self.s_len
        }
    }

    /// Whether `S` lies inside one component of `G[S ∪ C]`. With `restrict`,
    /// candidates outside that component are dropped.
    fn reach(&mut self, cand: &mut [u64], restrict: bool) -> bool {
        let start = bitset::first(&self.in_s).expect("S non-empty");
        let mut allowed = self.take_set();
        let mut reach = self.take_set();
        let mut frontier = self.take_set();
        for i in 0..self.stride {
            allowed[i] = self.in_s[i] | cand[i];
        }
        bitset::set(&mut reach, start);
        bitset::set(&mut frontier, start);
        bitset::clear(&mut allowed, start);
        while let Some(v) = bitset::first(&frontier) {
            bitset::clear(&mut frontier, v);
            let row = self.g.row(v);
            for i in 0..self.stride {
                let hit = allowed[i] & row[i];
                frontier[i] |= hit;
                reach[i] |= hit;
                allowed[i] &= !hit;
            }
        }
        let connected = self.in_s.iter().zip(&reach).all(|(s, r)| s & !r == 0);
        if connected && restrict {
            for i in 0..self.stride {
                cand[i] &= reach[i];
            }
        }
        self.sets.push(allowed);
        self.sets.push(reach);
        self.sets.push(frontier);
        connected
    }

    /// Covers `cand` greedily by cliques, seeding and extending in order of
    /// `d_S` (then index) so the cheap candidates share few cliques. A clique
    /// weighs 1 when all its members touch a common component of `S`.
    fn build_cover(&mut self, cand: &[u64], cover: &mut Cover) {
        let st = self.stride;
        let mut order = core::mem::take(&mut self.order);
        order.clear();
        for u in Ones::new(cand) {
            let t = &mut self.touched[u * st..(u + 1) * st];
            t.iter_mut().for_each(|w| *w = 0);
            let mut d = 0usize;
            let row = self.g.row(u);
            for w in 0..st {
                let mut bits = row[w] & self.in_s[w];
                while bits != 0 {
                    let x = w * bitset::WORD_BITS + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    bitset::set(t, self.uf.find(x));
                    d += 1;
                }
            }
            self.cost[u] = d as i64 - 1;
            order.push((d << 32 | u, u));
        }
        order.sort_unstable();
        let mut used = core::mem::take(&mut self.used);
        used.clear();
        used.resize(order.len(), false);
        let mut common = self.take_set();
        let mut p = self.take_set();
        for i in 0..order.len() {
            if used[i] {
                continue;
            }
            let seed = order[i].1;
            used[i] = true;
            let start = cover.verts.len();
            cover.verts.push(seed);
            p.copy_from_slice(self.g.row(seed));
            common.copy_from_slice(&self.touched[seed * st..(seed + 1) * st]);
            for j in i + 1..order.len() {
                let u = order[j].1;
                if !used[j] && bitset::test(&p, u) {
                    used[j] = true;
                    cover.verts.push(u);
                    let row = self.g.row(u);
                    let t = &self.touched[u * st..(u + 1) * st];
                    for w in 0..st {
                        p[w] &= row[w];
                        common[w] &= t[w];
                    }
                }
            }
            let size = cover.verts.len() - start;
            let weight = if size == 1 || common.iter().any(|&w| w != 0) { 1 } else { 2 };
            cover.ends.push(cover.verts.len());
            let prev = cover.total();
            cover.prefix.push(prev + weight);
        }
        self.sets.push(common);
        self.sets.push(p);
        self.used = used;
        self.order = order;
    }

    /// A forest `F ⊇ S` with `A = F \ S` has at most `|F| - 1` edges, so
    /// `Σ_{u ∈ A} (d_S(u) - 1) + e(A) <= c(S) - 1`. Two picks from one clique
    /// add an edge to `e(A)`. Returns the largest `|A|` this allows.
    fn edge_budget_bound(&mut self, cover: &Cover) -> usize {
        let components = Ones::new(&self.in_s).filter(|&v| self.uf.find(v) == v).count() as i64;
        let budget = (components - 1).max(0);
        let mut items = core::mem::take(&mut self.items);
        items.clear();
        let mut start = 0;
        for (ci, &end) in cover.ends.iter().enumerate() {
            let (mut c1, mut c2) = (i64::MAX, i64::MAX);
            for &u in &cover.verts[start..end] {
                let c = self.cost[u];
                if c < c1 {
                    c2 = c1;
                    c1 = c;
                } else if c < c2 {
                    c2 = c;
                }
            }
            items.push(c1);
            if cover.prefix[ci + 1] - cover.prefix[ci] == 2 && c2 != i64::MAX {
                items.push(c2 + 1);
            }
            start = end;
        }
        items.sort_unstable();
        let mut used = 0;
        let mut count = 0;
        for &c in &items {
            if used + c > budget {
                break;
            }
            used += c;
            count += 1;
        }
        self.items = items;
        count
    }

    fn include(&mut self, v: usize) {
        bitset::set(&mut self.in_s, v);
        self.s_len += 1;
        for u in self.g.neighbors(v) {
            if bitset::test(&self.in_s, u) {
                let joined = self.uf.union(v, u);
                debug_assert!(joined, "candidate {v} closes a cycle");
            }
        }
    }

    fn exclude_from_s(&mut self, v: usize, t: usize) {
        self.uf.rollback(t);
        bitset::clear(&mut self.in_s, v);
        self.s_len -= 1;
    }

    /// Whether the node can still yield a tree; tree-only searches also drop
    /// unreachable candidates here.
    fn tree_possible(&mut self, cand: &mut [u64]) -> bool {
        if !self.want_tree {
            return false;
        }
        if self.s_len == 0 {
            return true;
        }
        if !self.want_forest {
            self.reach(cand, true)
        } else if self.tree.size < self.forest.size {
            self.reach(cand, false)
        } else {
            // the forest incumbent is the binding one either way
            true
        }
    }

    /// Size an extension of the current node must beat.
    fn best(&self, tree_possible: bool) -> usize {
        match (self.want_forest, tree_possible) {
            (true, true) => self.forest.size.min(self.tree.size),
            (true, false) => self.forest.size,
            (false, _) => self.tree.size,
        }
    }

    fn expand(&mut self, cand: &mut [u64]) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let tree_possible = self.tree_possible(cand);
        if !self.want_forest && !tree_possible {
            return;
        }
        if self.want_forest {
            self.forest.offer(self.s_len, &self.in_s);
        }
        if tree_possible && self.s_len > self.tree.size && self.s_is_tree() {
            self.tree.offer(self.s_len, &self.in_s);
        }
        if cand.iter().all(|&w| w == 0) {
            return;
        }

        let mut cover = self.take_cover();
        self.build_cover(cand, &mut cover);
        let best = self.best(tree_possible);
        if self.s_len + cover.total() > best && self.s_len + self.edge_budget_bound(&cover) > best {
            let mut child = self.take_set();
            'cliques: for ci in (0..cover.ends.len()).rev() {
                if self.s_len + cover.prefix[ci + 1] <= self.best(tree_possible) {
                    break;
                }
                let start = if ci == 0 { 0 } else { cover.ends[ci - 1] };
                for idx in (start..cover.ends[ci]).rev() {
                    let v = cover.verts[idx];
                    let t = self.uf.time();
                    self.include(v);
                    let merged = self.uf.members_of_root(self.uf.find(v));
                    child.copy_from_slice(cand);
                    bitset::clear(&mut child, v);
                    for u in Ones::new(cand) {
                        if u != v && bitset::and_count(self.g.row(u), merged) >= 2 {
                            bitset::clear(&mut child, u);
                        }
                    }
                    self.expand(&mut child);
                    self.exclude_from_s(v, t);
                    if self.exhausted {
                        break 'cliques;
                    }
                    bitset::clear(cand, v);
                }
            }
            self.sets.push(child);
        }
        self.covers.push(cover);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixtures() -> [(Graph, usize, usize); 5] {
        [
            (Graph::empty(5).unwrap(), 5, 1),
            (Graph::complete(5).unwrap(), 2, 2),
            (Graph::cycle(5).unwrap(), 4, 4),
            (Graph::petersen(), 7, 7),
            (
                Graph::complete(3).unwrap().disjoint_union(&Graph::complete(3).unwrap()).unwrap(),
                4,
                2,
            ),
        ]
    }

    #[test]
    fn fixtures_single_mode() {
        for (g, forest, tree) in fixtures() {
            let f = solve_max(Mode::Forest, &g, 1_000_000);
            let t = solve_max(Mode::Tree, &g, 1_000_000);
            assert_eq!((f.size, t.size), (forest, tree), "{g:?}");
            assert_eq!(f.status, Status::Complete);
            assert!(f.witness_is_valid(&g).unwrap());
            assert!(t.witness_is_valid(&g).unwrap());
        }
    }

    #[test]
    fn fixtures_both() {
        for (g, forest, tree) in fixtures() {
            let r = Solver::new(&g).solve_both();
            assert_eq!((r.forest.size, r.tree.size), (forest, tree), "{g:?}");
            assert!(r.forest.witness_is_valid(&g).unwrap());
            assert!(r.tree.witness_is_valid(&g).unwrap());
        }
    }

    #[test]
    fn tiny_budget_reports_incomplete() {
        let g = Graph::petersen();
        let r = solve_max(Mode::Tree, &g, 1);
        assert_eq!(r.status, Status::Incomplete);
        assert!(r.witness_is_valid(&g).unwrap());
    }

    #[test]
    fn incumbent_is_kept_when_optimal() {
        let g = Graph::petersen();
        let first = solve_max(Mode::Forest, &g, 1_000_000);
        let again = Solver::new(&g).incumbent(first.witness.clone()).solve(Mode::Forest);
        assert_eq!(again.size, first.size);
        assert!(again.witness_is_valid(&g).unwrap());
    }
}
