use alloc::vec;
use alloc::vec::Vec;

use crate::bitset;

/// Union-find with undo, union by size and no path compression, so every
/// union can be reverted exactly. Each root also owns the bitset of its
/// component.
#[derive(Debug, Clone)]
pub struct RollbackUnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    stride: usize,
    members: Vec<u64>,
    history: Vec<(u32, u32)>,
}

impl RollbackUnionFind {
    pub fn new(n: usize) -> Self {
        let stride = bitset::words_for(n);
        let mut members = vec![0; n * stride];
        for v in 0..n {
            bitset::set(&mut members[v * stride..(v + 1) * stride], v);
        }
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            stride,
            members,
            history: Vec::new(),
        }
    }

    pub fn find(&self, mut v: usize) -> usize {
        while self.parent[v] as usize != v {
            v = self.parent[v] as usize;
        }
        v
    }

    /// Merges the sets of `a` and `b`; `false` if they were already joined
    /// (the edge would close a cycle).
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        let s = self.stride;
        for i in 0..s {
            self.members[ra * s + i] |= self.members[rb * s + i];
        }
        self.history.push((rb as u32, ra as u32));
        true
    }

    /// Checkpoint for [`RollbackUnionFind::rollback`].
    pub fn time(&self) -> usize {
        self.history.len()
    }

    pub fn rollback(&mut self, t: usize) {
        let s = self.stride;
        while self.history.len() > t {
            let (child, root) = self.history.pop().expect("non-empty");
            let (child, root) = (child as usize, root as usize);
            self.parent[child] = child as u32;
            self.size[root] -= self.size[child];
            for i in 0..s {
                self.members[root * s + i] &= !self.members[child * s + i];
            }
        }
    }

    pub fn component_size(&self, v: usize) -> usize {
        self.size[self.find(v)] as usize
    }

    /// Vertices in the set of `v` (which must be a root).
    #[inline]
    pub fn members_of_root(&self, root: usize) -> &[u64] {
        &self.members[root * self.stride..(root + 1) * self.stride]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_detects_cycles_and_rolls_back() {
        let mut uf = RollbackUnionFind::new(70);
        let t0 = uf.time();
        assert!(uf.union(0, 1));
        assert!(uf.union(1, 65));
        let t1 = uf.time();
        assert!(uf.union(2, 3));
        assert!(!uf.union(0, 65));
        assert_eq!(uf.component_size(65), 3);
        let r = uf.find(0);
        assert_eq!(crate::bitset::Ones::new(uf.members_of_root(r)).collect::<Vec<_>>(), [0, 1, 65]);
        uf.rollback(t1);
        assert_ne!(uf.find(2), uf.find(3));
        assert_eq!(uf.find(0), uf.find(65));
        uf.rollback(t0);
        for v in [0, 1, 65] {
            assert_eq!(uf.find(v), v);
            assert_eq!(uf.component_size(v), 1);
            assert_eq!(crate::bitset::Ones::new(uf.members_of_root(v)).collect::<Vec<_>>(), [v]);
        }
    }
}
