//! Fixed-universe bitsets over `0..n`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// A set of vertices of a graph on `n` vertices.
///
/// Every set bit is `< n`; the constructors and [`VertexSet::insert`] enforce it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for v in 0..n {
            s.words[v / WORD_BITS] |= 1 << (v % WORD_BITS);
        }
        s
    }

    /// Builds a set from vertex indices, rejecting any index `>= n`.
    pub fn from_vertices<I: IntoIterator<Item = usize>>(n: usize, vertices: I) -> Result<Self> {
        let mut s = Self::new(n);
        for v in vertices {
            s.insert(v)?;
        }
        Ok(s)
    }

    /// Low `n` bits of `mask`; only meaningful for `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= WORD_BITS);
        let mut s = Self::new(n);
        if n > 0 {
            let keep = if n == WORD_BITS { u64::MAX } else { (1u64 << n) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    /// Size of the universe.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn insert(&mut self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        self.words[v / WORD_BITS] |= 1 << (v % WORD_BITS);
        Ok(())
    }

    pub fn remove(&mut self, v: usize) {
        if v < self.n {
            self.words[v / WORD_BITS] &= !(1 << (v % WORD_BITS));
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> Ones<'_> {
        Ones::new(&self.words)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter().chain(core::iter::repeat(&0)))
            .all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Iterator over set bits of a word slice, ascending.
pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl<'a> Ones<'a> {
    pub(crate) fn new(words: &'a [u64]) -> Self {
        Self {
            words,
            idx: 0,
            cur: words.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let bit = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD_BITS + bit);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

// Slice helpers used by the graph predicates and the solver's flat buffers.

#[inline]
pub(crate) fn test(words: &[u64], v: usize) -> bool {
    words[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
}

#[inline]
pub(crate) fn set(words: &mut [u64], v: usize) {
    words[v / WORD_BITS] |= 1 << (v % WORD_BITS);
}

#[inline]
pub(crate) fn clear(words: &mut [u64], v: usize) {
    words[v / WORD_BITS] &= !(1 << (v % WORD_BITS));
}

#[inline]
pub(crate) fn count(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
pub(crate) fn and_count(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

#[inline]
pub(crate) fn first(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_rejects_out_of_range() {
        let mut s = VertexSet::new(70);
        assert!(s.insert(69).is_ok());
        assert_eq!(
            s.insert(70),
            Err(Error::VertexOutOfRange { vertex: 70, n: 70 })
        );
    }

    #[test]
    fn iteration_crosses_word_boundaries() {
        let s = VertexSet::from_vertices(130, [0, 63, 64, 127, 129]).unwrap();
        assert_eq!(s.to_vec(), [0, 63, 64, 127, 129]);
        assert_eq!(s.len(), 5);
        assert_eq!(VertexSet::full(130).len(), 130);
    }

    #[test]
    fn mask_is_truncated_to_universe() {
        let s = VertexSet::from_mask(3, 0b1111_0101);
        assert_eq!(s.to_vec(), [0, 2]);
    }
}
