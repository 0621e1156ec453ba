//! Exact maximum induced forest / tree.
//!
//! [`solve_max`] is a branch-and-bound search (see [`search`]);
//! [`brute_force_max`] enumerates subsets and serves as its oracle on small
//! graphs.

mod brute;
pub mod search;
mod union_find;

use crate::bitset::VertexSet;
use crate::error::Result;
use crate::graph::Graph;

pub use brute::{brute_force_max, BRUTE_FORCE_MAX_N};
pub use search::{solve_max, BothResult, Solver};
pub use union_find::RollbackUnionFind;

/// Default node budget of the search.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Forest,
    Tree,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Forest => "forest",
            Mode::Tree => "tree",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forest" => Ok(Mode::Forest),
            "tree" => Ok(Mode::Tree),
            other => Err(crate::error::param(alloc::format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// The search finished; `size` is the optimum.
    Complete,
    /// The node budget ran out; `size` is only a lower bound.
    Incomplete,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Complete => "complete",
            Status::Incomplete => "incomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub size: usize,
    pub witness: VertexSet,
    pub nodes_explored: u64,
    pub mode: Mode,
    pub status: Status,
}

impl SolveResult {
    /// Re-checks the witness with the graph predicates: it has `size`
    /// vertices and induces a forest (tree mode: a tree, or nothing when
    /// `size == 0`).
    pub fn witness_is_valid(&self, g: &Graph) -> Result<bool> {
        if self.witness.len() != self.size {
            return Ok(false);
        }
        match self.mode {
            Mode::Forest => g.is_induced_forest(&self.witness),
            Mode::Tree if self.size == 0 => Ok(g.n() == 0),
            Mode::Tree => g.is_induced_tree(&self.witness),
        }
    }
}

