//! Exhaustive subset enumeration, used as the oracle for the search engine.

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::graph::Graph;

use super::{Mode, SolveResult, Status};

/// Largest graph the oracle accepts.
pub const BRUTE_FORCE_MAX_N: usize = 22;

/// Exact optimum by checking every vertex subset with the graph predicates.
///
/// Among optimal sets the one with the smallest bitmask is returned.
pub fn brute_force_max(mode: Mode, g: &Graph) -> Result<SolveResult> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::OracleLimit { n, max: BRUTE_FORCE_MAX_N });
    }
    let mut best = 0u32;
    let mut best_mask = 0u64;
    let mut checked = 0u64;
    for mask in 0u64..1 << n {
        let size = mask.count_ones();
        if size <= best {
            continue;
        }
        checked += 1;
        let s = VertexSet::from_mask(n, mask);
        let ok = match mode {
            Mode::Forest => g.is_induced_forest(&s)?,
            Mode::Tree => g.is_induced_tree(&s)?,
        };
        if ok {
            best = size;
            best_mask = mask;
        }
    }
    Ok(SolveResult {
        size: best as usize,
        witness: VertexSet::from_mask(n, best_mask),
        nodes_explored: checked,
        mode,
        status: Status::Complete,
    })
}
