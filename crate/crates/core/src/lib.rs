//! Exact and log-space machinery for maximum induced forests in dense binomial
//! random graphs.
//!
//! The crate is `no_std` (it needs `alloc`). It contains:
//!
//! * [`graph`]: bitset graphs, induced-subgraph predicates and the seeded
//!   `G(n,p)` sampler,
//! * [`forest`]: labeled forest counts `φ_ℓ(k)` (exact and log space) and the
//!   normalized ratios `g_ℓ(k)`,
//! * [`moment`]: expected numbers of induced trees and forests of a fixed size,
//! * [`proof`]: grid checks of the inequalities behind the bound on
//!   `Σ_ℓ g_ℓ(k)`,
//! * [`solver`]: an exact branch-and-bound engine for the maximum induced
//!   forest / tree together with a brute-force oracle.
//!
//! IO, configuration files and the command line live in the companion
//! `mif-toolkit` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bitset;
pub mod error;
pub mod forest;
pub mod graph;
pub mod logreal;
pub mod moment;
pub mod numeric;
pub mod probability;
pub mod proof;
pub mod sample;
pub mod solver;

pub use bitset::VertexSet;
pub use error::{Error, Result};
pub use graph::Graph;
pub use logreal::LogReal;
pub use probability::Probability;
