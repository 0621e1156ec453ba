//! First moments of induced trees and forests of a fixed size in `G(n,p)`.
//!
//! For a target size `K`, with `Y_{n,ℓ}` the number of induced forests on `K`
//! vertices with `ℓ` components and `X_n = Y_{n,1}` the number of induced trees:
//!
//! ```text
//! E[Y_{n,ℓ}] = C(n,K) φ_ℓ(K) p^{K-ℓ} (1-p)^{C(K,2)-K+ℓ}
//! E[Y_n]     = Σ_ℓ E[Y_{n,ℓ}] = E[X_n] Σ_ℓ g_ℓ(K)
//! ```
//!
//! The direct sum and the factored form use different tables
//! ([`LogForestTable`] and [`NormalizedTable`]) so that their agreement is a
//! real cross-check.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{param, Result};
use crate::forest::{g_sum_limit, ForestCountTable, LogForestTable, NormalizedTable};
use crate::logreal::LogReal;
use crate::numeric::{binomial, cayley, ln_binomial};
use crate::probability::Probability;

/// `E[Y_n]` below this value certifies the first-moment upper bound at `K`.
pub const MARKOV_CERTIFY_THRESHOLD: f64 = 1e-3;

/// `floor(2 log_{1/(1-p)}(e n p) + offset + ε)`.
pub fn critical_size(n: u64, p: &Probability, eps: f64, offset: f64) -> i64 {
    let base = -libm::log(p.complement().to_f64());
    let enp = 1.0 + libm::log(n as f64) + libm::log(p.to_f64());
    libm::floor(2.0 * enp / base + offset + eps) as i64
}

/// The two predicted values of the maximum induced forest size:
/// `k_low = floor(2 log_{1/(1-p)}(e n p) + 2 + ε)` and `k_high = k_low + 1`.
pub fn concentration_points(n: u64, p: &Probability, eps: f64) -> (i64, i64) {
    let low = critical_size(n, p, eps, 2.0);
    (low, low + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentQuery {
    pub n: u64,
    pub p: Probability,
    pub eps: f64,
    /// Size at which forests are counted.
    pub k: usize,
}

impl MomentQuery {
    /// Query at the first-moment size `K = floor(2 log_{1/(1-p)}(e n p) + 4 + ε)`.
    pub fn upper(n: u64, p: Probability, eps: f64) -> Result<Self> {
        let k = critical_size(n, &p, eps, 4.0);
        if k < 2 {
            return Err(param(alloc::format!("critical size K = {k} is below 2")));
        }
        Self::with_k(n, p, eps, k as usize)
    }

    /// Query at an explicit size `2 <= K <= n`.
    pub fn with_k(n: u64, p: Probability, eps: f64, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(param(alloc::format!("K = {k} must be at least 2")));
        }
        if k as u64 > n {
            return Err(param(alloc::format!("K = {k} exceeds n = {n}")));
        }
        Ok(Self { n, p, eps, k })
    }

    fn pairs(&self) -> u64 {
        let k = self.k as u64;
        k * (k - 1) / 2
    }
}

#[derive(Debug, Clone)]
pub struct MomentReport {
    pub query: MomentQuery,
    /// `E[X_n]`, induced trees on `K` vertices.
    pub e_x: LogReal,
    /// `E[Y_{n,ℓ}]` for `ℓ = 1..=K` (index `ℓ - 1`).
    pub e_y_by_ell: Vec<LogReal>,
    /// `E[Y_n]` as the log-sum of the strata.
    pub e_y: LogReal,
    /// `E[Y_n] / E[X_n]` from the direct sum.
    pub ratio: f64,
    /// `Σ_ℓ g_ℓ(K)` from the normalized table.
    pub ratio_factored: f64,
    /// `exp((1-p)/(2p))`.
    pub limit_ratio: f64,
    /// `E[Y_n] < MARKOV_CERTIFY_THRESHOLD`.
    pub upper_bound_certified: bool,
}

impl MomentReport {
    /// Relative gap between the direct and factored ratios.
    pub fn route_disagreement(&self) -> f64 {
        (self.ratio - self.ratio_factored).abs() / self.ratio.abs().max(self.ratio_factored.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBound {
    pub ratio: f64,
    pub limit: f64,
    pub difference: f64,
}

/// Owns the two log-space tables used by the moment computations.
#[derive(Debug, Clone, Default)]
pub struct MomentEngine {
    pub log_phi: LogForestTable,
    pub normalized: NormalizedTable,
}

impl MomentEngine {
    pub fn expected_forest_count(&mut self, q: &MomentQuery) -> Result<MomentReport> {
        let k = q.k;
        if k < 2 || k as u64 > q.n {
            return Err(param(alloc::format!("need 2 <= K <= n, got K = {k}, n = {}", q.n)));
        }
        self.log_phi.ensure(k, k);
        self.normalized.ensure(k, k);

        let ln_choose = ln_binomial(q.n, k as u64);
        let ln_p = libm::log(q.p.to_f64());
        let ln_q = libm::log(q.p.complement().to_f64());
        let pairs = q.pairs();
        // exponents are exact integers before they meet the logs
        let stratum = |ln_phi: f64, ell: usize| -> LogReal {
            let edges = (k - ell) as u64;
            let non_edges = pairs - edges;
            LogReal::from_ln(ln_choose + ln_phi + edges as f64 * ln_p + non_edges as f64 * ln_q)
        };

        let e_x = stratum(crate::numeric::ln_cayley(k as u64), 1);
        let e_y_by_ell: Vec<LogReal> = (1..=k)
            .map(|ell| stratum(self.log_phi.get(k, ell).expect("populated").ln(), ell))
            .collect();
        let e_y: LogReal = e_y_by_ell.iter().sum();

        let g_sum: LogReal = (1..=k)
            .map(|ell| self.normalized.g(k, ell, &q.p).expect("populated"))
            .sum();

        Ok(MomentReport {
            query: q.clone(),
            e_x,
            ratio: (e_y / e_x).to_f64(),
            ratio_factored: g_sum.to_f64(),
            limit_ratio: g_sum_limit(&q.p),
            upper_bound_certified: e_y.to_f64() < MARKOV_CERTIFY_THRESHOLD,
            e_y_by_ell,
            e_y,
        })
    }

    /// `Σ_ℓ g_ℓ(K)` against its limit `exp((1-p)/(2p))`.
    pub fn ratio_and_bound(&mut self, q: &MomentQuery) -> Result<RatioBound> {
        let report = self.expected_forest_count(q)?;
        Ok(RatioBound {
            ratio: report.ratio,
            limit: report.limit_ratio,
            difference: report.ratio - report.limit_ratio,
        })
    }
}

/// Exact `(E[X_n], E[Y_n])` as rationals; intended as a cross-check for small
/// `n`.
pub fn expected_counts_exact(
    table: &mut ForestCountTable,
    q: &MomentQuery,
) -> Result<(BigRational, BigRational)> {
    let k = q.k;
    let choose = BigRational::from_integer(BigInt::from(binomial(q.n, k as u64)));
    let p = q.p.to_rational();
    let one_minus = BigRational::one() - &p;
    let pairs = q.pairs() as usize;
    let stratum = |phi: &BigUint, ell: usize| -> BigRational {
        let edges = k - ell;
        &choose
            * BigRational::from_integer(BigInt::from(phi.clone()))
            * num_traits::pow(p.clone(), edges)
            * num_traits::pow(one_minus.clone(), pairs - edges)
    };
    let e_x = stratum(&cayley(k as u64), 1);
    let mut e_y = BigRational::zero();
    for (i, phi) in table.row(k)?.iter().enumerate() {
        e_y += stratum(phi, i + 1);
    }
    Ok((e_x, e_y))
}
