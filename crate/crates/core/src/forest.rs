//! Labeled forest counts `φ_ℓ(k)` and the normalized ratios
//! `g_ℓ(k) = φ_ℓ(k) · ((1-p)/p)^{ℓ-1} / k^{k-2}`.
//!
//! Three independent routes are provided:
//!
//! * [`ForestCountTable`]: exact big integers from the recursion on the size of
//!   the component containing the last vertex,
//! * [`LogForestTable`]: the same recursion carried out on `ln φ` with
//!   log-sum-exp,
//! * [`NormalizedTable`]: `h_ℓ(k) = φ_ℓ(k) / k^{k-2}` in log space, recursed
//!   through the kernel `f(m,k)`, so `g_ℓ(k) = ((1-p)/p)^{ℓ-1} h_ℓ(k)`.
//!
//! Throughout, `x^{x-2}` reads as 1 for `x ∈ {1, 2}`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{param, Result};
use crate::logreal::{log_sum_exp, LogReal};
use crate::numeric::{big_rational, binomial, cayley, ln_rational, LnTables};
use crate::probability::Probability;

/// Default cap on `k` for exact counts.
pub const DEFAULT_EXACT_CAP: usize = 512;

/// Largest `k` for which [`GEvaluator::g`] uses exact rationals.
pub const EXACT_G_MAX: usize = 64;

/// Memoized exact `φ_ℓ(k)`, grown on demand up to a cap.
///
/// Growth needs `&mut self`; once populated the table can be shared by
/// reference and read through [`ForestCountTable::get`].
#[derive(Debug, Clone)]
pub struct ForestCountTable {
    // rows[k][ℓ] for 0 <= ℓ <= k; rows[0] is a placeholder.
    rows: Vec<Vec<BigUint>>,
    cap: usize,
}

impl Default for ForestCountTable {
    fn default() -> Self {
        Self::with_cap(DEFAULT_EXACT_CAP)
    }
}

impl ForestCountTable {
    pub fn with_cap(cap: usize) -> Self {
        Self {
            rows: vec![vec![BigUint::zero()]],
            cap,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Largest `k` currently populated.
    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Populates every row up to `k`.
    pub fn ensure(&mut self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(param("φ_ℓ(k) needs k >= 1"));
        }
        if k > self.cap {
            return Err(param(alloc::format!(
                "k = {k} exceeds the exact-count cap {}",
                self.cap
            )));
        }
        while self.rows.len() <= k {
            let k = self.rows.len();
            let row = self.compute_row(k);
            self.rows.push(row);
        }
        Ok(())
    }

    fn compute_row(&self, k: usize) -> Vec<BigUint> {
        let mut row = vec![BigUint::zero(); k + 1];
        row[1] = cayley(k as u64);
        // weight[m] = C(k-1, m) (k-m)^{k-m-2}: choose the m vertices outside
        // the component of vertex k, then a tree on the remaining k-m.
        let weight: Vec<BigUint> = (0..k)
            .map(|m| binomial(k as u64 - 1, m as u64) * cayley((k - m) as u64))
            .collect();
        for (ell, slot) in row.iter_mut().enumerate().skip(2) {
            let mut acc = BigUint::zero();
            for m in ell - 1..k {
                let prev = &self.rows[m][ell - 1];
                if !prev.is_zero() {
                    acc += &weight[m] * prev;
                }
            }
            *slot = acc;
        }
        row
    }

    /// `φ_ℓ(k)`, growing the table if needed. Zero for `ℓ <= 0` or `ℓ > k`.
    pub fn phi(&mut self, k: usize, ell: i64) -> Result<BigUint> {
        self.ensure(k)?;
        Ok(self.get(k, ell).cloned().unwrap_or_default())
    }

    /// Read-only lookup; `None` if row `k` is not populated yet. Out-of-range
    /// `ℓ` on a populated row yields zero.
    pub fn get(&self, k: usize, ell: i64) -> Option<&BigUint> {
        static ZERO: BigUint = BigUint::ZERO;
        let row = self.rows.get(k).filter(|_| k >= 1)?;
        if ell <= 0 || ell as usize > k {
            return Some(&ZERO);
        }
        Some(&row[ell as usize])
    }

    /// Row `k` as `[φ_1(k), ..., φ_k(k)]`.
    pub fn row(&mut self, k: usize) -> Result<&[BigUint]> {
        self.ensure(k)?;
        Ok(&self.rows[k][1..])
    }

    /// Number of labeled forests on `k` vertices.
    pub fn total(&mut self, k: usize) -> Result<BigUint> {
        Ok(self.row(k)?.iter().sum())
    }
}

/// Exact `f(m,k) = C(k-1,m) m^{m-2} (k-m)^{k-m-2} / k^{k-2}` for `1 <= m < k`.
pub fn kernel_exact(m: usize, k: usize) -> Result<BigRational> {
    check_kernel_range(m, k)?;
    let (m, k) = (m as u64, k as u64);
    Ok(big_rational(
        binomial(k - 1, m) * cayley(m) * cayley(k - m),
        cayley(k),
    ))
}

/// `ln f(m,k)` from precomputed log tables (which must cover `k`).
#[inline]
pub fn ln_kernel(t: &LnTables, m: usize, k: usize) -> f64 {
    t.ln_binomial(k - 1, m) + t.ln_cayley(m) + t.ln_cayley(k - m) - t.ln_cayley(k)
}

pub(crate) fn check_kernel_range(m: usize, k: usize) -> Result<()> {
    if k < 2 || m == 0 || m >= k {
        return Err(param(alloc::format!(
            "f(m,k) needs 1 <= m <= k-1 and k >= 2, got m = {m}, k = {k}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    /// `ln φ_ℓ(k)` through `C(k-1,m) (k-m)^{k-m-2}`.
    Counts,
    /// `ln(φ_ℓ(k)/k^{k-2})` through the kernel `f(m,k)`.
    Normalized,
}

/// Triangular log-space table `rows[ℓ-1][k]`, grown in both directions.
#[derive(Debug, Clone)]
struct LnTriangle {
    route: Route,
    ln: LnTables,
    k_max: usize,
    rows: Vec<Vec<f64>>,
}

impl LnTriangle {
    fn new(route: Route) -> Self {
        Self {
            route,
            ln: LnTables::new(1),
            k_max: 0,
            rows: Vec::new(),
        }
    }

    #[inline]
    fn weight(&self, m: usize, k: usize) -> f64 {
        match self.route {
            Route::Counts => self.ln.ln_binomial(k - 1, m) + self.ln.ln_cayley(k - m),
            Route::Normalized => ln_kernel(&self.ln, m, k),
        }
    }

    fn base(&self, k: usize) -> f64 {
        match self.route {
            Route::Counts => self.ln.ln_cayley(k),
            Route::Normalized => 0.0,
        }
    }

    fn cell(&self, ell: usize, k: usize) -> f64 {
        if k == 0 || ell > k {
            return f64::NEG_INFINITY;
        }
        if ell == 1 {
            return self.base(k);
        }
        let prev = &self.rows[ell - 2];
        log_sum_exp((ell - 1..k).map(|m| self.weight(m, k) + prev[m])).ln()
    }

    fn ensure(&mut self, k_max: usize, ell_max: usize) {
        let ell_max = ell_max.min(k_max.max(self.k_max));
        if k_max > self.k_max {
            self.ln.ensure(k_max);
            let old = self.k_max;
            self.k_max = k_max;
            for ell in 1..=self.rows.len() {
                self.rows[ell - 1].resize(k_max + 1, f64::NEG_INFINITY);
                for k in old + 1..=k_max {
                    self.rows[ell - 1][k] = self.cell(ell, k);
                }
            }
        }
        while self.rows.len() < ell_max {
            let ell = self.rows.len() + 1;
            let row = (0..=self.k_max).map(|k| self.cell(ell, k)).collect();
            self.rows.push(row);
        }
    }

    fn get(&self, k: usize, ell: usize) -> Option<f64> {
        if ell == 0 || ell > k {
            return Some(f64::NEG_INFINITY);
        }
        self.rows.get(ell - 1).and_then(|r| r.get(k)).copied()
    }
}

/// `ln φ_ℓ(k)` by log-sum-exp over the counting recursion.
#[derive(Debug, Clone)]
pub struct LogForestTable(LnTriangle);

impl Default for LogForestTable {
    fn default() -> Self {
        Self(LnTriangle::new(Route::Counts))
    }
}

impl LogForestTable {
    /// Populates `1 <= k <= k_max`, `1 <= ℓ <= min(ℓ_max, k_max)`.
    pub fn ensure(&mut self, k_max: usize, ell_max: usize) {
        self.0.ensure(k_max, ell_max);
    }

    /// `φ_ℓ(k)` as a [`LogReal`], growing the table if needed.
    pub fn phi(&mut self, k: usize, ell: usize) -> LogReal {
        self.0.ensure(k, ell);
        LogReal::from_ln(self.0.get(k, ell).expect("populated"))
    }

    /// Read-only lookup on a populated table.
    pub fn get(&self, k: usize, ell: usize) -> Option<LogReal> {
        self.0.get(k, ell).map(LogReal::from_ln)
    }
}

/// `h_ℓ(k) = φ_ℓ(k) / k^{k-2}` in log space via
/// `h_ℓ(k) = Σ_{m=ℓ-1}^{k-1} f(m,k) h_{ℓ-1}(m)`, `h_1 = 1`.
#[derive(Debug, Clone)]
pub struct NormalizedTable(LnTriangle);

impl Default for NormalizedTable {
    fn default() -> Self {
        Self(LnTriangle::new(Route::Normalized))
    }
}

impl NormalizedTable {
    pub fn ensure(&mut self, k_max: usize, ell_max: usize) {
        self.0.ensure(k_max, ell_max);
    }

    pub fn h(&mut self, k: usize, ell: usize) -> LogReal {
        self.0.ensure(k, ell);
        LogReal::from_ln(self.0.get(k, ell).expect("populated"))
    }

    pub fn get(&self, k: usize, ell: usize) -> Option<LogReal> {
        self.0.get(k, ell).map(LogReal::from_ln)
    }

    /// `g_ℓ(k)` on a populated table.
    pub fn g(&self, k: usize, ell: usize, p: &Probability) -> Option<LogReal> {
        let h = self.get(k, ell)?;
        Some(h * odds_against_ln(p).powi(ell as i64 - 1))
    }

    /// Log tables covering the populated range.
    pub fn ln_tables(&self) -> &LnTables {
        &self.0.ln
    }
}

/// `(1-p)/p` as a [`LogReal`].
pub fn odds_against_ln(p: &Probability) -> LogReal {
    LogReal::from_ln(ln_rational(&p.odds_against()))
}

/// Exact `g_ℓ(k)`; zero for `ℓ <= 0` or `ℓ > k`.
pub fn g_exact(table: &mut ForestCountTable, k: usize, ell: i64, p: &Probability) -> Result<BigRational> {
    let phi = table.phi(k, ell)?;
    if phi.is_zero() {
        return Ok(BigRational::zero());
    }
    let odds = p.odds_against();
    let pow = num_traits::pow(odds, (ell - 1) as usize);
    Ok(big_rational(phi, cayley(k as u64)) * pow)
}

/// Evaluates `g_ℓ(k)`: exact rationals for `k <= EXACT_G_MAX`, the normalized
/// log-space table above.
#[derive(Debug, Clone, Default)]
pub struct GEvaluator {
    pub exact: ForestCountTable,
    pub normalized: NormalizedTable,
}

impl GEvaluator {
    pub fn g(&mut self, k: usize, ell: usize, p: &Probability) -> Result<LogReal> {
        if k == 0 {
            return Err(param("g_ℓ(k) needs k >= 1"));
        }
        if ell == 0 || ell > k {
            return Ok(LogReal::ZERO);
        }
        if k <= EXACT_G_MAX {
            let q = g_exact(&mut self.exact, k, ell as i64, p)?;
            return Ok(LogReal::from_ln(ln_rational(&q)));
        }
        Ok(self.g_log(k, ell, p))
    }

    /// Always the log-space route.
    pub fn g_log(&mut self, k: usize, ell: usize, p: &Probability) -> LogReal {
        if ell == 0 || ell > k {
            return LogReal::ZERO;
        }
        self.normalized.ensure(k, ell);
        self.normalized.g(k, ell, p).expect("populated")
    }

    /// `Σ_{ℓ=1}^{L} g_ℓ(k)` for `L = 1..=k`.
    pub fn partial_sums(&mut self, k: usize, p: &Probability) -> Result<Vec<f64>> {
        let mut acc = LogReal::ZERO;
        let mut out = Vec::with_capacity(k);
        if k > EXACT_G_MAX {
            self.normalized.ensure(k, k);
        }
        for ell in 1..=k {
            acc = acc + self.g(k, ell, p)?;
            out.push(acc.to_f64());
        }
        Ok(out)
    }
}

/// Limit of `g_ℓ(k)` as `k → ∞`: `[(1-p)/(2p)]^{ℓ-1} / (ℓ-1)!`.
pub fn g_limit(ell: usize, p: &Probability) -> LogReal {
    if ell == 0 {
        return LogReal::ZERO;
    }
    let half_odds = LogReal::from_ln(ln_rational(&p.odds_against()) - core::f64::consts::LN_2);
    half_odds.powi(ell as i64 - 1) / LogReal::from_ln(crate::numeric::ln_factorial(ell as u64 - 1))
}

/// `Σ_{ℓ≥1} g_limit(ℓ, p) = exp((1-p)/(2p))`.
pub fn g_sum_limit(p: &Probability) -> f64 {
    let x = p.complement().to_f64() / (2.0 * p.to_f64());
    libm::exp(x)
}

/// Forests on `k` labeled vertices with exactly one edge: `C(k,2)`. Equals
/// `φ_{k-1}(k)`.
pub fn one_edge_forests(k: usize) -> BigUint {
    if k < 2 {
        BigUint::zero()
    } else {
        binomial(k as u64, 2)
    }
}
