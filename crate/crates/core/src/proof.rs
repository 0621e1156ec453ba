//! Grid checks of the inequalities behind the bound on `Σ_ℓ g_ℓ(K)`.
//!
//! Each check returns a [`BoundCheckReport`]. `violations` lists failures of
//! the load-bearing inequalities; `steps` records every displayed link of the
//! argument separately, including links that are false as written but whose
//! conclusion survives with a corrected constant.
//!
//! Algebraic links are decided exactly by squaring into `i128`; the rest run
//! in `f64` / log space with the tolerances below.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigUint;

use crate::error::{param, Result};
use crate::forest::{g_limit, kernel_exact, ln_kernel, GEvaluator, EXACT_G_MAX};
use crate::logreal::LogReal;
use crate::numeric::{adaptive_simpson, ln_biguint, ln_rational, LnTables};
use crate::probability::Probability;

pub const DEFAULT_K_MAX: usize = 200;
pub const STIRLING_N_MAX: u64 = 300;
/// Second differences of `v` may dip this far below zero, relative to `v(x)`.
pub const CONVEXITY_TOL: f64 = 1e-9;
/// Closed-form integral against adaptive quadrature, relative.
pub const QUADRATURE_TOL: f64 = 1e-8;
/// Allowed relative drift of an empirical constant when the grid doubles.
pub const STABILITY_TOL: f64 = 0.01;
/// Slack for floating sums compared against closed forms, relative.
const FLOAT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridPoint {
    pub k: u64,
    #[cfg_attr(feature = "serde", serde(rename = "ℓ"))]
    pub ell: Option<u64>,
    pub m: Option<u64>,
}

impl GridPoint {
    pub fn k(k: u64) -> Self {
        Self { k, ell: None, m: None }
    }

    pub fn km(k: u64, m: u64) -> Self {
        Self { k, ell: None, m: Some(m) }
    }

    pub fn kl(k: u64, ell: u64) -> Self {
        Self { k, ell: Some(ell), m: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Strict,
    Equality,
    Fails,
}

/// `lhs < rhs`, decided exactly.
fn less(lhs: i128, rhs: i128) -> Outcome {
    match lhs.cmp(&rhs) {
        core::cmp::Ordering::Less => Outcome::Strict,
        core::cmp::Ordering::Equal => Outcome::Equality,
        core::cmp::Ordering::Greater => Outcome::Fails,
    }
}

/// Tally of one displayed inequality over the grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepCheck {
    pub name: String,
    pub statement: String,
    /// Whether the conclusion of the argument depends on this link as stated.
    pub load_bearing: bool,
    pub checked: u64,
    pub strict: u64,
    pub equalities: u64,
    pub failures: u64,
    pub first_failure: Option<GridPoint>,
}

impl StepCheck {
    fn new(name: &str, statement: &str, load_bearing: bool) -> Self {
        Self {
            name: name.to_string(),
            statement: statement.to_string(),
            load_bearing,
            checked: 0,
            strict: 0,
            equalities: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, outcome: Outcome, at: GridPoint) {
        self.checked += 1;
        match outcome {
            Outcome::Strict => self.strict += 1,
            Outcome::Equality => self.equalities += 1,
            Outcome::Fails => {
                self.failures += 1;
                self.first_failure.get_or_insert(at);
            }
        }
    }

    fn record_f64(&mut self, lhs: f64, rhs: f64, at: GridPoint) {
        let outcome = if lhs < rhs {
            Outcome::Strict
        } else if lhs <= rhs * (1.0 + FLOAT_SLACK) {
            Outcome::Equality
        } else {
            Outcome::Fails
        };
        self.record(outcome, at);
    }

    /// No point of the grid contradicts the link (equalities allowed).
    pub fn holds(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub check: String,
    pub at: GridPoint,
    pub lhs: f64,
    pub rhs: f64,
}

/// An empirical constant on a grid and on the grid of half the size.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Stability {
    pub k_max_small: u64,
    pub value_small: f64,
    pub k_max_large: u64,
    pub value_large: f64,
    pub drift: f64,
}

impl Stability {
    pub fn new(k_max_small: u64, value_small: f64, k_max_large: u64, value_large: f64) -> Self {
        Self {
            k_max_small,
            value_small,
            k_max_large,
            value_large,
            drift: (value_large - value_small).abs() / value_large.abs(),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.drift < STABILITY_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
    pub at: Option<GridPoint>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundCheckReport {
    pub check: String,
    pub k_range: (u64, u64),
    #[cfg_attr(feature = "serde", serde(rename = "ℓ_range"))]
    pub ell_range: Option<(u64, u64)>,
    /// Grid point with the smallest relative slack among load-bearing checks.
    pub worst_case: Option<GridPoint>,
    pub worst_margin: f64,
    pub c_empirical: Option<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "C_empirical"))]
    pub big_c_empirical: Option<f64>,
    pub stability: Option<Stability>,
    pub constants: Vec<NamedValue>,
    /// Points where a strict inequality holds only with equality.
    pub equalities: Vec<GridPoint>,
    pub steps: Vec<StepCheck>,
    pub violations: Vec<Violation>,
}

impl BoundCheckReport {
    fn new(check: &str, k_range: (u64, u64), ell_range: Option<(u64, u64)>) -> Self {
        Self {
            check: check.to_string(),
            k_range,
            ell_range,
            worst_case: None,
            worst_margin: f64::INFINITY,
            c_empirical: None,
            big_c_empirical: None,
            stability: None,
            constants: Vec::new(),
            equalities: Vec::new(),
            steps: Vec::new(),
            violations: Vec::new(),
        }
    }

    /// Tracks the slack of a load-bearing `lhs <= rhs` and records a
    /// violation when it fails beyond float slack.
    fn load_bearing(&mut self, check: &str, lhs: f64, rhs: f64, at: GridPoint) {
        let margin = (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE);
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_case = Some(at);
        }
        if !(lhs <= rhs * (1.0 + FLOAT_SLACK)) {
            self.violations.push(Violation {
                check: check.to_string(),
                at,
                lhs,
                rhs,
            });
        }
    }

    /// Displayed links that fail somewhere on the grid.
    pub fn failed_steps(&self) -> impl Iterator<Item = &StepCheck> {
        self.steps.iter().filter(|s| !s.holds())
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn step(&self, name: &str) -> Option<&StepCheck> {
        self.steps.iter().find(|s| s.name == name)
    }
}

/// `f(m,k)`, exact for `k <= EXACT_G_MAX` and in log space beyond.
pub fn f(m: usize, k: usize) -> Result<LogReal> {
    if k <= EXACT_G_MAX {
        return Ok(LogReal::from_ln(ln_rational(&kernel_exact(m, k)?)));
    }
    crate::forest::check_kernel_range(m, k)?;
    Ok(LogReal::from_ln(ln_kernel(&LnTables::new(k), m, k)))
}

/// `v(x) = k^{3/2} / (x^{5/2} (k - x)^{3/2})` on `(0, k)`.
pub fn v(k: f64, x: f64) -> f64 {
    libm::pow(k, 1.5) / (libm::pow(x, 2.5) * libm::pow(k - x, 1.5))
}

/// `A(x) = 2 (k² + 4kx - 8x²) / (3 k^{3/2} x^{3/2} √(k - x))`; `-A` is an
/// antiderivative of `v`.
pub fn v_antiderivative(k: f64, x: f64) -> f64 {
    2.0 * (k * k + 4.0 * k * x - 8.0 * x * x) / (3.0 * libm::pow(k, 1.5) * libm::pow(x, 1.5) * libm::sqrt(k - x))
}

/// `∫_a^b v = A(a) - A(b)`.
pub fn v_integral(k: f64, a: f64, b: f64) -> f64 {
    v_antiderivative(k, a) - v_antiderivative(k, b)
}

/// `√(2πn)(n/e)^n < n! < √(2πn)(n/e)^n e^{1/(12n)}` for `n = 1..=n_max`,
/// with `n!` exact.
pub fn check_stirling_sandwich(n_max: u64) -> Result<BoundCheckReport> {
    if n_max == 0 {
        return Err(param("Stirling check needs n_max >= 1"));
    }
    let mut r = BoundCheckReport::new("stirling_sandwich", (1, n_max), None);
    let mut lower = StepCheck::new("lower", "sqrt(2 pi n) (n/e)^n < n!", true);
    let mut upper = StepCheck::new("upper", "n! < sqrt(2 pi n) (n/e)^n e^(1/(12n))", true);
    let mut printed = StepCheck::new("upper_as_printed", "n! < sqrt(2 pi n) (n/e)^n e^(n/12)", false);
    let mut fact = BigUint::from(1u32);
    for n in 1..=n_max {
        fact *= n;
        let ln_fact = ln_biguint(&fact);
        let nf = n as f64;
        let ln_lower = 0.5 * libm::log(2.0 * PI * nf) + nf * libm::log(nf) - nf;
        let at = GridPoint::k(n);
        // compare the log gaps so that the tiny upper slack is not lost
        let below = ln_fact - ln_lower;
        let above = ln_lower + 1.0 / (12.0 * nf) - ln_fact;
        lower.record_f64(0.0, below, at);
        upper.record_f64(0.0, above, at);
        printed.record_f64(ln_fact, ln_lower + nf / 12.0, at);
        for gap in [below, above] {
            if gap < r.worst_margin {
                r.worst_margin = gap;
                r.worst_case = Some(at);
            }
            if gap <= 0.0 {
                r.violations.push(Violation {
                    check: "stirling_sandwich".to_string(),
                    at,
                    lhs: ln_fact,
                    rhs: ln_lower,
                });
            }
        }
    }
    r.steps = vec![lower, upper, printed];
    Ok(r)
}

fn ln_cayley(x: f64) -> f64 {
    if x <= 2.0 {
        0.0
    } else {
        (x - 2.0) * libm::log(x)
    }
}

/// `ln` of the Stirling estimate of `f(m,k)` before simplification.
fn ln_stirling_raw(m: f64, k: f64) -> f64 {
    0.5 * libm::log(2.0 * PI * (k - 1.0)) + (k - 1.0) * libm::log(k - 1.0) + 1.0 / (12.0 * (k - 1.0))
        - libm::log(2.0 * PI)
        - 0.5 * libm::log(m * (k - 1.0 - m))
        - m * libm::log(m)
        - (k - 1.0 - m) * libm::log(k - 1.0 - m)
        + ln_cayley(m)
        + ln_cayley(k - m)
        - ln_cayley(k)
}

/// The same estimate after the displayed regrouping.
fn ln_stirling_simplified(m: f64, k: f64) -> f64 {
    0.5 * libm::log((k - 1.0) / (2.0 * PI * (k - 1.0 - m))) + 2.0 * libm::log(k)
        - libm::log(k - m)
        - libm::log(k - 1.0)
        + k * libm::log(1.0 - 1.0 / k)
        + (k - m - 1.0) * libm::log(1.0 + 1.0 / (k - m - 1.0))
        + 1.0 / (12.0 * (k - 1.0))
        - 2.5 * libm::log(m)
}

fn ln_v(m: f64, k: f64) -> f64 {
    1.5 * libm::log(k) - 2.5 * libm::log(m) - 1.5 * libm::log(k - m)
}

/// Largest `f(m,k) / v(m)` over `3 <= k <= k_max`, `1 <= m <= k-1`, with
/// the point attaining it.
fn c_empirical(t: &LnTables, k_max: usize) -> (f64, GridPoint) {
    let mut best = (f64::NEG_INFINITY, GridPoint::k(3));
    for k in 3..=k_max {
        for m in 1..k {
            let ln_ratio = ln_kernel(t, m, k) - ln_v(m as f64, k as f64);
            if ln_ratio > best.0 {
                best = (ln_ratio, GridPoint::km(k as u64, m as u64));
            }
        }
    }
    (libm::exp(best.0), best.1)
}

/// The `f(m,k) <= c v(m)` bound: `c_empirical` over the grid, its stability
/// under halving `k_max`, the Stirling steps that produce it, and the
/// `m = k-1` case `f(k-1,k) <= 1/k` decided exactly.
pub fn check_f_upper_bound(k_max: usize) -> Result<BoundCheckReport> {
    if k_max < 3 {
        return Err(param("f bound check needs k_max >= 3"));
    }
    let t = LnTables::new(k_max);
    let mut r = BoundCheckReport::new("f_upper_bound", (3, k_max as u64), None);
    let (c, at) = c_empirical(&t, k_max);
    r.c_empirical = Some(c);
    r.constants.push(NamedValue {
        name: "c_empirical".to_string(),
        value: c,
        at: Some(at),
    });
    if k_max >= 6 {
        let (c_half, _) = c_empirical(&t, k_max / 2);
        r.stability = Some(Stability::new((k_max / 2) as u64, c_half, k_max as u64, c));
    }
    if !(c.is_finite() && c > 0.0) {
        r.violations.push(Violation {
            check: "c_empirical finite and positive".to_string(),
            at,
            lhs: c,
            rhs: f64::INFINITY,
        });
    }

    let mut stirling = StepCheck::new(
        "stirling_estimate",
        "f(m,k) < Stirling estimate for k >= 3, m <= k-2",
        true,
    );
    let mut regroup = StepCheck::new(
        "stirling_regrouping",
        "Stirling estimate equals its regrouped form (relative 1e-9)",
        true,
    );
    let mut c_stirling = (f64::NEG_INFINITY, GridPoint::k(3));
    for k in 3..=k_max {
        let kf = k as f64;
        for m in 1..k - 1 {
            let mf = m as f64;
            let at = GridPoint::km(k as u64, m as u64);
            let raw = ln_stirling_raw(mf, kf);
            let simplified = ln_stirling_simplified(mf, kf);
            let ln_f = ln_kernel(&t, m, k);
            stirling.record_f64(ln_f, raw, at);
            r.load_bearing("f(m,k) < Stirling estimate", libm::exp(ln_f - raw), 1.0, at);
            let same = libm::fabs(libm::expm1(raw - simplified)) <= 1e-9;
            regroup.record(if same { Outcome::Strict } else { Outcome::Fails }, at);
            let ratio = simplified - ln_v(mf, kf);
            if ratio > c_stirling.0 {
                c_stirling = (ratio, at);
            }
        }
    }
    r.constants.push(NamedValue {
        name: "c_stirling".to_string(),
        value: libm::exp(c_stirling.0),
        at: Some(c_stirling.1),
    });

    let mut last = StepCheck::new("m_eq_k_minus_1", "f(k-1,k) = (k-1)^(k-3)/k^(k-2) < 1/k", true);
    for k in 3..=k_max as u64 {
        // (k-1)^{k-3} / k^{k-2} < 1/k  <=>  (k-1)^{k-3} < k^{k-3}
        let lhs = BigUint::from(k - 1).pow((k - 3) as u32);
        let rhs = BigUint::from(k).pow((k - 3) as u32);
        let at = GridPoint::km(k, k - 1);
        let outcome = match lhs.cmp(&rhs) {
            core::cmp::Ordering::Less => Outcome::Strict,
            core::cmp::Ordering::Equal => Outcome::Equality,
            core::cmp::Ordering::Greater => Outcome::Fails,
        };
        last.record(outcome, at);
        match outcome {
            Outcome::Equality => r.equalities.push(at),
            Outcome::Fails => r.violations.push(Violation {
                check: "f(k-1,k) <= 1/k".to_string(),
                at,
                lhs: libm::exp(ln_biguint(&lhs) - ln_biguint(&BigUint::from(k).pow((k - 2) as u32))),
                rhs: 1.0 / k as f64,
            }),
            Outcome::Strict => {}
        }
    }
    r.steps = vec![stirling, regroup, last];
    Ok(r)
}

/// Sample of `k` values for the pointwise convexity and quadrature checks.
fn k_samples(k_max: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = [3, 4, 5, 6, 10, 20, 50, 100, 200, 500, 1000]
        .into_iter()
        .filter(|&k| k <= k_max)
        .collect();
    if !ks.contains(&k_max) {
        ks.push(k_max);
    }
    ks
}

/// Convexity of `v`, the sum-versus-integral bound, the closed-form
/// integral, and every displayed simplification of the tail terms, on
/// `3 <= k <= k_max`, `2 <= ℓ <= k` (`x = ℓ - 1` below).
pub fn check_convexity_integral_bound(k_max: usize) -> Result<BoundCheckReport> {
    if k_max < 3 {
        return Err(param("convexity check needs k_max >= 3"));
    }
    let mut r = BoundCheckReport::new("convexity_integral_bound", (3, k_max as u64), Some((2, k_max as u64)));

    // (a) second differences on an interior grid
    let mut convex = StepCheck::new("convexity", "second differences of v on (0,k) >= -1e-9 v(x)", true);
    for &k in &k_samples(k_max) {
        let kf = k as f64;
        let h = kf / 4096.0;
        for j in 1..64 {
            let x = kf * j as f64 / 64.0;
            let d2 = v(kf, x - h) - 2.0 * v(kf, x) + v(kf, x + h);
            let ok = d2 >= -CONVEXITY_TOL * v(kf, x);
            convex.record(if ok { Outcome::Strict } else { Outcome::Fails }, GridPoint::k(k as u64));
            if !ok {
                r.violations.push(Violation {
                    check: "convexity".to_string(),
                    at: GridPoint::k(k as u64),
                    lhs: d2,
                    rhs: -CONVEXITY_TOL * v(kf, x),
                });
            }
        }
    }

    // (b) closed form against quadrature
    let mut quad = StepCheck::new("antiderivative", "closed-form integral matches quadrature (relative 1e-8)", true);
    for &k in &k_samples(k_max) {
        let kf = k as f64;
        let mut ells = vec![2, 3, k / 4, k / 2, k - 1];
        ells.retain(|&l| (2..k).contains(&l));
        ells.dedup();
        for ell in ells {
            let a = (ell - 1) as f64;
            let b = kf - 1.0;
            let closed = v_integral(kf, a, b);
            let numeric = adaptive_simpson(&|x| v(kf, x), a, b, closed.abs() * 1e-13);
            let rel = (numeric - closed).abs() / closed.abs();
            let at = GridPoint::kl(k as u64, ell as u64);
            quad.record(if rel <= QUADRATURE_TOL { Outcome::Strict } else { Outcome::Fails }, at);
            if rel > QUADRATURE_TOL {
                r.violations.push(Violation {
                    check: "antiderivative".to_string(),
                    at,
                    lhs: numeric,
                    rhs: closed,
                });
            }
        }
    }

    let mut sum_bound = StepCheck::new("sum_le_endpoints_plus_integral", "sum_{m=l-1}^{k-1} v(m) <= v(k-1) + v(l-1) + int_{l-1}^{k-1} v", true);
    let mut endpoint = StepCheck::new("endpoint_rewrite", "-A(k-1) = 2(3k^2-12k+8)/(3k^(3/2)(k-1)^(3/2))", true);
    let mut v_last = StepCheck::new("v_k_minus_1_lt_6_over_k", "v(k-1) < 6/k", true);
    let mut v_first = StepCheck::new("v_x_lt_3_over_x", "v(l-1) < 3/(l-1)", true);
    let mut a1 = StepCheck::new("tail_k_step1", "2(3k^2-12k+8)/(3k^(3/2)(k-1)^(3/2)) < 6(k-2)^2/(3k^(3/2)(k-1)^(3/2))", false);
    let mut a2 = StepCheck::new("tail_k_step2", "6(k-2)^2/(3k^(3/2)(k-1)^(3/2)) < 2 sqrt(k-1)/(3k sqrt(k))", false);
    let mut a3 = StepCheck::new("tail_k_step3", "2 sqrt(k-1)/(3k sqrt(k)) < 2/(3k)", false);
    let mut a_end = StepCheck::new("tail_k_as_printed", "2(3k^2-12k+8)/(3k^(3/2)(k-1)^(3/2)) < 2/(3k)", false);
    let mut a_fix = StepCheck::new("tail_k_corrected", "2(3k^2-12k+8)/(3k^(3/2)(k-1)^(3/2)) < 2/k", true);
    let mut b1 = StepCheck::new("tail_l_step1", "A(x) < 2[(k+2x)^2-16x^2]/(3k^(3/2) x sqrt((k-x)x))", false);
    let mut b2 = StepCheck::new("tail_l_step2", "2[(k+2x)^2-16x^2]/(3k^(3/2) x sqrt((k-x)x)) < 2(k-2x)(k+6x)/(k^2 x)", false);
    let mut b3 = StepCheck::new("tail_l_step3", "2(k-2x)(k+6x)/(k^2 x) < 14/x", false);
    let mut b_end = StepCheck::new("tail_l_end_to_end", "A(x) < 14/x", true);
    let mut total = StepCheck::new("sum_v_final", "sum_{m=l-1}^{k-1} v(m) < 6/k + 3/(l-1) + 2/k + 14/(l-1)", true);

    for k in 3..=k_max {
        let kf = k as f64;
        let ki = k as i128;
        let at_k = GridPoint::k(k as u64);

        let n1 = 3 * ki * ki - 12 * ki + 8;
        a1.record(less(n1, 3 * (ki - 2) * (ki - 2)), at_k);
        a2.record(less(3 * (ki - 2) * (ki - 2), (ki - 1) * (ki - 1)), at_k);
        a3.record(less(ki - 1, ki), at_k);
        let cube = (ki - 1) * (ki - 1) * (ki - 1);
        a_end.record(if n1 <= 0 { Outcome::Strict } else { less(n1 * n1, ki * cube) }, at_k);
        let fixed = if n1 <= 0 { Outcome::Strict } else { less(n1 * n1, 9 * ki * cube) };
        a_fix.record(fixed, at_k);
        let t1 = 2.0 * n1 as f64 / (3.0 * libm::pow(kf, 1.5) * libm::pow(kf - 1.0, 1.5));
        r.load_bearing("tail_k_corrected", t1, 2.0 / kf, at_k);
        let rewrite = (-v_antiderivative(kf, kf - 1.0) - t1).abs() <= 1e-12 * t1.abs().max(1.0 / kf);
        endpoint.record(if rewrite { Outcome::Strict } else { Outcome::Fails }, at_k);
        let k5 = ki.pow(5);
        v_last.record(less(k5, 36 * (ki - 1).pow(5)), at_k);
        r.load_bearing("v(k-1) < 6/k", v(kf, kf - 1.0), 6.0 / kf, at_k);

        // suffix sums of v(m), m = k-1 down to 1
        let mut suffix = 0.0;
        for x in (1..k).rev() {
            suffix += v(kf, x as f64);
            let ell = x + 1;
            let xf = x as f64;
            let xi = x as i128;
            let at = GridPoint::kl(k as u64, ell as u64);

            let rhs = v(kf, kf - 1.0) + v(kf, xf) + v_integral(kf, xf, kf - 1.0);
            sum_bound.record_f64(suffix, rhs, at);
            r.load_bearing("sum_le_endpoints_plus_integral", suffix, rhs, at);

            v_first.record(less(ki.pow(3), 9 * xi.pow(3) * (ki - xi).pow(3)), at);
            r.load_bearing("v(l-1) < 3/(l-1)", v(kf, xf), 3.0 / xf, at);

            let n2 = ki * ki + 4 * ki * xi - 8 * xi * xi;
            let p = (ki - 2 * xi) * (ki + 6 * xi);
            b1.record(less(n2, ki * ki + 4 * ki * xi - 12 * xi * xi), at);
            let q = 9 * xi * (ki - xi);
            b2.record(
                match p.signum() {
                    1 => less(ki, q),
                    0 => Outcome::Equality,
                    _ => less(q, ki),
                },
                at,
            );
            b3.record(less(p, 7 * ki * ki), at);
            b_end.record(if n2 <= 0 { Outcome::Strict } else { less(n2 * n2, 441 * ki.pow(3) * xi * (ki - xi)) }, at);
            r.load_bearing("tail_l_end_to_end", v_antiderivative(kf, xf), 14.0 / xf, at);

            let bound = 6.0 / kf + 3.0 / xf + 2.0 / kf + 14.0 / xf;
            total.record_f64(suffix, bound, at);
            r.load_bearing("sum_v_final", suffix, bound, at);
        }
    }
    // exact decisions of load-bearing links also count as violations
    for (step, name) in [(&a_fix, "tail_k_corrected"), (&b_end, "tail_l_end_to_end"), (&v_last, "v(k-1) < 6/k"), (&v_first, "v(l-1) < 3/(l-1)")] {
        if let Some(at) = step.first_failure {
            r.violations.push(Violation {
                check: format!("{name} (exact)"),
                at,
                lhs: f64::NAN,
                rhs: f64::NAN,
            });
        }
    }
    r.steps = vec![convex, quad, sum_bound, endpoint, v_last, v_first, a1, a2, a3, a_end, a_fix, b1, b2, b3, b_end, total];
    Ok(r)
}

/// Largest `ℓ Σ_{m=ℓ-1}^{k-1} f(m,k)` over `2 <= ℓ <= k <= k_max`.
fn big_c_empirical(t: &LnTables, k_max: usize) -> (f64, GridPoint) {
    let mut best = (0.0, GridPoint::kl(2, 2));
    for k in 2..=k_max {
        let mut suffix = 0.0;
        for ell in (2..=k).rev() {
            suffix += libm::exp(ln_kernel(t, ell - 1, k));
            let scaled = ell as f64 * suffix;
            if scaled > best.0 {
                best = (scaled, GridPoint::kl(k as u64, ell as u64));
            }
        }
    }
    best
}

/// `Σ_{m=ℓ-1}^{k-1} f(m,k) <= C/ℓ`: `C_empirical` and its stability. The
/// sums for `k <= EXACT_G_MAX` are also formed from exact kernels and must
/// agree with the log-space ones.
pub fn check_sum_f_bound(k_max: usize) -> Result<BoundCheckReport> {
    if k_max < 3 {
        return Err(param("sum bound check needs k_max >= 3"));
    }
    let t = LnTables::new(k_max);
    let mut r = BoundCheckReport::new("sum_f_bound", (2, k_max as u64), Some((2, k_max as u64)));
    let (c, at) = big_c_empirical(&t, k_max);
    r.big_c_empirical = Some(c);
    // C is attained on the grid, so its argmax has no slack
    r.worst_case = Some(at);
    r.worst_margin = 0.0;
    r.constants.push(NamedValue {
        name: "C_empirical".to_string(),
        value: c,
        at: Some(at),
    });
    if k_max >= 6 {
        let (c_half, _) = big_c_empirical(&t, k_max / 2);
        r.stability = Some(Stability::new((k_max / 2) as u64, c_half, k_max as u64, c));
    }
    if !(c.is_finite() && c > 0.0) {
        r.violations.push(Violation {
            check: "C_empirical finite and positive".to_string(),
            at,
            lhs: c,
            rhs: f64::INFINITY,
        });
    }

    let mut exact = StepCheck::new("exact_sums", "exact and log-space kernel sums agree (relative 1e-12)", true);
    for k in 2..=k_max.min(EXACT_G_MAX) {
        let mut sum = num_rational::BigRational::from_integer(0.into());
        let mut suffix = 0.0;
        for ell in (2..=k).rev() {
            sum += kernel_exact(ell - 1, k)?;
            suffix += libm::exp(ln_kernel(&t, ell - 1, k));
            let exact_value = libm::exp(ln_rational(&sum));
            let ok = (exact_value - suffix).abs() <= 1e-12 * exact_value;
            exact.record(if ok { Outcome::Strict } else { Outcome::Fails }, GridPoint::kl(k as u64, ell as u64));
        }
    }
    let mut single = StepCheck::new("single_term", "l = k: f(k-1,k) <= 1/k <= C/l", true);
    for k in 2..=k_max {
        let term = libm::exp(ln_kernel(&t, k - 1, k));
        single.record_f64(term * k as f64, c, GridPoint::kl(k as u64, k as u64));
    }
    if !exact.holds() {
        r.violations.push(Violation {
            check: "exact_sums".to_string(),
            at: exact.first_failure.expect("failed"),
            lhs: f64::NAN,
            rhs: f64::NAN,
        });
    }
    r.steps = vec![exact, single];
    Ok(r)
}

/// Where the maximum of `g_ℓ(k)` over `k` sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ArgMax {
    K(u64),
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MEllEstimate {
    #[cfg_attr(feature = "serde", serde(rename = "ℓ"))]
    pub ell: u64,
    pub p: String,
    pub m_ell: f64,
    pub argmax_k: ArgMax,
    pub grid_max: f64,
    pub limit: f64,
    /// The grid maximum sits at `k_max`, so the grid may be too small.
    pub at_boundary: bool,
}

/// `M_ℓ = max_k g_ℓ(k)` estimated over `ℓ <= k <= k_max`, never below the
/// limit value.
pub fn estimate_m_ell(eval: &mut GEvaluator, ell: usize, p: &Probability, k_max: usize) -> Result<MEllEstimate> {
    if ell == 0 || k_max < ell {
        return Err(param(format!("M_ℓ needs 1 <= ℓ <= k_max, got ℓ = {ell}, k_max = {k_max}")));
    }
    let mut grid_max = f64::NEG_INFINITY;
    let mut argmax = ell;
    for k in ell.max(1)..=k_max {
        let g = eval.g(k, ell, p)?.to_f64();
        if g > grid_max * (1.0 + 1e-12) {
            grid_max = g;
            argmax = k;
        }
    }
    let limit = g_limit(ell, p).to_f64();
    let (m_ell, argmax_k) = if limit > grid_max {
        (limit, ArgMax::Limit)
    } else {
        (grid_max, ArgMax::K(argmax as u64))
    };
    Ok(MEllEstimate {
        ell: ell as u64,
        p: p.as_str().to_string(),
        m_ell,
        argmax_k,
        grid_max,
        limit,
        at_boundary: argmax == k_max && ell > 1,
    })
}

/// `estimate_m_ell` for `ℓ = 1..=ell_max`.
pub fn m_ell_series(p: &Probability, ell_max: usize, k_max: usize) -> Result<Vec<MEllEstimate>> {
    let mut eval = GEvaluator::default();
    (1..=ell_max).map(|ell| estimate_m_ell(&mut eval, ell, p, k_max)).collect()
}

/// Everything [`verify_all`] checks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProofSuite {
    pub k_max: u64,
    pub stirling: BoundCheckReport,
    pub f_bound: BoundCheckReport,
    pub convexity: BoundCheckReport,
    pub sum_f: BoundCheckReport,
    pub m_ell: Vec<MEllEstimate>,
}

impl ProofSuite {
    pub fn reports(&self) -> [&BoundCheckReport; 4] {
        [&self.stirling, &self.f_bound, &self.convexity, &self.sum_f]
    }

    pub fn violation_count(&self) -> usize {
        self.reports().iter().map(|r| r.violations.len()).sum()
    }
}

/// Runs all checks on `k <= k_max` and the `M_ℓ` estimates (`ℓ <= ell_max`)
/// for every `p`.
pub fn verify_all(k_max: usize, ps: &[Probability], ell_max: usize) -> Result<ProofSuite> {
    let mut m_ell = Vec::new();
    for p in ps {
        m_ell.extend(m_ell_series(p, ell_max.min(k_max), k_max)?);
    }
    Ok(ProofSuite {
        k_max: k_max as u64,
        stirling: check_stirling_sandwich(STIRLING_N_MAX)?,
        f_bound: check_f_upper_bound(k_max)?,
        convexity: check_convexity_integral_bound(k_max)?,
        sum_f: check_sum_f_bound(k_max)?,
        m_ell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_small_values() {
        assert!((f(3, 4).unwrap().to_f64() - 3.0 / 16.0).abs() < 1e-15);
        assert!((f(1, 2).unwrap().to_f64() - 1.0).abs() < 1e-15);
        let expected = libm::exp(97.0 * libm::log(99.0) - 98.0 * libm::log(100.0));
        assert!((f(99, 100).unwrap().to_f64() - expected).abs() < 1e-12 * expected);
        assert!(f(0, 4).is_err());
        assert!(f(4, 4).is_err());
    }

    #[test]
    fn stirling_examples() {
        let r = check_stirling_sandwich(10).unwrap();
        assert!(r.passed());
        let lower10 = libm::sqrt(20.0 * PI) * libm::pow(10.0 / core::f64::consts::E, 10.0);
        assert!((lower10 - 3_598_695.6).abs() < 0.1);
        assert!((lower10 * libm::exp(1.0 / 120.0) - 3_628_810.05).abs() < 0.01);
    }

    #[test]
    fn displayed_tail_steps() {
        let r = check_convexity_integral_bound(100).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        let failing: Vec<&str> = r.failed_steps().map(|s| s.name.as_str()).collect();
        assert_eq!(failing, ["tail_k_step2", "tail_k_as_printed", "tail_l_step1", "tail_l_step2"]);
        assert_eq!(r.step("tail_k_step2").unwrap().first_failure, Some(GridPoint::k(4)));
        assert!(r.step("tail_k_as_printed").unwrap().failures > 0);
    }

    #[test]
    fn v_integral_matches_direct_antiderivative_derivative() {
        let (k, x, h) = (10.0, 4.0, 1e-5);
        let deriv = -(v_antiderivative(k, x + h) - v_antiderivative(k, x - h)) / (2.0 * h);
        assert!((deriv - v(k, x)).abs() < 1e-7 * v(k, x));
    }

    #[test]
    fn k3_is_the_only_equality() {
        let r = check_f_upper_bound(60).unwrap();
        assert!(r.passed());
        assert_eq!(r.equalities, [GridPoint::km(3, 2)]);
        assert!(r.step("stirling_estimate").unwrap().holds());
        let c_stirling = r.constants.iter().find(|c| c.name == "c_stirling").unwrap();
        assert!(c_stirling.value < 0.43 && c_stirling.value > 0.42);
    }

    #[test]
    fn c_empirical_is_stable() {
        let t = LnTables::new(500);
        let (small, _) = c_empirical(&t, 50);
        let (large, at) = c_empirical(&t, 500);
        assert!((large - small).abs() / large < 0.01);
        // the centre of the range, approaching 1/sqrt(2 pi) from below
        assert_eq!(at, GridPoint::km(500, 250));
        assert!(large < 1.0 / libm::sqrt(2.0 * PI));
    }

    #[test]
    fn big_c_is_two() {
        let r = check_sum_f_bound(80).unwrap();
        assert!(r.passed());
        assert_eq!(r.big_c_empirical, Some(2.0));
        assert!(r.stability.unwrap().is_stable());
    }

    #[test]
    fn m2_at_half() {
        let p: Probability = "0.5".parse().unwrap();
        let mut eval = GEvaluator::default();
        let e = estimate_m_ell(&mut eval, 2, &p, 100).unwrap();
        assert!(e.m_ell >= 0.5);
        assert!(!e.at_boundary);
    }

    #[test]
    fn m1_is_one() {
        let p: Probability = "0.5".parse().unwrap();
        let mut eval = GEvaluator::default();
        let e = estimate_m_ell(&mut eval, 1, &p, 30).unwrap();
        assert_eq!(e.m_ell, 1.0);
        assert_eq!(e.argmax_k, ArgMax::K(1));
    }
}
