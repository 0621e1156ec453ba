//! Small numeric helpers shared by the combinatorics and the proof checks.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `ln x` for a positive big integer, accurate to about one ulp of the mantissa.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    assert!(bits > 0, "ln of zero");
    if bits <= 1000 {
        return libm::log(x.to_f64().expect("fits in f64"));
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    libm::log(top as f64) + shift as f64 * core::f64::consts::LN_2
}

/// `ln q` for a positive rational.
pub fn ln_rational(q: &BigRational) -> f64 {
    assert!(q.numer().sign() == Sign::Plus && q.denom().sign() == Sign::Plus, "ln of non-positive rational");
    ln_biguint(q.numer().magnitude()) - ln_biguint(q.denom().magnitude())
}

/// Nearest `f64` to a rational, via log space when the direct conversion
/// overflows or underflows.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    match q.to_f64() {
        Some(x) if x.is_finite() && x != 0.0 => x,
        _ => {
            let sign = if q.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
            sign * libm::exp(ln_rational(&q.abs()))
        }
    }
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `x^{x-2}` with the reading `1` for `x ∈ {1, 2}` (Cayley's count of trees on
/// `x` labeled vertices).
pub fn cayley(x: u64) -> BigUint {
    if x <= 2 {
        BigUint::one()
    } else {
        BigUint::from(x).pow((x - 2) as u32)
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln x^{x-2}` under the same convention as [`cayley`].
pub fn ln_cayley(x: u64) -> f64 {
    if x <= 2 {
        0.0
    } else {
        (x - 2) as f64 * libm::log(x as f64)
    }
}

/// Precomputed `ln k!`, `ln k` and `ln k^{k-2}` for `k <= max`.
#[derive(Debug, Clone, Default)]
pub struct LnTables {
    fact: Vec<f64>,
    cayley: Vec<f64>,
}

impl LnTables {
    pub fn new(max: usize) -> Self {
        let mut t = Self::default();
        t.ensure(max);
        t
    }

    pub fn ensure(&mut self, max: usize) {
        for k in self.fact.len()..=max {
            self.fact.push(ln_factorial(k as u64));
            self.cayley.push(ln_cayley(k as u64));
        }
    }

    #[inline]
    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.fact[k]
    }

    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.fact[n] - self.fact[k] - self.fact[n - k]
    }

    #[inline]
    pub fn ln_cayley(&self, k: usize) -> f64 {
        self.cayley[k]
    }
}

pub fn big_rational(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
