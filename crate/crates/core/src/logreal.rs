//! Non-negative reals carried by their natural logarithm.

use core::cmp::Ordering;
use core::iter::Sum;
use core::ops::{Add, Div, Mul};

use num_bigint::BigUint;

use crate::numeric::ln_biguint;

/// A non-negative real stored as `ln x`, with an explicit zero flag.
///
/// Products, quotients and powers are exact in log space; sums use
/// log-sum-exp after extracting the largest term. Zero absorbs products.
#[derive(Clone, Copy)]
pub struct LogReal {
    ln: f64,
    zero: bool,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { ln: f64::NEG_INFINITY, zero: true };
    pub const ONE: LogReal = LogReal { ln: 0.0, zero: false };

    /// The real `e^ln`.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { ln, zero: false }
        }
    }

    /// Panics on negative or NaN input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "LogReal cannot hold {x}");
        if x == 0.0 {
            Self::ZERO
        } else {
            Self { ln: libm::log(x), zero: false }
        }
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        if x.bits() == 0 {
            Self::ZERO
        } else {
            Self { ln: ln_biguint(x), zero: false }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Natural log; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.ln
        }
    }

    /// Base-10 log; `-inf` for zero.
    pub fn log10(&self) -> f64 {
        self.ln() / core::f64::consts::LN_10
    }

    /// Back to `f64`; may overflow to `inf` or underflow to 0.
    pub fn to_f64(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            libm::exp(self.ln)
        }
    }

    pub fn powi(self, k: i64) -> Self {
        match (self.zero, k) {
            (_, 0) => Self::ONE,
            (true, k) if k > 0 => Self::ZERO,
            (true, _) => Self { ln: f64::INFINITY, zero: false },
            (false, k) => Self { ln: self.ln * k as f64, zero: false },
        }
    }

    /// Relative difference `|a - b| / max(a, b)` computed without leaving log
    /// space; 0 when both are zero.
    pub fn rel_diff(a: LogReal, b: LogReal) -> f64 {
        match (a.zero, b.zero) {
            (true, true) => 0.0,
            (true, false) | (false, true) => 1.0,
            _ => -libm::expm1(-(a.ln - b.ln).abs()),
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;

    fn mul(self, rhs: LogReal) -> LogReal {
        if self.zero || rhs.zero {
            LogReal::ZERO
        } else {
            LogReal { ln: self.ln + rhs.ln, zero: false }
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;

    fn div(self, rhs: LogReal) -> LogReal {
        debug_assert!(!rhs.zero, "LogReal division by zero");
        if self.zero {
            LogReal::ZERO
        } else {
            LogReal { ln: self.ln - rhs.ln(), zero: false }
        }
    }
}

impl Add for LogReal {
    type Output = LogReal;

    fn add(self, rhs: LogReal) -> LogReal {
        if self.zero {
            return rhs;
        }
        if rhs.zero {
            return self;
        }
        let (hi, lo) = if self.ln >= rhs.ln { (self.ln, rhs.ln) } else { (rhs.ln, self.ln) };
        LogReal { ln: hi + libm::log1p(libm::exp(lo - hi)), zero: false }
    }
}

impl Sum for LogReal {
    fn sum<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        log_sum_exp(iter.map(|x| x.ln()))
    }
}

impl<'a> Sum<&'a LogReal> for LogReal {
    fn sum<I: Iterator<Item = &'a LogReal>>(iter: I) -> LogReal {
        iter.copied().sum()
    }
}

/// `ln Σ e^{x_i}` with max extraction; `-inf` entries are zeros.
///
/// The iterator is consumed once: terms are buffered in fixed-size chunks and
/// folded, so no allocation is needed.
pub fn log_sum_exp<I: Iterator<Item = f64>>(iter: I) -> LogReal {
    const CHUNK: usize = 64;
    let mut buf = [0.0f64; CHUNK];
    let mut acc = LogReal::ZERO;
    let mut iter = iter.peekable();
    while iter.peek().is_some() {
        let mut len = 0;
        for x in iter.by_ref().take(CHUNK) {
            buf[len] = x;
            len += 1;
        }
        let terms = &buf[..len];
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            continue;
        }
        let s: f64 = terms.iter().map(|&x| libm::exp(x - max)).sum();
        acc = acc + LogReal::from_ln(max + libm::log(s));
    }
    acc
}

impl PartialEq for LogReal {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.zero, other.zero) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            _ => self.ln.partial_cmp(&other.ln),
        }
    }
}

impl core::fmt::Debug for LogReal {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.zero {
            f.write_str("LogReal(0)")
        } else {
            write!(f, "LogReal(e^{})", self.ln)
        }
    }
}
