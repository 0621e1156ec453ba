//! Exact edge probabilities parsed from decimal text.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};

const MAX_DECIMALS: usize = 18;

/// A probability strictly between 0 and 1, kept as a reduced fraction.
///
/// Accepted text forms are decimals (`0.5`, `.25`, `0.30`) and fractions
/// (`1/3`). The canonical text strips redundant zeros, so `0.50` and `.5`
/// both display as `0.5`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Probability {
    num: u64,
    den: u64,
    text: String,
}

impl Probability {
    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num >= den {
            return Err(Error::InvalidProbability(alloc::format!("{num}/{den}")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        Ok(Self {
            num,
            den,
            text: canonical_text(num, den),
        })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// `1 - p`.
    pub fn complement(&self) -> Self {
        Self::from_ratio(self.den - self.num, self.den).expect("complement of a valid probability")
    }

    /// `(1 - p) / p` as an exact rational.
    pub fn odds_against(&self) -> BigRational {
        BigRational::new(BigInt::from(self.den - self.num), BigInt::from(self.num))
    }

    /// `floor(p * 2^64)`: a uniform 64-bit draw below this value is an edge.
    pub fn threshold_u64(&self) -> u64 {
        (((self.num as u128) << 64) / self.den as u128) as u64
    }
}

/// Decimal text when `den` divides a power of ten, otherwise `num/den`.
fn canonical_text(num: u64, den: u64) -> String {
    let mut d = den;
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    let digits = twos.max(fives);
    if d != 1 || digits as usize > MAX_DECIMALS {
        return alloc::format!("{num}/{den}");
    }
    let scale = 10u128.pow(digits);
    let scaled = num as u128 * (scale / den as u128);
    let mut frac = alloc::format!("{:0width$}", scaled, width = digits as usize);
    while frac.ends_with('0') {
        frac.pop();
    }
    alloc::format!("0.{frac}")
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidProbability(s.to_string());
        let t = s.trim();
        if let Some((a, b)) = t.split_once('/') {
            let num = a.trim().parse::<u64>().map_err(|_| bad())?;
            let den = b.trim().parse::<u64>().map_err(|_| bad())?;
            return Self::from_ratio(num, den).map_err(|_| bad());
        }
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if !(int.is_empty() || int.chars().all(|c| c == '0')) {
            return Err(bad());
        }
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() || frac.len() > MAX_DECIMALS || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: u64 = frac.parse().map_err(|_| bad())?;
        let den = 10u64.pow(frac.len() as u32);
        Self::from_ratio(num, den).map_err(|_| bad())
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Probability({})", self.text)
    }
}
