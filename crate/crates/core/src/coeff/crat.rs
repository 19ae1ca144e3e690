//! Exact complex rational scalars.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// A complex number with exact rational real and imaginary parts.
///
/// This is the scalar field underlying every layer of the engine; no
/// floating point is used anywhere. Equality is exact structural equality
/// of reduced fractions.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CRatRepr", into = "CRatRepr")]
pub struct CRat {
    pub re: BigRational,
    pub im: BigRational,
}

/// Wire form: both parts as `"p/q"` strings (`"p"` when the denominator is 1).
#[derive(Serialize, Deserialize)]
struct CRatRepr {
    re: String,
    im: String,
}

impl From<CRat> for CRatRepr {
    fn from(c: CRat) -> Self {
        CRatRepr {
            re: c.re.to_string(),
            im: c.im.to_string(),
        }
    }
}

impl TryFrom<CRatRepr> for CRat {
    type Error = String;
    fn try_from(r: CRatRepr) -> Result<Self, String> {
        Ok(CRat {
            re: parse_rational(&r.re)?,
            im: parse_rational(&r.im)?,
        })
    }
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    BigRational::from_str(s.trim()).map_err(|e| format!("bad rational {s:?}: {e}"))
}

impl CRat {
    pub fn zero() -> Self {
        CRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        CRat {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        CRat {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        CRat {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// `num/den` as a real scalar. Panics when `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        CRat {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn from_real(re: BigRational) -> Self {
        CRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// True when the imaginary part vanishes.
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        CRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Multiplicative inverse. Panics on zero; callers check first.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero complex rational");
        let norm = &self.re * &self.re + &self.im * &self.im;
        CRat {
            re: &self.re / &norm,
            im: -&self.im / &norm,
        }
    }

    /// Multiplies by an exact integer.
    pub fn scale_int(&self, n: i64) -> Self {
        let f = BigRational::from_integer(BigInt::from(n));
        CRat {
            re: &self.re * &f,
            im: &self.im * &f,
        }
    }

    /// Multiplies by an exact rational.
    pub fn scale_rat(&self, f: &BigRational) -> Self {
        CRat {
            re: &self.re * f,
            im: &self.im * f,
        }
    }
}

impl Add for &CRat {
    type Output = CRat;
    fn add(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &CRat {
    type Output = CRat;
    fn sub(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &CRat {
    type Output = CRat;
    fn mul(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for &CRat {
    type Output = CRat;
    fn div(self, rhs: &CRat) -> CRat {
        self * &rhs.recip()
    }
}

impl Neg for &CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `n!` as an exact integer.
pub fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= BigInt::from(k);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_identities() {
        let a = CRat {
            re: BigRational::new(BigInt::from(3), BigInt::from(4)),
            im: BigRational::new(BigInt::from(-1), BigInt::from(2)),
        };
        let b = CRat::i();
        assert_eq!(&(&a * &b) * &b, (&a).neg(), "i^2 = -1");
        assert_eq!(&a * &a.recip(), CRat::one());
        assert_eq!(&a + &(&a).neg(), CRat::zero());
        assert_eq!(&a * &a.conj(), (&a.conj() * &a), "conjugation commutes");
        let norm = &a * &a.conj();
        assert!(norm.is_real() && !norm.re.is_negative());
    }

    #[test]
    fn parses_and_prints_ratios() {
        assert_eq!(parse_rational("3/4").unwrap().to_string(), "3/4");
        assert_eq!(parse_rational("-7").unwrap().to_string(), "-7");
        assert!(parse_rational("x").is_err());
        let c = CRat {
            re: parse_rational("1/2").unwrap(),
            im: parse_rational("-2/3").unwrap(),
        };
        assert_eq!(c.to_string(), "1/2-2/3i");
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"re":"1/2","im":"-2/3"}"#);
        let back: CRat = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
    }
}
