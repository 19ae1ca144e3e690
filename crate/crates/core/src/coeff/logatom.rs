//! Symbolic logarithms of positive rationals.
//!
//! Determinant normalizations produce additive constants of the form
//! `q * log(c)` with `c` a positive rational. These cannot be represented in
//! the rational scalar field, so they are carried symbolically and cancelled
//! structurally (e.g. a potential and its dual disagree exactly by such a
//! term). The defining property is `exp(log(c)) = c`, used only through
//! cancellation — a log part is never evaluated numerically.

use crate::error::{AlgebraError, Result};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// A finite sum `sum_i q_i * log(c_i)` with positive rational bases,
/// canonicalized per base (zero multipliers dropped, `log(1)` dropped).
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LogPart {
    atoms: BTreeMap<BigRational, BigRational>, // base -> multiplier
}

impl LogPart {
    pub fn zero() -> Self {
        LogPart::default()
    }

    /// `q * log(base)`; errors unless `base > 0`.
    pub fn atom(q: BigRational, base: BigRational) -> Result<Self> {
        if !base.is_positive() {
            return Err(AlgebraError::BadLogBase(base.to_string()));
        }
        let mut p = LogPart::zero();
        if !q.is_zero() && !base.is_one() {
            p.atoms.insert(base, q);
        }
        Ok(p)
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (base, q) in &rhs.atoms {
            let entry = out.atoms.entry(base.clone()).or_insert_with(BigRational::zero);
            *entry += q;
            if entry.is_zero() {
                out.atoms.remove(base);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        LogPart {
            atoms: self
                .atoms
                .iter()
                .map(|(b, q)| (b.clone(), -q.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigRational, &BigRational)> {
        self.atoms.iter()
    }
}

impl fmt::Display for LogPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (base, q) in &self.atoms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({q})*log({base})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LogPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize)]
struct LogAtomRepr {
    coeff: String,
    base: String,
}

impl Serialize for LogPart {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.atoms
            .iter()
            .map(|(base, q)| LogAtomRepr {
                coeff: q.to_string(),
                base: base.to_string(),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn atoms_cancel_per_base() {
        let a = LogPart::atom(rat(1, 1), rat(2, 1)).unwrap();
        let b = LogPart::atom(rat(-1, 1), rat(2, 1)).unwrap();
        assert!(a.add(&b).is_zero());
        let c = a.add(&LogPart::atom(rat(3, 4), rat(5, 7)).unwrap());
        assert_eq!(c.sub(&c), LogPart::zero());
        assert_eq!(c.to_string(), "(3/4)*log(5/7) + (1)*log(2)");
    }

    #[test]
    fn log_of_one_is_zero_and_nonpositive_bases_rejected() {
        assert!(LogPart::atom(rat(5, 1), rat(1, 1)).unwrap().is_zero());
        assert!(LogPart::atom(rat(1, 1), rat(-2, 1)).is_err());
        assert!(LogPart::atom(rat(1, 1), rat(0, 1)).is_err());
    }
}
