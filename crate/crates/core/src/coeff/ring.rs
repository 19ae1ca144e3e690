//! Coefficient-ring abstraction shared by the series and Grassmann layers.

use super::crat::CRat;
use crate::error::Result;

/// Operations every coefficient ring must offer.
///
/// Implementors: [`CRat`], [`super::jet::Jet`], and Grassmann elements over
/// either. Binary operations panic on shape mismatch (different variable
/// count, truncation degree, or generator count); those are programming
/// errors, not data errors.
pub trait Ring: Clone + PartialEq + std::fmt::Debug {
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Multiplies by an exact complex rational scalar.
    fn scale(&self, k: &CRat) -> Self;

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }
}

/// Rings in which inversion of suitable elements is defined.
pub trait RingInv: Ring {
    /// Multiplicative inverse, or a domain error naming the obstruction.
    fn try_invert(&self) -> Result<Self>;
}

impl Ring for CRat {
    fn is_zero(&self) -> bool {
        CRat::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, k: &CRat) -> Self {
        self * k
    }
}

impl RingInv for CRat {
    fn try_invert(&self) -> Result<Self> {
        if self.is_zero() {
            Err(crate::error::AlgebraError::NotInvertible(
                "zero scalar".into(),
            ))
        } else {
            Ok(self.recip())
        }
    }
}
