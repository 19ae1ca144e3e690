//! Formal Laurent series in the deformation parameter `nu` with explicit
//! truncation tracking.
//!
//! A [`NuSeries`] stores finitely many known coefficients indexed by integer
//! powers of `nu`, together with a [`Trunc`] marker: either the series is
//! known *exactly* (all unstored coefficients are zero — e.g. polynomial
//! input data), or its coefficients are known only up to and including some
//! order `h`. Arithmetic propagates the tightest honest bound: a product is
//! known through `min(bound_a + val_b, bound_b + val_a)`.
//!
//! Invariants: no stored coefficient is zero, and every stored key is within
//! the tracked range.

use super::crat::CRat;
use super::ring::{Ring, RingInv};
use crate::error::{AlgebraError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// How far a series is known.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Trunc {
    /// Every coefficient is known; unstored ones are zero.
    Exact,
    /// Coefficients of `nu^r` are known for `r <= h` only.
    AtMost(i64),
}

impl Trunc {
    /// Upper bound as an option (`None` = unbounded).
    pub fn bound(self) -> Option<i64> {
        match self {
            Trunc::Exact => None,
            Trunc::AtMost(h) => Some(h),
        }
    }

    pub fn knows(self, r: i64) -> bool {
        match self {
            Trunc::Exact => true,
            Trunc::AtMost(h) => r <= h,
        }
    }

    pub fn min(self, other: Trunc) -> Trunc {
        match (self.bound(), other.bound()) {
            (None, None) => Trunc::Exact,
            (a, b) => Trunc::AtMost(opt_min(a, b).unwrap()),
        }
    }
}

/// Minimum of two optional bounds (`None` = unbounded).
pub(crate) fn opt_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) => x,
        (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// Sum of two optional bounds (`None` absorbs).
pub(crate) fn opt_add(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

/// See the module docs.
#[derive(Clone, PartialEq)]
pub struct NuSeries<C: Ring> {
    coeffs: BTreeMap<i64, C>,
    trunc: Trunc,
}

impl<C: Ring> NuSeries<C> {
    /// The zero series, known exactly.
    pub fn zero() -> Self {
        NuSeries {
            coeffs: BTreeMap::new(),
            trunc: Trunc::Exact,
        }
    }

    /// `c * nu^r`, known exactly.
    pub fn single(r: i64, c: C) -> Self {
        let mut s = NuSeries::zero();
        if !c.is_zero() {
            s.coeffs.insert(r, c);
        }
        s
    }

    /// Builds an exactly-known series from (order, coefficient) pairs.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, C)>) -> Self {
        let mut s = NuSeries::zero();
        for (r, c) in terms {
            s.insert_add(r, c);
        }
        s
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    /// Marks the series as known only through order `h` (dropping anything
    /// stored above it).
    pub fn truncate_to(mut self, h: i64) -> Self {
        self.trunc = self.trunc.min(Trunc::AtMost(h));
        let bound = self.trunc.bound().unwrap();
        self.coeffs.retain(|&r, _| r <= bound);
        self
    }

    /// Intersects the truncation marker with `t` (dropping coefficients the
    /// tighter marker no longer covers).
    pub fn with_trunc(self, t: Trunc) -> Self {
        match t {
            Trunc::Exact => self,
            Trunc::AtMost(h) => self.truncate_to(h),
        }
    }

    pub fn get(&self, r: i64) -> Option<&C> {
        self.coeffs.get(&r)
    }

    /// The coefficient of `nu^r` if the series is known there.
    pub fn known_coeff(&self, r: i64) -> Option<Option<&C>> {
        if self.trunc.knows(r) {
            Some(self.coeffs.get(&r))
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every *known* coefficient vanishes and the series is exact
    /// (i.e. it is the genuine zero element).
    pub fn is_exactly_zero(&self) -> bool {
        self.coeffs.is_empty() && self.trunc == Trunc::Exact
    }

    /// Lowest stored order, if any coefficient is nonzero.
    pub fn low(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Lower bound on the valuation: the first order at which a nonzero
    /// coefficient exists *or could exist* (`None` = provably zero forever).
    pub fn val_floor(&self) -> Option<i64> {
        match (self.low(), self.trunc.bound()) {
            (Some(l), _) => Some(l),
            (None, Some(h)) => Some(h + 1),
            (None, None) => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &C)> {
        self.coeffs.iter()
    }

    pub fn insert_add(&mut self, r: i64, c: C) {
        if c.is_zero() || !self.trunc.knows(r) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(r) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = NuSeries {
            coeffs: BTreeMap::new(),
            trunc: self.trunc.min(rhs.trunc),
        };
        for (&r, c) in &self.coeffs {
            out.insert_add(r, c.clone());
        }
        for (&r, c) in &rhs.coeffs {
            out.insert_add(r, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.convolve(rhs, C::mul)
    }

    /// Cauchy product with an arbitrary bilinear combiner; the result is
    /// known through `min(bound_a + low_b, bound_b + low_a)` like `mul`.
    pub fn convolve<D: Ring, E: Ring>(
        &self,
        rhs: &NuSeries<D>,
        f: impl Fn(&C, &D) -> E,
    ) -> NuSeries<E> {
        let bound = opt_min(
            opt_add(self.trunc.bound(), rhs.val_floor()),
            opt_add(rhs.trunc.bound(), self.val_floor()),
        );
        let trunc = match bound {
            None => Trunc::Exact,
            Some(h) => Trunc::AtMost(h),
        };
        let mut out = NuSeries {
            coeffs: BTreeMap::new(),
            trunc,
        };
        for (&i, a) in &self.coeffs {
            for (&j, b) in &rhs.coeffs {
                if out.trunc.knows(i + j) {
                    out.insert_add(i + j, f(a, b));
                }
            }
        }
        out
    }

    pub fn scale(&self, k: &CRat) -> Self {
        if k.is_zero() {
            return NuSeries {
                coeffs: BTreeMap::new(),
                trunc: self.trunc,
            };
        }
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.scale(k);
        }
        out
    }

    /// Applies a coefficient map (which must be linear for truncation
    /// tracking to stay honest).
    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> NuSeries<D> {
        let mut out = NuSeries {
            coeffs: BTreeMap::new(),
            trunc: self.trunc,
        };
        for (&r, c) in &self.coeffs {
            out.insert_add(r, f(c));
        }
        out
    }

    /// Multiplies by `nu^d`.
    pub fn shift(&self, d: i64) -> Self {
        let trunc = match self.trunc {
            Trunc::Exact => Trunc::Exact,
            Trunc::AtMost(h) => Trunc::AtMost(h + d),
        };
        NuSeries {
            coeffs: self.coeffs.iter().map(|(&r, c)| (r + d, c.clone())).collect(),
            trunc,
        }
    }

    /// Formal derivative `d/dnu`.
    pub fn dnu(&self) -> Self {
        let trunc = match self.trunc {
            Trunc::Exact => Trunc::Exact,
            Trunc::AtMost(h) => Trunc::AtMost(h - 1),
        };
        let mut out = NuSeries {
            coeffs: BTreeMap::new(),
            trunc,
        };
        for (&r, c) in &self.coeffs {
            out.insert_add(r - 1, c.scale(&CRat::from_int(r)));
        }
        out
    }

    /// Doubles every exponent (passage to a square-root variable). A series
    /// known through `h` in `nu` is known through `2h + 1` in the root
    /// variable, because all odd root-coefficients are known to vanish.
    pub fn stretch2(&self) -> Self {
        let trunc = match self.trunc {
            Trunc::Exact => Trunc::Exact,
            Trunc::AtMost(h) => Trunc::AtMost(2 * h + 1),
        };
        NuSeries {
            coeffs: self.coeffs.iter().map(|(&r, c)| (2 * r, c.clone())).collect(),
            trunc,
        }
    }

    /// Halves every exponent; panics if an odd-order coefficient is present.
    pub fn compress2(&self) -> Self {
        let trunc = match self.trunc {
            Trunc::Exact => Trunc::Exact,
            Trunc::AtMost(h) => Trunc::AtMost(h.div_euclid(2)),
        };
        NuSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&r, c)| {
                    assert!(r % 2 == 0, "odd root-variable order {r} survived");
                    (r / 2, c.clone())
                })
                .collect(),
            trunc,
        }
    }

    /// True when both series know order `h` and agree on every order `<= h`.
    pub fn agrees_up_to(&self, rhs: &Self, h: i64) -> bool {
        if !(self.trunc.knows(h) && rhs.trunc.knows(h)) {
            return false;
        }
        let keys: std::collections::BTreeSet<i64> = self
            .coeffs
            .keys()
            .chain(rhs.coeffs.keys())
            .copied()
            .filter(|&r| r <= h)
            .collect();
        keys.into_iter().all(|r| match (self.get(r), rhs.get(r)) {
            (None, None) => true,
            (Some(a), Some(b)) => a == b,
            _ => false,
        })
    }

    /// Largest order through which both series are known.
    pub fn common_bound(&self, rhs: &Self) -> Option<i64> {
        self.trunc.min(rhs.trunc).bound()
    }

    /// Exponential of a series whose valuation is `>= 1`; the result is
    /// reported through order `cap` (or tighter if the input is truncated).
    pub fn exp_positive_val(&self, cap: i64, one: C) -> Result<Self> {
        if let Some(v) = self.val_floor() {
            if v < 1 {
                return Err(AlgebraError::Domain(format!(
                    "exp needs valuation >= 1, found order {v}"
                )));
            }
        }
        let trunc = self.trunc.min(Trunc::AtMost(cap));
        let mut acc = NuSeries::single(0, one);
        acc.trunc = trunc;
        let mut pow = acc.clone();
        let mut fact = BigInt::one();
        let bound = trunc.bound().unwrap();
        for j in 1..=(bound.max(0) as u32 + 1) {
            pow = pow.mul(self);
            pow.trunc = trunc;
            pow.coeffs.retain(|&r, _| r <= bound);
            if pow.is_zero() {
                break;
            }
            fact *= BigInt::from(j);
            let term = pow.scale(&CRat::from_real(BigRational::new(
                BigInt::one(),
                fact.clone(),
            )));
            acc = acc.add(&term);
        }
        acc.trunc = trunc;
        Ok(acc)
    }
}

impl<C: RingInv> NuSeries<C> {
    /// Multiplicative inverse through order `target`.
    ///
    /// The leading coefficient must be present and invertible; the result's
    /// tracked range also accounts for the input's own truncation (an input
    /// known through `h` with valuation `l` pins the inverse only through
    /// `h - 2l`).
    pub fn invert(&self, target: i64) -> Result<Self> {
        let low = match self.low() {
            Some(l) => l,
            None => {
                return Err(match self.trunc {
                    Trunc::Exact => AlgebraError::NotInvertible("zero series".into()),
                    Trunc::AtMost(h) => AlgebraError::IndeterminateLeading(h),
                })
            }
        };
        let lead_inv = self.coeffs[&low].try_invert()?;
        let bound = match self.trunc.bound() {
            None => target,
            Some(h) => target.min(h - 2 * low),
        };
        let mut out = NuSeries {
            coeffs: BTreeMap::new(),
            trunc: Trunc::AtMost(bound),
        };
        // Solve a * x = 1 order by order: at order u = low + s,
        //   a_low x_s = delta_{u,0} - sum_{i > low} a_i x_{u-i}.
        for s in (-low)..=bound {
            let u = low + s;
            let mut x: Option<C> = if u == 0 {
                Some(lead_inv.clone())
            } else {
                None
            };
            for (&i, a) in self.coeffs.range((low + 1)..) {
                if let Some(prev) = out.coeffs.get(&(u - i)) {
                    let t = lead_inv.mul(&a.mul(prev));
                    x = Some(match x {
                        None => t.neg(),
                        Some(p) => p.sub(&t),
                    });
                }
            }
            if let Some(x_s) = x {
                if !x_s.is_zero() {
                    out.coeffs.insert(s, x_s);
                }
            }
        }
        Ok(out)
    }
}

impl<C: Ring> fmt::Debug for NuSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NuSeries{{")?;
        for (r, c) in &self.coeffs {
            write!(f, " nu^{r}*({c:?})")?;
        }
        match self.trunc {
            Trunc::Exact => write!(f, " ; exact }}"),
            Trunc::AtMost(h) => write!(f, " ; O(nu^{}) }}", h + 1),
        }
    }
}

/// Renders lowest `nu`-order first, with an explicit truncation marker on
/// inexact series.
impl<C: Ring + fmt::Display> fmt::Display for NuSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (r, c) in &self.coeffs {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                if *r == 0 {
                    write!(f, "{c}")?;
                } else {
                    write!(f, "nu^{r} * ({c})")?;
                }
            }
        }
        match self.trunc {
            Trunc::Exact => Ok(()),
            Trunc::AtMost(h) => write!(f, " + O(nu^{})", h + 1),
        }
    }
}

#[derive(Serialize)]
struct NuTermRepr<'a, C> {
    nu: i64,
    c: &'a C,
}

#[derive(Serialize)]
struct NuSeriesRepr<'a, C> {
    known_through: Option<i64>,
    terms: Vec<NuTermRepr<'a, C>>,
}

impl<C: Ring + Serialize> Serialize for NuSeries<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NuSeriesRepr {
            known_through: self.trunc.bound(),
            terms: self
                .coeffs
                .iter()
                .map(|(&nu, c)| NuTermRepr { nu, c })
                .collect(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(terms: &[(i64, i64)]) -> NuSeries<CRat> {
        NuSeries::from_terms(terms.iter().map(|&(r, c)| (r, CRat::from_int(c))))
    }

    #[test]
    fn arithmetic_and_truncation_propagation() {
        let a = s(&[(-1, 1), (0, 2)]).truncate_to(3);
        let b = s(&[(1, 1)]).truncate_to(4);
        let p = a.mul(&b);
        // a known through 3 with val -1; b known through 4 with val 1:
        // product known through min(3+1, 4-1) = 3.
        assert_eq!(p.trunc, Trunc::AtMost(3));
        assert_eq!(p.get(0), Some(&CRat::from_int(1)));
        assert_eq!(p.get(1), Some(&CRat::from_int(2)));
        let sum = a.add(&b);
        assert_eq!(sum.trunc, Trunc::AtMost(3));
        // exact polynomials multiply exactly
        let e = s(&[(0, 1), (2, 5)]).mul(&s(&[(1, 3)]));
        assert_eq!(e.trunc, Trunc::Exact);
        assert_eq!(e.get(1), Some(&CRat::from_int(3)));
        assert_eq!(e.get(3), Some(&CRat::from_int(15)));
    }

    #[test]
    fn zero_handling() {
        let z = NuSeries::<CRat>::zero();
        assert!(z.is_exactly_zero());
        let a = s(&[(2, 7)]).truncate_to(5);
        assert!(z.mul(&a).is_exactly_zero());
        let cancel = a.sub(&a);
        assert!(cancel.is_zero());
        assert_eq!(cancel.trunc, Trunc::AtMost(5));
        assert_eq!(cancel.val_floor(), Some(6));
    }

    #[test]
    fn inversion_is_two_sided_up_to_target() {
        let a = s(&[(-2, 3), (0, 1), (1, -4)]);
        let inv = a.invert(8).unwrap();
        assert_eq!(inv.low(), Some(2));
        // the product of (exact a, val -2) with (inv known through 8) is
        // known through 8 - 2 = 6
        let prod = a.mul(&inv);
        assert!(prod.agrees_up_to(&NuSeries::single(0, CRat::one()), 6));
        let prod2 = inv.mul(&a);
        assert!(prod2.agrees_up_to(&NuSeries::single(0, CRat::one()), 6));
    }

    #[test]
    fn inversion_respects_input_truncation() {
        // known through 1 with valuation -1: inverse honest only through 3
        let a = s(&[(-1, 1), (0, 1)]).truncate_to(1);
        let inv = a.invert(10).unwrap();
        assert_eq!(inv.trunc, Trunc::AtMost(3));
        assert!(a.mul(&inv).agrees_up_to(&NuSeries::single(0, CRat::one()), 2));
    }

    #[test]
    fn indeterminate_leading_is_an_error() {
        let z = NuSeries::<CRat>::zero().truncate_to(4);
        assert_eq!(z.invert(8), Err(AlgebraError::IndeterminateLeading(4)));
        assert!(matches!(
            NuSeries::<CRat>::zero().invert(8),
            Err(AlgebraError::NotInvertible(_))
        ));
    }

    #[test]
    fn exp_of_positive_valuation_series() {
        let a = s(&[(1, 1)]);
        let e = a.exp_positive_val(4, CRat::one()).unwrap();
        // e^(nu) = 1 + nu + nu^2/2 + nu^3/6 + nu^4/24
        assert_eq!(e.get(0), Some(&CRat::one()));
        assert_eq!(e.get(2), Some(&CRat::from_ratio(1, 2)));
        assert_eq!(e.get(4), Some(&CRat::from_ratio(1, 24)));
        assert_eq!(e.trunc, Trunc::AtMost(4));
        assert!(s(&[(0, 1)]).exp_positive_val(4, CRat::one()).is_err());
    }

    #[test]
    fn stretch_and_compress_roundtrip() {
        let a = s(&[(-1, 2), (3, 5)]).truncate_to(4);
        let st = a.stretch2();
        assert_eq!(st.get(-2), Some(&CRat::from_int(2)));
        assert_eq!(st.trunc, Trunc::AtMost(9));
        let back = st.compress2();
        assert_eq!(back, a);
    }

    #[test]
    fn dnu_matches_termwise_rule() {
        let a = s(&[(-1, 3), (0, 7), (2, 5)]);
        let d = a.dnu();
        assert_eq!(d.get(-2), Some(&CRat::from_int(-3)));
        assert_eq!(d.get(-1), None);
        assert_eq!(d.get(1), Some(&CRat::from_int(10)));
    }
}
