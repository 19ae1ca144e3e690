//! Grassmann algebra over `d` holomorphic generators `th^1..th^d` and their
//! antiholomorphic partners `thb^1..thb^d`.
//!
//! Basis monomials are written in normal form `th^I thb^J` with both blocks
//! ascending; index sets are bitmasks (bit `p` = generator `p+1`). A
//! [`SuperCoeff`] maps basis pairs `(I, J)` to coefficients in an arbitrary
//! ring, with no zero components stored. All signs follow the Koszul rule
//! for the reordering of odd generators.

use crate::coeff::{CRat, Ring, RingInv};
use crate::error::{AlgebraError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Index set over the generators, as a bitmask.
pub type Mask = u16;

pub fn card(m: Mask) -> u32 {
    m.count_ones()
}

/// The full index set `{1..d}`.
pub fn full_mask(d: u8) -> Mask {
    (1u16 << d) - 1
}

fn count_above(mask: Mask, pos: u32) -> u32 {
    (mask >> (pos + 1)).count_ones()
}

fn count_below(mask: Mask, pos: u32) -> u32 {
    (mask & ((1u16 << pos) - 1)).count_ones()
}

/// Parity of the permutation sorting the concatenation of two disjoint
/// ascending words into one ascending word: counts pairs `(x in a, y in b)`
/// with `x > y`. Returns `+1` or `-1`.
pub fn merge_sign(a: Mask, b: Mask) -> i8 {
    debug_assert_eq!(a & b, 0, "merge of non-disjoint index sets");
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let y = bb.trailing_zeros();
        swaps += count_above(a, y);
        bb &= bb - 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign exponent `eps(I)` defined by `th^I th^(I') = (-1)^eps(I) th^(1..d)`
/// where `I'` is the complement: `eps(I) = sum(I) - k(k+1)/2 mod 2` for
/// `|I| = k` and 1-based indices. Returns the parity bit.
pub fn eps(i: Mask) -> u8 {
    let k = card(i) as u64;
    let mut sum = 0u64;
    let mut m = i;
    while m != 0 {
        let p = m.trailing_zeros() as u64;
        sum += p + 1;
        m &= m - 1;
    }
    (((sum + k * (k + 1) / 2) % 2) as u8) & 1
}

/// Reordering parity `lambda(K, Q) = |K'||Q| + eps(K) + eps(Q) mod 2`,
/// with complements taken inside `{1..d}`.
pub fn lambda(k: Mask, q: Mask, d: u8) -> u8 {
    let kc = full_mask(d) & !k;
    (((card(kc) * card(q)) as u8 & 1) ^ eps(k) ^ eps(q)) & 1
}

/// Product of basis monomials:
/// `(th^I1 thb^J1)(th^I2 thb^J2) -> sign * th^(I1|I2) thb^(J1|J2)`,
/// `None` when a generator repeats.
pub fn basis_mul(i1: Mask, j1: Mask, i2: Mask, j2: Mask) -> Option<(i8, Mask, Mask)> {
    if i1 & i2 != 0 || j1 & j2 != 0 {
        return None;
    }
    // move th^I2 across thb^J1, then merge both blocks
    let mut sign = if (card(j1) * card(i2)) % 2 == 0 { 1 } else { -1 };
    sign *= merge_sign(i1, i2);
    sign *= merge_sign(j1, j2);
    Some((sign, i1 | i2, j1 | j2))
}

/// Coefficients of a Grassmann element in the normal-form basis.
#[derive(Clone, PartialEq)]
pub struct SuperCoeff<C: Ring> {
    d: u8,
    comps: BTreeMap<(Mask, Mask), C>,
}

impl<C: Ring> SuperCoeff<C> {
    pub fn zero(d: u8) -> Self {
        assert!(d <= 8, "generator count out of range");
        SuperCoeff {
            d,
            comps: BTreeMap::new(),
        }
    }

    /// A purely bosonic element (component at `(0, 0)`).
    pub fn scalar(d: u8, c: C) -> Self {
        SuperCoeff::basis(d, 0, 0, c)
    }

    /// `c * th^I thb^J`.
    pub fn basis(d: u8, i: Mask, j: Mask, c: C) -> Self {
        assert!(i <= full_mask(d) && j <= full_mask(d), "index set out of range");
        let mut s = SuperCoeff::zero(d);
        if !c.is_zero() {
            s.comps.insert((i, j), c);
        }
        s
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn comp(&self, i: Mask, j: Mask) -> Option<&C> {
        self.comps.get(&(i, j))
    }

    pub fn comps(&self) -> impl Iterator<Item = (&(Mask, Mask), &C)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn insert_add(&mut self, i: Mask, j: Mask, c: C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.comps.entry((i, j)) {
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

    fn check_shape(&self, rhs: &Self) {
        assert_eq!(self.d, rhs.d, "generator count mismatch (d)");
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.comps {
            out.insert_add(i, j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.comps.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, k: &CRat) -> Self {
        if k.is_zero() {
            return SuperCoeff::zero(self.d);
        }
        let mut out = self.clone();
        for c in out.comps.values_mut() {
            *c = c.scale(k);
        }
        out
    }

    /// Applies `+/-1` to every component.
    pub fn signed(&self, sign: i8) -> Self {
        if sign >= 0 {
            self.clone()
        } else {
            self.neg()
        }
    }

    /// Wedge product with Koszul signs.
    pub fn wedge(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        let mut out = SuperCoeff::zero(self.d);
        for (&(i1, j1), a) in &self.comps {
            for (&(i2, j2), b) in &rhs.comps {
                if let Some((sign, i, j)) = basis_mul(i1, j1, i2, j2) {
                    let mut t = a.mul(b);
                    if sign < 0 {
                        t = t.neg();
                    }
                    out.insert_add(i, j, t);
                }
            }
        }
        out
    }

    /// Applies a coefficient map (must be linear).
    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> SuperCoeff<D> {
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            let v = f(c);
            if !v.is_zero() {
                out.comps.insert((i, j), v);
            }
        }
        out
    }

    /// 0 = even, 1 = odd, `None` if mixed (or ambiguous zero).
    pub fn parity(&self) -> Option<u8> {
        let mut p: Option<u8> = None;
        for &(i, j) in self.comps.keys() {
            let q = ((card(i) + card(j)) % 2) as u8;
            match p {
                None => p = Some(q),
                Some(r) if r != q => return None,
                _ => {}
            }
        }
        p.or(Some(0))
    }

    /// The part of parity `p` (0 or 1).
    pub fn parity_part(&self, p: u8) -> Self {
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            if ((card(i) + card(j)) % 2) as u8 == p {
                out.comps.insert((i, j), c.clone());
            }
        }
        out
    }

    /// True when no component touches the Grassmann generators.
    pub fn is_body_only(&self) -> bool {
        self.comps.keys().all(|&(i, j)| i == 0 && j == 0)
    }

    /// Coefficient of the volume element `th^(1..d) thb^(1..d)`.
    pub fn berezin_integral(&self) -> Option<&C> {
        self.comp(full_mask(self.d), full_mask(self.d))
    }

    /// `delta_K`: keeps the components with `I = K` and strips `th^K`:
    /// `f_{IJ} th^I thb^J -> f_{KJ} thb^J` (no sign).
    pub fn delta_proj(&self, k: Mask) -> Self {
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            if i == k {
                out.comps.insert((0, j), c.clone());
            }
        }
        out
    }

    /// `deltabar_L`: `f_{IJ} th^I thb^J -> (-1)^(|I||L|) f_{IL} th^I`.
    pub fn deltabar_proj(&self, l: Mask) -> Self {
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            if j == l {
                let v = if (card(i) * card(l)) % 2 == 0 {
                    c.clone()
                } else {
                    c.neg()
                };
                out.comps.insert((i, 0), v);
            }
        }
        out
    }

    /// Left derivative along `th^(alpha+1)` (0-based bit position).
    pub fn dtheta_left(&self, alpha: u32) -> Self {
        let bit = 1u16 << alpha;
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            if i & bit != 0 {
                let sign = count_below(i, alpha) % 2;
                let v = if sign == 0 { c.clone() } else { c.neg() };
                out.insert_add(i & !bit, j, v);
            }
        }
        out
    }

    /// Left derivative along `thb^(beta+1)`; crosses the whole `th` block.
    pub fn dthetabar_left(&self, beta: u32) -> Self {
        let bit = 1u16 << beta;
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            if j & bit != 0 {
                let sign = (card(i) + count_below(j, beta)) % 2;
                let v = if sign == 0 { c.clone() } else { c.neg() };
                out.insert_add(i, j & !bit, v);
            }
        }
        out
    }

    /// Right derivative along `th^(alpha+1)`; crosses the whole `thb` block
    /// and the `th`'s above it.
    pub fn dtheta_right(&self, alpha: u32) -> Self {
        let bit = 1u16 << alpha;
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            if i & bit != 0 {
                let sign = (card(j) + count_above(i, alpha)) % 2;
                let v = if sign == 0 { c.clone() } else { c.neg() };
                out.insert_add(i & !bit, j, v);
            }
        }
        out
    }

    /// Right derivative along `thb^(beta+1)`.
    pub fn dthetabar_right(&self, beta: u32) -> Self {
        let bit = 1u16 << beta;
        let mut out = SuperCoeff::zero(self.d);
        for (&(i, j), c) in &self.comps {
            if j & bit != 0 {
                let sign = count_above(j, beta) % 2;
                let v = if sign == 0 { c.clone() } else { c.neg() };
                out.insert_add(i, j & !bit, v);
            }
        }
        out
    }

    /// Iterated left `th` derivative along a set `S`, in the convention
    /// `d/dth^S = d/dth^(s_k) ... d/dth^(s_1)` (lowest index acts first).
    pub fn dtheta_multi_left(&self, s: Mask) -> Self {
        let mut out = self.clone();
        let mut m = s;
        while m != 0 {
            let p = m.trailing_zeros();
            out = out.dtheta_left(p);
            m &= m - 1;
        }
        out
    }

    /// Iterated left `thb` derivative along a set `T`, same convention.
    pub fn dthetabar_multi_left(&self, t: Mask) -> Self {
        let mut out = self.clone();
        let mut m = t;
        while m != 0 {
            let p = m.trailing_zeros();
            out = out.dthetabar_left(p);
            m &= m - 1;
        }
        out
    }

    /// `exp` of a nilpotent element (no bosonic component); terminates by
    /// Grassmann nilpotency.
    pub fn exp_nilpotent(&self, one: C) -> Result<Self> {
        if self.comps.keys().any(|&(i, j)| i == 0 && j == 0) {
            return Err(AlgebraError::Domain(
                "exp requires a nilpotent element (no bosonic part)".into(),
            ));
        }
        let mut acc = SuperCoeff::scalar(self.d, one);
        let mut pow = acc.clone();
        let mut fact = BigInt::one();
        for jj in 1..=(2 * self.d as u32 + 1) {
            pow = pow.wedge(self);
            if pow.is_zero() {
                break;
            }
            fact *= BigInt::from(jj);
            let inv = CRat::from_real(BigRational::new(BigInt::one(), fact.clone()));
            acc = acc.add(&pow.scale(&inv));
        }
        Ok(acc)
    }
}

impl<C: Ring> Ring for SuperCoeff<C> {
    fn is_zero(&self) -> bool {
        SuperCoeff::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        SuperCoeff::add(self, rhs)
    }
    fn neg(&self) -> Self {
        SuperCoeff::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        SuperCoeff::wedge(self, rhs)
    }
    fn scale(&self, k: &CRat) -> Self {
        SuperCoeff::scale(self, k)
    }
}

impl<C: RingInv> RingInv for SuperCoeff<C> {
    /// Pointwise (supercommutative) inverse: invert the bosonic part, then a
    /// terminating Neumann series over the nilpotent remainder.
    fn try_invert(&self) -> Result<Self> {
        let body = match self.comp(0, 0) {
            Some(b) => b.clone(),
            None => {
                return Err(AlgebraError::NotInvertible(
                    "bosonic part vanishes".into(),
                ))
            }
        };
        let binv = body.try_invert()?;
        let scaled = self.map(|c| c.mul(&binv));
        let n = {
            let mut t = scaled;
            t.comps.remove(&(0, 0));
            t
        };
        let mut acc = SuperCoeff::scalar(self.d, binv.clone());
        let mut pow = SuperCoeff::scalar(self.d, binv);
        for _ in 0..=(2 * self.d as u32) {
            pow = pow.wedge(&n).neg();
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(acc)
    }
}

impl<C: Ring> fmt::Debug for SuperCoeff<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?})")?;
            write_masks(f, i, j)?;
        }
        Ok(())
    }
}

fn write_masks(f: &mut fmt::Formatter<'_>, i: Mask, j: Mask) -> fmt::Result {
    let mut m = i;
    while m != 0 {
        let p = m.trailing_zeros();
        write!(f, " th{}", p + 1)?;
        m &= m - 1;
    }
    let mut m = j;
    while m != 0 {
        let p = m.trailing_zeros();
        write!(f, " thb{}", p + 1)?;
        m &= m - 1;
    }
    Ok(())
}

impl<C: Ring + fmt::Display> fmt::Display for SuperCoeff<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            write_masks(f, i, j)?;
        }
        Ok(())
    }
}

fn mask_to_vec(m: Mask) -> Vec<u8> {
    let mut v = Vec::new();
    let mut mm = m;
    while mm != 0 {
        let p = mm.trailing_zeros();
        v.push(p as u8 + 1);
        mm &= mm - 1;
    }
    v
}

#[derive(Serialize)]
struct SuperCompRepr<'a, C> {
    th: Vec<u8>,
    thb: Vec<u8>,
    c: &'a C,
}

impl<C: Ring + Serialize> Serialize for SuperCoeff<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.comps
            .iter()
            .map(|(&(i, j), c)| SuperCompRepr {
                th: mask_to_vec(i),
                thb: mask_to_vec(j),
                c,
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent sign oracle: Grassmann words as explicit generator lists,
    /// sorted by adjacent transpositions with sign tracking. Generators are
    /// encoded as `alpha` for `th^(alpha+1)` and `d + beta` for
    /// `thb^(beta+1)`, so ascending order is exactly the normal form.
    mod naive {
        pub fn normal_form(mut w: Vec<u8>) -> Option<(i8, Vec<u8>)> {
            let mut sign = 1i8;
            let n = w.len();
            for i in 0..n {
                for j in 0..n.saturating_sub(i + 1) {
                    if w[j] > w[j + 1] {
                        w.swap(j, j + 1);
                        sign = -sign;
                    }
                }
            }
            for p in w.windows(2) {
                if p[0] == p[1] {
                    return None;
                }
            }
            Some((sign, w))
        }

        pub fn word(d: u8, i: super::Mask, j: super::Mask) -> Vec<u8> {
            let mut w = Vec::new();
            for p in 0..16 {
                if i & (1 << p) != 0 {
                    w.push(p as u8);
                }
            }
            for p in 0..16 {
                if j & (1 << p) != 0 {
                    w.push(d + p as u8);
                }
            }
            w
        }

        /// Left derivative by generator `g`: `w = a g b -> (-1)^|a| a b`.
        pub fn left_deriv(w: &[u8], g: u8) -> Option<(i8, Vec<u8>)> {
            let pos = w.iter().position(|&x| x == g)?;
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            let mut out = w.to_vec();
            out.remove(pos);
            Some((sign, out))
        }

        /// Right derivative by generator `g`: `w = a g b -> (-1)^|b| a b`.
        pub fn right_deriv(w: &[u8], g: u8) -> Option<(i8, Vec<u8>)> {
            let pos = w.iter().position(|&x| x == g)?;
            let sign = if (w.len() - pos - 1) % 2 == 0 { 1 } else { -1 };
            let mut out = w.to_vec();
            out.remove(pos);
            Some((sign, out))
        }
    }

    fn all_masks(d: u8) -> impl Iterator<Item = Mask> {
        0..=(full_mask(d))
    }

    #[test]
    fn basis_product_matches_word_oracle() {
        for d in 1..=3u8 {
            for i1 in all_masks(d) {
                for j1 in all_masks(d) {
                    for i2 in all_masks(d) {
                        for j2 in all_masks(d) {
                            let fast = basis_mul(i1, j1, i2, j2);
                            let mut w = naive::word(d, i1, j1);
                            w.extend(naive::word(d, i2, j2));
                            let slow = naive::normal_form(w);
                            match (fast, slow) {
                                (None, None) => {}
                                (Some((s, i, j)), Some((s2, w2))) => {
                                    assert_eq!(s, s2, "sign at {i1:b},{j1:b} x {i2:b},{j2:b}");
                                    assert_eq!(naive::word(d, i, j), w2);
                                }
                                other => panic!("oracle mismatch: {other:?}"),
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn derivative_signs_match_word_oracle() {
        let d = 3u8;
        let c = CRat::one();
        for i in all_masks(d) {
            for j in all_masks(d) {
                let f = SuperCoeff::basis(d, i, j, c.clone());
                let w = naive::word(d, i, j);
                for alpha in 0..d as u32 {
                    // left th-derivative
                    let got = f.dtheta_left(alpha);
                    match naive::left_deriv(&w, alpha as u8) {
                        None => assert!(got.is_zero()),
                        Some((s, w2)) => {
                            let (&(gi, gj), gc) = got.comps().next().unwrap();
                            assert_eq!(naive::word(d, gi, gj), w2);
                            assert_eq!(gc, &CRat::from_int(s as i64));
                        }
                    }
                    // right th-derivative
                    let got = f.dtheta_right(alpha);
                    match naive::right_deriv(&w, alpha as u8) {
                        None => assert!(got.is_zero()),
                        Some((s, w2)) => {
                            let (&(gi, gj), gc) = got.comps().next().unwrap();
                            assert_eq!(naive::word(d, gi, gj), w2);
                            assert_eq!(gc, &CRat::from_int(s as i64));
                        }
                    }
                    // left and right thb-derivatives
                    let got = f.dthetabar_left(alpha);
                    match naive::left_deriv(&w, d + alpha as u8) {
                        None => assert!(got.is_zero()),
                        Some((s, w2)) => {
                            let (&(gi, gj), gc) = got.comps().next().unwrap();
                            assert_eq!(naive::word(d, gi, gj), w2);
                            assert_eq!(gc, &CRat::from_int(s as i64));
                        }
                    }
                    let got = f.dthetabar_right(alpha);
                    match naive::right_deriv(&w, d + alpha as u8) {
                        None => assert!(got.is_zero()),
                        Some((s, w2)) => {
                            let (&(gi, gj), gc) = got.comps().next().unwrap();
                            assert_eq!(naive::word(d, gi, gj), w2);
                            assert_eq!(gc, &CRat::from_int(s as i64));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn eps_satisfies_its_defining_identity() {
        // th^I th^(I') = (-1)^eps(I) th^(1..d), complements inside {1..d}
        for d in 1..=4u8 {
            for i in all_masks(d) {
                let ic = full_mask(d) & !i;
                let (sign, res, _) = basis_mul(i, 0, ic, 0).unwrap();
                assert_eq!(res, full_mask(d));
                let expect = if eps(i) == 0 { 1 } else { -1 };
                assert_eq!(sign, expect, "eps({i:b}) at d={d}");
            }
        }
        // pinned value: eps({1,3}) = (1+3) - 3 = 1 (odd)
        assert_eq!(eps(0b101), 1);
        assert_eq!(eps(0b1), 0);
    }

    #[test]
    fn wedge_is_associative_and_graded_commutative() {
        let d = 2u8;
        let elems: Vec<SuperCoeff<CRat>> = vec![
            SuperCoeff::basis(d, 0b01, 0, CRat::one()),
            SuperCoeff::basis(d, 0, 0b10, CRat::from_int(2))
                .add(&SuperCoeff::basis(d, 0b10, 0b01, CRat::i())),
            SuperCoeff::scalar(d, CRat::from_ratio(1, 3))
                .add(&SuperCoeff::basis(d, 0b11, 0, CRat::one())),
        ];
        for a in &elems {
            for b in &elems {
                for c in &elems {
                    assert_eq!(a.wedge(b).wedge(c), a.wedge(&b.wedge(c)));
                }
            }
        }
        // graded commutativity on homogeneous basis elements
        for i1 in all_masks(d) {
            for j1 in all_masks(d) {
                for i2 in all_masks(d) {
                    for j2 in all_masks(d) {
                        let a = SuperCoeff::basis(d, i1, j1, CRat::one());
                        let b = SuperCoeff::basis(d, i2, j2, CRat::one());
                        let pa = (card(i1) + card(j1)) % 2;
                        let pb = (card(i2) + card(j2)) % 2;
                        let ab = a.wedge(&b);
                        let ba = b.wedge(&a);
                        if pa * pb % 2 == 1 {
                            assert_eq!(ab, ba.neg());
                        } else {
                            assert_eq!(ab, ba);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn projections_match_their_definitions() {
        let d = 1u8;
        // f = th thb
        let f = SuperCoeff::basis(d, 1, 1, CRat::one());
        // delta_{1}(th thb) = thb
        assert_eq!(f.delta_proj(1), SuperCoeff::basis(d, 0, 1, CRat::one()));
        // deltabar_{1}(th thb) = -th
        assert_eq!(
            f.deltabar_proj(1),
            SuperCoeff::basis(d, 1, 0, CRat::from_int(-1))
        );
        // delta equals "differentiate then set th = 0"
        for d in 1..=3u8 {
            for i in all_masks(d) {
                for j in all_masks(d) {
                    let f = SuperCoeff::basis(d, i, j, CRat::one());
                    for k in all_masks(d) {
                        let via_proj = f.delta_proj(k);
                        let deriv = f.dtheta_multi_left(k);
                        // keep only the th-free part
                        let mut at_zero = SuperCoeff::zero(d);
                        for (&(di, dj), c) in deriv.comps() {
                            if di == 0 {
                                at_zero.insert_add(0, dj, c.clone());
                            }
                        }
                        assert_eq!(via_proj, at_zero, "delta_{k:b} on ({i:b},{j:b})");
                    }
                }
            }
        }
    }

    #[test]
    fn berezin_picks_the_volume_coefficient() {
        let d = 2u8;
        let f = SuperCoeff::basis(d, 0b11, 0b11, CRat::from_ratio(5, 7))
            .add(&SuperCoeff::basis(d, 0b01, 0b11, CRat::one()));
        assert_eq!(f.berezin_integral(), Some(&CRat::from_ratio(5, 7)));
        assert_eq!(SuperCoeff::<CRat>::zero(d).berezin_integral(), None);
    }

    #[test]
    fn nilpotent_exp_and_pointwise_inverse() {
        let d = 2u8;
        // Z = th1 thb1 + 2 th2 thb2
        let z = SuperCoeff::basis(d, 0b01, 0b01, CRat::one())
            .add(&SuperCoeff::basis(d, 0b10, 0b10, CRat::from_int(2)));
        let e = z.exp_nilpotent(CRat::one()).unwrap();
        assert_eq!(e.comp(0, 0), Some(&CRat::one()));
        assert_eq!(e.comp(0b01, 0b01), Some(&CRat::one()));
        // volume term: th1 thb1 th2 thb2 = -th1 th2 thb1 thb2, coefficient 1*2
        assert_eq!(e.comp(0b11, 0b11), Some(&CRat::from_int(-2)));
        let inv = e.try_invert().unwrap();
        assert_eq!(e.wedge(&inv), SuperCoeff::scalar(d, CRat::one()));
        assert!(z.try_invert().is_err());
        assert!(SuperCoeff::scalar(d, CRat::one())
            .add(&z)
            .try_invert()
            .is_ok());
    }

    #[test]
    fn parity_classification() {
        let d = 2u8;
        let even = SuperCoeff::basis(d, 0b01, 0b01, CRat::one())
            .add(&SuperCoeff::scalar(d, CRat::one()));
        assert_eq!(even.parity(), Some(0));
        let odd = SuperCoeff::basis(d, 0b01, 0, CRat::one());
        assert_eq!(odd.parity(), Some(1));
        let mixed = even.add(&odd);
        assert_eq!(mixed.parity(), None);
        assert_eq!(mixed.parity_part(1), odd);
    }
}
