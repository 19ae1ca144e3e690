//! Truncated polynomial germs at the base point of `C^m`.
//!
//! A [`Jet`] stores a polynomial in the holomorphic coordinates `z^1..z^m`
//! and the antiholomorphic coordinates `zb^1..zb^m`, treated as independent
//! commuting formal variables, truncated at a fixed total degree `cap`.
//! Invariants:
//!
//! * every stored monomial has total degree `<= cap`;
//! * no stored coefficient is zero;
//! * a jet may carry a Gaussian envelope weight `w >= 0`, in which case it
//!   represents `p(z, zb) * exp(-w * sum_k z^k zb^k)`; the zero jet always
//!   has weight 0.
//!
//! All arithmetic is exact; products truncate at `cap`.

use super::crat::{factorial, CRat};
use super::ring::{Ring, RingInv};
use crate::error::{AlgebraError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector of a monomial: `m` z-exponents then `m` zb-exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mono(pub Box<[u8]>);

impl Mono {
    pub fn unit(m: u8) -> Self {
        Mono(vec![0u8; 2 * m as usize].into_boxed_slice())
    }

    pub fn from_parts(z: &[u8], zb: &[u8]) -> Self {
        let mut v = Vec::with_capacity(z.len() + zb.len());
        v.extend_from_slice(z);
        v.extend_from_slice(zb);
        Mono(v.into_boxed_slice())
    }

    pub fn z<'a>(&'a self, m: u8) -> &'a [u8] {
        &self.0[..m as usize]
    }

    pub fn zb<'a>(&'a self, m: u8) -> &'a [u8] {
        &self.0[m as usize..]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn checked_add(&self, rhs: &Mono) -> Mono {
        let v: Vec<u8> = self
            .0
            .iter()
            .zip(rhs.0.iter())
            .map(|(&a, &b)| a.checked_add(b).expect("monomial exponent overflow"))
            .collect();
        Mono(v.into_boxed_slice())
    }

    /// Swaps the z and zb exponent blocks.
    fn swapped(&self, m: u8) -> Mono {
        Mono::from_parts(self.zb(m), self.z(m))
    }
}

/// See the module docs. `cap` is the total-degree truncation bound.
#[derive(Clone, PartialEq, Eq)]
pub struct Jet {
    m: u8,
    cap: u8,
    weight: u32,
    terms: BTreeMap<Mono, CRat>,
}

impl Jet {
    pub fn zero(m: u8, cap: u8) -> Self {
        assert!(cap <= 100, "truncation degree out of range");
        Jet {
            m,
            cap,
            weight: 0,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: u8, cap: u8, c: CRat) -> Self {
        let mut j = Jet::zero(m, cap);
        if !c.is_zero() {
            j.terms.insert(Mono::unit(m), c);
        }
        j
    }

    pub fn one(m: u8, cap: u8) -> Self {
        Jet::constant(m, cap, CRat::one())
    }

    /// `c * z^a zb^b`. Panics when the exponent slices have the wrong length
    /// or the monomial exceeds the truncation degree.
    pub fn monomial(m: u8, cap: u8, z: &[u8], zb: &[u8], c: CRat) -> Self {
        assert_eq!(z.len(), m as usize, "z exponent count != m");
        assert_eq!(zb.len(), m as usize, "zb exponent count != m");
        let mono = Mono::from_parts(z, zb);
        assert!(
            mono.degree() <= cap as u32,
            "monomial degree {} exceeds truncation {}",
            mono.degree(),
            cap
        );
        let mut j = Jet::zero(m, cap);
        if !c.is_zero() {
            j.terms.insert(mono, c);
        }
        j
    }

    /// The coordinate `z^k` (0-based index).
    pub fn var_z(m: u8, cap: u8, k: usize) -> Self {
        assert!(k < m as usize);
        let mut z = vec![0u8; m as usize];
        z[k] = 1;
        Jet::monomial(m, cap, &z, &vec![0u8; m as usize], CRat::one())
    }

    /// The coordinate `zb^l` (0-based index).
    pub fn var_zb(m: u8, cap: u8, l: usize) -> Self {
        assert!(l < m as usize);
        let mut zb = vec![0u8; m as usize];
        zb[l] = 1;
        Jet::monomial(m, cap, &vec![0u8; m as usize], &zb, CRat::one())
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Attaches a Gaussian envelope `exp(-w * sum z^k zb^k)`.
    pub fn with_weight(mut self, w: u32) -> Self {
        self.weight = if self.terms.is_empty() { 0 } else { w };
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> CRat {
        self.terms
            .get(&Mono::unit(self.m))
            .cloned()
            .unwrap_or_else(CRat::zero)
    }

    pub fn coeff(&self, z: &[u8], zb: &[u8]) -> CRat {
        self.terms
            .get(&Mono::from_parts(z, zb))
            .cloned()
            .unwrap_or_else(CRat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &CRat)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Largest total degree present (0 for the zero jet).
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.degree()).max().unwrap_or(0)
    }

    /// Smallest total degree present, or `None` for the zero jet.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.degree()).min()
    }

    /// The part of total degree exactly `p` (same weight).
    pub fn degree_part(&self, p: u32) -> Jet {
        let mut out = Jet::zero(self.m, self.cap);
        for (k, v) in &self.terms {
            if k.degree() == p {
                out.terms.insert(k.clone(), v.clone());
            }
        }
        out.weight = if out.terms.is_empty() { 0 } else { self.weight };
        out
    }

    fn insert_add(&mut self, mono: Mono, c: CRat) {
        if c.is_zero() || mono.degree() > self.cap as u32 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn normalize(mut self) -> Self {
        if self.terms.is_empty() {
            self.weight = 0;
        }
        self
    }

    fn check_shape(&self, rhs: &Jet) {
        assert_eq!(self.m, rhs.m, "jet dimension mismatch (m)");
        assert_eq!(self.cap, rhs.cap, "jet truncation mismatch (cap)");
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        self.check_shape(rhs);
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        assert_eq!(
            self.weight, rhs.weight,
            "cannot add jets with different gaussian weights"
        );
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.insert_add(k.clone(), v.clone());
        }
        out.normalize()
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = -&*v;
        }
        out
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, k: &CRat) -> Jet {
        if k.is_zero() {
            return Jet::zero(self.m, self.cap);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = &*v * k;
        }
        out
    }

    pub fn scale_rat(&self, f: &BigRational) -> Jet {
        self.scale(&CRat::from_real(f.clone()))
    }

    /// Truncating product; Gaussian weights add.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        self.check_shape(rhs);
        let mut out = Jet::zero(self.m, self.cap);
        if self.is_zero() || rhs.is_zero() {
            return out;
        }
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                if ka.degree() + kb.degree() > self.cap as u32 {
                    continue;
                }
                out.insert_add(ka.checked_add(kb), va * vb);
            }
        }
        out.weight = self.weight + rhs.weight;
        out.normalize()
    }

    /// Multiplies by a single monomial (cheap path for coordinate factors).
    pub fn mul_monomial(&self, z: &[u8], zb: &[u8], c: &CRat) -> Jet {
        let mono = Mono::from_parts(z, zb);
        let mut out = Jet::zero(self.m, self.cap);
        out.weight = self.weight;
        if c.is_zero() {
            return out.normalize();
        }
        for (k, v) in &self.terms {
            if k.degree() + mono.degree() > self.cap as u32 {
                continue;
            }
            out.insert_add(k.checked_add(&mono), v * c);
        }
        out.normalize()
    }

    /// Inverse of a weightless jet with nonvanishing constant term.
    pub fn invert(&self) -> Result<Jet> {
        if self.weight != 0 {
            return Err(AlgebraError::Domain(
                "cannot invert a Gaussian-weighted jet".into(),
            ));
        }
        let c = self.constant_term();
        if c.is_zero() {
            return Err(AlgebraError::NotInvertible(
                "jet constant term vanishes".into(),
            ));
        }
        let cinv = c.recip();
        // f = c (1 + n) with val(n) >= 1, so 1/f = (sum (-n)^j) / c.
        let n = self.scale(&cinv).sub(&Jet::one(self.m, self.cap));
        let mut acc = Jet::one(self.m, self.cap);
        let mut pow = Jet::one(self.m, self.cap);
        for _ in 0..self.cap {
            pow = pow.mul(&n).neg();
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(acc.scale(&cinv))
    }

    /// `exp` of a weightless jet with zero constant term.
    pub fn exp(&self) -> Result<Jet> {
        if self.weight != 0 || !self.constant_term().is_zero() {
            return Err(AlgebraError::Domain(
                "jet exp requires weight 0 and zero constant term".into(),
            ));
        }
        let mut acc = Jet::one(self.m, self.cap);
        let mut pow = Jet::one(self.m, self.cap);
        let mut fact = BigInt::one();
        for j in 1..=self.cap as u32 {
            pow = pow.mul(self);
            if pow.is_zero() {
                break;
            }
            fact *= BigInt::from(j);
            acc = acc.add(&pow.scale_rat(&BigRational::new(BigInt::one(), fact.clone())));
        }
        Ok(acc)
    }

    /// `log` of a weightless jet with constant term 1.
    pub fn log(&self) -> Result<Jet> {
        if self.weight != 0 || !self.constant_term().is_one() {
            return Err(AlgebraError::Domain(
                "jet log requires weight 0 and constant term 1".into(),
            ));
        }
        let g = self.sub(&Jet::one(self.m, self.cap));
        let mut acc = Jet::zero(self.m, self.cap);
        let mut pow = Jet::one(self.m, self.cap);
        for j in 1..=self.cap as u32 {
            pow = pow.mul(&g);
            if pow.is_zero() {
                break;
            }
            let sign = if j % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&pow.scale_rat(&BigRational::new(BigInt::from(sign), BigInt::from(j))));
        }
        Ok(acc)
    }

    /// `d/dz^k`, acting on the envelope too:
    /// `d/dz^k (p e^{-wZ}) = (dp/dz^k - w zb^k p) e^{-wZ}`.
    pub fn deriv_z(&self, k: usize) -> Jet {
        assert!(k < self.m as usize);
        let mut out = Jet::zero(self.m, self.cap);
        out.weight = self.weight;
        for (mono, c) in &self.terms {
            let e = mono.0[k];
            if e > 0 {
                let mut v = mono.0.to_vec();
                v[k] = e - 1;
                out.insert_add(Mono(v.into_boxed_slice()), c.scale_int(e as i64));
            }
            if self.weight > 0 {
                let mut v = mono.0.to_vec();
                let kb = self.m as usize + k;
                v[kb] = v[kb].checked_add(1).expect("monomial exponent overflow");
                out.insert_add(
                    Mono(v.into_boxed_slice()),
                    c.scale_int(-(self.weight as i64)),
                );
            }
        }
        out.normalize()
    }

    /// `d/dzb^l`, acting on the envelope too.
    pub fn deriv_zb(&self, l: usize) -> Jet {
        assert!(l < self.m as usize);
        let mut out = Jet::zero(self.m, self.cap);
        out.weight = self.weight;
        let lb = self.m as usize + l;
        for (mono, c) in &self.terms {
            let e = mono.0[lb];
            if e > 0 {
                let mut v = mono.0.to_vec();
                v[lb] = e - 1;
                out.insert_add(Mono(v.into_boxed_slice()), c.scale_int(e as i64));
            }
            if self.weight > 0 {
                let mut v = mono.0.to_vec();
                v[l] = v[l].checked_add(1).expect("monomial exponent overflow");
                out.insert_add(
                    Mono(v.into_boxed_slice()),
                    c.scale_int(-(self.weight as i64)),
                );
            }
        }
        out.normalize()
    }

    /// Iterated `deriv_z` along a z-multi-index.
    pub fn deriv_z_multi(&self, alpha: &[u8]) -> Jet {
        let mut out = self.clone();
        for (k, &e) in alpha.iter().enumerate() {
            for _ in 0..e {
                out = out.deriv_z(k);
            }
        }
        out
    }

    /// Iterated `deriv_zb` along a zb-multi-index.
    pub fn deriv_zb_multi(&self, beta: &[u8]) -> Jet {
        let mut out = self.clone();
        for (l, &e) in beta.iter().enumerate() {
            for _ in 0..e {
                out = out.deriv_zb(l);
            }
        }
        out
    }

    /// Antiderivative in `z^k` with zero constant of integration. Monomials
    /// whose degree would exceed the truncation are dropped, so the input is
    /// recovered by `deriv_z` only up to degree `cap - 1`.
    pub fn antideriv_z(&self, k: usize) -> Jet {
        assert!(k < self.m as usize);
        assert_eq!(self.weight, 0, "antiderivative requires weight 0");
        let mut out = Jet::zero(self.m, self.cap);
        for (mono, c) in &self.terms {
            if mono.degree() + 1 > self.cap as u32 {
                continue;
            }
            let mut v = mono.0.to_vec();
            v[k] += 1;
            let e = v[k] as i64;
            out.insert_add(
                Mono(v.into_boxed_slice()),
                c.scale_rat(&BigRational::new(BigInt::one(), BigInt::from(e))),
            );
        }
        out
    }

    /// Antiderivative in `zb^l` with zero constant of integration.
    pub fn antideriv_zb(&self, l: usize) -> Jet {
        assert!(l < self.m as usize);
        assert_eq!(self.weight, 0, "antiderivative requires weight 0");
        let mut out = Jet::zero(self.m, self.cap);
        let lb = self.m as usize + l;
        for (mono, c) in &self.terms {
            if mono.degree() + 1 > self.cap as u32 {
                continue;
            }
            let mut v = mono.0.to_vec();
            v[lb] += 1;
            let e = v[lb] as i64;
            out.insert_add(
                Mono(v.into_boxed_slice()),
                c.scale_rat(&BigRational::new(BigInt::one(), BigInt::from(e))),
            );
        }
        out
    }

    /// Swaps z with zb and conjugates every coefficient (formal complex
    /// conjugation of the germ).
    pub fn conj_swap(&self) -> Jet {
        let mut out = Jet::zero(self.m, self.cap);
        out.weight = self.weight;
        for (mono, c) in &self.terms {
            out.insert_add(mono.swapped(self.m), c.conj());
        }
        out.normalize()
    }

    /// Exact Gaussian integral over `C^m` in units of `pi^m`:
    /// the moment of `z^a zb^b e^{-w|z|^2}` is `prod_k a_k! / w^(a_k+1)`
    /// when `a = b` componentwise and 0 otherwise. Requires `w >= 1`.
    pub fn gaussian_moment(&self) -> Result<CRat> {
        if self.weight == 0 && !self.is_zero() {
            return Err(AlgebraError::Domain(
                "gaussian moment requires weight >= 1".into(),
            ));
        }
        let w = BigInt::from(self.weight.max(1));
        let mut acc = CRat::zero();
        for (mono, c) in &self.terms {
            let (z, zb) = (mono.z(self.m), mono.zb(self.m));
            if z != zb {
                continue;
            }
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            for &a in z {
                num *= factorial(a as u32);
                den *= w.pow(a as u32 + 1);
            }
            acc = &acc + &c.scale_rat(&BigRational::new(num, den));
        }
        Ok(acc)
    }
}

impl Ring for Jet {
    fn is_zero(&self) -> bool {
        Jet::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        Jet::add(self, rhs)
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Jet::mul(self, rhs)
    }
    fn scale(&self, k: &CRat) -> Self {
        Jet::scale(self, k)
    }
}

impl RingInv for Jet {
    fn try_invert(&self) -> Result<Self> {
        Jet::invert(self)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (k, &e) in mono.z(self.m).iter().enumerate() {
                if e == 1 {
                    write!(f, " z{}", k + 1)?;
                } else if e > 1 {
                    write!(f, " z{}^{}", k + 1, e)?;
                }
            }
            for (l, &e) in mono.zb(self.m).iter().enumerate() {
                if e == 1 {
                    write!(f, " zb{}", l + 1)?;
                } else if e > 1 {
                    write!(f, " zb{}^{}", l + 1, e)?;
                }
            }
        }
        if self.weight > 0 {
            write!(f, " * exp(-{}|z|^2)", self.weight)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Serialized term of a jet.
#[derive(Serialize)]
struct JetTermRepr {
    z: Vec<u8>,
    zb: Vec<u8>,
    c: CRat,
}

#[derive(Serialize)]
struct JetRepr {
    weight: u32,
    terms: Vec<JetTermRepr>,
}

impl Serialize for Jet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JetRepr {
            weight: self.weight,
            terms: self
                .terms
                .iter()
                .map(|(mono, c)| JetTermRepr {
                    z: mono.z(self.m).to_vec(),
                    zb: mono.zb(self.m).to_vec(),
                    c: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(k: usize) -> Jet {
        Jet::var_z(2, 6, k)
    }
    fn zb(l: usize) -> Jet {
        Jet::var_zb(2, 6, l)
    }

    /// Evaluation at a rational point is a ring homomorphism as long as no
    /// truncation occurs; used as an independent oracle for `mul`.
    fn eval(j: &Jet, pz: &[CRat], pzb: &[CRat]) -> CRat {
        let mut acc = CRat::zero();
        for (mono, c) in j.terms() {
            let mut t = c.clone();
            for (k, &e) in mono.z(j.m()).iter().enumerate() {
                for _ in 0..e {
                    t = &t * &pz[k];
                }
            }
            for (l, &e) in mono.zb(j.m()).iter().enumerate() {
                for _ in 0..e {
                    t = &t * &pzb[l];
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    #[test]
    fn product_matches_evaluation_oracle() {
        let f = z(0).mul(&zb(1)).add(&z(1).scale(&CRat::from_ratio(3, 2)));
        let g = zb(0).add(&Jet::one(2, 6)).add(&z(0).mul(&z(0)));
        let p = f.mul(&g);
        let pz = [CRat::from_ratio(1, 2), CRat::from_ratio(-2, 3)];
        let pzb = [CRat::from_int(3), CRat::from_ratio(1, 5)];
        assert_eq!(
            eval(&p, &pz, &pzb),
            &eval(&f, &pz, &pzb) * &eval(&g, &pz, &pzb)
        );
    }

    #[test]
    fn truncation_drops_products_beyond_cap() {
        let f = Jet::monomial(1, 3, &[2], &[0], CRat::one());
        let g = Jet::monomial(1, 3, &[0], &[2], CRat::one());
        assert!(f.mul(&g).is_zero());
        let h = Jet::monomial(1, 3, &[0], &[1], CRat::one());
        assert_eq!(
            f.mul(&h),
            Jet::monomial(1, 3, &[2], &[1], CRat::one())
        );
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn dimension_mismatch_panics() {
        let _ = Jet::one(1, 6).add(&Jet::one(2, 6));
    }

    #[test]
    fn invert_exp_log_roundtrips() {
        let f = Jet::one(2, 6)
            .add(&z(0).mul(&zb(0)).scale(&CRat::from_ratio(1, 3)))
            .add(&z(1).scale(&CRat::from_int(2)));
        let finv = f.invert().unwrap();
        assert_eq!(f.mul(&finv), Jet::one(2, 6));
        let l = f.log().unwrap();
        let back = l.exp().unwrap();
        assert_eq!(back, f);
        assert!(Jet::zero(2, 6).invert().is_err());
        assert!(z(0).log().is_err());
    }

    #[test]
    fn derivative_and_antiderivative() {
        let f = z(0).mul(&z(0)).mul(&zb(1)); // z1^2 zb2
        assert_eq!(f.deriv_z(0), z(0).mul(&zb(1)).scale(&CRat::from_int(2)));
        assert_eq!(f.deriv_zb(1), z(0).mul(&z(0)));
        assert!(f.deriv_z(1).is_zero());
        // antiderivative undoes the derivative on degrees < cap
        let g = f.deriv_z(0).antideriv_z(0);
        assert_eq!(g, f);
    }

    #[test]
    fn weighted_derivative_rule() {
        // d/dz (1 * e^{-2|z|^2}) = -2 zb e^{-2|z|^2}
        let f = Jet::one(1, 6).with_weight(2);
        let df = f.deriv_z(0);
        let expect = Jet::var_zb(1, 6, 0)
            .scale(&CRat::from_int(-2))
            .with_weight(2);
        assert_eq!(df, expect);
        // product rule against the polynomial factor
        let g = Jet::var_z(1, 6, 0).with_weight(1); // z e^{-|z|^2}
        let dg = g.deriv_z(0);
        let expect2 = Jet::one(1, 6)
            .add(&Jet::monomial(1, 6, &[1], &[1], CRat::from_int(-1)))
            .with_weight(1);
        assert_eq!(dg, expect2);
    }

    #[test]
    fn gaussian_moments() {
        // oracle values: integral of z^a zb^a e^{-w|z|^2} = a!/w^(a+1) (pi units)
        let m1 = Jet::monomial(1, 6, &[1], &[1], CRat::one()).with_weight(1);
        assert_eq!(m1.gaussian_moment().unwrap(), CRat::from_int(1));
        let m2 = Jet::monomial(1, 6, &[2], &[2], CRat::one()).with_weight(1);
        assert_eq!(m2.gaussian_moment().unwrap(), CRat::from_int(2));
        let c = Jet::one(1, 6).with_weight(2);
        assert_eq!(c.gaussian_moment().unwrap(), CRat::from_ratio(1, 2));
        let off = Jet::monomial(1, 6, &[1], &[0], CRat::one()).with_weight(1);
        assert_eq!(off.gaussian_moment().unwrap(), CRat::zero());
        // 2-dimensional product structure
        let p = Jet::monomial(2, 6, &[1, 0], &[1, 0], CRat::one()).with_weight(3);
        assert_eq!(p.gaussian_moment().unwrap(), CRat::from_ratio(1, 27));
        assert!(Jet::one(1, 6).gaussian_moment().is_err());
    }

    #[test]
    fn weights_add_under_products_and_zero_is_weightless() {
        let f = Jet::one(1, 6).with_weight(1);
        let g = Jet::var_z(1, 6, 0).with_weight(2);
        assert_eq!(f.mul(&g).weight(), 3);
        let zero = f.sub(&f);
        assert_eq!(zero.weight(), 0);
        assert!(zero.is_zero());
    }

    #[test]
    fn conjugation_swaps_blocks() {
        let f = Jet::monomial(1, 6, &[2], &[1], CRat::i());
        let c = f.conj_swap();
        assert_eq!(c, Jet::monomial(1, 6, &[1], &[2], -&CRat::i()));
        assert_eq!(c.conj_swap(), f);
    }
}
