//! One-sided differential operators on the bosonic base: finite sums
//! `sum_alpha c_alpha(z, zb) d^alpha` where `d` differentiates only `z`
//! (side `Z`) or only `zb` (side `Zb`). These are the building blocks of
//! the order-by-order star-product construction, with the two commutator
//! moves it needs in closed form.

use crate::coeff::{factorial, CRat, Jet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::BTreeMap;

/// Which variable family the operator differentiates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    Z,
    Zb,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Z => Side::Zb,
            Side::Zb => Side::Z,
        }
    }
}

/// Multi-binomial coefficient `prod_i C(a_i, b_i)` (requires `b <= a`).
pub fn multi_binom(a: &[u8], b: &[u8]) -> CRat {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (&ai, &bi) in a.iter().zip(b) {
        debug_assert!(bi <= ai);
        num *= factorial(ai as u32);
        den *= factorial(bi as u32) * factorial((ai - bi) as u32);
    }
    CRat::from_real(BigRational::new(num, den))
}

/// Enumerates all exponent vectors of length `m` with total degree `deg`.
pub fn exponents_of_degree(m: usize, deg: u32) -> Vec<Vec<u8>> {
    fn rec(m: usize, deg: u32, out: &mut Vec<Vec<u8>>, prefix: &mut Vec<u8>) {
        if m == 1 {
            assert!(deg <= u8::MAX as u32);
            prefix.push(deg as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in 0..=deg {
            prefix.push(e as u8);
            rec(m - 1, deg - e, out, prefix);
            prefix.pop();
        }
    }
    if m == 0 {
        return if deg == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(m, deg, &mut out, &mut Vec::new());
    out
}

#[derive(Clone, PartialEq, Debug)]
pub struct HoloOp {
    m: u8,
    cap: u8,
    side: Side,
    terms: BTreeMap<Box<[u8]>, Jet>,
}

impl HoloOp {
    pub fn zero(m: u8, cap: u8, side: Side) -> Self {
        HoloOp {
            m,
            cap,
            side,
            terms: BTreeMap::new(),
        }
    }

    /// The multiplication operator `M_c`.
    pub fn mult(side: Side, c: &Jet) -> Self {
        let mut op = HoloOp::zero(c.m(), c.cap(), side);
        op.insert_add(vec![0; c.m() as usize].into_boxed_slice(), c.clone());
        op
    }

    pub fn m(&self) -> u8 {
        self.m
    }
    pub fn side(&self) -> Side {
        self.side
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Box<[u8]>, &Jet)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &[u8]) -> Option<&Jet> {
        self.terms.get(alpha)
    }

    /// Coefficient of the identity word (the operator applied to 1).
    pub fn apply_one(&self) -> Jet {
        self.coeff(&vec![0u8; self.m as usize][..])
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.m, self.cap))
    }

    pub fn order(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().map(|&e| e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn insert_add(&mut self, alpha: Box<[u8]>, c: Jet) {
        if c.is_zero() {
            return;
        }
        assert_eq!(alpha.len(), self.m as usize);
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
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
        assert_eq!(self.m, rhs.m, "dimension mismatch (m)");
        assert_eq!(self.cap, rhs.cap, "jet truncation mismatch (cap)");
        assert_eq!(self.side, rhs.side, "operator side mismatch");
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.insert_add(a.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, k: &CRat) -> Self {
        if k.is_zero() {
            return HoloOp::zero(self.m, self.cap, self.side);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(k);
        }
        out
    }

    fn dir_deriv(&self, f: &Jet, alpha: &[u8]) -> Jet {
        match self.side {
            Side::Z => f.deriv_z_multi(alpha),
            Side::Zb => f.deriv_zb_multi(alpha),
        }
    }

    pub fn apply(&self, f: &Jet) -> Jet {
        let mut out = Jet::zero(self.m, self.cap);
        for (alpha, c) in &self.terms {
            let df = self.dir_deriv(f, alpha);
            if !df.is_zero() {
                out = out.add(&c.mul(&df));
            }
        }
        out
    }

    /// `[A, M_h] = sum_alpha c_alpha sum_{0 < beta <= alpha}
    /// C(alpha, beta) (d^beta h) d^{alpha - beta}` (same-side derivatives).
    pub fn commut_mult(&self, h: &Jet) -> Self {
        let mut out = HoloOp::zero(self.m, self.cap, self.side);
        for (alpha, c) in &self.terms {
            let deg: u32 = alpha.iter().map(|&e| e as u32).sum();
            for bdeg in 1..=deg {
                for beta in exponents_of_degree(self.m as usize, bdeg) {
                    if beta.iter().zip(alpha.iter()).any(|(&b, &a)| b > a) {
                        continue;
                    }
                    let dh = self.dir_deriv(h, &beta);
                    if dh.is_zero() {
                        continue;
                    }
                    let rest: Vec<u8> = alpha
                        .iter()
                        .zip(beta.iter())
                        .map(|(&a, &b)| a - b)
                        .collect();
                    let coeff = c.mul(&dh).scale(&multi_binom(alpha, &beta));
                    out.insert_add(rest.into_boxed_slice(), coeff);
                }
            }
        }
        out
    }

    /// `[A, d_other^l] = -sum_alpha (d_other^l c_alpha) d^alpha`, the
    /// commutator with a derivative along the opposite family.
    pub fn commut_other_deriv(&self, l: usize) -> Self {
        let mut out = HoloOp::zero(self.m, self.cap, self.side);
        for (alpha, c) in &self.terms {
            let dc = match self.side {
                Side::Z => c.deriv_zb(l),
                Side::Zb => c.deriv_z(l),
            };
            out.insert_add(alpha.clone(), dc.neg());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_mono(m: u8, cap: u8, z: &[u8], zb: &[u8]) -> Jet {
        Jet::monomial(m, cap, z, zb, CRat::one())
    }

    #[test]
    fn commutator_with_multiplier_matches_direct_action() {
        // oracle: [A, M_h](f) = A(h f) - h A(f), degrees kept inside cap
        let (m, cap) = (2u8, 10u8);
        let mut a = HoloOp::zero(m, cap, Side::Z);
        a.insert_add(
            vec![2, 0].into_boxed_slice(),
            z_mono(m, cap, &[0, 1], &[1, 0]),
        );
        a.insert_add(vec![1, 1].into_boxed_slice(), Jet::one(m, cap));
        let h = z_mono(m, cap, &[1, 1], &[0, 1]).add(&z_mono(m, cap, &[2, 0], &[0, 0]));
        let comm = a.commut_mult(&h);
        for f in [
            z_mono(m, cap, &[1, 2], &[1, 0]),
            z_mono(m, cap, &[3, 0], &[0, 2]),
            Jet::one(m, cap),
        ] {
            let direct = a.apply(&h.mul(&f)).sub(&h.mul(&a.apply(&f)));
            assert_eq!(comm.apply(&f), direct);
        }
        // and the zb-side analogue
        let mut b = HoloOp::zero(m, cap, Side::Zb);
        b.insert_add(
            vec![0, 2].into_boxed_slice(),
            z_mono(m, cap, &[1, 0], &[0, 1]),
        );
        let commb = b.commut_mult(&h);
        let f = z_mono(m, cap, &[1, 0], &[2, 2]);
        let direct = b.apply(&h.mul(&f)).sub(&h.mul(&b.apply(&f)));
        assert_eq!(commb.apply(&f), direct);
    }

    #[test]
    fn commutator_with_opposite_derivative_matches_direct_action() {
        let (m, cap) = (1u8, 8u8);
        let mut a = HoloOp::zero(m, cap, Side::Z);
        a.insert_add(vec![1].into_boxed_slice(), z_mono(m, cap, &[1], &[2]));
        let comm = a.commut_other_deriv(0);
        let f = z_mono(m, cap, &[2], &[1]);
        // [A, d_zb](f) = A(df/dzb) - d/dzb(A f)
        let direct = a.apply(&f.deriv_zb(0)).sub(&a.apply(&f).deriv_zb(0));
        assert_eq!(comm.apply(&f), direct);
    }

    #[test]
    fn exponent_enumeration_counts() {
        assert_eq!(exponents_of_degree(2, 3).len(), 4);
        assert_eq!(exponents_of_degree(3, 2).len(), 6);
        assert_eq!(exponents_of_degree(1, 5), vec![vec![5u8]]);
        assert_eq!(exponents_of_degree(0, 0), vec![Vec::<u8>::new()]);
        assert!(exponents_of_degree(0, 1).is_empty());
    }

    #[test]
    fn multi_binomial_values() {
        assert_eq!(multi_binom(&[3, 2], &[1, 2]), CRat::from_int(3));
        assert_eq!(multi_binom(&[4], &[2]), CRat::from_int(6));
        assert_eq!(multi_binom(&[0], &[0]), CRat::one());
    }
}
