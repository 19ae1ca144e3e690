//! Differential operators on a split super domain, in the normal form
//! `M_c . Dz^a . Dzb^b . dth^S . dthb^T`: a Grassmann-valued multiplier
//! followed by commuting `z`/`zb` derivatives and left Grassmann
//! derivatives. [`SuperDiffOp`] is a single `nu`-coefficient;
//! [`FormalOp`] is a `nu`-series of them.
//!
//! Composition pushes primitive derivatives across multipliers by the
//! graded Leibniz rule `p . M_c = M_{p(c)} + (-1)^{|p||c|} M_c . p` and
//! re-sorts odd derivatives with Koszul signs, so `compose` is exact:
//! `(A . B)(f) = A(B(f))` identically.

use crate::coeff::{CRat, Jet, Mono, NuSeries, Ring, Trunc};
use crate::grassmann::{card, Mask, SuperCoeff};
use crate::superfn::SuperFunction;
use std::collections::BTreeMap;
use std::fmt;

/// Derivative part of a normal-form term. `dz` stores the `z` and `zb`
/// multi-exponents; `dth`/`dthb` the Grassmann derivative index sets, each
/// block applied lowest index first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct DerivKey {
    pub dz: Mono,
    pub dth: Mask,
    pub dthb: Mask,
}

impl DerivKey {
    pub fn unit(m: u8) -> Self {
        DerivKey {
            dz: Mono::unit(m),
            dth: 0,
            dthb: 0,
        }
    }

    pub fn order(&self) -> u32 {
        self.dz.degree() + card(self.dth) + card(self.dthb)
    }

    /// Parity contributed by the derivative word.
    pub fn parity(&self) -> u8 {
        ((card(self.dth) + card(self.dthb)) % 2) as u8
    }
}

#[derive(Clone, Copy, Debug)]
enum Prim {
    Dz(usize),
    Dzb(usize),
    Dth(u32),
    Dthb(u32),
}

fn count_above_mask(mask: Mask, pos: u32) -> u32 {
    (mask >> (pos + 1)).count_ones()
}

/// A single differential operator (one `nu`-coefficient).
#[derive(Clone, PartialEq)]
pub struct SuperDiffOp {
    m: u8,
    d: u8,
    cap: u8,
    terms: BTreeMap<DerivKey, SuperCoeff<Jet>>,
}

impl SuperDiffOp {
    pub fn zero(m: u8, d: u8, cap: u8) -> Self {
        SuperDiffOp {
            m,
            d,
            cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(m: u8, d: u8, cap: u8) -> Self {
        SuperDiffOp::multiplier(m, cap, &SuperCoeff::scalar(d, Jet::one(m, cap)))
    }

    /// The multiplication operator `M_c`.
    pub fn multiplier(m: u8, cap: u8, c: &SuperCoeff<Jet>) -> Self {
        let mut op = SuperDiffOp::zero(m, c.d(), cap);
        op.insert_add(DerivKey::unit(m), c.clone());
        op
    }

    /// A single normal-form term `M_c . D(key)`.
    pub fn term(m: u8, cap: u8, key: DerivKey, c: SuperCoeff<Jet>) -> Self {
        let mut op = SuperDiffOp::zero(m, c.d(), cap);
        op.insert_add(key, c);
        op
    }

    pub fn m(&self) -> u8 {
        self.m
    }
    pub fn d(&self) -> u8 {
        self.d
    }
    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DerivKey, &SuperCoeff<Jet>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &DerivKey) -> Option<&SuperCoeff<Jet>> {
        self.terms.get(key)
    }

    /// Highest total derivative order among the terms (0 for multipliers).
    pub fn order(&self) -> u32 {
        self.terms.keys().map(DerivKey::order).max().unwrap_or(0)
    }

    pub fn insert_add(&mut self, key: DerivKey, c: SuperCoeff<Jet>) {
        if c.is_zero() {
            return;
        }
        assert_eq!(c.d(), self.d, "generator count mismatch (d)");
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
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
        assert_eq!(self.d, rhs.d, "generator count mismatch (d)");
        assert_eq!(self.cap, rhs.cap, "jet truncation mismatch (cap)");
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        let mut out = self.clone();
        for (key, c) in &rhs.terms {
            out.insert_add(key.clone(), c.clone());
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
            return SuperDiffOp::zero(self.m, self.d, self.cap);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(k);
        }
        out
    }

    /// 0 = even, 1 = odd, `None` if mixed. A term's parity is the parity of
    /// its multiplier plus the parity of its derivative word.
    pub fn parity(&self) -> Option<u8> {
        let mut p: Option<u8> = None;
        for (key, c) in &self.terms {
            let cp = c.parity()?;
            let q = (cp + key.parity()) % 2;
            match p {
                None => p = Some(q),
                Some(r) if r != q => return None,
                _ => {}
            }
        }
        p.or(Some(0))
    }

    /// Applies the operator to a Grassmann-valued jet.
    pub fn apply(&self, f: &SuperCoeff<Jet>) -> SuperCoeff<Jet> {
        assert_eq!(f.d(), self.d, "generator count mismatch (d)");
        let mut out = SuperCoeff::zero(self.d);
        for (key, c) in &self.terms {
            let mut g = f.dthetabar_multi_left(key.dthb);
            if g.is_zero() {
                continue;
            }
            g = g.dtheta_multi_left(key.dth);
            if g.is_zero() {
                continue;
            }
            let za = key.dz.z(self.m);
            let zb = key.dz.zb(self.m);
            if key.dz.degree() > 0 {
                g = g.map(|jet| jet.deriv_z_multi(za).deriv_zb_multi(zb));
            }
            out = out.add(&c.wedge(&g));
        }
        out
    }

    /// The derivative word of a key, outermost primitive first: `z`
    /// derivatives, then `zb`, then `dth` (highest index outermost), then
    /// `dthb` (highest index outermost).
    fn word(&self, key: &DerivKey) -> Vec<Prim> {
        let mut w = Vec::new();
        for (k, &e) in key.dz.z(self.m).iter().enumerate() {
            for _ in 0..e {
                w.push(Prim::Dz(k));
            }
        }
        for (k, &e) in key.dz.zb(self.m).iter().enumerate() {
            for _ in 0..e {
                w.push(Prim::Dzb(k));
            }
        }
        for a in (0..16u32).rev() {
            if key.dth & (1 << a) != 0 {
                w.push(Prim::Dth(a));
            }
        }
        for b in (0..16u32).rev() {
            if key.dthb & (1 << b) != 0 {
                w.push(Prim::Dthb(b));
            }
        }
        w
    }

    /// Prepends a primitive at the outermost position of a key, returning
    /// the Koszul sign, or `None` when an odd derivative repeats.
    fn merge_prim(&self, key: &DerivKey, p: Prim) -> Option<(i8, DerivKey)> {
        let mut out = key.clone();
        match p {
            Prim::Dz(k) => {
                let mut z = out.dz.z(self.m).to_vec();
                assert!(z[k] < u8::MAX);
                z[k] += 1;
                out.dz = Mono::from_parts(&z, out.dz.zb(self.m));
                Some((1, out))
            }
            Prim::Dzb(k) => {
                let mut zb = out.dz.zb(self.m).to_vec();
                assert!(zb[k] < u8::MAX);
                zb[k] += 1;
                out.dz = Mono::from_parts(out.dz.z(self.m), &zb);
                Some((1, out))
            }
            Prim::Dth(a) => {
                if out.dth & (1 << a) != 0 {
                    return None;
                }
                let sign = if count_above_mask(out.dth, a) % 2 == 0 {
                    1
                } else {
                    -1
                };
                out.dth |= 1 << a;
                Some((sign, out))
            }
            Prim::Dthb(b) => {
                if out.dthb & (1 << b) != 0 {
                    return None;
                }
                let cross = card(out.dth) + count_above_mask(out.dthb, b);
                let sign = if cross % 2 == 0 { 1 } else { -1 };
                out.dthb |= 1 << b;
                Some((sign, out))
            }
        }
    }

    /// The action of a primitive on a multiplier coefficient.
    fn prim_apply(&self, p: Prim, c: &SuperCoeff<Jet>) -> SuperCoeff<Jet> {
        match p {
            Prim::Dz(k) => c.map(|jet| jet.deriv_z(k)),
            Prim::Dzb(k) => c.map(|jet| jet.deriv_zb(k)),
            Prim::Dth(a) => c.dtheta_left(a),
            Prim::Dthb(b) => c.dthetabar_left(b),
        }
    }

    fn prim_is_odd(p: Prim) -> bool {
        matches!(p, Prim::Dth(_) | Prim::Dthb(_))
    }

    /// Computes `word . M_c` in normal form.
    fn push_word(&self, word: &[Prim], c: &SuperCoeff<Jet>) -> SuperDiffOp {
        if c.is_zero() {
            return SuperDiffOp::zero(self.m, self.d, self.cap);
        }
        let Some((&p, rest)) = word.split_first() else {
            return SuperDiffOp::multiplier(self.m, self.cap, c);
        };
        let inner = self.push_word(rest, c);
        let mut out = SuperDiffOp::zero(self.m, self.d, self.cap);
        for (key, ci) in &inner.terms {
            // p . M_ci . D(key)
            //   = M_{p(ci)} . D(key) + (-1)^{|p||ci|} M_ci . (p . D(key))
            out.insert_add(key.clone(), self.prim_apply(p, ci));
            if Self::prim_is_odd(p) {
                for par in [0u8, 1u8] {
                    let part = ci.parity_part(par);
                    if part.is_zero() {
                        continue;
                    }
                    if let Some((sign, merged)) = self.merge_prim(key, p) {
                        let signed = if par == 1 { -sign } else { sign };
                        out.insert_add(merged, part.signed(signed));
                    }
                }
            } else if let Some((_, merged)) = self.merge_prim(key, p) {
                out.insert_add(merged, ci.clone());
            }
        }
        out
    }

    /// Operator composition: `(self . rhs)(f) = self(rhs(f))`.
    pub fn compose(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        let mut out = SuperDiffOp::zero(self.m, self.d, self.cap);
        for (key_a, c_a) in &self.terms {
            let word_a = self.word(key_a);
            for (key_b, c_b) in &rhs.terms {
                // M_ca . word_a . M_cb . D(key_b)
                let pushed = self.push_word(&word_a, c_b);
                for (key_p, c_p) in &pushed.terms {
                    // append D(key_b): prepend key_p's word onto key_b
                    let mut acc: Option<(i8, DerivKey)> = Some((1, key_b.clone()));
                    for &p in self.word(key_p).iter().rev() {
                        acc = acc.and_then(|(s, k)| {
                            self.merge_prim(&k, p).map(|(s2, k2)| (s * s2, k2))
                        });
                    }
                    if let Some((sign, key)) = acc {
                        out.insert_add(key, c_a.wedge(c_p).signed(sign));
                    }
                }
            }
        }
        out
    }
}

impl Ring for SuperDiffOp {
    fn is_zero(&self) -> bool {
        SuperDiffOp::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        SuperDiffOp::add(self, rhs)
    }
    fn neg(&self) -> Self {
        SuperDiffOp::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        SuperDiffOp::compose(self, rhs)
    }
    fn scale(&self, k: &CRat) -> Self {
        SuperDiffOp::scale(self, k)
    }
}

impl fmt::Debug for SuperDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, c) in &self.terms {
            if !first {
                write!(f, "  +  ")?;
            }
            first = false;
            write!(f, "[{c:?}]")?;
            for (k, &e) in key.dz.z(self.m).iter().enumerate() {
                if e > 0 {
                    write!(f, " dz{}^{}", k + 1, e)?;
                }
            }
            for (k, &e) in key.dz.zb(self.m).iter().enumerate() {
                if e > 0 {
                    write!(f, " dzb{}^{}", k + 1, e)?;
                }
            }
            if key.dth != 0 {
                write!(f, " dth{:b}", key.dth)?;
            }
            if key.dthb != 0 {
                write!(f, " dthb{:b}", key.dthb)?;
            }
        }
        Ok(())
    }
}

/// A formal operator: a `nu`-Laurent series of differential operators.
#[derive(Clone, PartialEq, Debug)]
pub struct FormalOp {
    m: u8,
    d: u8,
    cap: u8,
    series: NuSeries<SuperDiffOp>,
}

impl FormalOp {
    pub fn zero(m: u8, d: u8, cap: u8, trunc: Trunc) -> Self {
        FormalOp {
            m,
            d,
            cap,
            series: NuSeries::zero().with_trunc(trunc),
        }
    }

    pub fn identity(m: u8, d: u8, cap: u8, trunc: Trunc) -> Self {
        FormalOp {
            m,
            d,
            cap,
            series: NuSeries::single(0, SuperDiffOp::identity(m, d, cap)).with_trunc(trunc),
        }
    }

    pub fn single(m: u8, d: u8, cap: u8, trunc: Trunc, r: i64, op: SuperDiffOp) -> Self {
        assert_eq!(op.m(), m);
        assert_eq!(op.d(), d);
        assert_eq!(op.cap(), cap);
        FormalOp {
            m,
            d,
            cap,
            series: NuSeries::single(r, op).with_trunc(trunc),
        }
    }

    pub fn from_series(m: u8, d: u8, cap: u8, series: NuSeries<SuperDiffOp>) -> Self {
        for (_, op) in series.iter() {
            assert_eq!(op.m(), m);
            assert_eq!(op.d(), d);
            assert_eq!(op.cap(), cap);
        }
        FormalOp { m, d, cap, series }
    }

    /// The operator of pointwise multiplication by a function.
    pub fn multiplier(f: &SuperFunction) -> Self {
        let (m, d, cap) = (f.m(), f.d(), f.cap());
        FormalOp {
            m,
            d,
            cap,
            series: f.series().map(|c| SuperDiffOp::multiplier(m, cap, c)),
        }
    }

    pub fn m(&self) -> u8 {
        self.m
    }
    pub fn d(&self) -> u8 {
        self.d
    }
    pub fn cap(&self) -> u8 {
        self.cap
    }
    pub fn series(&self) -> &NuSeries<SuperDiffOp> {
        &self.series
    }
    pub fn trunc(&self) -> Trunc {
        self.series.trunc()
    }
    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }
    pub fn low(&self) -> Option<i64> {
        self.series.low()
    }

    pub fn nu_coeff(&self, k: i64) -> SuperDiffOp {
        self.series
            .get(k)
            .cloned()
            .unwrap_or_else(|| SuperDiffOp::zero(self.m, self.d, self.cap))
    }

    fn check_shape(&self, rhs: &Self) {
        assert_eq!(self.m, rhs.m, "dimension mismatch (m)");
        assert_eq!(self.d, rhs.d, "generator count mismatch (d)");
        assert_eq!(self.cap, rhs.cap, "jet truncation mismatch (cap)");
    }

    fn wrap(&self, series: NuSeries<SuperDiffOp>) -> Self {
        FormalOp {
            m: self.m,
            d: self.d,
            cap: self.cap,
            series,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        self.wrap(self.series.add(&rhs.series))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.series.neg())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        self.wrap(self.series.sub(&rhs.series))
    }

    pub fn scale(&self, k: &CRat) -> Self {
        self.wrap(self.series.scale(k))
    }

    pub fn shift(&self, k: i64) -> Self {
        self.wrap(self.series.shift(k))
    }

    pub fn truncate_to(&self, trunc: Trunc) -> Self {
        self.wrap(self.series.clone().with_trunc(trunc))
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        self.wrap(self.series.mul(&rhs.series))
    }

    pub fn apply(&self, f: &SuperFunction) -> SuperFunction {
        assert_eq!(self.m, f.m(), "dimension mismatch (m)");
        assert_eq!(self.d, f.d(), "generator count mismatch (d)");
        assert_eq!(self.cap, f.cap(), "jet truncation mismatch (cap)");
        let series = self.series.convolve(f.series(), |op, c| op.apply(c));
        SuperFunction::from_series(self.m, self.d, self.cap, series)
    }

    pub fn parity(&self) -> Option<u8> {
        let mut p: Option<u8> = None;
        for (_, op) in self.series.iter() {
            match (p, op.parity()) {
                (_, None) => return None,
                (None, q) => p = q,
                (Some(r), Some(q)) if r != q => return None,
                _ => {}
            }
        }
        p.or(Some(0))
    }

    /// Graded commutator `[A, B] = A.B - (-1)^{|A||B|} B.A`; both operators
    /// must have definite parity.
    pub fn graded_commutator(&self, rhs: &Self) -> Self {
        let pa = self.parity().expect("left operand has mixed parity");
        let pb = rhs.parity().expect("right operand has mixed parity");
        let ab = self.compose(rhs);
        let ba = rhs.compose(self);
        if pa * pb % 2 == 1 {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }

    pub fn agrees_up_to(&self, rhs: &Self, order: i64) -> bool {
        self.check_shape(rhs);
        self.series.agrees_up_to(&rhs.series, order)
    }

    /// Natural means: no negative `nu` powers and the coefficient of
    /// `nu^k` has operator order at most `k` on the whole tracked range.
    pub fn is_natural(&self) -> bool {
        if let Some(low) = self.series.low() {
            if low < 0 {
                return false;
            }
        }
        self.series
            .iter()
            .all(|(&k, op)| k >= 0 && op.order() as i64 <= k)
    }
}

/// Recovers the unique normal form `sum_{S,T} M_{c_{S,T}} . dth^S dthb^T`
/// of a linear endomorphism of the Grassmann layer from its action on the
/// basis elements `th^S thb^T` (with coefficient 1). The action must be
/// jet-linear and involve no `z` derivatives.
pub fn grassmann_op_from_action(
    m: u8,
    d: u8,
    cap: u8,
    act: impl Fn(&SuperCoeff<Jet>) -> SuperCoeff<Jet>,
) -> SuperDiffOp {
    let mut op = SuperDiffOp::zero(m, d, cap);
    let full = crate::grassmann::full_mask(d);
    let mut pairs: Vec<(Mask, Mask)> = Vec::new();
    for s in 0..=full {
        for t in 0..=full {
            pairs.push((s, t));
        }
    }
    pairs.sort_by_key(|&(s, t)| card(s) + card(t));
    for &(s, t) in &pairs {
        let basis = SuperCoeff::basis(d, s, t, Jet::one(m, cap));
        let image = act(&basis);
        let partial = op.apply(&basis);
        let resid = image.sub(&partial);
        if resid.is_zero() {
            continue;
        }
        // dth^S dthb^T (th^S thb^T) is the sign of the full contraction
        let contracted = basis.dthetabar_multi_left(t).dtheta_multi_left(s);
        let sigma = contracted
            .comp(0, 0)
            .expect("full contraction of matching basis element")
            .constant_term();
        assert!(sigma == CRat::one() || sigma == CRat::from_int(-1));
        let c = if sigma == CRat::one() {
            resid
        } else {
            resid.neg()
        };
        op.insert_add(
            DerivKey {
                dz: Mono::unit(m),
                dth: s,
                dthb: t,
            },
            c,
        );
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Trunc;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_jet(rng: &mut StdRng, m: u8, cap: u8) -> Jet {
        let mut jet = Jet::zero(m, cap);
        for _ in 0..3 {
            let z: Vec<u8> = (0..m).map(|_| rng.random_range(0..3)).collect();
            let zb: Vec<u8> = (0..m).map(|_| rng.random_range(0..2)).collect();
            let c = CRat::from_int(rng.random_range(-4..5));
            jet = jet.add(&Jet::monomial(m, cap, &z, &zb, c));
        }
        jet
    }

    fn rand_super(rng: &mut StdRng, m: u8, d: u8, cap: u8) -> SuperCoeff<Jet> {
        let full = crate::grassmann::full_mask(d);
        let mut c = SuperCoeff::zero(d);
        for _ in 0..3 {
            let i = rng.random_range(0..=full);
            let j = rng.random_range(0..=full);
            c.insert_add(i, j, rand_jet(rng, m, cap));
        }
        c
    }

    fn rand_op(rng: &mut StdRng, m: u8, d: u8, cap: u8) -> SuperDiffOp {
        let full = crate::grassmann::full_mask(d);
        let mut op = SuperDiffOp::zero(m, d, cap);
        for _ in 0..3 {
            let z: Vec<u8> = (0..m).map(|_| rng.random_range(0..3)).collect();
            let zb: Vec<u8> = (0..m).map(|_| rng.random_range(0..2)).collect();
            let key = DerivKey {
                dz: Mono::from_parts(&z, &zb),
                dth: rng.random_range(0..=full),
                dthb: rng.random_range(0..=full),
            };
            op.insert_add(key, rand_super(rng, m, d, cap));
        }
        op
    }

    /// The load-bearing test: composition must agree with sequential
    /// application on random operators and arguments, across dimensions.
    /// The cap is chosen so no intermediate exceeds the jet degree range
    /// (coefficient degrees <= 3 each plus argument degree <= 3), which is
    /// the regime where the identity is exact.
    #[test]
    fn compose_matches_sequential_application() {
        let mut rng = StdRng::seed_from_u64(7);
        for &(m, d) in &[(1u8, 1u8), (1, 2), (2, 1), (0, 2)] {
            let cap = 12u8;
            for _ in 0..12 {
                let a = rand_op(&mut rng, m, d, cap);
                let b = rand_op(&mut rng, m, d, cap);
                let f = rand_super(&mut rng, m, d, cap);
                let via_compose = a.compose(&b).apply(&f);
                let sequential = a.apply(&b.apply(&f));
                assert_eq!(via_compose, sequential);
            }
        }
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = StdRng::seed_from_u64(11);
        let (m, d, cap) = (1u8, 2u8, 12u8);
        for _ in 0..6 {
            let a = rand_op(&mut rng, m, d, cap);
            let b = rand_op(&mut rng, m, d, cap);
            let c = rand_op(&mut rng, m, d, cap);
            assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        }
    }

    #[test]
    fn odd_derivatives_square_to_zero_and_anticommute() {
        let (m, d, cap) = (1u8, 2u8, 4u8);
        let dth1 = SuperDiffOp::term(
            m,
            cap,
            DerivKey {
                dz: Mono::unit(m),
                dth: 0b01,
                dthb: 0,
            },
            SuperCoeff::scalar(d, Jet::one(m, cap)),
        );
        assert!(dth1.compose(&dth1).is_zero());
        let dthb2 = SuperDiffOp::term(
            m,
            cap,
            DerivKey {
                dz: Mono::unit(m),
                dth: 0,
                dthb: 0b10,
            },
            SuperCoeff::scalar(d, Jet::one(m, cap)),
        );
        let ab = dth1.compose(&dthb2);
        let ba = dthb2.compose(&dth1);
        assert_eq!(ab, ba.neg());
    }

    #[test]
    fn multiplier_composition_is_pointwise_product() {
        let mut rng = StdRng::seed_from_u64(3);
        let (m, d, cap) = (1u8, 2u8, 4u8);
        let a = rand_super(&mut rng, m, d, cap);
        let b = rand_super(&mut rng, m, d, cap);
        let ma = SuperDiffOp::multiplier(m, cap, &a);
        let mb = SuperDiffOp::multiplier(m, cap, &b);
        assert_eq!(ma.compose(&mb), SuperDiffOp::multiplier(m, cap, &a.wedge(&b)));
    }

    #[test]
    fn grassmann_action_solver_recovers_known_operators() {
        let (m, d, cap) = (1u8, 2u8, 4u8);
        // left multiplication by th1
        let th1 = SuperCoeff::basis(d, 0b01, 0, Jet::one(m, cap));
        let op = grassmann_op_from_action(m, d, cap, |f| th1.wedge(f));
        assert_eq!(op, SuperDiffOp::multiplier(m, cap, &th1));
        // a left derivative
        let op = grassmann_op_from_action(m, d, cap, |f| f.dthetabar_left(1));
        let expect = SuperDiffOp::term(
            m,
            cap,
            DerivKey {
                dz: Mono::unit(m),
                dth: 0,
                dthb: 0b10,
            },
            SuperCoeff::scalar(d, Jet::one(m, cap)),
        );
        assert_eq!(op, expect);
        // projections are linear combinations of derivative terms: check
        // the solver output agrees with the action everywhere
        for k in 0..=crate::grassmann::full_mask(d) {
            let op = grassmann_op_from_action(m, d, cap, |f| f.delta_proj(k));
            let opb = grassmann_op_from_action(m, d, cap, |f| f.deltabar_proj(k));
            let mut rng = StdRng::seed_from_u64(17 + k as u64);
            for _ in 0..5 {
                let f = rand_super(&mut rng, m, d, cap);
                assert_eq!(op.apply(&f), f.delta_proj(k));
                assert_eq!(opb.apply(&f), f.deltabar_proj(k));
            }
        }
    }

    #[test]
    fn formal_op_layers_respect_truncation_and_commutator() {
        let mut rng = StdRng::seed_from_u64(23);
        let (m, d, cap) = (1u8, 1u8, 4u8);
        let op0 = rand_op(&mut rng, m, d, cap);
        let op1 = rand_op(&mut rng, m, d, cap);
        let a = FormalOp::from_series(
            m,
            d,
            cap,
            NuSeries::from_terms([(0, op0.clone()), (1, op1.clone())]).with_trunc(Trunc::AtMost(3)),
        );
        let f = SuperFunction::term(m, d, cap, Trunc::Exact, 0, &[1], &[], 1, 0, CRat::one());
        let out = a.apply(&f);
        assert_eq!(out.trunc(), Trunc::AtMost(3));
        assert_eq!(out.nu_coeff(0), op0.apply(&f.nu_coeff(0)));
        assert_eq!(out.nu_coeff(1), op1.apply(&f.nu_coeff(0)));
        // graded commutator of two odd operators is the anticommutator
        let dth = SuperDiffOp::term(
            m,
            cap,
            DerivKey {
                dz: Mono::unit(m),
                dth: 1,
                dthb: 0,
            },
            SuperCoeff::scalar(d, Jet::one(m, cap)),
        );
        let mth = SuperDiffOp::multiplier(m, cap, &SuperCoeff::basis(d, 1, 0, Jet::one(m, cap)));
        let a = FormalOp::single(m, d, cap, Trunc::Exact, 0, dth);
        let b = FormalOp::single(m, d, cap, Trunc::Exact, 0, mth);
        // dth . M_th + M_th . dth = id
        let comm = a.graded_commutator(&b);
        assert_eq!(comm, FormalOp::identity(m, d, cap, Trunc::Exact));
    }

    #[test]
    fn naturality_flags_orders_and_negative_powers() {
        let (m, d, cap) = (1u8, 1u8, 4u8);
        let lap = SuperDiffOp::term(
            m,
            cap,
            DerivKey {
                dz: Mono::from_parts(&[1], &[0]),
                dth: 0,
                dthb: 0,
            },
            SuperCoeff::scalar(d, Jet::one(m, cap)),
        );
        let nat = FormalOp::from_series(
            m,
            d,
            cap,
            NuSeries::from_terms([(0, SuperDiffOp::identity(m, d, cap)), (1, lap.clone())]),
        );
        assert!(nat.is_natural());
        let too_high = FormalOp::single(m, d, cap, Trunc::Exact, 0, lap.clone());
        assert!(!too_high.is_natural());
        let neg = FormalOp::single(m, d, cap, Trunc::Exact, -1, SuperDiffOp::identity(m, d, cap));
        assert!(!neg.is_natural());
    }
}
