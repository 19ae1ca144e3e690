//! Formal functions on a split super domain `C^{m|d}`: Laurent series in
//! the deformation parameter `nu` whose coefficients are Grassmann elements
//! with truncated-jet components.
//!
//! [`SuperFunction`] is a shape-checked wrapper around
//! `NuSeries<SuperCoeff<Jet>>`: it pins the bosonic dimension `m`, the
//! fermionic dimension `d`, and the jet truncation cap so that zero values
//! (which carry no coefficients) still combine safely.

use crate::coeff::{CRat, Jet, NuSeries, Trunc};
use crate::error::Result;
use crate::grassmann::{card, Mask, SuperCoeff};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct SuperFunction {
    m: u8,
    d: u8,
    cap: u8,
    series: NuSeries<SuperCoeff<Jet>>,
}

impl SuperFunction {
    pub fn zero(m: u8, d: u8, cap: u8, trunc: Trunc) -> Self {
        SuperFunction {
            m,
            d,
            cap,
            series: NuSeries::zero().with_trunc(trunc),
        }
    }

    pub fn one(m: u8, d: u8, cap: u8, trunc: Trunc) -> Self {
        let c = SuperCoeff::scalar(d, Jet::one(m, cap));
        SuperFunction {
            m,
            d,
            cap,
            series: NuSeries::single(0, c).with_trunc(trunc),
        }
    }

    /// Single term `coeff * nu^p * z^a zb^b th^I thb^J`.
    #[allow(clippy::too_many_arguments)]
    pub fn term(
        m: u8,
        d: u8,
        cap: u8,
        trunc: Trunc,
        nu_power: i64,
        z_exps: &[u8],
        zb_exps: &[u8],
        i: Mask,
        j: Mask,
        coeff: CRat,
    ) -> Self {
        let pad = |e: &[u8]| -> Vec<u8> {
            assert!(e.len() <= m as usize, "exponent count > m");
            let mut v = e.to_vec();
            v.resize(m as usize, 0);
            v
        };
        let jet = Jet::monomial(m, cap, &pad(z_exps), &pad(zb_exps), coeff);
        let c = SuperCoeff::basis(d, i, j, jet);
        SuperFunction {
            m,
            d,
            cap,
            series: NuSeries::single(nu_power, c).with_trunc(trunc),
        }
    }

    pub fn from_series(m: u8, d: u8, cap: u8, series: NuSeries<SuperCoeff<Jet>>) -> Self {
        for (_, c) in series.iter() {
            assert_eq!(c.d(), d, "generator count mismatch (d)");
            for (_, jet) in c.comps() {
                assert_eq!(jet.m(), m, "jet dimension mismatch (m)");
                assert_eq!(jet.cap(), cap, "jet truncation mismatch (cap)");
            }
        }
        SuperFunction { m, d, cap, series }
    }

    /// Promotes a bosonic `nu`-series to a super function.
    pub fn from_body(d: u8, body: &NuSeries<Jet>, m: u8, cap: u8) -> Self {
        let series = body.map(|jet| SuperCoeff::scalar(d, jet.clone()));
        SuperFunction::from_series(m, d, cap, series)
    }

    /// Assembles a function from Grassmann components, intersecting all
    /// truncations (including `base`).
    pub fn from_components(
        m: u8,
        d: u8,
        cap: u8,
        base: Trunc,
        comps: &BTreeMap<(Mask, Mask), NuSeries<Jet>>,
    ) -> Self {
        let mut trunc = base;
        for s in comps.values() {
            trunc = trunc.min(s.trunc());
        }
        let mut series: NuSeries<SuperCoeff<Jet>> = NuSeries::zero().with_trunc(trunc);
        for (&(i, j), s) in comps {
            for (&k, jet) in s.iter() {
                series.insert_add(k, SuperCoeff::basis(d, i, j, jet.clone()));
            }
        }
        SuperFunction::from_series(m, d, cap, series)
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
    pub fn series(&self) -> &NuSeries<SuperCoeff<Jet>> {
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

    /// Coefficient of `nu^k` (zero element when absent).
    pub fn nu_coeff(&self, k: i64) -> SuperCoeff<Jet> {
        self.series
            .get(k)
            .cloned()
            .unwrap_or_else(|| SuperCoeff::zero(self.d))
    }

    /// Grassmann component `(I, J)` as a bosonic `nu`-series.
    pub fn component(&self, i: Mask, j: Mask) -> NuSeries<Jet> {
        let mut out = NuSeries::zero().with_trunc(self.series.trunc());
        for (&k, c) in self.series.iter() {
            if let Some(jet) = c.comp(i, j) {
                out.insert_add(k, jet.clone());
            }
        }
        out
    }

    /// All Grassmann components, as a sparse matrix of bosonic series.
    pub fn components(&self) -> BTreeMap<(Mask, Mask), NuSeries<Jet>> {
        let mut out: BTreeMap<(Mask, Mask), NuSeries<Jet>> = BTreeMap::new();
        for (&k, c) in self.series.iter() {
            for (&(i, j), jet) in c.comps() {
                out.entry((i, j))
                    .or_insert_with(|| NuSeries::zero().with_trunc(self.series.trunc()))
                    .insert_add(k, jet.clone());
            }
        }
        out
    }

    /// The purely bosonic component `(0, 0)`.
    pub fn body(&self) -> NuSeries<Jet> {
        self.component(0, 0)
    }

    fn check_shape(&self, rhs: &Self) {
        assert_eq!(self.m, rhs.m, "dimension mismatch (m)");
        assert_eq!(self.d, rhs.d, "generator count mismatch (d)");
        assert_eq!(self.cap, rhs.cap, "jet truncation mismatch (cap)");
    }

    fn wrap(&self, series: NuSeries<SuperCoeff<Jet>>) -> Self {
        SuperFunction {
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

    /// Pointwise (supercommutative) product.
    pub fn mul(&self, rhs: &Self) -> Self {
        self.check_shape(rhs);
        self.wrap(self.series.mul(&rhs.series))
    }

    /// Multiplies by `nu^k`.
    pub fn shift(&self, k: i64) -> Self {
        self.wrap(self.series.shift(k))
    }

    pub fn truncate_to(&self, trunc: Trunc) -> Self {
        self.wrap(self.series.clone().with_trunc(trunc))
    }

    pub fn dnu(&self) -> Self {
        self.wrap(self.series.dnu())
    }

    pub fn agrees_up_to(&self, rhs: &Self, order: i64) -> bool {
        self.check_shape(rhs);
        self.series.agrees_up_to(&rhs.series, order)
    }

    fn map_coeffs(&self, f: impl Fn(&SuperCoeff<Jet>) -> SuperCoeff<Jet>) -> Self {
        self.wrap(self.series.map(f))
    }

    pub fn map_jets(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        self.map_coeffs(|c| c.map(&f))
    }

    pub fn deriv_z(&self, k: usize) -> Self {
        self.map_jets(|jet| jet.deriv_z(k))
    }

    pub fn deriv_zb(&self, k: usize) -> Self {
        self.map_jets(|jet| jet.deriv_zb(k))
    }

    /// Left derivative along `th^(alpha+1)`.
    pub fn dtheta_left(&self, alpha: u32) -> Self {
        self.map_coeffs(|c| c.dtheta_left(alpha))
    }

    /// Left derivative along `thb^(beta+1)`.
    pub fn dthetabar_left(&self, beta: u32) -> Self {
        self.map_coeffs(|c| c.dthetabar_left(beta))
    }

    pub fn dtheta_right(&self, alpha: u32) -> Self {
        self.map_coeffs(|c| c.dtheta_right(alpha))
    }

    pub fn dthetabar_right(&self, beta: u32) -> Self {
        self.map_coeffs(|c| c.dthetabar_right(beta))
    }

    /// 0 = even, 1 = odd, `None` if mixed.
    pub fn parity(&self) -> Option<u8> {
        let mut p: Option<u8> = None;
        for (_, c) in self.series.iter() {
            match (p, c.parity()) {
                (_, None) => return None,
                (None, q) => p = q,
                (Some(r), Some(q)) if r != q => return None,
                _ => {}
            }
        }
        p.or(Some(0))
    }

    pub fn parity_part(&self, p: u8) -> Self {
        self.map_coeffs(|c| c.parity_part(p))
    }

    /// Part of total degree `p` (jet degree plus Grassmann degree).
    pub fn degree_part(&self, p: u32) -> Self {
        self.map_coeffs(|c| {
            let mut out = SuperCoeff::zero(self.d);
            for (&(i, j), jet) in c.comps() {
                let g = card(i) + card(j);
                if g <= p {
                    let part = jet.degree_part(p - g);
                    if !part.is_zero() {
                        out.insert_add(i, j, part);
                    }
                }
            }
            out
        })
    }

    /// Pointwise inverse through `nu^target` (body must be invertible).
    pub fn invert(&self, target: i64) -> Result<Self> {
        Ok(self.wrap(self.series.invert(target)?))
    }

    /// Reconstructs `F` (no constant term) from its full gradient along all
    /// `2m + 2d` directions, by Euler's identity `sum_p p F_p = E(F)`:
    /// `grads` holds `dF/dz^k`, then `dF/dzb^k`, then the left `th` and
    /// `thb` derivatives. The caller should re-differentiate to confirm the
    /// gradient was integrable.
    pub fn euler_integrate(m: u8, d: u8, cap: u8, trunc: Trunc, grads: &[Self]) -> Self {
        assert_eq!(grads.len(), 2 * (m as usize + d as usize));
        let mut radial = SuperFunction::zero(m, d, cap, trunc);
        // Coordinate factors are exact; stamping the output truncation on
        // them here would needlessly shorten every product with a gradient.
        let promote = |jet: Jet, i: Mask, j: Mask| {
            let c = SuperCoeff::basis(d, i, j, jet);
            SuperFunction {
                m,
                d,
                cap,
                series: NuSeries::single(0, c),
            }
        };
        for k in 0..m as usize {
            let z = promote(Jet::var_z(m, cap, k), 0, 0);
            let zb = promote(Jet::var_zb(m, cap, k), 0, 0);
            radial = radial.add(&z.mul(&grads[k]));
            radial = radial.add(&zb.mul(&grads[m as usize + k]));
        }
        for a in 0..d as usize {
            let th = promote(Jet::one(m, cap), 1 << a, 0);
            let thb = promote(Jet::one(m, cap), 0, 1 << a);
            radial = radial.add(&th.mul(&grads[2 * m as usize + a]));
            radial = radial.add(&thb.mul(&grads[2 * m as usize + d as usize + a]));
        }
        let mut out = SuperFunction::zero(m, d, cap, trunc);
        for p in 1..=(cap as u32 + 2 * d as u32) {
            let part = radial.degree_part(p);
            out = out.add(&part.scale(&CRat::from_ratio(1, p as i64)));
        }
        out
    }

    /// The full gradient of `F` in the direction order expected by
    /// [`SuperFunction::euler_integrate`].
    pub fn gradient(&self) -> Vec<Self> {
        let mut out = Vec::with_capacity(2 * (self.m as usize + self.d as usize));
        for k in 0..self.m as usize {
            out.push(self.deriv_z(k));
        }
        for k in 0..self.m as usize {
            out.push(self.deriv_zb(k));
        }
        for a in 0..self.d as u32 {
            out.push(self.dtheta_left(a));
        }
        for b in 0..self.d as u32 {
            out.push(self.dthetabar_left(b));
        }
        out
    }
}

impl fmt::Debug for SuperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.series.is_exactly_zero() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (&k, c) in self.series.iter() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "nu^{k} * [{c:?}]")?;
            }
        }
        match self.series.trunc() {
            Trunc::Exact => Ok(()),
            Trunc::AtMost(h) => write!(f, " + O(nu^{})", h + 1),
        }
    }
}

/// Renders lowest `nu`-order first, with an explicit truncation marker on
/// inexact series.
impl fmt::Display for SuperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.series.is_exactly_zero() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (&k, c) in self.series.iter() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                if k == 0 {
                    write!(f, "[{c}]")?;
                } else {
                    write!(f, "nu^{k} * [{c}]")?;
                }
            }
        }
        match self.series.trunc() {
            Trunc::Exact => Ok(()),
            Trunc::AtMost(h) => write!(f, " + O(nu^{})", h + 1),
        }
    }
}

#[derive(Serialize)]
struct SuperFunctionRepr<'a> {
    m: u8,
    d: u8,
    series: &'a NuSeries<SuperCoeff<Jet>>,
}

impl Serialize for SuperFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SuperFunctionRepr {
            m: self.m,
            d: self.d,
            series: &self.series,
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact() -> Trunc {
        Trunc::Exact
    }

    #[test]
    fn components_roundtrip_and_body() {
        let m = 1u8;
        let d = 2u8;
        let cap = 4u8;
        // f = nu^-1 z th1 + 3 zb thb2 + 7
        let f = SuperFunction::term(m, d, cap, exact(), -1, &[1], &[], 0b01, 0, CRat::one())
            .add(&SuperFunction::term(
                m,
                d,
                cap,
                exact(),
                0,
                &[],
                &[1],
                0,
                0b10,
                CRat::from_int(3),
            ))
            .add(&SuperFunction::term(
                m,
                d,
                cap,
                exact(),
                0,
                &[],
                &[],
                0,
                0,
                CRat::from_int(7),
            ));
        let comps = f.components();
        assert_eq!(comps.len(), 3);
        let rebuilt = SuperFunction::from_components(m, d, cap, exact(), &comps);
        assert_eq!(rebuilt, f);
        assert_eq!(
            f.body(),
            NuSeries::single(0, Jet::constant(m, cap, CRat::from_int(7)))
        );
        assert_eq!(f.component(0b01, 0).low(), Some(-1));
    }

    #[test]
    fn pointwise_product_mixes_nu_jets_and_grassmann() {
        let m = 1u8;
        let d = 1u8;
        let cap = 4u8;
        // (z th) * (zb thb) = z zb th thb, and the reverse order flips sign
        let a = SuperFunction::term(m, d, cap, exact(), 0, &[1], &[], 1, 0, CRat::one());
        let b = SuperFunction::term(m, d, cap, exact(), 0, &[], &[1], 0, 1, CRat::one());
        let ab = a.mul(&b);
        let expect = SuperFunction::term(m, d, cap, exact(), 0, &[1], &[1], 1, 1, CRat::one());
        assert_eq!(ab, expect);
        assert_eq!(b.mul(&a), expect.neg());
        assert_eq!(a.parity(), Some(1));
        assert_eq!(ab.parity(), Some(0));
    }

    #[test]
    fn pointwise_inverse_handles_nilpotent_and_jet_parts() {
        let m = 1u8;
        let d = 1u8;
        let cap = 4u8;
        // f = 1 + z + nu th thb
        let f = SuperFunction::one(m, d, cap, exact())
            .add(&SuperFunction::term(
                m,
                d,
                cap,
                exact(),
                0,
                &[1],
                &[],
                0,
                0,
                CRat::one(),
            ))
            .add(&SuperFunction::term(
                m,
                d,
                cap,
                exact(),
                1,
                &[],
                &[],
                1,
                1,
                CRat::one(),
            ));
        let inv = f.invert(5).unwrap();
        let prod = f.mul(&inv);
        assert!(prod.agrees_up_to(&SuperFunction::one(m, d, cap, Trunc::AtMost(5)), 5));
        let prod2 = inv.mul(&f);
        assert!(prod2.agrees_up_to(&SuperFunction::one(m, d, cap, Trunc::AtMost(5)), 5));
    }

    #[test]
    fn euler_integration_recovers_a_polynomial() {
        let m = 1u8;
        let d = 1u8;
        let cap = 4u8;
        // F = z zb + th thb + z^2, no constant term
        let f = SuperFunction::term(m, d, cap, exact(), 0, &[1], &[1], 0, 0, CRat::one())
            .add(&SuperFunction::term(
                m,
                d,
                cap,
                exact(),
                0,
                &[],
                &[],
                1,
                1,
                CRat::one(),
            ))
            .add(&SuperFunction::term(
                m,
                d,
                cap,
                exact(),
                0,
                &[2],
                &[],
                0,
                0,
                CRat::one(),
            ));
        let grads = f.gradient();
        let rebuilt = SuperFunction::euler_integrate(m, d, cap, exact(), &grads);
        assert_eq!(rebuilt, f);
        // and the reconstruction re-differentiates to the same gradient
        let grads2 = rebuilt.gradient();
        assert_eq!(grads, grads2);
    }

    #[test]
    fn degree_part_counts_grassmann_degree() {
        let m = 1u8;
        let d = 1u8;
        let cap = 4u8;
        let f = SuperFunction::term(m, d, cap, exact(), 0, &[1], &[], 1, 0, CRat::one());
        assert!(f.degree_part(1).is_zero());
        assert_eq!(f.degree_part(2), f);
    }
}
