//! The formal Berezin transform attached to a base star product, realized
//! as per-monomial tables: on basis monomials the transform is the product
//! of the antiholomorphic and holomorphic halves taken in the
//! factorization order opposite to the chirality, so its order-0 part is
//! the identity and its formal inverse exists as a triangular `nu`-series
//! of linear maps.

use super::{Chirality, StarProduct};
use crate::coeff::{opt_min, CRat, Jet, Mono, NuSeries, Trunc};
use std::collections::BTreeMap;

type Layer = BTreeMap<Mono, Jet>;

/// Tables `fwd[t]`, `inv[t]` (for `0 <= t <= nmax`) of the transform's and
/// its inverse's `nu^t` components as linear maps on jets.
pub struct BaseBerezin {
    m: u8,
    cap: u8,
    nmax: i64,
    fwd: Vec<Layer>,
    inv: Vec<Layer>,
}

fn apply_layer(m: u8, cap: u8, layer: &Layer, f: &Jet) -> Jet {
    assert_eq!(f.weight(), 0, "transform tables act on weightless jets");
    let mut out = Jet::zero(m, cap);
    for (mono, c) in f.terms() {
        if let Some(img) = layer.get(mono) {
            out = out.add(&img.scale(c));
        }
    }
    out
}

impl BaseBerezin {
    /// Builds the transform tables from a star product's operator tables.
    pub fn build(star: &StarProduct) -> BaseBerezin {
        let (m, cap, nmax) = (star.m(), star.cap(), star.nmax());
        let mut fwd: Vec<Layer> = vec![BTreeMap::new(); (nmax + 1) as usize];
        for deg in 0..=cap as u32 {
            for exps in super::holoop::exponents_of_degree(2 * m as usize, deg) {
                let (z, zb) = exps.split_at(m as usize);
                let mono = Mono::from_parts(z, zb);
                let holo = Jet::monomial(m, cap, z, &vec![0; m as usize], CRat::one());
                let anti = Jet::monomial(m, cap, &vec![0; m as usize], zb, CRat::one());
                let prod = match star.chirality() {
                    Chirality::AntiWick => star.star_jets(&anti, &holo),
                    Chirality::Wick => star.star_jets(&holo, &anti),
                };
                let expect = Jet::monomial(m, cap, z, zb, CRat::one());
                assert_eq!(
                    prod.get(0),
                    Some(&expect),
                    "transform is not the identity at order 0"
                );
                for (&t, jet) in prod.iter() {
                    fwd[t as usize].insert(mono.clone(), jet.clone());
                }
            }
        }
        // triangular inverse: K_0 = id, K_t = -sum_{j<t} K_j I_{t-j}
        let mut inv: Vec<Layer> = vec![fwd[0].clone()];
        for t in 1..=nmax as usize {
            let mut layer: Layer = BTreeMap::new();
            for (mono, _) in &fwd[0] {
                let mut img = Jet::zero(m, cap);
                for j in 0..t {
                    let step = match fwd[t - j].get(mono) {
                        Some(x) => x,
                        None => continue,
                    };
                    img = img.sub(&apply_layer(m, cap, &inv[j], step));
                }
                if !img.is_zero() {
                    layer.insert(mono.clone(), img);
                }
            }
            inv.push(layer);
        }
        BaseBerezin {
            m,
            cap,
            nmax,
            fwd,
            inv,
        }
    }

    pub fn m(&self) -> u8 {
        self.m
    }
    pub fn cap(&self) -> u8 {
        self.cap
    }
    pub fn nmax(&self) -> i64 {
        self.nmax
    }

    /// The `nu^t` component of the transform applied to a jet.
    pub fn fwd_component(&self, t: i64, f: &Jet) -> Jet {
        apply_layer(self.m, self.cap, &self.fwd[t as usize], f)
    }

    /// The `nu^t` component of the inverse transform applied to a jet.
    pub fn inv_component(&self, t: i64, f: &Jet) -> Jet {
        apply_layer(self.m, self.cap, &self.inv[t as usize], f)
    }

    fn apply_tables(&self, tables: &[Layer], s: &NuSeries<Jet>) -> NuSeries<Jet> {
        if self.m == 0 {
            // the base transform on a point is exactly the identity
            return s.clone();
        }
        let bound = opt_min(
            s.trunc().bound(),
            s.val_floor().map(|v| v + self.nmax),
        );
        let trunc = match bound {
            None => Trunc::Exact,
            Some(h) => Trunc::AtMost(h),
        };
        let mut out = NuSeries::zero().with_trunc(trunc);
        for (&i, jet) in s.iter() {
            for (t, layer) in tables.iter().enumerate() {
                if out.trunc().knows(i + t as i64) {
                    out.insert_add(i + t as i64, apply_layer(self.m, self.cap, layer, jet));
                }
            }
        }
        out
    }

    /// Applies the transform to a `nu`-series of weightless jets.
    pub fn transform(&self, s: &NuSeries<Jet>) -> NuSeries<Jet> {
        self.apply_tables(&self.fwd, s)
    }

    /// Applies the inverse transform.
    pub fn inverse(&self, s: &NuSeries<Jet>) -> NuSeries<Jet> {
        self.apply_tables(&self.inv, s)
    }

    pub fn transform_jet(&self, f: &Jet) -> NuSeries<Jet> {
        self.transform(&NuSeries::single(0, f.clone()))
    }

    pub fn inverse_jet(&self, f: &Jet) -> NuSeries<Jet> {
        self.inverse(&NuSeries::single(0, f.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::NuSeries;
    use crate::starprod::{flat, Potential};

    #[test]
    fn flat_transform_matches_the_heat_series() {
        let star = StarProduct::flat(1, 6, 4);
        let ber = BaseBerezin::build(&star);
        for (z, zb) in [(1u8, 1u8), (2, 2), (3, 1), (0, 2)] {
            let f = Jet::monomial(1, 6, &[z], &[zb], CRat::one());
            let got = ber.transform_jet(&f);
            let expect = flat::berezin_jets(4, &f);
            assert!(got.agrees_up_to(&expect, 4), "{got:?} vs {expect:?}");
        }
    }

    #[test]
    fn inverse_composes_to_the_identity() {
        let cap = 6u8;
        // a perturbed potential so the transform has nontrivial layers
        let mut phi0 = Jet::monomial(1, cap, &[2], &[1], CRat::from_ratio(1, 2));
        phi0 = phi0.add(&Jet::monomial(1, cap, &[1], &[2], CRat::from_ratio(1, 2)));
        let pot = Potential::new(
            1,
            cap,
            NuSeries::from_terms([(-1, Potential::flat(1, cap).part(-1)), (0, phi0)]),
        )
        .unwrap();
        let star = StarProduct::build(pot, Chirality::AntiWick, 3).unwrap();
        let ber = BaseBerezin::build(&star);
        for (z, zb) in [(1u8, 0u8), (1, 1), (2, 1), (0, 3)] {
            let f = NuSeries::single(0, Jet::monomial(1, cap, &[z], &[zb], CRat::one()));
            let round = ber.inverse(&ber.transform(&f));
            assert!(round.agrees_up_to(&f, 3), "{round:?} vs {f:?}");
            let round2 = ber.transform(&ber.inverse(&f));
            assert!(round2.agrees_up_to(&f, 3));
        }
    }

    #[test]
    fn first_layer_is_the_metric_laplacian() {
        let cap = 6u8;
        let mut phi0 = Jet::monomial(1, cap, &[2], &[1], CRat::from_ratio(1, 3));
        phi0 = phi0.add(&Jet::monomial(1, cap, &[1], &[2], CRat::from_ratio(1, 3)));
        // also perturb the leading part so the metric is nonconstant
        let lead = Potential::flat(1, cap)
            .part(-1)
            .add(&Jet::monomial(1, cap, &[2], &[2], CRat::from_ratio(1, 4)));
        let pot =
            Potential::new(1, cap, NuSeries::from_terms([(-1, lead), (0, phi0)])).unwrap();
        let star = StarProduct::build(pot.clone(), Chirality::AntiWick, 2).unwrap();
        let ber = BaseBerezin::build(&star);
        let ginv = star.metric_inv();
        for (z, zb) in [(1u8, 1u8), (2, 1), (2, 2)] {
            let f = Jet::monomial(1, cap, &[z], &[zb], CRat::one());
            let got = ber.fwd_component(1, &f);
            let expect = ginv[0][0].mul(&f.deriv_z(0).deriv_zb(0));
            // with a truncated inverse metric the identity holds below the cap
            let diff = got.sub(&expect);
            assert!(
                diff.is_zero() || diff.min_degree().unwrap() as i64 >= cap as i64 - 1,
                "({z},{zb}): {diff:?}"
            );
        }
    }

    #[test]
    fn point_transform_is_the_identity() {
        let star = StarProduct::trivial_point(4, 3);
        let ber = BaseBerezin::build(&star);
        let s = NuSeries::from_terms([(0, Jet::one(0, 4)), (2, Jet::one(0, 4))]);
        assert_eq!(ber.transform(&s), s);
        assert_eq!(ber.inverse(&s), s);
    }
}
