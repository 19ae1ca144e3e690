//! Closed-form formulas for the flat potential: the star product as an
//! explicit derivative series, the base Berezin transform as a heat-type
//! series, Gaussian integration against the flat trace density, and the
//! trace-property checks. These serve as an independent cross-check for the
//! recursion-built product and as the only code path that accepts
//! Gaussian-weighted jets.

use super::holoop::exponents_of_degree;
use super::{Chirality, Potential, StarProduct};
use crate::coeff::{factorial, opt_add, opt_min, CRat, Jet, NuSeries, Trunc};
use crate::error::{AlgebraError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

fn inv_multi_factorial(alpha: &[u8]) -> CRat {
    let mut den = BigInt::one();
    for &a in alpha {
        den *= factorial(a as u32);
    }
    CRat::from_real(BigRational::new(BigInt::one(), den))
}

/// `f * g` for the flat potential in closed form:
/// `sum_alpha nu^|alpha|/alpha! (d_zb^alpha f)(d_z^alpha g)` for the
/// anti-Wick chirality (the Wick mirror swaps the derivative families).
/// Exact (terminating) whenever one factor is weightless; otherwise the
/// series is reported through `nu^nmax`.
pub fn star_jets(chirality: Chirality, nmax: i64, f: &Jet, g: &Jet) -> NuSeries<Jet> {
    assert_eq!(f.m(), g.m(), "jet dimension mismatch (m)");
    assert_eq!(f.cap(), g.cap(), "jet truncation mismatch (cap)");
    let m = f.m() as usize;
    let stop = opt_min(
        (f.weight() == 0).then(|| f.max_degree() as i64),
        (g.weight() == 0).then(|| g.max_degree() as i64),
    );
    let (rmax, trunc) = match stop {
        Some(s) => (s, Trunc::Exact),
        None => (nmax, Trunc::AtMost(nmax)),
    };
    let mut out = NuSeries::zero().with_trunc(trunc);
    for r in 0..=rmax.max(0) {
        for alpha in exponents_of_degree(m, r as u32) {
            let (df, dg) = match chirality {
                Chirality::AntiWick => (f.deriv_zb_multi(&alpha), g.deriv_z_multi(&alpha)),
                Chirality::Wick => (f.deriv_z_multi(&alpha), g.deriv_zb_multi(&alpha)),
            };
            if df.is_zero() || dg.is_zero() {
                continue;
            }
            out.insert_add(r, df.mul(&dg).scale(&inv_multi_factorial(&alpha)));
        }
    }
    out
}

/// The flat star product on `nu`-series of jets.
pub fn star_series(
    chirality: Chirality,
    nmax: i64,
    a: &NuSeries<Jet>,
    b: &NuSeries<Jet>,
) -> NuSeries<Jet> {
    let mut bound = opt_min(
        opt_add(a.trunc().bound(), b.val_floor()),
        opt_add(b.trunc().bound(), a.val_floor()),
    );
    for (&i, fa) in a.iter() {
        for (&j, fb) in b.iter() {
            if fa.weight() > 0 && fb.weight() > 0 {
                bound = opt_min(bound, Some(i + j + nmax));
            }
        }
    }
    let trunc = match bound {
        None => Trunc::Exact,
        Some(h) => Trunc::AtMost(h),
    };
    let mut out = NuSeries::zero().with_trunc(trunc);
    for (&i, fa) in a.iter() {
        for (&j, fb) in b.iter() {
            for (&r, jet) in star_jets(chirality, nmax, fa, fb).iter() {
                if out.trunc().knows(i + j + r) {
                    out.insert_add(i + j + r, jet.clone());
                }
            }
        }
    }
    out
}

/// The flat base Berezin transform
/// `I f = sum_t (nu^t / t!) Laplacian^t f` with
/// `Laplacian = sum_k d^2/dz^k dzb^k`; exact for weightless jets.
pub fn berezin_jets(nmax: i64, f: &Jet) -> NuSeries<Jet> {
    let m = f.m() as usize;
    let trunc = if f.weight() == 0 {
        Trunc::Exact
    } else {
        Trunc::AtMost(nmax)
    };
    let mut out = NuSeries::zero().with_trunc(trunc);
    let mut cur = f.clone();
    let mut t: i64 = 0;
    let mut fact = BigInt::one();
    while !cur.is_zero() && out.trunc().knows(t) {
        out.insert_add(
            t,
            cur.scale(&CRat::from_real(BigRational::new(
                BigInt::one(),
                fact.clone(),
            ))),
        );
        let mut next = Jet::zero(f.m(), f.cap());
        for k in 0..m {
            next = next.add(&cur.deriv_z(k).deriv_zb(k));
        }
        cur = next;
        t += 1;
        fact *= BigInt::from(t);
    }
    out
}

/// The inverse flat base Berezin transform
/// `Iinv f = sum_t ((-nu)^t / t!) Laplacian^t f`; exact for weightless
/// jets, tracked to `nmax` for Gaussian-weighted ones (whose Laplacian
/// chain never terminates).
pub fn inverse_berezin_jets(nmax: i64, f: &Jet) -> NuSeries<Jet> {
    let m = f.m() as usize;
    let trunc = if f.weight() == 0 {
        Trunc::Exact
    } else {
        Trunc::AtMost(nmax)
    };
    let mut out = NuSeries::zero().with_trunc(trunc);
    let mut cur = f.clone();
    let mut t: i64 = 0;
    let mut fact = BigInt::one();
    let mut sign = 1i64;
    while !cur.is_zero() && out.trunc().knows(t) {
        out.insert_add(
            t,
            cur.scale(&CRat::from_real(BigRational::new(
                BigInt::from(sign),
                fact.clone(),
            ))),
        );
        let mut next = Jet::zero(f.m(), f.cap());
        for k in 0..m {
            next = next.add(&cur.deriv_z(k).deriv_zb(k));
        }
        cur = next;
        t += 1;
        sign = -sign;
        fact *= BigInt::from(t);
    }
    out
}

/// `integral(h) = sum_r nu^(r-m) * moment(h_r)`: the integral of `h`
/// against the flat trace density `nu^(-m)` in units of `pi^m`, using exact
/// Gaussian moments. Errors when a nonzero coefficient carries no weight.
pub fn integral(m: u8, h: &NuSeries<Jet>) -> Result<NuSeries<CRat>> {
    let m = m as i64;
    let trunc = match h.trunc() {
        Trunc::Exact => Trunc::Exact,
        Trunc::AtMost(b) => Trunc::AtMost(b - m),
    };
    let mut out = NuSeries::zero().with_trunc(trunc);
    for (&r, jet) in h.iter() {
        out.insert_add(r - m, jet.gaussian_moment()?);
    }
    Ok(out)
}

fn series_eq_on_known_range(a: &NuSeries<CRat>, b: &NuSeries<CRat>) -> bool {
    match a.common_bound(b) {
        None => a == b,
        Some(h) => a.agrees_up_to(b, h),
    }
}

/// Verifies the two defining trace identities for the flat product on a
/// pair of jets, with exact Gaussian moments:
///   closedness   `int (f*g - g*f) rho = 0`, and
///   the transform identity `int f g rho = int (f * I g) rho`.
/// Errors unless the product's potential is flat and at least one argument
/// carries positive Gaussian weight. Weighted derivatives raise the jet
/// degree, so the cap should cover the inputs' total degree plus `2*nmax`;
/// with a too-small cap dropped monomials make the check fail, never pass
/// spuriously.
pub fn verify_trace_property(star: &StarProduct, f: &Jet, g: &Jet) -> Result<bool> {
    let (m, cap, nmax) = (star.m(), star.cap(), star.nmax());
    if *star.potential() != Potential::flat(m, cap) {
        return Err(AlgebraError::NotAdmissible(
            "trace-property check is defined for the flat potential only".into(),
        ));
    }
    if f.weight() == 0 && g.weight() == 0 {
        return Err(AlgebraError::NotAdmissible(
            "trace integrals need at least one Gaussian-weighted argument".into(),
        ));
    }
    let chir = star.chirality();
    let fg = star_jets(chir, nmax, f, g);
    let gf = star_jets(chir, nmax, g, f);
    let closed = integral(m, &fg.sub(&gf))?.is_zero();

    let lhs = integral(m, &NuSeries::single(0, f.mul(g)))?;
    let ig = berezin_jets(nmax, g);
    let rhs = integral(
        m,
        &star_series(chir, nmax, &NuSeries::single(0, f.clone()), &ig),
    )?;
    Ok(closed && series_eq_on_known_range(&lhs, &rhs))
}
