//! The dual potential and the trace density of a base star product.
//!
//! The dual potential `Psi` is recovered from its defining gradient system
//! `dPsi/dz^k = -Inv(dPhi/dz^k)`, `dPsi/dzb^l = -Inv(dPhi/dzb^l)` (with
//! `Inv` the inverse Berezin transform), Euler integration, and a
//! normalization that makes `m/nu - dPhi/dnu - I(dPsi/dnu)` vanish. The
//! trace density is `rho = nu^(-m) * detg * exp(kappa)` with
//! `kappa = Phi + Psi - log detg`; its `nu^(<=0)` jets cancel, which is
//! re-verified numerically. The `log detg(0)` constant cannot live in the
//! rational scalar field and is carried symbolically.
//!
//! For potentials with parts of jet degree > 2 the inverse metric and the
//! transform tables are only cap-truncated, so every residual check here
//! tolerates undetermined top jet degrees, the tolerance widening with the
//! `nu`-order; for (sub)quadratic parts all checks are exact.

use super::berezin_base::BaseBerezin;
use super::StarProduct;
use crate::coeff::{CRat, Jet, LogPart, NuSeries, Trunc};
use crate::error::{AlgebraError, Result};
use num_rational::BigRational;
use num_traits::{One, Signed};

/// The dual potential, the interaction part `kappa`, and the trace density
/// of a base star product.
pub struct TraceData {
    /// `Psi` (jet coefficients; rational constants included, the symbolic
    /// log constant kept apart).
    pub psi: NuSeries<Jet>,
    /// The symbolic constant `log detg(0)` sitting at `nu^0` of `Psi`.
    pub psi_log: LogPart,
    /// `kappa = Phi + Psi - log detg`; starts at `nu^1`.
    pub kappa: NuSeries<Jet>,
    /// `rho = nu^(-m) detg e^kappa`.
    pub rho: NuSeries<Jet>,
}

/// Per-order comparison of two jet series on their common known range:
/// at each order `r` the difference must either vanish or live strictly
/// above the degree floor (a floor `>= cap` demands exact equality).
fn orders_agree(
    a: &NuSeries<Jet>,
    b: &NuSeries<Jet>,
    floor: impl Fn(i64) -> i64,
) -> bool {
    let bound = a.trunc().min(b.trunc()).bound();
    let orders: std::collections::BTreeSet<i64> = a
        .iter()
        .map(|(&r, _)| r)
        .chain(b.iter().map(|(&r, _)| r))
        .filter(|&r| bound.map(|h| r <= h).unwrap_or(true))
        .collect();
    for r in orders {
        let diff = match (a.get(r), b.get(r)) {
            (None, None) => continue,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.neg(),
            (Some(x), Some(y)) => x.sub(y),
        };
        if diff.is_zero() {
            continue;
        }
        if (diff.min_degree().unwrap() as i64) <= floor(r) {
            return false;
        }
    }
    true
}

fn degree_floor(exactish: bool, cap: u8, base_loss: i64) -> impl Fn(i64) -> i64 {
    move |r: i64| {
        if exactish {
            cap as i64 - base_loss
        } else {
            cap as i64 - 1 - base_loss - (r + 2).max(0)
        }
    }
}

/// Euler integration of a gradient family (`z`-directions then
/// `zb`-directions), per `nu`-order, with zero constant term.
fn euler_integrate(m: u8, cap: u8, grads: &[NuSeries<Jet>]) -> NuSeries<Jet> {
    assert_eq!(grads.len(), 2 * m as usize);
    let mut trunc = Trunc::Exact;
    for g in grads {
        trunc = trunc.min(g.trunc());
    }
    let mut out = NuSeries::zero().with_trunc(trunc);
    let orders: std::collections::BTreeSet<i64> = grads
        .iter()
        .flat_map(|g| g.iter().map(|(&r, _)| r))
        .collect();
    for r in orders {
        let mut radial = Jet::zero(m, cap);
        for k in 0..m as usize {
            if let Some(g) = grads[k].get(r) {
                radial = radial.add(&g.mul(&Jet::var_z(m, cap, k)));
            }
            if let Some(g) = grads[m as usize + k].get(r) {
                radial = radial.add(&g.mul(&Jet::var_zb(m, cap, k)));
            }
        }
        let mut jet = Jet::zero(m, cap);
        for p in 1..=cap as u32 {
            let part = radial.degree_part(p);
            if !part.is_zero() {
                jet = jet.add(&part.scale(&CRat::from_ratio(1, p as i64)));
            }
        }
        out.insert_add(r, jet);
    }
    out
}

fn deriv_dir(s: &NuSeries<Jet>, m: u8, dir: usize) -> NuSeries<Jet> {
    if dir < m as usize {
        s.map(|j| j.deriv_z(dir))
    } else {
        s.map(|j| j.deriv_zb(dir - m as usize))
    }
}

/// Computes the dual potential, `kappa`, and the trace density, verifying
/// the gradient system's closedness, the re-differentiation of the Euler
/// integral, the constancy of the normalization residual, and the
/// cancellation of the `nu^(<=0)` jets of `kappa`.
pub fn dual_potential(star: &StarProduct, ber: &BaseBerezin) -> Result<TraceData> {
    let (m, cap, nmax) = (star.m(), star.cap(), star.nmax());
    assert_eq!(ber.m(), m, "transform belongs to a different product");
    let phi = star.potential().phi();
    let exactish = phi.iter().all(|(_, j)| j.max_degree() <= 2);

    // gradient targets: psi_dir = -Inv(dPhi/dir)
    let dirs = 2 * m as usize;
    let mut grads: Vec<NuSeries<Jet>> = Vec::with_capacity(dirs);
    for dir in 0..dirs {
        grads.push(ber.inverse(&deriv_dir(phi, m, dir)).neg());
    }

    // closedness of the gradient system
    for a in 0..dirs {
        for b in (a + 1)..dirs {
            if !orders_agree(
                &deriv_dir(&grads[a], m, b),
                &deriv_dir(&grads[b], m, a),
                degree_floor(exactish, cap, 0),
            ) {
                return Err(AlgebraError::InconsistentGradient(format!(
                    "mixed partials in directions {a} and {b} disagree"
                )));
            }
        }
    }

    // integrate, then verify by re-differentiation (the antiderivative
    // cannot represent jet degree cap+1, so its derivative pins the
    // gradient only below the cap)
    let psi_int = euler_integrate(m, cap, &grads);
    for (dir, g) in grads.iter().enumerate() {
        if !orders_agree(
            &deriv_dir(&psi_int, m, dir),
            g,
            degree_floor(exactish, cap, 1),
        ) {
            return Err(AlgebraError::InconsistentGradient(format!(
                "Euler integral does not reproduce the gradient in direction {dir}"
            )));
        }
    }

    // determinant constant and its symbolic log
    let det_g = star.det_metric().clone();
    let det0 = det_g.constant_term();
    if !det0.is_real() || !det0.re.is_positive() {
        return Err(AlgebraError::BadLogBase(format!("{det0}")));
    }
    let psi_log = LogPart::atom(BigRational::one(), det0.re.clone())?;
    let log_det_jet = det_g.scale(&det0.recip()).log()?;

    // rational constants: Psi_{-1}(0) = -Phi_{-1}(0), Psi_0(0) = -Phi_0(0)
    // (plus the symbolic log constant kept in `psi_log`)
    let mut psi = psi_int;
    let c_m1 = star.potential().part(-1).constant_term();
    psi.insert_add(-1, Jet::constant(m, cap, c_m1.scale_int(-1)));
    let c_0 = star.potential().part(0).constant_term();
    psi.insert_add(0, Jet::constant(m, cap, c_0.scale_int(-1)));

    // normalization: T = m/nu - dPhi/dnu - I(dPsi/dnu) must be a constant
    // at every order; the orders below nu^0 must vanish outright, and each
    // constant T_{r-1} fixes the remaining integration constant c_r.
    let m_over_nu = NuSeries::single(-1, Jet::constant(m, cap, CRat::from_int(m as i64)));
    let t_series = m_over_nu
        .sub(&phi.dnu())
        .sub(&ber.transform(&psi.dnu()));
    let t_floor = degree_floor(exactish, cap, 0);
    let mut t_consts = NuSeries::zero().with_trunc(t_series.trunc());
    for (&t, jet) in t_series.iter() {
        let c = jet.constant_term();
        let resid = jet.sub(&Jet::constant(m, cap, c.clone()));
        let bad_resid = !resid.is_zero()
            && (resid.min_degree().unwrap() as i64) <= t_floor(t);
        if bad_resid || (t < 0 && !c.is_zero()) {
            return Err(AlgebraError::InconsistentGradient(format!(
                "normalization residual at nu^{t} is not the expected constant"
            )));
        }
        t_consts.insert_add(t, Jet::constant(m, cap, c));
    }
    if let Some(h) = t_consts.trunc().bound() {
        let mut r = 1;
        while r - 1 <= h {
            if let Some(jet) = t_consts.get(r - 1) {
                psi.insert_add(r, jet.scale(&CRat::from_ratio(1, r)));
            }
            r += 1;
        }
    } else {
        let consts: Vec<(i64, Jet)> = t_consts.iter().map(|(&t, j)| (t, j.clone())).collect();
        for (t, jet) in consts {
            psi.insert_add(t + 1, jet.scale(&CRat::from_ratio(1, t + 1)));
        }
    }

    // kappa = Phi + Psi - log detg; its nu^(<=0) jets must cancel
    let kappa_full = phi.add(&psi).sub(&NuSeries::single(0, log_det_jet));
    let k_floor = degree_floor(exactish, cap, 0);
    let mut kappa = NuSeries::zero().with_trunc(kappa_full.trunc());
    for (&r, jet) in kappa_full.iter() {
        if r >= 1 {
            kappa.insert_add(r, jet.clone());
        } else if (jet.min_degree().unwrap() as i64) <= k_floor(r) {
            return Err(AlgebraError::InconsistentGradient(format!(
                "kappa has a nonvanishing jet at nu^{r}"
            )));
        }
    }

    // rho = nu^(-m) detg e^kappa
    let target = kappa.trunc().bound().unwrap_or(nmax);
    let e_kappa = kappa.exp_positive_val(target, Jet::one(m, cap))?;
    let rho = e_kappa
        .mul(&NuSeries::single(0, det_g))
        .shift(-(m as i64));

    Ok(TraceData {
        psi,
        psi_log,
        kappa,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::starprod::{Chirality, Potential};

    fn build(pot: Potential, nmax: i64) -> (StarProduct, BaseBerezin) {
        let star = StarProduct::build(pot, Chirality::AntiWick, nmax).unwrap();
        let ber = BaseBerezin::build(&star);
        (star, ber)
    }

    #[test]
    fn flat_dual_is_minus_the_potential() {
        let (m, cap) = (1u8, 6u8);
        let (star, ber) = build(Potential::flat(m, cap), 4);
        let td = dual_potential(&star, &ber).unwrap();
        let minus_flat = Potential::flat(m, cap).part(-1).neg();
        assert_eq!(td.psi.get(-1), Some(&minus_flat));
        assert_eq!(td.psi.iter().count(), 1, "{:?}", td.psi);
        assert!(td.psi_log.is_zero());
        assert!(td.kappa.is_zero());
        assert_eq!(td.rho.get(-1), Some(&Jet::one(m, cap)));
        assert_eq!(td.rho.iter().count(), 1);
    }

    #[test]
    fn rescaled_metric_shows_up_as_a_log_constant() {
        let (m, cap) = (1u8, 6u8);
        let lead = Potential::flat(m, cap).part(-1).scale(&CRat::from_int(2));
        let pot = Potential::new(m, cap, NuSeries::single(-1, lead.clone())).unwrap();
        let (star, ber) = build(pot, 4);
        let td = dual_potential(&star, &ber).unwrap();
        assert_eq!(td.psi.get(-1), Some(&lead.neg()));
        assert_eq!(
            td.psi_log,
            LogPart::atom(BigRational::one(), BigRational::from_integer(2.into())).unwrap()
        );
        assert!(td.kappa.is_zero());
        assert_eq!(
            td.rho.get(-1),
            Some(&Jet::constant(m, cap, CRat::from_int(2)))
        );
    }

    #[test]
    fn quadratic_perturbation_rescales_the_deformation_parameter() {
        // Phi = (nu^{-1} + 1) z zb is the flat potential in the parameter
        // mu = nu/(1+nu), so Psi = -(nu^{-1}+1) z zb + log(1+nu) and the
        // density is mu^{-1} = nu^{-1}(1 + nu) on the nose.
        let (m, cap) = (1u8, 6u8);
        let zzb = Jet::monomial(m, cap, &[1], &[1], CRat::one());
        let pot = Potential::new(
            m,
            cap,
            NuSeries::from_terms([(-1, zzb.clone()), (0, zzb.clone())]),
        )
        .unwrap();
        let (star, ber) = build(pot, 4);
        let td = dual_potential(&star, &ber).unwrap();
        assert_eq!(td.psi.get(-1), Some(&zzb.neg()));
        assert_eq!(td.psi.get(0), Some(&zzb.neg()));
        assert!(td.psi_log.is_zero());
        // kappa = log(1+nu): coefficients (-1)^(r+1)/r
        for r in 1..=3i64 {
            let expect = CRat::from_ratio(if r % 2 == 1 { 1 } else { -1 }, r);
            assert_eq!(
                td.kappa.get(r),
                Some(&Jet::constant(m, cap, expect)),
                "kappa at nu^{r}: {:?}",
                td.kappa
            );
        }
        assert_eq!(td.rho.get(-1), Some(&Jet::one(m, cap)));
        assert_eq!(td.rho.get(0), Some(&Jet::one(m, cap)));
        assert!(td.rho.trunc().knows(2));
        assert_eq!(td.rho.get(1), None);
        assert_eq!(td.rho.get(2), None);
    }

    #[test]
    fn first_transform_layer_differentiates_the_log_determinant() {
        // Jacobi-type identity underpinning the nu^0 shape of the dual:
        // I_1(d_k Phi_{-1}) = d_k log detg, below the undetermined top
        // degrees of the truncated tables.
        let (m, cap) = (1u8, 8u8);
        let lead = Potential::flat(m, cap)
            .part(-1)
            .add(&Jet::monomial(m, cap, &[2], &[2], CRat::from_ratio(1, 4)));
        let pot = Potential::new(m, cap, NuSeries::single(-1, lead.clone())).unwrap();
        let (star, ber) = build(pot, 3);
        let det_g = star.det_metric().clone();
        let log_jet = det_g.scale(&det_g.constant_term().recip()).log().unwrap();
        let lhs = ber.fwd_component(1, &lead.deriv_z(0));
        let rhs = log_jet.deriv_z(0);
        let diff = lhs.sub(&rhs);
        assert!(
            diff.is_zero() || diff.min_degree().unwrap() as i64 >= cap as i64 - 2,
            "{diff:?}"
        );
    }

    #[test]
    fn cubic_perturbation_passes_all_consistency_checks() {
        let (m, cap) = (1u8, 8u8);
        let mut phi0 = Jet::monomial(m, cap, &[2], &[1], CRat::from_ratio(1, 2));
        phi0 = phi0.add(&Jet::monomial(m, cap, &[1], &[2], CRat::from_ratio(1, 2)));
        let pot = Potential::new(
            m,
            cap,
            NuSeries::from_terms([(-1, Potential::flat(m, cap).part(-1)), (0, phi0.clone())]),
        )
        .unwrap();
        let (star, ber) = build(pot, 3);
        let td = dual_potential(&star, &ber).unwrap();
        // Psi_0 = -Phi_0 + log detg up to the integration constant; here
        // detg = 1 so the leading jets must cancel directly
        assert_eq!(td.psi.get(-1), Some(&Potential::flat(m, cap).part(-1).neg()));
        assert_eq!(td.psi.get(0), Some(&phi0.neg()));
        assert!(td.kappa.low().map(|l| l >= 1).unwrap_or(true));
    }

    #[test]
    fn negative_definite_metric_is_a_bad_log_base() {
        let (m, cap) = (1u8, 5u8);
        let lead = Potential::flat(m, cap).part(-1).neg();
        let pot = Potential::new(m, cap, NuSeries::single(-1, lead)).unwrap();
        let (star, ber) = build(pot, 2);
        assert!(matches!(
            dual_potential(&star, &ber),
            Err(AlgebraError::BadLogBase(_))
        ));
    }

    #[test]
    fn point_trace_data_is_trivial() {
        let (star, ber) = build(Potential::point(4), 3);
        let td = dual_potential(&star, &ber).unwrap();
        assert!(td.psi.is_zero());
        assert!(td.psi_log.is_zero());
        assert!(td.kappa.is_zero());
        assert_eq!(td.rho.get(0), Some(&Jet::one(0, 4)));
    }
}
