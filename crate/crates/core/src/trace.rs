//! Canonical supertrace machinery.
//!
//! A function on the split super domain acts through its component matrix
//! over the base star algebra, and the matrix supertrace
//! `Str(f) = sum_I (-1)^{|I|} int f_I^I mu_base` is a supertrace functional
//! on the product.  The same functional is represented by a Berezin density
//! `mu = rho dz dzb dth dthb`: writing `u^{-1} rho = tau rho_base`, the
//! components of `tau` are fixed by the inverse component matrix of `u`,
//!
//! `tau_{KQ} = (-1)^{|K'| + lambda(K',Q')} Iinv_base(v^{Q'K'})`,
//!
//! with `K'` the complement of `K` and `Iinv_base` the inverse transform of
//! the base product.  Both evaluation paths are implemented independently:
//! exact point evaluation when `m = 0` and exact Gaussian moments over a
//! flat base (in units of `pi^m`), and the module also houses the
//! constant-pairing leading-term laws for exponentials of quadratic
//! Grassmann forms.

use std::collections::BTreeMap;

use crate::berezin::{deriv_dir, dir_name, residual_vanishes, SuperBerezin};
use crate::coeff::{opt_min, CRat, Jet, NuSeries, Ring, Trunc};
use crate::error::{AlgebraError, Result};
use crate::grassmann::{card, full_mask, lambda, Mask, SuperCoeff};
use crate::starprod::{BaseBerezin, Potential, TraceData};
use crate::superfn::SuperFunction;
use crate::superstar::{OperatorIdentityReport, SuperStarProduct};

/// How base integrals over `C^m` are evaluated exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseEval {
    /// `m = 0`: integration is evaluation at the single base point.
    Point,
    /// Flat base with `m >= 1`: exact Gaussian moments in units of `pi^m`;
    /// nonzero integrands must carry a Gaussian envelope.
    FlatGaussian,
}

/// The canonical Berezin supertrace density `mu = rho dz dzb dth dthb`,
/// together with the function `tau` relating it to the base trace density
/// by `u^{-1} rho = tau rho_base`.
pub struct SupertraceDensity {
    m: u8,
    d: u8,
    tau: SuperFunction,
    rho: SuperFunction,
    base_density: NuSeries<Jet>,
}

impl SupertraceDensity {
    pub fn tau(&self) -> &SuperFunction {
        &self.tau
    }

    pub fn rho(&self) -> &SuperFunction {
        &self.rho
    }

    pub fn base_density(&self) -> &NuSeries<Jet> {
        &self.base_density
    }

    /// `rho * nu^{m-d}`, normalized so its body component starts at `nu^0`;
    /// this is the density whose logarithmic gradient matches the gradient
    /// of `X + X'`.
    pub fn rho_hat(&self) -> SuperFunction {
        self.rho.shift(self.m as i64 - self.d as i64)
    }
}

/// Builds the canonical supertrace density of a super star product from the
/// base trace data: the components of `tau` are signed inverse transforms
/// of the complementary entries of the inverse component matrix of `u`, and
/// `rho = u * tau * rho_base` (pointwise supercommutative products).
pub fn supertrace_density(
    star: &SuperStarProduct,
    td: &TraceData,
    ber: &BaseBerezin,
) -> Result<SupertraceDensity> {
    let (m, d, cap) = (star.m(), star.d(), star.cap());
    assert_eq!(ber.m(), m, "transform belongs to a different base");
    let full = full_mask(d);
    let mut comps: BTreeMap<(Mask, Mask), NuSeries<Jet>> = BTreeMap::new();
    for k in 0..(1u16 << d) {
        for q in 0..(1u16 << d) {
            let kc = full & !k;
            let qc = full & !q;
            let v = star.vmat().entry(qc as usize, kc as usize);
            if v.is_exactly_zero() {
                continue;
            }
            let mut s = ber.inverse(v);
            if (card(kc) as u8 + lambda(kc, qc, d)) & 1 == 1 {
                s = s.neg();
            }
            comps.insert((k, q), s);
        }
    }
    let tau = SuperFunction::from_components(m, d, cap, Trunc::Exact, &comps);
    let rho_base = SuperFunction::from_body(d, &td.rho, m, cap);
    let rho = star.u().mul(&tau).mul(&rho_base);
    Ok(SupertraceDensity {
        m,
        d,
        tau,
        rho,
        base_density: td.rho.clone(),
    })
}

/// The supertrace functional: base-integration state shared by the matrix
/// path and the density path.
#[derive(Debug)]
pub struct StrFunctional {
    m: u8,
    mode: BaseEval,
    base_density: NuSeries<Jet>,
}

impl StrFunctional {
    /// Chooses the evaluation mode from the base product: exact point
    /// evaluation for `m = 0`, Gaussian moments over a flat base; every
    /// other base is outside the exactly evaluable class.
    pub fn new(star: &SuperStarProduct) -> Result<StrFunctional> {
        let (m, cap) = (star.m(), star.cap());
        let (mode, base_density) = if m == 0 {
            (BaseEval::Point, NuSeries::single(0, Jet::one(0, cap)))
        } else if *star.base().potential() == Potential::flat(m, cap) {
            (
                BaseEval::FlatGaussian,
                NuSeries::single(-(m as i64), Jet::one(m, cap)),
            )
        } else {
            return Err(AlgebraError::NotAdmissible(
                "supertrace evaluation needs a point base or the flat Gaussian class".into(),
            ));
        };
        Ok(StrFunctional {
            m,
            mode,
            base_density,
        })
    }

    pub fn mode(&self) -> BaseEval {
        self.mode
    }

    /// `int h dz dzb` with respect to the Lebesgue measure on the base (in
    /// units of `pi^m` for the Gaussian class); evaluation when `m = 0`.
    pub fn lebesgue_integral(&self, h: &NuSeries<Jet>) -> Result<NuSeries<CRat>> {
        let mut out = NuSeries::zero().with_trunc(h.trunc());
        for (&r, jet) in h.iter() {
            let v = match self.mode {
                BaseEval::Point => jet.constant_term(),
                BaseEval::FlatGaussian => jet.gaussian_moment()?,
            };
            out.insert_add(r, v);
        }
        Ok(out)
    }

    /// `int h mu_base` against the base trace density.
    pub fn base_integral(&self, h: &NuSeries<Jet>) -> Result<NuSeries<CRat>> {
        self.lebesgue_integral(&h.mul(&self.base_density))
    }
}

fn scalar_series_match(a: &NuSeries<CRat>, b: &NuSeries<CRat>) -> bool {
    match a.common_bound(b) {
        Some(h) => a.agrees_up_to(b, h),
        None => a == b,
    }
}

fn has_weight(f: &SuperFunction) -> bool {
    f.series()
        .iter()
        .any(|(_, sc)| sc.comps().any(|(_, jet)| jet.weight() > 0))
}

pub(crate) fn jet_is_constant(j: &Jet) -> bool {
    j.weight() == 0 && j.sub(&Jet::constant(j.m(), j.cap(), j.constant_term())).is_zero()
}

/// The closed-form inverse base transform applied to every coefficient of
/// a jet series (each order shifted by its own nu-power).
fn base_inverse_closed(nmax: i64, s: &NuSeries<Jet>) -> NuSeries<Jet> {
    let mut out = NuSeries::zero().with_trunc(s.trunc());
    for (&r, jet) in s.iter() {
        out = out.add(&crate::starprod::flat::inverse_berezin_jets(nmax, jet).shift(r));
    }
    out
}

/// Inverse transform on the Gaussian-weighted class.  Over a flat base
/// with a constant Grassmann pairing the transform factorizes: the base
/// part acts on each Grassmann component through the closed form (which
/// handles Gaussian envelopes) and the Grassmann part is the table's
/// action on unit-coefficient odd monomials.
pub(crate) fn inverse_transform_gaussian(
    star: &SuperStarProduct,
    sber: &SuperBerezin,
    f: &SuperFunction,
) -> Result<SuperFunction> {
    let (m, d, cap) = (star.m(), star.d(), star.cap());
    if *star.base().potential() != Potential::flat(m, cap) {
        return Err(AlgebraError::NotAdmissible(
            "the Gaussian-class transform needs a flat base".into(),
        ));
    }
    let constant_pairing = star
        .u()
        .series()
        .iter()
        .all(|(_, sc)| sc.comps().all(|(_, jet)| jet_is_constant(jet)));
    if !constant_pairing {
        return Err(AlgebraError::NotAdmissible(
            "the Gaussian-class transform needs a constant Grassmann pairing".into(),
        ));
    }
    let mut out = SuperFunction::zero(m, d, cap, f.trunc());
    for i in 0..(1u16 << d) {
        for j in 0..(1u16 << d) {
            let s = f.component(i, j);
            if s.is_exactly_zero() {
                continue;
            }
            let unit = SuperFunction::term(
                m,
                d,
                cap,
                Trunc::Exact,
                0,
                &[],
                &[],
                i,
                j,
                CRat::one(),
            );
            let gr = sber.inverse(&unit);
            let body = base_inverse_closed(star.nmax(), &s);
            out = out.add(&SuperFunction::from_body(d, &body, m, cap).mul(&gr));
        }
    }
    Ok(out)
}

/// Inverse transform dispatch: table application for weightless functions,
/// the factorized Gaussian-class path otherwise.
pub fn inverse_transform(
    star: &SuperStarProduct,
    sber: &SuperBerezin,
    f: &SuperFunction,
) -> Result<SuperFunction> {
    if has_weight(f) {
        inverse_transform_gaussian(star, sber, f)
    } else {
        Ok(sber.inverse(f))
    }
}

fn require_flat_constant(star: &SuperStarProduct) -> Result<()> {
    let (m, cap) = (star.m(), star.cap());
    if *star.base().potential() != Potential::flat(m, cap) {
        return Err(AlgebraError::NotAdmissible(
            "the Gaussian-class product needs a flat base".into(),
        ));
    }
    let constant_pairing = star
        .u()
        .series()
        .iter()
        .all(|(_, sc)| sc.comps().all(|(_, jet)| jet_is_constant(jet)));
    if !constant_pairing {
        return Err(AlgebraError::NotAdmissible(
            "the Gaussian-class product needs a constant Grassmann pairing".into(),
        ));
    }
    Ok(())
}

fn unit_odd_monomial(star: &SuperStarProduct, i: Mask, j: Mask) -> SuperFunction {
    SuperFunction::term(
        star.m(),
        star.d(),
        star.cap(),
        Trunc::Exact,
        0,
        &[],
        &[],
        i,
        j,
        CRat::one(),
    )
}

/// Super star product on the Gaussian-weighted class over a flat base with
/// constant pairing.  The product factorizes: body coefficients multiply
/// through the closed-form flat star (which handles Gaussian envelopes)
/// and the constant odd monomials through the recursion tables; no Koszul
/// signs arise because body coefficients are even.
pub(crate) fn mul_gaussian(
    star: &SuperStarProduct,
    f: &SuperFunction,
    g: &SuperFunction,
) -> Result<SuperFunction> {
    require_flat_constant(star)?;
    let (m, d, cap) = (star.m(), star.d(), star.cap());
    let chirality = star.base().chirality();
    let mut out = SuperFunction::zero(m, d, cap, f.trunc().min(g.trunc()));
    for i1 in 0..(1u16 << d) {
        for j1 in 0..(1u16 << d) {
            let s1 = f.component(i1, j1);
            if s1.is_exactly_zero() {
                continue;
            }
            for i2 in 0..(1u16 << d) {
                for j2 in 0..(1u16 << d) {
                    let s2 = g.component(i2, j2);
                    if s2.is_exactly_zero() {
                        continue;
                    }
                    let body =
                        crate::starprod::flat::star_series(chirality, star.nmax(), &s1, &s2);
                    let gr = star.mul(
                        &unit_odd_monomial(star, i1, j1),
                        &unit_odd_monomial(star, i2, j2),
                    );
                    out = out.add(&SuperFunction::from_body(d, &body, m, cap).mul(&gr));
                }
            }
        }
    }
    Ok(out)
}

/// Product dispatch: recursion tables for weightless functions, the
/// factorized Gaussian-class path otherwise.
pub fn product(
    star: &SuperStarProduct,
    f: &SuperFunction,
    g: &SuperFunction,
) -> Result<SuperFunction> {
    if has_weight(f) || has_weight(g) {
        mul_gaussian(star, f, g)
    } else {
        Ok(star.mul(f, g))
    }
}

/// Component matrix of a Gaussian-weighted function over a flat base with
/// constant pairing: every constant odd monomial has a constant component
/// matrix, and star multiplication by a constant is pointwise, so the
/// matrix of `s * Theta` is the body series `s` times the matrix of
/// `Theta` entrywise.
pub(crate) fn decompose_matrix_gaussian(
    star: &SuperStarProduct,
    f: &SuperFunction,
) -> Result<crate::superstar::MatrixOverStar> {
    require_flat_constant(star)?;
    let d = star.d();
    let mut out = crate::superstar::MatrixOverStar::zero(star.m(), star.cap(), d);
    for i in 0..(1u16 << d) {
        for j in 0..(1u16 << d) {
            let s = f.component(i, j);
            if s.is_exactly_zero() {
                continue;
            }
            let mth = star.decompose_matrix(&unit_odd_monomial(star, i, j));
            for k in 0..out.dim() {
                for l in 0..out.dim() {
                    let e = mth.entry(k, l);
                    if e.is_exactly_zero() {
                        continue;
                    }
                    let cur = out.entry(k, l).add(&s.mul(e));
                    out.set_entry(k, l, cur);
                }
            }
        }
    }
    Ok(out)
}

/// Matrix path: `Str(f) = sum_I (-1)^{|I|} int f_I^I mu_base` over the
/// diagonal of the component matrix of `f`.
pub fn supertrace_matrix(
    star: &SuperStarProduct,
    strf: &StrFunctional,
    f: &SuperFunction,
) -> Result<NuSeries<CRat>> {
    assert_eq!(strf.m, star.m(), "functional belongs to a different base");
    let mat = if has_weight(f) {
        decompose_matrix_gaussian(star, f)?
    } else {
        star.decompose_matrix(f)
    };
    let mut out = NuSeries::zero();
    for i in 0..mat.dim() {
        let val = strf.base_integral(mat.entry(i, i))?;
        out = if card(i as Mask) % 2 == 1 {
            out.sub(&val)
        } else {
            out.add(&val)
        };
    }
    Ok(out)
}

/// Density path: `sigma(f) = int f mu`, the Berezin integral over the odd
/// variables followed by the base Lebesgue integral.
pub fn supertrace_via_density(
    density: &SupertraceDensity,
    strf: &StrFunctional,
    f: &SuperFunction,
) -> Result<NuSeries<CRat>> {
    let full = full_mask(density.d);
    let top = f.mul(&density.rho).component(full, full);
    strf.lebesgue_integral(&top)
}

/// The supertrace, computed along both independent paths and cross-checked
/// on the common tracked range; returns the better-tracked value.
pub fn supertrace(
    star: &SuperStarProduct,
    density: &SupertraceDensity,
    strf: &StrFunctional,
    f: &SuperFunction,
) -> Result<NuSeries<CRat>> {
    let a = supertrace_matrix(star, strf, f)?;
    let b = supertrace_via_density(density, strf, f)?;
    if !scalar_series_match(&a, &b) {
        return Err(AlgebraError::Validation(
            "matrix supertrace and density evaluation disagree".into(),
        ));
    }
    Ok(match (a.trunc().bound(), b.trunc().bound()) {
        (None, _) => a,
        (_, None) => b,
        (Some(x), Some(y)) => {
            if x >= y {
                a
            } else {
                b
            }
        }
    })
}

/// The two trace-pairing identities evaluated on a pair of functions:
/// `int (f*g) mu`, `int f (Iinv g) mu`, and `int (Iinv f) g mu` must agree.
pub struct TracePairingReport {
    /// `int (f*g) mu`.
    pub product_value: NuSeries<CRat>,
    /// `int f (Iinv g) mu` (pointwise product with the transformed factor).
    pub transformed_right: NuSeries<CRat>,
    /// `int (Iinv f) g mu`.
    pub transformed_left: NuSeries<CRat>,
    pub checked_to: Option<i64>,
    pub ok: bool,
}

/// Evaluates both trace-pairing identities through the density path.
pub fn verify_trace_pairing(
    star: &SuperStarProduct,
    sber: &SuperBerezin,
    density: &SupertraceDensity,
    strf: &StrFunctional,
    f: &SuperFunction,
    g: &SuperFunction,
) -> Result<TracePairingReport> {
    let product_value = supertrace_via_density(density, strf, &product(star, f, g)?)?;
    let transformed_right =
        supertrace_via_density(density, strf, &f.mul(&inverse_transform(star, sber, g)?))?;
    let transformed_left =
        supertrace_via_density(density, strf, &inverse_transform(star, sber, f)?.mul(g))?;
    let checked_to = opt_min(
        product_value.trunc().bound(),
        opt_min(
            transformed_right.trunc().bound(),
            transformed_left.trunc().bound(),
        ),
    );
    let ok = scalar_series_match(&product_value, &transformed_right)
        && scalar_series_match(&product_value, &transformed_left)
        && scalar_series_match(&transformed_right, &transformed_left);
    Ok(TracePairingReport {
        product_value,
        transformed_right,
        transformed_left,
        checked_to,
        ok,
    })
}

/// Gradient-level identification of the supertrace density exponent: along
/// every coordinate direction, `d(X + X') * rhohat = d(rhohat)` where
/// `rhohat = rho * nu^{m-d}`.  Stated multiplicatively so no logarithm is
/// needed, and insensitive to the per-order integration constants of `X'`.
/// Residuals are required to vanish for nu-orders at most `nu_check` and
/// jet degrees at most `deg_check`.
pub fn verify_density_exponent(
    star: &SuperStarProduct,
    density: &SupertraceDensity,
    x: &SuperFunction,
    xp: &SuperFunction,
    nu_check: i64,
    deg_check: u32,
) -> Vec<OperatorIdentityReport> {
    let (m, d) = (star.m(), star.d());
    let total = x.add(xp);
    let rho_hat = density.rho_hat();
    let mut out = Vec::new();
    for idx in 0..2 * (m as usize + d as usize) {
        let lhs = deriv_dir(&total, m, d, idx).mul(&rho_hat);
        let rhs = deriv_dir(&rho_hat, m, d, idx);
        let bound = opt_min(lhs.trunc().min(rhs.trunc()).bound(), Some(nu_check));
        out.push(OperatorIdentityReport {
            name: format!(
                "d({})(X+X') rhohat = d({}) rhohat",
                dir_name(m, d, idx),
                dir_name(m, d, idx)
            ),
            checked_to: bound,
            ok: residual_vanishes(&lhs, &rhs, nu_check, deg_check),
        });
    }
    out
}

/// Exact determinant and inverse of a square matrix of complex rationals by
/// Gauss-Jordan elimination; the inverse is `None` when singular.
pub fn crat_det_inverse(mat: &[Vec<CRat>]) -> (CRat, Option<Vec<Vec<CRat>>>) {
    let n = mat.len();
    let mut a: Vec<Vec<CRat>> = mat.to_vec();
    let mut inv: Vec<Vec<CRat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { CRat::one() } else { CRat::zero() })
                .collect()
        })
        .collect();
    let mut det = CRat::one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(p) => p,
            None => return (CRat::zero(), None),
        };
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = det.neg();
        }
        let p = a[col][col].clone();
        det = det.mul(&p);
        let pinv = p.recip();
        for j in 0..n {
            a[col][j] = a[col][j].mul(&pinv);
            inv[col][j] = inv[col][j].mul(&pinv);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let t = factor.mul(&a[col][j]);
                a[r][j] = a[r][j].sub(&t);
                let t = factor.mul(&inv[col][j]);
                inv[r][j] = inv[r][j].sub(&t);
            }
        }
    }
    (det, Some(inv))
}

pub(crate) fn signed_half_turn(d: u8) -> CRat {
    // (-1)^{d(d-1)/2}
    if (d as u32 * (d as u32 - 1) / 2) % 2 == 0 {
        CRat::one()
    } else {
        CRat::one().neg()
    }
}

/// `w = exp(a/2 th th + b th thb + c/2 thb thb)` as a Grassmann element
/// with constant coefficients; only the antisymmetric parts of `a` and `c`
/// contribute.
pub fn pairing_exponential(
    d: u8,
    a: &[Vec<CRat>],
    b: &[Vec<CRat>],
    c: &[Vec<CRat>],
) -> Result<SuperCoeff<CRat>> {
    for mat in [a, b, c] {
        if mat.len() != d as usize || mat.iter().any(|row| row.len() != d as usize) {
            return Err(AlgebraError::Validation(
                "pairing coefficient matrices must be d x d".into(),
            ));
        }
    }
    let mut z = SuperCoeff::zero(d);
    let half = CRat::from_ratio(1, 2);
    for al in 0..d as usize {
        for ga in al + 1..d as usize {
            let coeff = a[al][ga].sub(&a[ga][al]).mul(&half);
            if !coeff.is_zero() {
                z = z.add(&SuperCoeff::basis(d, (1 << al) | (1 << ga), 0, coeff));
            }
            let coeff = c[al][ga].sub(&c[ga][al]).mul(&half);
            if !coeff.is_zero() {
                z = z.add(&SuperCoeff::basis(d, 0, (1 << al) | (1 << ga), coeff));
            }
        }
        for be in 0..d as usize {
            if !b[al][be].is_zero() {
                z = z.add(&SuperCoeff::basis(d, 1 << al, 1 << be, b[al][be].clone()));
            }
        }
    }
    z.exp_nilpotent(CRat::one())
}

/// The `2^d x 2^d` component matrix `(w_{IJ})` of a constant Grassmann
/// element, rows and columns indexed by masks.
pub fn component_matrix(d: u8, w: &SuperCoeff<CRat>) -> Vec<Vec<CRat>> {
    let n = 1usize << d;
    let mut out = vec![vec![CRat::zero(); n]; n];
    for (&(i, j), coeff) in w.comps() {
        out[i as usize][j as usize] = coeff.clone();
    }
    out
}

/// The leading-term law of the exponential of a quadratic Grassmann form.
#[derive(Debug)]
pub struct PairingExponentialReport {
    /// `det b` of the mixed pairing block.
    pub det_pairing: CRat,
    /// `det (w_{IJ})` of the full component matrix.
    pub det_components: CRat,
    /// Entry of the inverse component matrix at the pair of full masks.
    pub top_inverse_entry: CRat,
    /// `(-1)^{d(d-1)/2} det b^{-1}`.
    pub expected_top_entry: CRat,
    pub ok: bool,
}

/// For `w = exp(a/2 th th + b th thb + c/2 thb thb)` with nondegenerate
/// `b`: the component matrix `(w_{IJ})` is nondegenerate and the entry of
/// its inverse at the pair of full masks equals
/// `(-1)^{d(d-1)/2} det b^{-1}`.  A singular `b` is rejected, since the
/// component matrix degenerates with it.
pub fn verify_pairing_exponential_top(
    d: u8,
    a: &[Vec<CRat>],
    b: &[Vec<CRat>],
    c: &[Vec<CRat>],
) -> Result<PairingExponentialReport> {
    let w = pairing_exponential(d, a, b, c)?;
    let (det_pairing, binv) = crat_det_inverse(b);
    if binv.is_none() {
        return Err(AlgebraError::DegenerateNilpotent(
            "the mixed pairing block is singular, so the component matrix of its exponential is degenerate".into(),
        ));
    }
    let wm = component_matrix(d, &w);
    let (det_components, winv) = crat_det_inverse(&wm);
    let full = full_mask(d) as usize;
    let top_inverse_entry = match &winv {
        Some(t) => t[full][full].clone(),
        None => CRat::zero(),
    };
    let expected_top_entry = signed_half_turn(d).mul(&det_pairing.recip());
    let ok = winv.is_some() && top_inverse_entry == expected_top_entry;
    Ok(PairingExponentialReport {
        det_pairing,
        det_components,
        top_inverse_entry,
        expected_top_entry,
        ok,
    })
}

/// Determinant of a small square matrix of jets by Laplace expansion along
/// the first row.
pub fn jet_det(m: u8, cap: u8, h: &[Vec<Jet>]) -> Jet {
    let n = h.len();
    if n == 0 {
        return Jet::one(m, cap);
    }
    if n == 1 {
        return h[0][0].clone();
    }
    let mut out = Jet::zero(m, cap);
    for col in 0..n {
        if h[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Jet>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&cc| cc != col)
                    .map(|cc| h[r][cc].clone())
                    .collect()
            })
            .collect();
        let term = h[0][col].mul(&jet_det(m, cap, &minor));
        out = if col % 2 == 0 {
            out.add(&term)
        } else {
            out.sub(&term)
        };
    }
    out
}

/// The top-component law of a pure-pairing exponential.
#[derive(Debug)]
pub struct HermitianTopReport {
    /// The top component sits at this nu-exponent (`-d`).
    pub nu_exponent: i64,
    /// Jet coefficient of the top component of `exp(nu^{-1} h th thb)`.
    pub actual: Jet,
    /// `(-1)^{d(d-1)/2} det h`.
    pub expected: Jet,
    pub ok: bool,
}

/// For `u = exp(nu^{-1} h_{ab} th^a thb^b)` with a jet-valued matrix `h`:
/// the component of `u` at the pair of full masks is exactly
/// `nu^{-d} (-1)^{d(d-1)/2} det h`.  Each exponential factor carries one
/// `th`, one `thb`, and one `nu^{-1}`, so only the `d`-th power reaches the
/// full masks and the identity is exact, not a truncation.
pub fn verify_hermitian_top_component(
    m: u8,
    cap: u8,
    d: u8,
    h: &[Vec<Jet>],
) -> Result<HermitianTopReport> {
    if h.len() != d as usize || h.iter().any(|row| row.len() != d as usize) {
        return Err(AlgebraError::Validation(
            "pairing coefficient matrix must be d x d".into(),
        ));
    }
    let mut y = SuperCoeff::zero(d);
    for al in 0..d as usize {
        for be in 0..d as usize {
            if !h[al][be].is_zero() {
                y = y.add(&SuperCoeff::basis(d, 1 << al, 1 << be, h[al][be].clone()));
            }
        }
    }
    let w = y.exp_nilpotent(Jet::one(m, cap))?;
    let full = full_mask(d);
    let actual = w
        .comp(full, full)
        .cloned()
        .unwrap_or_else(|| Jet::zero(m, cap));
    let mut expected = jet_det(m, cap, h);
    if (d as u32 * (d as u32 - 1) / 2) % 2 == 1 {
        expected = expected.neg();
    }
    let ok = actual == expected;
    Ok(HermitianTopReport {
        nu_exponent: -(d as i64),
        actual,
        expected,
        ok,
    })
}
