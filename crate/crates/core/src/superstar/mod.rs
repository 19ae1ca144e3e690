//! Star products with separation of variables on the split super domain
//! `C^{m|d}`.
//!
//! An even function `u` with unit Grassmann-free part and invertible
//! component matrix transfers the base star product on `C^m` to the full
//! Grassmann-valued function algebra: functions correspond to matrices
//! `(f_K^I)` over the base star algebra, and the product is computed through
//! that matrix calculus.  Holomorphic functions (of `z` and `theta`) stay
//! left-multiplicative, antiholomorphic ones right-multiplicative, so the
//! result again has separation of variables.

pub mod matrix;

pub use matrix::{star_matrix_inverse, MatrixOverStar};

use std::collections::BTreeMap;

use crate::coeff::{opt_add, opt_min, CRat, Jet, Mono, NuSeries, Trunc};
use crate::diffop::{grassmann_op_from_action, DerivKey, FormalOp, SuperDiffOp};
use crate::error::{AlgebraError, Result};
use crate::grassmann::{card, Mask, SuperCoeff};
use crate::starprod::{jet_matrix_det, Chirality, Potential, Side, StarProduct};
use crate::superfn::SuperFunction;

/// The Grassmann basis monomial `theta^I thetabar^J` as a function.
fn grass_monomial(m: u8, d: u8, cap: u8, i: Mask, j: Mask) -> SuperFunction {
    SuperFunction::from_series(
        m,
        d,
        cap,
        NuSeries::single(0, SuperCoeff::basis(d, i, j, Jet::one(m, cap))),
    )
}

fn mask_indices(mask: Mask) -> Vec<usize> {
    (0..16).filter(|&b| mask >> b & 1 == 1).collect()
}

/// An even, Grassmann-nilpotent formal function `Y` with orders `>= -1`
/// whose mixed `theta/thetabar` pairing matrix at `nu^{-1}` is invertible
/// at the base point.  Exponentiating it produces an admissible `u`.
pub struct NilpotentPotentialY {
    y: SuperFunction,
    pairing: Vec<Vec<Jet>>,
}

impl NilpotentPotentialY {
    pub fn new(y: SuperFunction) -> Result<Self> {
        let (m, d, cap) = (y.m(), y.d(), y.cap());
        if !y.parity_part(1).is_zero() {
            return Err(AlgebraError::Domain(
                "nilpotent potential must be even".into(),
            ));
        }
        for (_, sc) in y.series().iter() {
            if sc.comp(0, 0).map(|c| !c.is_zero()).unwrap_or(false) {
                return Err(AlgebraError::Domain(
                    "nilpotent potential has a Grassmann-free part".into(),
                ));
            }
        }
        if let Some(l) = y.low() {
            if l < -1 {
                return Err(AlgebraError::Domain(format!(
                    "nilpotent potential has a term at nu^{l}; orders below nu^-1 are not allowed"
                )));
            }
        }
        let lead = y.nu_coeff(-1);
        let pairing: Vec<Vec<Jet>> = (0..d as usize)
            .map(|a| {
                (0..d as usize)
                    .map(|b| {
                        lead.comp(1 << a, 1 << b)
                            .cloned()
                            .unwrap_or_else(|| Jet::zero(m, cap))
                    })
                    .collect()
            })
            .collect();
        let det = jet_matrix_det(m, cap, &pairing);
        if det.constant_term() == CRat::zero() {
            return Err(AlgebraError::DegenerateNilpotent(
                "the mixed theta/thetabar pairing matrix of the nu^-1 part is singular at the base point"
                    .into(),
            ));
        }
        Ok(NilpotentPotentialY { y, pairing })
    }

    pub fn function(&self) -> &SuperFunction {
        &self.y
    }

    /// The pairing matrix `b[alpha][beta]`: the `theta^alpha thetabar^beta`
    /// coefficient of the `nu^{-1}` part.
    pub fn pairing(&self) -> &[Vec<Jet>] {
        &self.pairing
    }

    /// `exp(Y)`, a terminating sum because `Y` is Grassmann-nilpotent.
    pub fn exponential(&self) -> SuperFunction {
        let (m, d, cap) = (self.y.m(), self.y.d(), self.y.cap());
        let mut acc = SuperFunction::one(m, d, cap, Trunc::Exact);
        let mut pow = SuperFunction::one(m, d, cap, Trunc::Exact);
        let mut fact: i64 = 1;
        for k in 1..=(d as i64 + 1) {
            pow = pow.mul(&self.y);
            if pow.is_zero() {
                break;
            }
            fact *= k;
            acc = acc.add(&pow.scale(&CRat::from_ratio(1, fact)));
        }
        acc
    }
}

/// Pointwise inverse of `1 + n` with `n` Grassmann-nilpotent: a terminating
/// Neumann sum.
fn unipotent_inverse(u: &SuperFunction) -> SuperFunction {
    let (m, d, cap) = (u.m(), u.d(), u.cap());
    let one = SuperFunction::one(m, d, cap, Trunc::Exact);
    let neg_n = one.sub(u);
    let mut acc = one.clone();
    let mut pow = one.clone();
    for _ in 0..=d {
        pow = pow.mul(&neg_n);
        if pow.is_zero() {
            break;
        }
        acc = acc.add(&pow);
    }
    assert!(
        u.mul(&acc).sub(&one).is_zero(),
        "unipotent inverse failed; the argument has a non-unit body"
    );
    acc
}

/// Report for one operator identity check: the identity name, the
/// `nu`-order through which it was checked, and whether it held.
#[derive(Clone, Debug)]
pub struct OperatorIdentityReport {
    pub name: String,
    pub checked_to: Option<i64>,
    pub ok: bool,
}

/// A star product with separation of variables on `C^{m|d}`, determined by
/// a base star product on `C^m` and an admissible even function `u`.
pub struct SuperStarProduct {
    base: StarProduct,
    d: u8,
    u: SuperFunction,
    u_inv: SuperFunction,
    umat: MatrixOverStar,
    vmat: MatrixOverStar,
}

impl SuperStarProduct {
    /// Builds the product from a base star product and an explicit
    /// admissible `u`: even, Grassmann-free component exactly `1`, and
    /// component matrix invertible over the base star algebra.
    pub fn new(base: StarProduct, u: SuperFunction) -> Result<SuperStarProduct> {
        assert_eq!(base.m(), u.m(), "dimension mismatch (m)");
        assert_eq!(base.cap(), u.cap(), "jet truncation mismatch (cap)");
        assert_eq!(
            base.chirality(),
            Chirality::AntiWick,
            "the transfer construction expects a holomorphic-left base product"
        );
        let body = u.component(0, 0);
        if body != NuSeries::single(0, Jet::one(u.m(), u.cap())) {
            return Err(AlgebraError::NotAdmissible(
                "the Grassmann-free component of u must be exactly 1".into(),
            ));
        }
        if !u.parity_part(1).is_zero() {
            return Err(AlgebraError::Domain(
                "admissible functions must be even".into(),
            ));
        }
        let umat = MatrixOverStar::components_of(&u);
        let vmat = star_matrix_inverse(&umat, &base)?;
        let u_inv = unipotent_inverse(&u);
        Ok(SuperStarProduct {
            base,
            d: u.d(),
            u,
            u_inv,
            umat,
            vmat,
        })
    }

    pub fn from_nilpotent(base: StarProduct, y: &NilpotentPotentialY) -> Result<SuperStarProduct> {
        SuperStarProduct::new(base, y.exponential())
    }

    /// Builds base product and transfer data together from a full formal
    /// potential `X`: the Grassmann-free part classifies the base product,
    /// the rest must be a nondegenerate nilpotent potential.
    pub fn from_potential(x: &SuperFunction, nmax: i64) -> Result<SuperStarProduct> {
        let (m, d, cap) = (x.m(), x.d(), x.cap());
        let body = x.component(0, 0);
        let pot = Potential::new(m, cap, body.clone())?;
        let base = StarProduct::build(pot, Chirality::AntiWick, nmax)?;
        let y = NilpotentPotentialY::new(x.sub(&SuperFunction::from_body(d, &body, m, cap)))?;
        SuperStarProduct::from_nilpotent(base, &y)
    }

    pub fn base(&self) -> &StarProduct {
        &self.base
    }
    pub fn m(&self) -> u8 {
        self.base.m()
    }
    pub fn d(&self) -> u8 {
        self.d
    }
    pub fn cap(&self) -> u8 {
        self.base.cap()
    }
    pub fn nmax(&self) -> i64 {
        self.base.nmax()
    }
    pub fn u(&self) -> &SuperFunction {
        &self.u
    }
    pub fn u_inv(&self) -> &SuperFunction {
        &self.u_inv
    }
    pub fn umat(&self) -> &MatrixOverStar {
        &self.umat
    }
    pub fn vmat(&self) -> &MatrixOverStar {
        &self.vmat
    }

    fn dim(&self) -> usize {
        1usize << self.d
    }

    /// The product: `f * g = u^{-1} ((uf)_{KQ} * v^{QP} * (ug)_{PL})
    /// theta^K thetabar^L`, all inner products through the base algebra.
    pub fn mul(&self, f: &SuperFunction, g: &SuperFunction) -> SuperFunction {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        assert_eq!(f.m(), m, "dimension mismatch (m)");
        assert_eq!(f.d(), d, "generator count mismatch (d)");
        assert_eq!(g.m(), m, "dimension mismatch (m)");
        assert_eq!(g.d(), d, "generator count mismatch (d)");
        let uf = self.u.mul(f);
        let ug = self.u.mul(g);
        let n = self.dim();
        let mut comps: BTreeMap<(Mask, Mask), NuSeries<Jet>> = BTreeMap::new();
        for k in 0..n {
            for q in 0..n {
                let a = uf.component(k as Mask, q as Mask);
                if a.is_exactly_zero() {
                    continue;
                }
                for p in 0..n {
                    let vqp = self.vmat.entry(q, p);
                    if vqp.is_exactly_zero() {
                        continue;
                    }
                    let left = self.base.star(&a, vqp);
                    for l in 0..n {
                        let b = ug.component(p as Mask, l as Mask);
                        if b.is_exactly_zero() {
                            continue;
                        }
                        let term = self.base.star(&left, &b);
                        let slot = comps
                            .entry((k as Mask, l as Mask))
                            .or_insert_with(NuSeries::zero);
                        *slot = slot.add(&term);
                    }
                }
            }
        }
        let inner = SuperFunction::from_components(m, d, cap, Trunc::Exact, &comps);
        self.u_inv.mul(&inner)
    }

    /// The bidifferential coefficient `C_r(f, g)` on `nu`-free arguments.
    pub fn c_r(&self, r: i64, f: &SuperCoeff<Jet>, g: &SuperCoeff<Jet>) -> SuperCoeff<Jet> {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        let ff = SuperFunction::from_series(m, d, cap, NuSeries::single(0, f.clone()));
        let gg = SuperFunction::from_series(m, d, cap, NuSeries::single(0, g.clone()));
        self.mul(&ff, &gg).nu_coeff(r)
    }

    /// Whether the product is a formal deformation of the pointwise one:
    /// no negative `nu`-orders and `C_0(f,g) = fg`, verified on the
    /// generator basis (Grassmann monomials times jets of degree `<= 1`).
    pub fn is_star_product(&self) -> bool {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        let mut jets = vec![Jet::one(m, cap)];
        for k in 0..m as usize {
            jets.push(Jet::var_z(m, cap, k));
            jets.push(Jet::var_zb(m, cap, k));
        }
        let mut gens: Vec<SuperFunction> = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                for jet in &jets {
                    gens.push(SuperFunction::from_series(
                        m,
                        d,
                        cap,
                        NuSeries::single(0, SuperCoeff::basis(d, i as Mask, j as Mask, jet.clone())),
                    ));
                }
            }
        }
        for f in &gens {
            for g in &gens {
                let p = self.mul(f, g);
                if !p.trunc().knows(0) {
                    return false;
                }
                if let Some(l) = p.low() {
                    if l < 0 {
                        return false;
                    }
                }
                if p.nu_coeff(0) != f.nu_coeff(0).wedge(&g.nu_coeff(0)) {
                    return false;
                }
            }
        }
        true
    }

    /// The matrix of `f` over the base star algebra:
    /// `M[K][I] = f_K^I = sum_Q (uf)_{KQ} * v^{QI}`.
    pub fn decompose_matrix(&self, f: &SuperFunction) -> MatrixOverStar {
        let uf = self.u.mul(f);
        let n = self.dim();
        let mut out = MatrixOverStar::zero(self.m(), self.cap(), self.d);
        for k in 0..n {
            for i in 0..n {
                let mut s = NuSeries::zero();
                for q in 0..n {
                    let a = uf.component(k as Mask, q as Mask);
                    let v = self.vmat.entry(q, i);
                    if a.is_exactly_zero() || v.is_exactly_zero() {
                        continue;
                    }
                    s = s.add(&self.base.star(&a, v));
                }
                out.set_entry(k, i, s);
            }
        }
        out
    }

    /// Inverse of `decompose_matrix`:
    /// `f = u^{-1} (sum_I M[K][I] * u_{IL}) theta^K thetabar^L`.
    pub fn recompose(&self, mat: &MatrixOverStar) -> SuperFunction {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        let n = self.dim();
        let mut comps: BTreeMap<(Mask, Mask), NuSeries<Jet>> = BTreeMap::new();
        for k in 0..n {
            for l in 0..n {
                let mut s = NuSeries::zero();
                for i in 0..n {
                    let a = mat.entry(k, i);
                    let b = self.umat.entry(i, l);
                    if a.is_exactly_zero() || b.is_exactly_zero() {
                        continue;
                    }
                    s = s.add(&self.base.star(a, b));
                }
                comps.insert((k as Mask, l as Mask), s);
            }
        }
        let inner = SuperFunction::from_components(m, d, cap, Trunc::Exact, &comps);
        self.u_inv.mul(&inner)
    }

    /// A one-sided base operator with series-valued symbol, lifted to act
    /// coefficient-wise on Grassmann components.
    fn one_sided_table_op(&self, s: &NuSeries<Jet>, left: bool) -> FormalOp {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        let bound = if m == 0 {
            s.trunc()
        } else {
            match opt_min(s.trunc().bound(), opt_add(s.val_floor(), Some(self.nmax()))) {
                None => Trunc::Exact,
                Some(h) => Trunc::AtMost(h),
            }
        };
        let zeros = vec![0u8; m as usize];
        let mut orders: BTreeMap<i64, SuperDiffOp> = BTreeMap::new();
        for (&j, jet) in s.iter() {
            for (mono, c) in jet.terms() {
                let ops = if left {
                    self.base.left_ops(mono)
                } else {
                    self.base.right_ops(mono)
                };
                for (r, hop) in ops.iter().enumerate() {
                    let order = j + r as i64;
                    if !bound.knows(order) {
                        continue;
                    }
                    let slot = orders
                        .entry(order)
                        .or_insert_with(|| SuperDiffOp::zero(m, d, cap));
                    for (word, coeff) in hop.terms() {
                        let dz = match hop.side() {
                            Side::Z => Mono::from_parts(word, &zeros),
                            Side::Zb => Mono::from_parts(&zeros, word),
                        };
                        slot.insert_add(
                            DerivKey { dz, dth: 0, dthb: 0 },
                            SuperCoeff::scalar(d, coeff.scale(c)),
                        );
                    }
                }
            }
        }
        let mut series: NuSeries<SuperDiffOp> = NuSeries::zero().with_trunc(bound);
        for (r, op) in orders {
            series.insert_add(r, op);
        }
        FormalOp::from_series(m, d, cap, series)
    }

    fn delta_op(&self, i: Mask) -> FormalOp {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        FormalOp::single(
            m,
            d,
            cap,
            Trunc::Exact,
            0,
            grassmann_op_from_action(m, d, cap, |f| f.delta_proj(i)),
        )
    }

    fn deltabar_op(&self, j: Mask) -> FormalOp {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        FormalOp::single(
            m,
            d,
            cap,
            Trunc::Exact,
            0,
            grassmann_op_from_action(m, d, cap, |f| f.deltabar_proj(j)),
        )
    }

    /// The left multiplication operator `L_f`, with `L_f g = f * g`.
    pub fn left_op(&self, f: &SuperFunction) -> FormalOp {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        let fm = self.decompose_matrix(f);
        let n = self.dim();
        let mut inner = FormalOp::zero(m, d, cap, Trunc::Exact);
        for k in 0..n {
            for i in 0..n {
                let s = fm.entry(k, i);
                if s.is_exactly_zero() {
                    continue;
                }
                let lop = self.one_sided_table_op(s, true);
                let tmul = FormalOp::multiplier(&grass_monomial(m, d, cap, k as Mask, 0));
                inner = inner.add(&tmul.compose(&lop).compose(&self.delta_op(i as Mask)));
            }
        }
        let mu = FormalOp::multiplier(&self.u);
        let mu_inv = FormalOp::multiplier(&self.u_inv);
        mu_inv.compose(&inner).compose(&mu)
    }

    /// The graded right multiplication operator `R_f`, with
    /// `R_f g = (-1)^{|f||g|} g * f`.
    pub fn right_op(&self, f: &SuperFunction) -> FormalOp {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        let uf = self.u.mul(f);
        let n = self.dim();
        let mut inner = FormalOp::zero(m, d, cap, Trunc::Exact);
        for j in 0..n {
            for l in 0..n {
                // Right-matrix entry: (-1)^{|J|(|J|+|L|)} sum_K v^{JK} * (uf)_{KL}.
                let mut s = NuSeries::zero();
                for k in 0..n {
                    let v = self.vmat.entry(j, k);
                    let b = uf.component(k as Mask, l as Mask);
                    if v.is_exactly_zero() || b.is_exactly_zero() {
                        continue;
                    }
                    s = s.add(&self.base.star(v, &b));
                }
                let cj = card(j as Mask) as u32;
                let cl = card(l as Mask) as u32;
                if (cj * (cj + cl)) % 2 == 1 {
                    s = s.neg();
                }
                if s.is_exactly_zero() {
                    continue;
                }
                let rop = self.one_sided_table_op(&s, false);
                let tbmul = FormalOp::multiplier(&grass_monomial(m, d, cap, 0, l as Mask));
                inner = inner.add(&tbmul.compose(&rop).compose(&self.deltabar_op(j as Mask)));
            }
        }
        let mu = FormalOp::multiplier(&self.u);
        let mu_inv = FormalOp::multiplier(&self.u_inv);
        mu_inv.compose(&inner).compose(&mu)
    }

    fn coord_deriv_op(&self, key: DerivKey) -> FormalOp {
        let (m, d, cap) = (self.m(), self.d, self.cap());
        FormalOp::single(
            m,
            d,
            cap,
            Trunc::Exact,
            0,
            SuperDiffOp::term(m, cap, key, SuperCoeff::scalar(d, Jet::one(m, cap))),
        )
    }

    /// Verifies the classifying operator identities of a formal potential
    /// `X`: left multiplication by each holomorphic gradient equals
    /// "multiply plus differentiate", and likewise on the right for the
    /// antiholomorphic gradients.
    pub fn verify_x_identities(&self, x: &SuperFunction) -> Vec<OperatorIdentityReport> {
        let m = self.m() as usize;
        let d = self.d as usize;
        let mm = self.m();
        let mut out = Vec::new();
        let mut check = |name: String, lhs: FormalOp, rhs: FormalOp| {
            let bound = lhs.trunc().min(rhs.trunc()).bound();
            let ok = match bound {
                Some(h) => lhs.agrees_up_to(&rhs, h),
                None => lhs.sub(&rhs).series().is_zero(),
            };
            out.push(OperatorIdentityReport {
                name,
                checked_to: bound,
                ok,
            });
        };
        for k in 0..m {
            let f = x.deriv_z(k);
            let mut e = vec![0u8; m];
            e[k] = 1;
            let key = DerivKey {
                dz: Mono::from_parts(&e, &vec![0u8; m]),
                dth: 0,
                dthb: 0,
            };
            check(
                format!("L[dX/dz^{}] = dX/dz^{} + d/dz^{}", k + 1, k + 1, k + 1),
                self.left_op(&f),
                FormalOp::multiplier(&f).add(&self.coord_deriv_op(key)),
            );
        }
        for a in 0..d {
            let f = x.dtheta_left(a as u32);
            let key = DerivKey {
                dz: Mono::unit(mm),
                dth: 1 << a,
                dthb: 0,
            };
            check(
                format!(
                    "L[dX/dtheta^{}] = dX/dtheta^{} + d/dtheta^{}",
                    a + 1,
                    a + 1,
                    a + 1
                ),
                self.left_op(&f),
                FormalOp::multiplier(&f).add(&self.coord_deriv_op(key)),
            );
        }
        for l in 0..m {
            let f = x.deriv_zb(l);
            let mut e = vec![0u8; m];
            e[l] = 1;
            let key = DerivKey {
                dz: Mono::from_parts(&vec![0u8; m], &e),
                dth: 0,
                dthb: 0,
            };
            check(
                format!("R[dX/dzb^{}] = dX/dzb^{} + d/dzb^{}", l + 1, l + 1, l + 1),
                self.right_op(&f),
                FormalOp::multiplier(&f).add(&self.coord_deriv_op(key)),
            );
        }
        for b in 0..d {
            let f = x.dthetabar_left(b as u32);
            let key = DerivKey {
                dz: Mono::unit(mm),
                dth: 0,
                dthb: 1 << b,
            };
            check(
                format!(
                    "R[dX/dthetabar^{}] = dX/dthetabar^{} + d/dthetabar^{}",
                    b + 1,
                    b + 1,
                    b + 1
                ),
                self.right_op(&f),
                FormalOp::multiplier(&f).add(&self.coord_deriv_op(key)),
            );
        }
        out
    }

    /// The same product expressed in a new odd frame `theta^I = a^I_K eta^K`,
    /// `thetabar^J = b^J_L etabar^L`: transforms `u` and rebuilds.
    pub fn change_trivialization(
        &self,
        amat: &[Vec<Jet>],
        bmat: &[Vec<Jet>],
    ) -> Result<SuperStarProduct> {
        let u2 = transform_components(&self.u, amat, bmat)?;
        SuperStarProduct::new(self.base.clone(), u2)
    }
}

/// Checks that a jet matrix is square of size `d`, uses only the stated
/// coordinate family, and is invertible at the base point.
fn validate_transition(
    d: usize,
    mat: &[Vec<Jet>],
    m: u8,
    cap: u8,
    holomorphic: bool,
    label: &str,
) -> Result<()> {
    if mat.len() != d || mat.iter().any(|row| row.len() != d) {
        return Err(AlgebraError::Validation(format!(
            "transition matrix {label} must be {d} x {d}"
        )));
    }
    for row in mat {
        for jet in row {
            for (mono, _) in jet.terms() {
                let bad = if holomorphic {
                    mono.zb(m).iter().any(|&e| e > 0)
                } else {
                    mono.z(m).iter().any(|&e| e > 0)
                };
                if bad {
                    return Err(AlgebraError::Validation(format!(
                        "transition matrix {label} must be {}",
                        if holomorphic { "holomorphic" } else { "antiholomorphic" }
                    )));
                }
            }
        }
    }
    let det = jet_matrix_det(m, cap, mat);
    if det.constant_term() == CRat::zero() {
        return Err(AlgebraError::Validation(format!(
            "transition matrix {label} is singular at the base point"
        )));
    }
    Ok(())
}

/// The minor of `mat` with rows selected by `rows` and columns by `cols`
/// (equal cardinality), i.e. one entry of an induced exterior power.
fn exterior_minor(m: u8, cap: u8, mat: &[Vec<Jet>], rows: Mask, cols: Mask) -> Jet {
    let ri = mask_indices(rows);
    let ci = mask_indices(cols);
    assert_eq!(ri.len(), ci.len());
    if ri.is_empty() {
        return Jet::one(m, cap);
    }
    let sub: Vec<Vec<Jet>> = ri
        .iter()
        .map(|&r| ci.iter().map(|&c| mat[r][c].clone()).collect())
        .collect();
    jet_matrix_det(m, cap, &sub)
}

/// Components of `f` after the odd frame change `theta^I = a^I_K eta^K`,
/// `thetabar^J = b^J_L etabar^L`:
/// `f'_{KL} = sum_{I,J} f_{IJ} a^I_K b^J_L` with minor-determinant
/// exterior powers.  `a` must be holomorphic and `b` antiholomorphic, both
/// invertible at the base point.
pub fn transform_components(
    f: &SuperFunction,
    amat: &[Vec<Jet>],
    bmat: &[Vec<Jet>],
) -> Result<SuperFunction> {
    let (m, d, cap) = (f.m(), f.d(), f.cap());
    validate_transition(d as usize, amat, m, cap, true, "a")?;
    validate_transition(d as usize, bmat, m, cap, false, "b")?;
    let n = 1usize << d;
    let mut comps: BTreeMap<(Mask, Mask), NuSeries<Jet>> = BTreeMap::new();
    for ((i, j), s) in f.components() {
        for k in 0..n as Mask {
            if card(k) != card(i) {
                continue;
            }
            let ma = exterior_minor(m, cap, amat, i, k);
            if ma.is_zero() {
                continue;
            }
            for l in 0..n as Mask {
                if card(l) != card(j) {
                    continue;
                }
                let mb = exterior_minor(m, cap, bmat, j, l);
                if mb.is_zero() {
                    continue;
                }
                let factor = ma.mul(&mb);
                let term = s.map(|jet| jet.mul(&factor));
                let slot = comps.entry((k, l)).or_insert_with(NuSeries::zero);
                *slot = slot.add(&term);
            }
        }
    }
    Ok(SuperFunction::from_components(
        m,
        d,
        cap,
        f.trunc(),
        &comps,
    ))
}

/// The block matrix of first-order product coefficients: entry `(row, col)`
/// is `C_1` of the row coordinate's conjugate family against the column
/// coordinate, rows indexed by `(zbar^1..zbar^m, thetabar^1..thetabar^d)`
/// and columns by `(z^1..z^m, theta^1..theta^d)`.
pub fn c1_block_matrix(s: &SuperStarProduct) -> Vec<Vec<SuperFunction>> {
    let (m, d, cap) = (s.m(), s.d(), s.cap());
    let md = m as usize + d as usize;
    let col_gen = |c: usize| -> SuperCoeff<Jet> {
        if c < m as usize {
            SuperCoeff::scalar(d, Jet::var_z(m, cap, c))
        } else {
            SuperCoeff::basis(d, 1 << (c - m as usize), 0, Jet::one(m, cap))
        }
    };
    let row_gen = |r: usize| -> SuperCoeff<Jet> {
        if r < m as usize {
            SuperCoeff::scalar(d, Jet::var_zb(m, cap, r))
        } else {
            SuperCoeff::basis(d, 0, 1 << (r - m as usize), Jet::one(m, cap))
        }
    };
    (0..md)
        .map(|r| {
            (0..md)
                .map(|c| {
                    let coeff = s.c_r(1, &row_gen(r), &col_gen(c));
                    SuperFunction::from_series(m, d, cap, NuSeries::single(0, coeff))
                })
                .collect()
        })
        .collect()
}

/// The super Hessian of the `nu^{-1}` part of a potential: rows indexed by
/// `(z^1..z^m, theta^1..theta^d)`, columns by `(zbar^1..zbar^m,
/// thetabar^1..thetabar^d)`, with left derivatives along `theta` and right
/// derivatives along `thetabar`.
pub fn super_hessian(x: &SuperFunction) -> Vec<Vec<SuperFunction>> {
    let (m, d, cap) = (x.m(), x.d(), x.cap());
    let lead = SuperFunction::from_series(m, d, cap, NuSeries::single(0, x.nu_coeff(-1)));
    let md = m as usize + d as usize;
    (0..md)
        .map(|r| {
            let row_diff = if r < m as usize {
                lead.deriv_z(r)
            } else {
                lead.dtheta_left((r - m as usize) as u32)
            };
            (0..md)
                .map(|c| {
                    if c < m as usize {
                        row_diff.deriv_zb(c)
                    } else {
                        row_diff.dthetabar_right((c - m as usize) as u32)
                    }
                })
                .collect()
        })
        .collect()
}

/// In-order product of two square blocks of superfunctions.
pub fn block_mul(a: &[Vec<SuperFunction>], b: &[Vec<SuperFunction>]) -> Vec<Vec<SuperFunction>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let mut acc = a[i][0].mul(&b[0][k]);
                    for j in 1..n {
                        acc = acc.add(&a[i][j].mul(&b[j][k]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Whether two superfunctions agree on all jet monomials of total degree
/// `<= deg`, across their common tracked `nu`-range.
pub fn agrees_to_jet_degree(x: &SuperFunction, y: &SuperFunction, deg: u32) -> bool {
    let diff = x.sub(y);
    let bound = diff.trunc().bound();
    for (&r, sc) in diff.series().iter() {
        if let Some(h) = bound {
            if r > h {
                continue;
            }
        }
        for (_, jet) in sc.comps() {
            if let Some(md) = jet.min_degree() {
                if md <= deg {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether a block of superfunctions is the identity on all jet monomials
/// of degree `<= deg`.
pub fn block_is_identity_to_degree(mat: &[Vec<SuperFunction>], deg: u32) -> bool {
    let n = mat.len();
    for i in 0..n {
        for k in 0..n {
            let want = if i == k {
                SuperFunction::one(mat[i][k].m(), mat[i][k].d(), mat[i][k].cap(), Trunc::Exact)
            } else {
                SuperFunction::zero(mat[i][k].m(), mat[i][k].d(), mat[i][k].cap(), Trunc::Exact)
            };
            if !agrees_to_jet_degree(&mat[i][k], &want, deg) {
                return false;
            }
        }
    }
    true
}
