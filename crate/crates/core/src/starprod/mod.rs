//! Base (purely even) star products with separation of variables on
//! `C^m`, built order-by-order from a formal potential, together with the
//! flat closed-form oracle, the formal Berezin transform, and the dual
//! potential / trace density.

pub mod berezin_base;
pub mod dual;
pub mod flat;
pub mod holoop;

pub use berezin_base::BaseBerezin;
pub use dual::TraceData;
pub use holoop::{exponents_of_degree, multi_binom, HoloOp, Side};

use crate::coeff::{CRat, Jet, Mono, NuSeries, Trunc};
use crate::error::{AlgebraError, Result};
use std::collections::BTreeMap;

/// A formal potential `Phi = nu^{-1} Phi_{-1} + Phi_0 + nu Phi_1 + ...`
/// whose leading Hessian `g_{kl} = d^2 Phi_{-1} / dz^k dzb^l` is
/// invertible at the base point.
#[derive(Clone, PartialEq, Debug)]
pub struct Potential {
    m: u8,
    cap: u8,
    phi: NuSeries<Jet>,
}

impl Potential {
    pub fn new(m: u8, cap: u8, phi: NuSeries<Jet>) -> Result<Self> {
        if let Some(low) = phi.low() {
            if low < -1 {
                return Err(AlgebraError::Validation(format!(
                    "potential has nu-order {low} < -1"
                )));
            }
        }
        for (_, jet) in phi.iter() {
            assert_eq!(jet.m(), m, "jet dimension mismatch (m)");
            assert_eq!(jet.cap(), cap, "jet truncation mismatch (cap)");
            if jet.weight() != 0 {
                return Err(AlgebraError::Validation(
                    "potential jets must be polynomial (weight 0)".into(),
                ));
            }
        }
        Ok(Potential { m, cap, phi })
    }

    /// `Phi = nu^{-1} sum_k z^k zb^k`.
    pub fn flat(m: u8, cap: u8) -> Self {
        let mut jet = Jet::zero(m, cap);
        for k in 0..m as usize {
            jet = jet.add(&Jet::var_z(m, cap, k).mul(&Jet::var_zb(m, cap, k)));
        }
        Potential {
            m,
            cap,
            phi: NuSeries::single(-1, jet),
        }
    }

    /// The empty potential on a point (`m = 0`).
    pub fn point(cap: u8) -> Self {
        Potential {
            m: 0,
            cap,
            phi: NuSeries::zero(),
        }
    }

    pub fn m(&self) -> u8 {
        self.m
    }
    pub fn cap(&self) -> u8 {
        self.cap
    }
    pub fn phi(&self) -> &NuSeries<Jet> {
        &self.phi
    }

    /// `Phi_r` (zero jet when absent).
    pub fn part(&self, r: i64) -> Jet {
        self.phi
            .get(r)
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.m, self.cap))
    }

    /// `g_{kl} = d^2 Phi_{-1} / dz^k dzb^l`, indexed `[k][l]`.
    pub fn hessian(&self) -> Vec<Vec<Jet>> {
        let lead = self.part(-1);
        (0..self.m as usize)
            .map(|k| {
                (0..self.m as usize)
                    .map(|l| lead.deriv_z(k).deriv_zb(l))
                    .collect()
            })
            .collect()
    }
}

/// Determinant of a square jet matrix by cofactor expansion (`1` for the
/// empty matrix).
pub fn jet_matrix_det(m: u8, cap: u8, mat: &[Vec<Jet>]) -> Jet {
    let n = mat.len();
    if n == 0 {
        return Jet::one(m, cap);
    }
    if n == 1 {
        return mat[0][0].clone();
    }
    let mut det = Jet::zero(m, cap);
    for j in 0..n {
        if mat[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Jet>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(|c| mat[r][c].clone())
                    .collect()
            })
            .collect();
        let cof = mat[0][j].mul(&jet_matrix_det(m, cap, &minor));
        det = if j % 2 == 0 { det.add(&cof) } else { det.sub(&cof) };
    }
    det
}

/// Inverse of a square jet matrix via the adjugate and a truncated inverse
/// of the determinant. Fails when the determinant's constant term is zero.
pub fn jet_matrix_invert(m: u8, cap: u8, mat: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = mat.len();
    let det = jet_matrix_det(m, cap, mat);
    let det_inv = det.invert().map_err(|_| {
        AlgebraError::DegenerateHessian("matrix determinant vanishes at the base point".into())
    })?;
    let mut inv = vec![vec![Jet::zero(m, cap); n]; n];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_{ji} / det
            let minor: Vec<Vec<Jet>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| mat[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = jet_matrix_det(m, cap, &minor).mul(&det_inv);
            if (i + j) % 2 == 1 {
                cof = cof.neg();
            }
            inv[i][j] = cof;
        }
    }
    Ok(inv)
}

/// Which variable family the *left* operators differentiate: anti-Wick
/// left operators differentiate `z` (so `a * f = af` for holomorphic `a`),
/// Wick-type swaps the roles of `z` and `zb`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Chirality {
    AntiWick,
    Wick,
}

impl Chirality {
    pub fn left_side(self) -> Side {
        match self {
            Chirality::AntiWick => Side::Z,
            Chirality::Wick => Side::Zb,
        }
    }
}

/// A base star product with separation of variables, realized as tables of
/// one-sided operators `L_f = sum_r nu^r A_r(f)` and
/// `R_g = sum_r nu^r B_r(g)` on the monomial basis up to the jet cap, each
/// solved from the commutation characterization and re-verified.
#[derive(Clone)]
pub struct StarProduct {
    potential: Potential,
    chirality: Chirality,
    nmax: i64,
    metric: Vec<Vec<Jet>>,
    metric_inv: Vec<Vec<Jet>>,
    det_g: Jet,
    left: BTreeMap<Mono, Vec<HoloOp>>,
    right: BTreeMap<Mono, Vec<HoloOp>>,
}

struct Solver<'a> {
    m: u8,
    cap: u8,
    nmax: i64,
    side: Side,
    /// `d Phi_s / d(other)^l` for each stored `s`, indexed `[l]`.
    grads: BTreeMap<i64, Vec<Jet>>,
    /// inverse Hessian `[l][k]`
    ginv: &'a [Vec<Jet>],
    /// whether every potential part has jet degree <= 2: then all table
    /// coefficients stay exact polynomials; otherwise each
    /// counter-differentiation loses the top jet degree, so the order-`r+1`
    /// verification can only pin the coefficients below degree `cap - r - 1`
    exact_tables: bool,
}

impl<'a> Solver<'a> {
    /// `sum_l rhs[l] * contraction(l, k)`, the side-dependent inverse-metric
    /// contraction used in the top-down solve.
    fn contract(&self, rhs_tilde: &[Jet], k: usize) -> Jet {
        let mut out = Jet::zero(self.m, self.cap);
        for (l, r) in rhs_tilde.iter().enumerate() {
            let g = match self.side {
                Side::Z => &self.ginv[l][k],
                Side::Zb => &self.ginv[k][l],
            };
            out = out.add(&r.mul(g));
        }
        out
    }

    fn h(&self, l: usize) -> &Jet {
        &self.grads[&-1][l]
    }

    /// Builds `A_0..A_nmax` for multiplication by `f`.
    fn build(&self, f: &Jet) -> Result<Vec<HoloOp>> {
        let m = self.m as usize;
        let mut ops = vec![HoloOp::mult(self.side, f)];
        for r in 0..self.nmax {
            // right-hand sides: [A_{r+1}, M_{h_l}] = rhs_l
            let mut rhs: Vec<HoloOp> = Vec::with_capacity(m);
            for l in 0..m {
                let mut acc = ops[r as usize].commut_other_deriv(l);
                for (&s, grad) in &self.grads {
                    if s < 0 || s > r {
                        continue;
                    }
                    let j = (r - s) as usize;
                    acc = acc.add(&ops[j].commut_mult(&grad[l]));
                }
                rhs.push(acc.neg());
            }
            let mut a_next = HoloOp::zero(self.m, self.cap, self.side);
            if m > 0 {
                for deg in (1..=(r + 1) as u32).rev() {
                    for alpha in exponents_of_degree(m, deg) {
                        let k0 = alpha.iter().position(|&e| e > 0).unwrap();
                        let mut gamma = alpha.clone();
                        gamma[k0] -= 1;
                        // remove the already-known contributions of
                        // strictly higher derivative levels from each rhs
                        let mut tilde: Vec<Jet> = Vec::with_capacity(m);
                        for l in 0..m {
                            let mut t = rhs[l]
                                .coeff(&gamma)
                                .cloned()
                                .unwrap_or_else(|| Jet::zero(self.m, self.cap));
                            for (ap, c) in a_next.terms() {
                                if ap.iter().zip(gamma.iter()).any(|(&a, &g)| a < g) {
                                    continue;
                                }
                                let beta: Vec<u8> =
                                    ap.iter().zip(gamma.iter()).map(|(&a, &g)| a - g).collect();
                                let bdeg: u32 = beta.iter().map(|&e| e as u32).sum();
                                if bdeg < 2 {
                                    continue;
                                }
                                let dh = match self.side {
                                    Side::Z => self.h(l).deriv_z_multi(&beta),
                                    Side::Zb => self.h(l).deriv_zb_multi(&beta),
                                };
                                if dh.is_zero() {
                                    continue;
                                }
                                t = t.sub(&c.mul(&dh).scale(&multi_binom(ap, &beta)));
                            }
                            tilde.push(t);
                        }
                        let c_alpha = self
                            .contract(&tilde, k0)
                            .scale(&CRat::from_ratio(1, alpha[k0] as i64));
                        a_next.insert_add(alpha.clone().into_boxed_slice(), c_alpha);
                    }
                }
            }
            // verify the characterization at this order
            for l in 0..m {
                let diff = a_next.commut_mult(self.h(l)).sub(&rhs[l]);
                let ok = if self.exact_tables {
                    diff.is_zero()
                } else {
                    let floor = self.cap as i64 - (r + 1);
                    diff.terms().all(|(_, jet)| {
                        jet.min_degree()
                            .map(|dmin| dmin as i64 > floor)
                            .unwrap_or(true)
                    })
                };
                if !ok {
                    return Err(AlgebraError::Domain(format!(
                        "star-product recursion inconsistent at nu^{} (direction {l})",
                        r + 1
                    )));
                }
            }
            debug_assert!(a_next.order() <= (r + 1) as u32);
            ops.push(a_next);
        }
        Ok(ops)
    }
}

impl StarProduct {
    /// Builds the star product of the given chirality through `nu^nmax`,
    /// with operator tables over the full monomial basis up to the cap.
    pub fn build(potential: Potential, chirality: Chirality, nmax: i64) -> Result<StarProduct> {
        assert!(nmax >= 0);
        let (m, cap) = (potential.m(), potential.cap());
        let metric = potential.hessian();
        let metric_inv = jet_matrix_invert(m, cap, &metric).map_err(|_| {
            AlgebraError::DegenerateHessian(
                "potential Hessian is singular at the base point".into(),
            )
        })?;
        let det_g = jet_matrix_det(m, cap, &metric);
        let exact_tables = potential.phi().iter().all(|(_, j)| j.max_degree() <= 2);

        let grads_for = |side: Side| -> BTreeMap<i64, Vec<Jet>> {
            potential
                .phi()
                .iter()
                .map(|(&s, jet)| {
                    let g = (0..m as usize)
                        .map(|l| match side {
                            Side::Z => jet.deriv_zb(l),
                            Side::Zb => jet.deriv_z(l),
                        })
                        .collect();
                    (s, g)
                })
                .collect()
        };

        let mut tables: Vec<BTreeMap<Mono, Vec<HoloOp>>> = Vec::new();
        for side in [chirality.left_side(), chirality.left_side().other()] {
            let solver = Solver {
                m,
                cap,
                nmax,
                side,
                grads: grads_for(side),
                ginv: &metric_inv,
                exact_tables,
            };
            let mut table = BTreeMap::new();
            for deg in 0..=cap as u32 {
                for exps in exponents_of_degree(2 * m as usize, deg) {
                    let (z, zb) = exps.split_at(m as usize);
                    let mono = Mono::from_parts(z, zb);
                    let f = Jet::monomial(m, cap, z, zb, CRat::one());
                    table.insert(mono, solver.build(&f)?);
                }
            }
            tables.push(table);
        }
        let right = tables.pop().unwrap();
        let left = tables.pop().unwrap();
        Ok(StarProduct {
            potential,
            chirality,
            nmax,
            metric,
            metric_inv,
            det_g,
            left,
            right,
        })
    }

    /// The ordinary product of `nu`-series on a point (`m = 0`).
    pub fn trivial_point(cap: u8, nmax: i64) -> StarProduct {
        StarProduct::build(Potential::point(cap), Chirality::AntiWick, nmax)
            .expect("point potential is trivially nondegenerate")
    }

    /// The recursion-built flat product (compare with `flat::star_jets`).
    pub fn flat(m: u8, cap: u8, nmax: i64) -> StarProduct {
        StarProduct::build(Potential::flat(m, cap), Chirality::AntiWick, nmax)
            .expect("flat potential is nondegenerate")
    }

    pub fn m(&self) -> u8 {
        self.potential.m()
    }
    pub fn cap(&self) -> u8 {
        self.potential.cap()
    }
    pub fn nmax(&self) -> i64 {
        self.nmax
    }
    pub fn chirality(&self) -> Chirality {
        self.chirality
    }
    pub fn potential(&self) -> &Potential {
        &self.potential
    }
    pub fn metric(&self) -> &Vec<Vec<Jet>> {
        &self.metric
    }
    pub fn metric_inv(&self) -> &Vec<Vec<Jet>> {
        &self.metric_inv
    }
    pub fn det_metric(&self) -> &Jet {
        &self.det_g
    }

    /// The left-operator components `A_0..A_nmax` for a monomial.
    pub fn left_ops(&self, mono: &Mono) -> &Vec<HoloOp> {
        self.left
            .get(mono)
            .expect("monomial outside the operator table (degree > cap)")
    }

    pub fn right_ops(&self, mono: &Mono) -> &Vec<HoloOp> {
        self.right
            .get(mono)
            .expect("monomial outside the operator table (degree > cap)")
    }

    fn apply_table(
        &self,
        table: &BTreeMap<Mono, Vec<HoloOp>>,
        f: &Jet,
        g: &Jet,
    ) -> NuSeries<Jet> {
        assert_eq!(f.weight(), 0, "operator-table star needs polynomial arguments");
        assert_eq!(g.weight(), 0, "operator-table star needs polynomial arguments");
        let mut out = NuSeries::zero().with_trunc(Trunc::AtMost(self.nmax));
        for (mono, c) in f.terms() {
            let ops = table
                .get(mono)
                .expect("monomial outside the operator table (degree > cap)");
            for (r, op) in ops.iter().enumerate() {
                out.insert_add(r as i64, op.apply(g).scale(c));
            }
        }
        out
    }

    /// `f * g` for single jets (at `nu^0`); known through `nu^nmax`.
    /// On a point (`m = 0`) the product is exact.
    pub fn star_jets(&self, f: &Jet, g: &Jet) -> NuSeries<Jet> {
        if self.m() == 0 {
            return NuSeries::single(0, f.mul(g));
        }
        self.apply_table(&self.left, f, g)
    }

    /// Same product evaluated through the right-operator table (`R_g f`);
    /// agreeing with `star_jets` is a consistency check.
    pub fn star_jets_via_right(&self, f: &Jet, g: &Jet) -> NuSeries<Jet> {
        if self.m() == 0 {
            return NuSeries::single(0, f.mul(g));
        }
        self.apply_table(&self.right, g, f)
    }

    /// `f * g` for `nu`-series.
    pub fn star(&self, f: &NuSeries<Jet>, g: &NuSeries<Jet>) -> NuSeries<Jet> {
        if self.m() == 0 {
            return f.mul(g);
        }
        let bound = crate::coeff::opt_min(
            crate::coeff::opt_min(
                crate::coeff::opt_add(f.trunc().bound(), g.val_floor()),
                crate::coeff::opt_add(g.trunc().bound(), f.val_floor()),
            ),
            crate::coeff::opt_add(
                crate::coeff::opt_add(f.val_floor(), g.val_floor()),
                Some(self.nmax),
            ),
        );
        let trunc = match bound {
            None => Trunc::Exact,
            Some(h) => Trunc::AtMost(h),
        };
        let mut out = NuSeries::zero().with_trunc(trunc);
        for (&i, jf) in f.iter() {
            for (&j, jg) in g.iter() {
                for (&r, jet) in self.star_jets(jf, jg).iter() {
                    if out.trunc().knows(i + j + r) {
                        out.insert_add(i + j + r, jet.clone());
                    }
                }
            }
        }
        out
    }

    /// The bidifferential coefficient `C_r(f, g)`.
    pub fn c_r(&self, r: i64, f: &Jet, g: &Jet) -> Jet {
        self.star_jets(f, g)
            .get(r)
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.m(), self.cap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_star_is_plain_series_multiplication() {
        let s = StarProduct::trivial_point(4, 4);
        let one = Jet::one(0, 4);
        let f = NuSeries::from_terms([(0, one.clone()), (1, one.clone())]);
        let g = NuSeries::from_terms([(0, one.clone()), (1, one.neg())]);
        let prod = s.star(&f, &g);
        // (1+nu)(1-nu) = 1 - nu^2, exact
        assert_eq!(prod.trunc(), Trunc::Exact);
        assert_eq!(prod, NuSeries::from_terms([(0, one.clone()), (2, one.neg())]));
        let nu = NuSeries::single(1, one.clone());
        let c = NuSeries::single(0, Jet::constant(0, 4, CRat::from_ratio(3, 7)));
        assert_eq!(s.star(&nu, &c), NuSeries::single(1, Jet::constant(0, 4, CRat::from_ratio(3, 7))));
    }

    #[test]
    fn flat_recursion_reproduces_first_orders() {
        let s = StarProduct::flat(1, 6, 4);
        let z = Jet::var_z(1, 6, 0);
        let zb = Jet::var_zb(1, 6, 0);
        // zb * z = z zb + nu
        let p = s.star_jets(&zb, &z);
        assert_eq!(p.get(0), Some(&z.mul(&zb)));
        assert_eq!(p.get(1), Some(&Jet::one(1, 6)));
        assert_eq!(p.get(2), None);
        // z * zb = z zb (holomorphic left factor)
        let q = s.star_jets(&z, &zb);
        assert_eq!(q.get(0), Some(&z.mul(&zb)));
        assert_eq!(q.get(1), None);
        // zb^2 * z^2 = z^2 zb^2 + 4 nu z zb + 2 nu^2
        let p = s.star_jets(&zb.mul(&zb), &z.mul(&z));
        assert_eq!(p.get(1), Some(&z.mul(&zb).scale(&CRat::from_int(4))));
        assert_eq!(p.get(2), Some(&Jet::constant(1, 6, CRat::from_int(2))));
    }

    #[test]
    fn left_and_right_tables_agree() {
        let s = StarProduct::flat(1, 5, 3);
        let f = Jet::monomial(1, 5, &[1], &[2], CRat::from_int(2));
        let g = Jet::monomial(1, 5, &[2], &[1], CRat::one());
        let lhs = s.star_jets(&f, &g);
        let rhs = s.star_jets_via_right(&f, &g);
        assert!(lhs.agrees_up_to(&rhs, 3));
    }

    #[test]
    fn separation_of_variables_on_the_basis() {
        let s = StarProduct::flat(1, 5, 3);
        let a = Jet::monomial(1, 5, &[2], &[0], CRat::one()); // holomorphic
        let b = Jet::monomial(1, 5, &[0], &[1], CRat::one()); // antiholomorphic
        for f in [
            Jet::monomial(1, 5, &[1], &[1], CRat::one()),
            Jet::monomial(1, 5, &[0], &[2], CRat::one()),
        ] {
            let left = s.star_jets(&a, &f);
            assert_eq!(left.get(0), Some(&a.mul(&f)));
            assert!(left.get(1).is_none() && left.get(2).is_none());
            let right = s.star_jets(&f, &b);
            assert_eq!(right.get(0), Some(&f.mul(&b)));
            assert!(right.get(1).is_none());
        }
    }

    #[test]
    fn left_multiplication_by_potential_gradient_is_first_order() {
        // L_{dPhi/dz^k} = M_{dPhi/dz^k} + d/dz^k, checked by action
        let cap = 6u8;
        let mut phi0 = Jet::zero(1, cap);
        // a perturbed potential: Phi = nu^{-1} z zb + z^2 zb + z zb^2 / 3
        phi0 = phi0.add(&Jet::monomial(1, cap, &[2], &[1], CRat::one()));
        phi0 = phi0.add(&Jet::monomial(1, cap, &[1], &[2], CRat::from_ratio(1, 3)));
        let phi = NuSeries::from_terms([(-1, Potential::flat(1, cap).part(-1)), (0, phi0)]);
        let pot = Potential::new(1, cap, phi).unwrap();
        let s = StarProduct::build(pot, Chirality::AntiWick, 3).unwrap();
        let dphi: NuSeries<Jet> = s.potential().phi().map(|j| j.deriv_z(0));
        for g in [
            Jet::monomial(1, cap, &[1], &[1], CRat::one()),
            Jet::monomial(1, cap, &[0], &[2], CRat::one()),
        ] {
            let gs = NuSeries::single(0, g.clone());
            let lhs = s.star(&dphi, &gs);
            let expect = dphi.mul(&gs).add(&NuSeries::single(0, g.deriv_z(0)));
            assert!(lhs.agrees_up_to(&expect, 2));
        }
    }

    #[test]
    fn associativity_for_a_perturbed_potential() {
        // cap is generous so no intermediate coefficient overflows it: for a
        // cubic part each nu-order can raise the total degree by one
        let cap = 10u8;
        let mut phi0 = Jet::zero(1, cap);
        phi0 = phi0.add(&Jet::monomial(1, cap, &[2], &[1], CRat::from_ratio(1, 2)));
        let phi = NuSeries::from_terms([(-1, Potential::flat(1, cap).part(-1)), (0, phi0)]);
        let pot = Potential::new(1, cap, phi).unwrap();
        let s = StarProduct::build(pot, Chirality::AntiWick, 4).unwrap();
        let f = NuSeries::single(0, Jet::monomial(1, cap, &[1], &[1], CRat::one()));
        let g = NuSeries::single(0, Jet::monomial(1, cap, &[0], &[1], CRat::from_int(2)));
        let h = NuSeries::single(0, Jet::monomial(1, cap, &[1], &[0], CRat::one()));
        let lhs = s.star(&s.star(&f, &g), &h);
        let rhs = s.star(&f, &s.star(&g, &h));
        assert!(lhs.agrees_up_to(&rhs, 4));
        assert!(!lhs.is_zero());
    }

    #[test]
    fn wick_chirality_mirrors_separation() {
        let s = StarProduct::build(Potential::flat(1, 5), Chirality::Wick, 3).unwrap();
        let a = Jet::monomial(1, 5, &[1], &[0], CRat::one());
        let b = Jet::monomial(1, 5, &[0], &[1], CRat::one());
        // Wick type: antiholomorphic left factors and holomorphic right
        // factors multiply pointwise
        let p = s.star_jets(&b, &a);
        assert_eq!(p.get(0), Some(&a.mul(&b)));
        assert!(p.get(1).is_none());
        let q = s.star_jets(&a, &b);
        // z * zb = z zb + nu for the Wick mirror
        assert_eq!(q.get(1), Some(&Jet::one(1, 5)));
    }

    #[test]
    fn degenerate_potential_is_rejected() {
        let cap = 4u8;
        // Phi_{-1} = z^2 zb^2 has vanishing Hessian at 0
        let phi = NuSeries::single(-1, Jet::monomial(1, cap, &[2], &[2], CRat::one()));
        let pot = Potential::new(1, cap, phi).unwrap();
        match StarProduct::build(pot, Chirality::AntiWick, 2) {
            Err(AlgebraError::DegenerateHessian(_)) => {}
            other => panic!("expected degenerate Hessian, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn matrix_helpers_invert_jet_matrices() {
        let (m, cap) = (2u8, 4u8);
        let a = vec![
            vec![Jet::one(m, cap), Jet::var_z(m, cap, 0)],
            vec![Jet::var_zb(m, cap, 1), Jet::constant(m, cap, CRat::from_int(2))],
        ];
        let inv = jet_matrix_invert(m, cap, &a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Jet::zero(m, cap);
                for k in 0..2 {
                    s = s.add(&a[i][k].mul(&inv[k][j]));
                }
                let expect = if i == j {
                    Jet::one(m, cap)
                } else {
                    Jet::zero(m, cap)
                };
                assert_eq!(s, expect);
            }
        }
    }
}
