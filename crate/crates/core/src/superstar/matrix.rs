//! Matrices over the base star algebra, indexed by Grassmann multi-indices.
//!
//! A function on the split super domain is encoded by its component matrix
//! `(u_{PQ})` with rows and columns running over subsets of the `d` odd
//! directions (bitmasks `0..2^d`).  The entries are `nu`-series of jets and
//! multiply through the *base* star product, never pointwise.  Inverting an
//! admissible component matrix over that noncommutative ring is the single
//! computation everything else in this module family rests on.

use std::collections::BTreeMap;

use crate::coeff::{Jet, NuSeries, Trunc};
use crate::error::{AlgebraError, Result};
use crate::grassmann::{card, Mask};
use crate::starprod::{jet_matrix_invert, StarProduct};
use crate::superfn::SuperFunction;

/// A `2^d x 2^d` matrix with entries in the base star algebra
/// (`nu`-series of jets on `C^m`, multiplied via a `StarProduct`).
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOverStar {
    m: u8,
    cap: u8,
    d: u8,
    /// `entries[row][col]`, with masks used directly as indices.
    entries: Vec<Vec<NuSeries<Jet>>>,
}

impl MatrixOverStar {
    pub fn zero(m: u8, cap: u8, d: u8) -> Self {
        let n = 1usize << d;
        MatrixOverStar {
            m,
            cap,
            d,
            entries: vec![vec![NuSeries::zero(); n]; n],
        }
    }

    pub fn identity(m: u8, cap: u8, d: u8) -> Self {
        let mut out = MatrixOverStar::zero(m, cap, d);
        let one = NuSeries::single(0, Jet::one(m, cap));
        for i in 0..out.dim() {
            out.entries[i][i] = one.clone();
        }
        out
    }

    /// The component matrix of a superfunction: `entry[P][Q] = u_{PQ}`.
    pub fn components_of(u: &SuperFunction) -> Self {
        let mut out = MatrixOverStar::zero(u.m(), u.cap(), u.d());
        for p in 0..out.dim() {
            for q in 0..out.dim() {
                out.entries[p][q] = u.component(p as Mask, q as Mask);
            }
        }
        out
    }

    /// Rebuilds a superfunction whose component at `(P, Q)` is
    /// `entry[P][Q]` (an even/odd mixture is allowed).
    pub fn to_superfunction(&self) -> SuperFunction {
        let mut comps: BTreeMap<(Mask, Mask), NuSeries<Jet>> = BTreeMap::new();
        let mut base = Trunc::Exact;
        for p in 0..self.dim() {
            for q in 0..self.dim() {
                let e = &self.entries[p][q];
                base = base.min(e.trunc());
                if !e.is_zero() {
                    comps.insert((p as Mask, q as Mask), e.clone());
                }
            }
        }
        SuperFunction::from_components(self.m, self.d, self.cap, base, &comps)
    }

    pub fn m(&self) -> u8 {
        self.m
    }
    pub fn cap(&self) -> u8 {
        self.cap
    }
    pub fn d(&self) -> u8 {
        self.d
    }
    pub fn dim(&self) -> usize {
        1usize << self.d
    }

    pub fn entry(&self, row: usize, col: usize) -> &NuSeries<Jet> {
        &self.entries[row][col]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, s: NuSeries<Jet>) {
        self.entries[row][col] = s;
    }

    /// Matrix product with entrywise star multiplication:
    /// `(A . B)[i][k] = sum_j A[i][j] * B[j][k]`.
    pub fn mul_star(&self, rhs: &MatrixOverStar, star: &StarProduct) -> MatrixOverStar {
        assert_eq!(self.d, rhs.d, "matrix dimensions differ");
        assert_eq!(self.m, rhs.m, "matrix base dimensions differ");
        let n = self.dim();
        let mut out = MatrixOverStar::zero(self.m, self.cap, self.d);
        for i in 0..n {
            for k in 0..n {
                let mut acc = NuSeries::zero();
                for j in 0..n {
                    let a = &self.entries[i][j];
                    let b = &rhs.entries[j][k];
                    if a.is_exactly_zero() || b.is_exactly_zero() {
                        continue;
                    }
                    acc = acc.add(&star.star(a, b));
                }
                out.entries[i][k] = acc;
            }
        }
        out
    }

    /// Whether every entry agrees with the identity matrix throughout its
    /// tracked `nu`-range (exact entries must match exactly).
    pub fn is_identity_on_known_range(&self) -> bool {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let want = if i == j {
                    NuSeries::single(0, Jet::one(self.m, self.cap))
                } else {
                    NuSeries::zero()
                };
                let got = &self.entries[i][j];
                let ok = match got.trunc() {
                    Trunc::Exact => *got == want,
                    Trunc::AtMost(h) => h >= 0 && got.agrees_up_to(&want, h),
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// The lowest tracked order and coefficient of the volume entry
    /// `v^{[d][d]}`, if its leading term is determined.
    pub fn volume_leading(&self) -> Option<(i64, Jet)> {
        let full = self.dim() - 1;
        let e = &self.entries[full][full];
        let r = e.low()?;
        Some((r, e.get(r).cloned().unwrap_or_else(|| Jet::zero(self.m, self.cap))))
    }
}

/// Inverts a component matrix over the base star algebra.
///
/// The matrix must come from an *even* function (entries at odd
/// `|P| + |Q|` vanish).  Conjugating by `diag(nu^{|P|/2})` then turns the
/// half-integral grading into an integral one: the rescaled matrix has
/// entries `nu^{(|P|+|Q|)/2} u_{PQ}`.  Each row is normalized by its minimal
/// `nu`-valuation, the constant term of the normalized matrix is inverted as
/// a jet matrix, and the remaining orders follow by a triangular solve in
/// which the unknown order enters only through that constant term.  The
/// result is mapped back through the two diagonal rescalings, and both
/// one-sided inverse identities are verified on their tracked ranges.
///
/// Errors with `NotAdmissible` when a row vanishes identically, when the
/// normalized constant-term matrix is singular at the base point, or when
/// the verification of either identity fails.
pub fn star_matrix_inverse(mat: &MatrixOverStar, base: &StarProduct) -> Result<MatrixOverStar> {
    let n = mat.dim();
    let m = mat.m();
    let cap = mat.cap();
    let nmax = base.nmax();
    assert_eq!(m, base.m(), "matrix and star product live on different bases");

    for p in 0..n {
        for q in 0..n {
            if (card(p as Mask) + card(q as Mask)) % 2 == 1 && !mat.entry(p, q).is_zero() {
                return Err(AlgebraError::Domain(
                    "component matrix of an odd function; only even elements can be inverted"
                        .into(),
                ));
            }
        }
    }

    // Rescale: entry (P, Q) shifted up by (|P| + |Q|) / 2.
    let shift = |p: usize, q: usize| -> i64 { ((card(p as Mask) + card(q as Mask)) / 2) as i64 };
    let mut resc = MatrixOverStar::zero(m, cap, mat.d());
    for p in 0..n {
        for q in 0..n {
            resc.set_entry(p, q, mat.entry(p, q).shift(shift(p, q)));
        }
    }

    // Normalize each row by its minimal valuation.
    let mut row_val = vec![0i64; n];
    for p in 0..n {
        let mut best: Option<i64> = None;
        for q in 0..n {
            if let Some(v) = resc.entry(p, q).low() {
                best = Some(match best {
                    None => v,
                    Some(b) => b.min(v),
                });
            }
        }
        row_val[p] = best.ok_or_else(|| {
            AlgebraError::NotAdmissible(format!("row {p} of the component matrix vanishes"))
        })?;
    }
    let mut norm = MatrixOverStar::zero(m, cap, mat.d());
    for p in 0..n {
        for q in 0..n {
            norm.set_entry(p, q, resc.entry(p, q).shift(-row_val[p]));
        }
    }

    // Leading (nu^0) jet matrix and its inverse.
    let zero_jet = Jet::zero(m, cap);
    let lead: Vec<Vec<Jet>> = (0..n)
        .map(|p| {
            (0..n)
                .map(|q| norm.entry(p, q).get(0).cloned().unwrap_or_else(|| zero_jet.clone()))
                .collect()
        })
        .collect();
    let lead_inv = jet_matrix_invert(m, cap, &lead).map_err(|_| {
        AlgebraError::NotAdmissible(
            "leading matrix of the rescaled components is singular at the base point".into(),
        )
    })?;

    // How many orders the solve can honestly produce: every entry of the
    // normalized matrix must be known through the order in play, and the
    // star product's tables reach `nmax`.
    let mut solve_to = nmax;
    for p in 0..n {
        for q in 0..n {
            if let Trunc::AtMost(h) = norm.entry(p, q).trunc() {
                solve_to = solve_to.min(h);
            }
        }
    }
    if solve_to < 0 {
        return Err(AlgebraError::NotAdmissible(
            "component matrix is not known through its own leading order".into(),
        ));
    }

    // Triangular solve of  norm * X = identity  order by order.  At order t
    // the unknown X_t appears only via the pointwise product lead . X_t, so
    //   X_t = lead_inv . (delta_{t,0} - sum_{i+j+r=t, j<t} C_r(norm_i, X_j)).
    let mut layers: Vec<Vec<Vec<Jet>>> = Vec::new();
    for t in 0..=solve_to {
        let mut rhs: Vec<Vec<Jet>> = vec![vec![zero_jet.clone(); n]; n];
        if t == 0 {
            for k in 0..n {
                rhs[k][k] = Jet::one(m, cap);
            }
        }
        for (j, layer) in layers.iter().enumerate() {
            let j = j as i64;
            for i in 0..=(t - j) {
                let r = t - j - i;
                for k in 0..n {
                    for l in 0..n {
                        let a = match norm.entry(k, l).get(i) {
                            Some(a) if !a.is_zero() => a,
                            _ => continue,
                        };
                        for q in 0..n {
                            let x = &layer[l][q];
                            if x.is_zero() {
                                continue;
                            }
                            let c = base.c_r(r, a, x);
                            if !c.is_zero() {
                                rhs[k][q] = rhs[k][q].sub(&c);
                            }
                        }
                    }
                }
            }
        }
        let mut xt: Vec<Vec<Jet>> = vec![vec![zero_jet.clone(); n]; n];
        for p in 0..n {
            for q in 0..n {
                let mut acc = zero_jet.clone();
                for k in 0..n {
                    if lead_inv[p][k].is_zero() || rhs[k][q].is_zero() {
                        continue;
                    }
                    acc = acc.add(&lead_inv[p][k].mul(&rhs[k][q]));
                }
                xt[p][q] = acc;
            }
        }
        layers.push(xt);
    }

    // Map back:  v[Q][P] = nu^(shift(Q,P) - row_val[P]) X[Q][P].
    let mut inv = MatrixOverStar::zero(m, cap, mat.d());
    for q in 0..n {
        for p in 0..n {
            let mut s = NuSeries::zero().with_trunc(Trunc::AtMost(solve_to));
            for (t, layer) in layers.iter().enumerate() {
                if !layer[q][p].is_zero() {
                    s.insert_add(t as i64, layer[q][p].clone());
                }
            }
            inv.set_entry(q, p, s.shift(shift(q, p) - row_val[p]));
        }
    }

    if !mat.mul_star(&inv, base).is_identity_on_known_range() {
        return Err(AlgebraError::NotAdmissible(
            "right inverse identity failed over the star algebra".into(),
        ));
    }
    if !inv.mul_star(mat, base).is_identity_on_known_range() {
        return Err(AlgebraError::NotAdmissible(
            "left inverse identity failed over the star algebra".into(),
        ));
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::starprod::StarProduct;

    fn one_series(m: u8, cap: u8) -> NuSeries<Jet> {
        NuSeries::single(0, Jet::one(m, cap))
    }

    /// The scaled pairing family on a point: `u = 1 + nu^{-n} th thb`.
    fn point_pair_function(n: i64, cap: u8, d1: bool) -> SuperFunction {
        assert!(d1);
        let one = SuperFunction::term(0, 1, cap, Trunc::Exact, 0, &[], &[], 0, 0, crate::coeff::CRat::one());
        let pair = SuperFunction::term(0, 1, cap, Trunc::Exact, -n, &[], &[], 1, 1, crate::coeff::CRat::one());
        one.add(&pair)
    }

    #[test]
    fn identity_matrix_inverts_to_itself() {
        let base = StarProduct::trivial_point(2, 4);
        let id = MatrixOverStar::identity(0, 2, 2);
        let inv = star_matrix_inverse(&id, &base).unwrap();
        assert!(inv.is_identity_on_known_range());
        let (r, lead) = inv.volume_leading().unwrap();
        assert_eq!(r, 0);
        assert_eq!(lead, Jet::one(0, 2));
    }

    #[test]
    fn point_pair_family_inverts_to_diagonal_power() {
        // u = 1 + nu^{-n} th thb has component matrix diag(1, nu^{-n});
        // the inverse over the point algebra is diag(1, nu^n).
        for n in 0..=2i64 {
            let base = StarProduct::trivial_point(2, 4);
            let u = point_pair_function(n, 2, true);
            let mat = MatrixOverStar::components_of(&u);
            let v = star_matrix_inverse(&mat, &base).unwrap();
            assert!(v.entry(0, 1).is_zero());
            assert!(v.entry(1, 0).is_zero());
            assert!(v.entry(0, 0).agrees_up_to(&one_series(0, 2), 4));
            let e = v.entry(1, 1);
            assert_eq!(e.low(), Some(n));
            assert_eq!(e.get(n), Some(&Jet::one(0, 2)));
            assert!(e.agrees_up_to(&one_series(0, 2).shift(n), 4));
        }
    }

    #[test]
    fn odd_function_matrix_is_rejected() {
        let base = StarProduct::trivial_point(2, 2);
        let thb = SuperFunction::term(0, 1, 2, Trunc::Exact, 0, &[], &[], 0, 1, crate::coeff::CRat::one());
        let mat = MatrixOverStar::components_of(&thb);
        let err = star_matrix_inverse(&mat, &base).unwrap_err();
        assert!(matches!(err, AlgebraError::Domain(_)));
    }

    #[test]
    fn constant_one_function_is_not_admissible() {
        // u = 1 leaves every row except the empty one identically zero.
        let base = StarProduct::trivial_point(2, 2);
        let one = SuperFunction::one(0, 1, 2, Trunc::Exact);
        let mat = MatrixOverStar::components_of(&one);
        let err = star_matrix_inverse(&mat, &base).unwrap_err();
        assert!(matches!(err, AlgebraError::NotAdmissible(_)));
    }

    #[test]
    fn singular_leading_matrix_is_not_admissible() {
        // d = 2 with all four mixed pairings equal: the normalized leading
        // matrix has a repeated row block and is singular.
        let base = StarProduct::trivial_point(2, 2);
        let mut u = SuperFunction::one(0, 2, 2, Trunc::Exact);
        for (i, j) in [(1u16, 1u16), (1, 2), (2, 1), (2, 2)] {
            u = u.add(&SuperFunction::term(
                0,
                2,
                2,
                Trunc::Exact,
                -1,
                &[],
                &[],
                i,
                j,
                crate::coeff::CRat::one(),
            ));
        }
        let mat = MatrixOverStar::components_of(&u);
        let err = star_matrix_inverse(&mat, &base).unwrap_err();
        assert!(matches!(err, AlgebraError::NotAdmissible(_)));
    }

    #[test]
    fn jet_valued_pairing_has_reciprocal_leading_term() {
        // m = 1, d = 1, u = 1 + nu^{-1} (1 + z) th thb over the flat base:
        // (1 + z) is holomorphic, so the star inverse of its rescaled
        // component is the pointwise reciprocal and v^{11} = nu (1+z)^{-1}.
        let (m, cap, nmax) = (1u8, 6u8, 4i64);
        let base = StarProduct::flat(m, cap, nmax);
        let one = SuperFunction::one(m, 1, cap, Trunc::Exact);
        let pair = SuperFunction::term(m, 1, cap, Trunc::Exact, -1, &[0], &[0], 1, 1, crate::coeff::CRat::one())
            .add(&SuperFunction::term(m, 1, cap, Trunc::Exact, -1, &[1], &[0], 1, 1, crate::coeff::CRat::one()));
        let u = one.add(&pair);
        let mat = MatrixOverStar::components_of(&u);
        let v = star_matrix_inverse(&mat, &base).unwrap();
        let (r, lead) = v.volume_leading().unwrap();
        assert_eq!(r, 1);
        let expect = Jet::one(m, cap).add(&Jet::var_z(m, cap, 0)).invert().unwrap();
        assert_eq!(lead, expect);
    }
}
