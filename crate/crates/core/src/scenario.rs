//! Scenario descriptions and the identity-suite runner behind the command
//! line interface.
//!
//! A scenario is a JSON document giving the dimensions, the truncation
//! orders, the formal potential (or an explicit pairing function `u`), the
//! suites to run, and a sampling seed.  Running it builds the super star
//! product and its transforms, executes the requested identity suites with
//! deterministic seeded sampling, and assembles an exact machine-readable
//! report: rationals serialize as `"p/q"` strings, every series is printed
//! lowest `nu`-order first with an explicit truncation marker, and a fixed
//! scenario plus seed always yields a byte-identical report (wall-clock
//! timings are only included on request).

use crate::berezin::SuperBerezin;
use crate::coeff::{opt_min, parse_rational, CRat, Jet, NuSeries, Ring, Trunc};
use crate::error::{AlgebraError, Result};
use crate::grassmann::{card, full_mask, Mask, SuperCoeff};
use crate::starprod::dual::dual_potential;
use crate::starprod::{
    jet_matrix_det, jet_matrix_invert, BaseBerezin, Chirality, Potential, StarProduct, TraceData,
};
use crate::superfn::SuperFunction;
use crate::superstar::{transform_components, MatrixOverStar, SuperStarProduct};
use crate::trace::{
    product, signed_half_turn, supertrace, supertrace_density, supertrace_via_density,
    verify_pairing_exponential_top, verify_trace_pairing, StrFunctional, SupertraceDensity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// One exact term of a formal potential or pairing function:
/// `coeff * nu^{nu_power} z^{z_exps} zbar^{zbar_exps} theta^{theta_mask}
/// thetabar^{thetabar_mask}` with the coefficient given as exact rationals
/// in `"p/q"` text form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub nu_power: i64,
    #[serde(default)]
    pub z_exps: Vec<u8>,
    #[serde(default)]
    pub zbar_exps: Vec<u8>,
    #[serde(default)]
    pub theta_mask: u16,
    #[serde(default)]
    pub thetabar_mask: u16,
    pub coeff_re: String,
    #[serde(default = "zero_string")]
    pub coeff_im: String,
}

fn zero_string() -> String {
    "0".to_string()
}
fn default_nu_order() -> i64 {
    4
}
fn default_degree() -> u8 {
    6
}

/// A runnable scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    /// Even (complex) dimension of the base.
    pub m: u8,
    /// Number of odd generator pairs.
    pub d: u8,
    /// `nu`-order up to which identities are checked.
    #[serde(rename = "N", default = "default_nu_order")]
    pub nu_order: i64,
    /// Jet degree cap.
    #[serde(rename = "D", default = "default_degree")]
    pub degree: u8,
    /// Terms of the formal potential `X`.
    #[serde(default)]
    pub potential: Vec<TermSpec>,
    /// Optional explicit pairing function `u`.  When present the product is
    /// built directly from it and the potential must be Grassmann-free;
    /// this expresses pairings that are not exponentials of a nondegenerate
    /// nilpotent potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_u: Option<Vec<TermSpec>>,
    /// Suites to run; absent means all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<String>>,
    /// Seed for the deterministic sampling inside the suites.
    #[serde(default)]
    pub seed: u64,
}

/// The identity suites, in canonical execution order.
pub const SUITE_NAMES: &[&str] = &[
    "associativity",
    "separation",
    "naturality",
    "operator_identities",
    "matrix_inverse",
    "supertrace",
    "trace_pairing",
    "pairing_top",
    "trivialization",
];

/// Outcome of one identity suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub pass: bool,
    /// Highest `nu`-order actually verified across the suite's checks;
    /// absent when every comparison was exact (untruncated).
    pub checked_to: Option<i64>,
    pub details: Vec<String>,
}

/// The canonical density data of the product, when it exists.
#[derive(Serialize)]
pub struct DensityReport {
    pub tau: SuperFunction,
    pub rho: SuperFunction,
    pub kappa: NuSeries<Jet>,
}

/// One entry of a product coefficient table: `C_order(left, right) = value`.
#[derive(Clone, Debug, Serialize)]
pub struct ProductTableEntry {
    pub order: i64,
    pub left: String,
    pub right: String,
    pub value: String,
}

/// The full result of a scenario run.
#[derive(Serialize)]
pub struct Report {
    pub scenario: Scenario,
    /// The seed actually used (after any override).
    pub seed: u64,
    /// Whether the product deforms the pointwise product.
    pub is_star_product: bool,
    pub suites: Vec<SuiteReport>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub densities: Option<DensityReport>,
    /// Low-degree product coefficient tables (zero entries omitted).
    pub product_table: Vec<ProductTableEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u128>>,
}

/// Command-line overrides for a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the scenario's suite list.
    pub suites: Option<Vec<String>>,
    /// Overrides the scenario's sampling seed.
    pub seed: Option<u64>,
    /// Overrides the work-budget guardrail.
    pub max_budget: Option<u64>,
    /// Include wall-clock timings in the report.  Off by default so that
    /// identical scenario and seed produce byte-identical reports.
    pub timings: bool,
}

/// Default guardrail for the work estimate `4^d * N * D^{2m}`.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

fn work_estimate(s: &Scenario) -> u64 {
    let masks = 1u64 << (2 * s.d as u32).min(62);
    let orders = s.nu_order.max(1) as u64;
    let deg = (s.degree as u64).max(1);
    masks
        .saturating_mul(orders)
        .saturating_mul(deg.saturating_pow(2 * s.m as u32))
}

fn validate(s: &Scenario, max_budget: Option<u64>) -> Result<()> {
    if s.d == 0 || s.d > 4 {
        return Err(AlgebraError::Validation(format!(
            "d = {} outside the supported range 1..=4",
            s.d
        )));
    }
    if s.nu_order < 0 {
        return Err(AlgebraError::Validation(format!(
            "N = {} must be nonnegative",
            s.nu_order
        )));
    }
    if s.degree == 0 || s.degree > 100 {
        return Err(AlgebraError::Validation(format!(
            "D = {} outside the supported range 1..=100",
            s.degree
        )));
    }
    let budget = max_budget.unwrap_or(DEFAULT_BUDGET);
    let work = work_estimate(s);
    if work > budget {
        return Err(AlgebraError::Validation(format!(
            "work estimate 4^d * N * D^(2m) = {work} exceeds the budget {budget}; \
             raise --max-budget to override"
        )));
    }
    Ok(())
}

fn parse_coeff(re: &str, im: &str) -> std::result::Result<CRat, String> {
    Ok(CRat {
        re: parse_rational(re)?,
        im: parse_rational(im)?,
    })
}

fn assemble(m: u8, d: u8, cap: u8, terms: &[TermSpec], what: &str) -> Result<SuperFunction> {
    let full = full_mask(d);
    let mut out = SuperFunction::zero(m, d, cap, Trunc::Exact);
    for (k, t) in terms.iter().enumerate() {
        if t.z_exps.len() > m as usize || t.zbar_exps.len() > m as usize {
            return Err(AlgebraError::Validation(format!(
                "{what} term {k}: exponent list longer than m = {m}"
            )));
        }
        if t.theta_mask & !full != 0 || t.thetabar_mask & !full != 0 {
            return Err(AlgebraError::Validation(format!(
                "{what} term {k}: generator mask uses indices beyond d = {d}"
            )));
        }
        let c = parse_coeff(&t.coeff_re, &t.coeff_im)
            .map_err(|e| AlgebraError::Validation(format!("{what} term {k}: {e}")))?;
        out = out.add(&SuperFunction::term(
            m,
            d,
            cap,
            Trunc::Exact,
            t.nu_power,
            &t.z_exps,
            &t.zbar_exps,
            t.theta_mask,
            t.thetabar_mask,
            c,
        ));
    }
    Ok(out)
}

/// A scenario compiled into algebra objects.
pub struct Built {
    pub star: SuperStarProduct,
    /// The assembled potential, when the scenario supplies one.
    pub x: Option<SuperFunction>,
}

/// Validates the scenario against the guardrails and builds the product.
pub fn build(s: &Scenario, max_budget: Option<u64>) -> Result<Built> {
    validate(s, max_budget)?;
    let (m, d, cap) = (s.m, s.d, s.degree);
    // Conjugation-built identities lose tracked orders, so the product is
    // carried a few orders past the requested check depth.
    let nmax = s.nu_order + 4;
    let x = assemble(m, d, cap, &s.potential, "potential")?;
    let star = if let Some(uterms) = &s.explicit_u {
        let u = assemble(m, d, cap, uterms, "explicit_u")?;
        let body = x.component(0, 0);
        if !x.sub(&SuperFunction::from_body(d, &body, m, cap)).is_zero() {
            return Err(AlgebraError::Validation(
                "with explicit_u the potential must be Grassmann-free".into(),
            ));
        }
        let base = StarProduct::build(Potential::new(m, cap, body)?, Chirality::AntiWick, nmax)?;
        SuperStarProduct::new(base, u)?
    } else {
        SuperStarProduct::from_potential(&x, nmax)?
    };
    let x = if s.potential.is_empty() { None } else { Some(x) };
    Ok(Built { star, x })
}

fn fnv1a(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn suite_rng(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(name))
}

fn small_rational(rng: &mut ChaCha8Rng) -> CRat {
    CRat::from_ratio(rng.random_range(-3..=3), rng.random_range(1..=3))
}

fn nonzero_rational(rng: &mut ChaCha8Rng) -> CRat {
    loop {
        let c = small_rational(rng);
        if !c.is_zero() {
            return c;
        }
    }
}

fn random_mask_pair(rng: &mut ChaCha8Rng, d: u8, parity: u32) -> (Mask, Mask) {
    loop {
        let i = rng.random_range(0..(1u16 << d));
        let j = rng.random_range(0..(1u16 << d));
        if (card(i) + card(j)) % 2 == parity {
            return (i, j);
        }
    }
}

/// A seeded Grassmann-homogeneous polynomial function with small exponents.
fn random_homogeneous(
    m: u8,
    d: u8,
    cap: u8,
    rng: &mut ChaCha8Rng,
    parity: u32,
) -> SuperFunction {
    let mut out = SuperFunction::zero(m, d, cap, Trunc::Exact);
    for _ in 0..rng.random_range(1..=2u32) {
        let (i, j) = random_mask_pair(rng, d, parity);
        let ze: Vec<u8> = (0..m).map(|_| rng.random_range(0..=1)).collect();
        let zbe: Vec<u8> = (0..m).map(|_| rng.random_range(0..=1)).collect();
        out = out.add(&SuperFunction::term(
            m,
            d,
            cap,
            Trunc::Exact,
            rng.random_range(0..=1),
            &ze,
            &zbe,
            i,
            j,
            nonzero_rational(rng),
        ));
    }
    out
}

/// A seeded Grassmann-homogeneous Gaussian-class function
/// `c z^a zbar^b e^{-|z|^2} theta^I thetabar^J`.
fn random_gaussian(m: u8, d: u8, cap: u8, rng: &mut ChaCha8Rng) -> SuperFunction {
    let parity = rng.random_range(0..=1u32);
    let (i, j) = random_mask_pair(rng, d, parity);
    let ze: Vec<u8> = (0..m).map(|_| rng.random_range(0..=1)).collect();
    let zbe: Vec<u8> = (0..m).map(|_| rng.random_range(0..=1)).collect();
    let jet = Jet::monomial(m, cap, &ze, &zbe, nonzero_rational(rng)).with_weight(1);
    let body = SuperFunction::from_body(d, &NuSeries::single(0, jet), m, cap);
    body.mul(&SuperFunction::term(
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
    ))
}

/// Agreement of two functions on their jointly tracked range; returns the
/// verdict and the range bound (`None` = both exact).
fn sf_agree(a: &SuperFunction, b: &SuperFunction) -> (bool, Option<i64>) {
    match a.trunc().min(b.trunc()).bound() {
        Some(h) => (a.agrees_up_to(b, h), Some(h)),
        None => (a.sub(b).is_zero(), None),
    }
}

fn scalar_agree(a: &NuSeries<CRat>, b: &NuSeries<CRat>) -> (bool, Option<i64>) {
    match a.trunc().min(b.trunc()).bound() {
        Some(h) => (a.agrees_up_to(b, h), Some(h)),
        None => (a.sub(b).is_zero(), None),
    }
}

fn fail(name: &str, msg: String) -> SuiteReport {
    SuiteReport {
        name: name.to_string(),
        pass: false,
        checked_to: None,
        details: vec![msg],
    }
}

/// Accumulates pass/fail state, the worst verified order, and detail lines.
struct SuiteState {
    name: &'static str,
    pass: bool,
    checked_to: Option<i64>,
    exact_only: bool,
    details: Vec<String>,
}

impl SuiteState {
    fn new(name: &'static str) -> Self {
        SuiteState {
            name,
            pass: true,
            checked_to: None,
            exact_only: true,
            details: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, bound: Option<i64>, on_fail: impl FnOnce() -> String) {
        if bound.is_some() {
            self.exact_only = false;
            self.checked_to = opt_min(self.checked_to, bound);
        }
        if !ok {
            self.pass = false;
            self.details.push(on_fail());
        }
    }

    fn note(&mut self, line: String) {
        self.details.push(line);
    }

    fn finish(mut self) -> SuiteReport {
        if self.pass && self.exact_only {
            self.details.push("all comparisons exact".to_string());
        }
        SuiteReport {
            name: self.name.to_string(),
            pass: self.pass,
            checked_to: self.checked_to,
            details: self.details,
        }
    }
}

fn suite_associativity(b: &Built, sc: &Scenario, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut st = SuiteState::new("associativity");
    let samples = 10;
    for t in 0..samples {
        let f = { let p = rng.random_range(0..=1); random_homogeneous(sc.m, sc.d, sc.degree, rng, p) };
        let g = { let p = rng.random_range(0..=1); random_homogeneous(sc.m, sc.d, sc.degree, rng, p) };
        let h = { let p = rng.random_range(0..=1); random_homogeneous(sc.m, sc.d, sc.degree, rng, p) };
        let lhs = b.star.mul(&b.star.mul(&f, &g), &h);
        let rhs = b.star.mul(&f, &b.star.mul(&g, &h));
        let (ok, bound) = sf_agree(&lhs, &rhs);
        st.record(ok, bound, || {
            format!("triple {t}: (f*g)*h - f*(g*h) = {}", lhs.sub(&rhs))
        });
    }
    st.note(format!("{samples} seeded homogeneous triples"));
    st.finish()
}

fn suite_separation(b: &Built, sc: &Scenario, _rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut st = SuiteState::new("separation");
    let (m, d, cap) = (sc.m, sc.d, sc.degree);
    let masks: Vec<Mask> = (0..(1u16 << d)).collect();
    let exps = exponent_lists(m as usize, 1);
    let mut count = 0usize;
    // Basis of general functions: monomial jets times all generator pairs.
    let mut basis = Vec::new();
    for &i in &masks {
        for &j in &masks {
            for ze in &exps {
                for zbe in &exps {
                    basis.push(SuperFunction::term(
                        m,
                        d,
                        cap,
                        Trunc::Exact,
                        0,
                        ze,
                        zbe,
                        i,
                        j,
                        CRat::one(),
                    ));
                }
            }
        }
    }
    for &i in &masks {
        for ze in &exps {
            let a = SuperFunction::term(m, d, cap, Trunc::Exact, 0, ze, &[], i, 0, CRat::one());
            for f in &basis {
                let (ok, bound) = sf_agree(&b.star.mul(&a, f), &a.mul(f));
                count += 1;
                st.record(ok, bound, || {
                    format!("left factor {a} does not multiply pointwise against {f}")
                });
            }
        }
    }
    for &j in &masks {
        for zbe in &exps {
            let h = SuperFunction::term(m, d, cap, Trunc::Exact, 0, &[], zbe, 0, j, CRat::one());
            for f in &basis {
                let (ok, bound) = sf_agree(&b.star.mul(f, &h), &f.mul(&h));
                count += 1;
                st.record(ok, bound, || {
                    format!("right factor {h} does not multiply pointwise against {f}")
                });
            }
        }
    }
    st.note(format!(
        "{count} identities on the exponent-(0,1) monomial basis"
    ));
    st.finish()
}

fn suite_naturality(b: &Built, sc: &Scenario, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut st = SuiteState::new("naturality");
    let (m, d, cap) = (sc.m, sc.d, sc.degree);
    // Every coordinate and generator individually...
    let mut probes: Vec<(String, SuperFunction)> = Vec::new();
    for k in 0..m as usize {
        let mut ze = vec![0u8; m as usize];
        ze[k] = 1;
        probes.push((
            format!("z{}", k + 1),
            SuperFunction::term(m, d, cap, Trunc::Exact, 0, &ze, &[], 0, 0, CRat::one()),
        ));
        probes.push((
            format!("zb{}", k + 1),
            SuperFunction::term(m, d, cap, Trunc::Exact, 0, &[], &ze, 0, 0, CRat::one()),
        ));
    }
    for a in 0..d {
        probes.push((
            format!("th{}", a + 1),
            SuperFunction::term(m, d, cap, Trunc::Exact, 0, &[], &[], 1 << a, 0, CRat::one()),
        ));
        probes.push((
            format!("thb{}", a + 1),
            SuperFunction::term(m, d, cap, Trunc::Exact, 0, &[], &[], 0, 1 << a, CRat::one()),
        ));
    }
    let nprobes = probes.len();
    for (label, f) in probes {
        let l_ok = b.star.left_op(&f).is_natural();
        let r_ok = b.star.right_op(&f).is_natural();
        st.record(l_ok && r_ok, None, || {
            format!("generator {label}: one-sided operators not natural (left {l_ok}, right {r_ok})")
        });
    }
    // ... and seeded regular samples.
    for t in 0..3 {
        let f = { let p = rng.random_range(0..=1); random_homogeneous(sc.m, sc.d, sc.degree, rng, p) };
        let l_ok = b.star.left_op(&f).is_natural();
        let r_ok = b.star.right_op(&f).is_natural();
        st.record(l_ok && r_ok, None, || {
            format!("regular sample {t}: one-sided operators not natural (left {l_ok}, right {r_ok})")
        });
    }
    let mut sing = random_homogeneous(sc.m, sc.d, sc.degree, rng, 0);
    sing = sing.add(&SuperFunction::term(
        sc.m,
        sc.d,
        sc.degree,
        Trunc::Exact,
        -1,
        &[],
        &[],
        0,
        0,
        CRat::one(),
    ));
    let l_sing = b.star.left_op(&sing).is_natural();
    let r_sing = b.star.right_op(&sing).is_natural();
    st.record(!l_sing && !r_sing, None, || {
        format!("nu^-1 sample: operators unexpectedly natural (left {l_sing}, right {r_sing})")
    });
    st.note(format!(
        "{nprobes} generators and 3 regular samples natural, nu^-1 sample not"
    ));
    st.finish()
}

fn suite_operator_identities(b: &Built, _sc: &Scenario) -> SuiteReport {
    let Some(x) = &b.x else {
        return fail(
            "operator_identities",
            "scenario supplies no potential, so the one-sided operator identities \
             have nothing to compare against"
                .to_string(),
        );
    };
    let mut st = SuiteState::new("operator_identities");
    for rep in b.star.verify_x_identities(x) {
        st.record(rep.ok, rep.checked_to, || {
            format!("{}: nonzero residual", rep.name)
        });
        if rep.ok {
            st.note(match rep.checked_to {
                Some(h) => format!("{}: zero residual through nu^{h}", rep.name),
                None => format!("{}: zero residual, exact", rep.name),
            });
        }
    }
    st.finish()
}

fn matrix_min_bound(mt: &MatrixOverStar) -> Option<i64> {
    let mut worst = None;
    for i in 0..mt.dim() {
        for j in 0..mt.dim() {
            worst = opt_min(worst, mt.entry(i, j).trunc().bound());
        }
    }
    worst
}

fn suite_matrix_inverse(b: &Built, sc: &Scenario) -> SuiteReport {
    let mut st = SuiteState::new("matrix_inverse");
    let star = &b.star;
    let uv = star.umat().mul_star(star.vmat(), star.base());
    let vu = star.vmat().mul_star(star.umat(), star.base());
    st.record(
        uv.is_identity_on_known_range(),
        matrix_min_bound(&uv),
        || "u-matrix times its inverse is not the identity".to_string(),
    );
    st.record(
        vu.is_identity_on_known_range(),
        matrix_min_bound(&vu),
        || "inverse matrix times the u-matrix is not the identity".to_string(),
    );
    // Leading term of the volume entry of the inverse matrix against the
    // determinant of the inverse mixed pairing block, when that block is
    // nondegenerate at the base point.
    let (m, d, cap) = (sc.m, sc.d, sc.degree);
    let pairing_block = b.x.as_ref().map(|x| {
        (0..d as usize)
            .map(|a| {
                (0..d as usize)
                    .map(|bb| {
                        x.component(1 << a, 1 << bb)
                            .get(-1)
                            .cloned()
                            .unwrap_or_else(|| Jet::zero(m, cap))
                    })
                    .collect::<Vec<Jet>>()
            })
            .collect::<Vec<Vec<Jet>>>()
    });
    match pairing_block {
        Some(block)
            if jet_matrix_det(m, cap, &block).constant_term() != CRat::zero() =>
        {
            match (jet_matrix_invert(m, cap, &block), star.vmat().volume_leading()) {
                (Ok(binv), Some((r, lead))) => {
                    let expected = jet_matrix_det(m, cap, &binv).scale(&signed_half_turn(d));
                    st.record(r == d as i64 && lead == expected, None, || {
                        format!(
                            "volume entry leads with nu^{r} * ({lead}), expected nu^{} * ({expected})",
                            d
                        )
                    });
                    st.note(format!(
                        "volume entry of the inverse matrix leads with the signed \
                         inverse-pairing determinant at nu^{d}"
                    ));
                }
                _ => {
                    st.record(false, None, || {
                        "volume leading-term law could not be evaluated".to_string()
                    });
                }
            }
        }
        _ => st.note(
            "volume leading-term law skipped: no nondegenerate nu^-1 pairing block".to_string(),
        ),
    }
    st.finish()
}

/// The trace machinery shared by the supertrace and pairing suites.
struct TraceSetup {
    ber: BaseBerezin,
    td: TraceData,
    density: SupertraceDensity,
    strf: StrFunctional,
}

fn trace_setup(star: &SuperStarProduct) -> Result<TraceSetup> {
    if !star.is_star_product() {
        return Err(AlgebraError::Validation(
            "the pairing does not deform the pointwise product, so the canonical \
             supertrace theory does not apply"
                .into(),
        ));
    }
    let ber = BaseBerezin::build(star.base());
    let td = dual_potential(star.base(), &ber)?;
    let density = supertrace_density(star, &td, &ber)?;
    let strf = StrFunctional::new(star)?;
    Ok(TraceSetup {
        ber,
        td,
        density,
        strf,
    })
}

/// Sample pairs for the trace suites: the full generator-monomial basis at
/// a point (sampled down at `d = 2`), Gaussian-class functions over a base.
fn trace_pairs(
    sc: &Scenario,
    rng: &mut ChaCha8Rng,
    point_cap: usize,
    gaussian_count: usize,
) -> Vec<(SuperFunction, SuperFunction)> {
    let (m, d, cap) = (sc.m, sc.d, sc.degree);
    if m == 0 {
        let elems: Vec<SuperFunction> = (0..(1u16 << d))
            .flat_map(|i| {
                (0..(1u16 << d)).map(move |j| (i, j))
            })
            .map(|(i, j)| {
                SuperFunction::term(m, d, cap, Trunc::Exact, 0, &[], &[], i, j, CRat::one())
            })
            .collect();
        let mut pairs = Vec::new();
        if elems.len() * elems.len() <= point_cap {
            for f in &elems {
                for g in &elems {
                    pairs.push((f.clone(), g.clone()));
                }
            }
        } else {
            for _ in 0..point_cap {
                let f = &elems[rng.random_range(0..elems.len())];
                let g = &elems[rng.random_range(0..elems.len())];
                pairs.push((f.clone(), g.clone()));
            }
        }
        pairs
    } else {
        (0..gaussian_count)
            .map(|_| {
                (
                    random_gaussian(m, d, cap, rng),
                    random_gaussian(m, d, cap, rng),
                )
            })
            .collect()
    }
}

fn suite_supertrace(b: &Built, sc: &Scenario, rng: &mut ChaCha8Rng) -> SuiteReport {
    let setup = match trace_setup(&b.star) {
        Ok(s) => s,
        Err(e) => return fail("supertrace", e.to_string()),
    };
    let mut st = SuiteState::new("supertrace");
    let pairs = trace_pairs(sc, rng, 24, 6);
    let npairs = pairs.len();
    for (k, (f, g)) in pairs.into_iter().enumerate() {
        let pf = f.parity().unwrap_or(0);
        let pg = g.parity().unwrap_or(0);
        let run = (|| -> Result<NuSeries<CRat>> {
            let fg = product(&b.star, &f, &g)?;
            let gf = product(&b.star, &g, &f)?;
            let comm = if pf & pg & 1 == 1 {
                fg.add(&gf)
            } else {
                fg.sub(&gf)
            };
            supertrace(&b.star, &setup.density, &setup.strf, &comm)
        })();
        match run {
            Ok(value) => {
                let bound = value.trunc().bound();
                st.record(value.is_zero(), bound, || {
                    format!("pair {k}: str[f,g] = {value}")
                });
            }
            Err(e) => st.record(false, None, || format!("pair {k}: {e}")),
        }
    }
    st.note(format!(
        "{npairs} graded commutators annihilated; matrix and density \
         evaluations cross-checked on each"
    ));
    st.finish()
}

fn suite_trace_pairing(b: &Built, sc: &Scenario, rng: &mut ChaCha8Rng) -> SuiteReport {
    let setup = match trace_setup(&b.star) {
        Ok(s) => s,
        Err(e) => return fail("trace_pairing", e.to_string()),
    };
    let sber = match SuperBerezin::build(&b.star) {
        Ok(s) => s,
        Err(e) => return fail("trace_pairing", e.to_string()),
    };
    let mut st = SuiteState::new("trace_pairing");
    let pairs = trace_pairs(sc, rng, 16, 6);
    let npairs = pairs.len();
    for (k, (f, g)) in pairs.into_iter().enumerate() {
        match verify_trace_pairing(&b.star, &sber, &setup.density, &setup.strf, &f, &g) {
            Ok(rep) => st.record(rep.ok, rep.checked_to, || {
                format!(
                    "pair {k}: int(f*g) = {}, int(f Iinv g) = {}, int((Iinv f) g) = {}",
                    rep.product_value, rep.transformed_right, rep.transformed_left
                )
            }),
            Err(e) => st.record(false, None, || format!("pair {k}: {e}")),
        }
    }
    st.note(format!(
        "{npairs} pairs: transform moves across the trace pairing on both sides"
    ));
    st.finish()
}

fn random_antisymmetric(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<CRat>> {
    let mut mat = vec![vec![CRat::zero(); d]; d];
    for r in 0..d {
        for c in (r + 1)..d {
            let v = small_rational(rng);
            mat[r][c] = v.clone();
            mat[c][r] = v.neg();
        }
    }
    mat
}

fn suite_pairing_top(sc: &Scenario, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut st = SuiteState::new("pairing_top");
    let d = sc.d as usize;
    let samples = 5;
    for t in 0..samples {
        let a = random_antisymmetric(d, rng);
        let c = random_antisymmetric(d, rng);
        let mut attempt = 0;
        let rep = loop {
            let bmat: Vec<Vec<CRat>> = (0..d)
                .map(|_| (0..d).map(|_| small_rational(rng)).collect())
                .collect();
            match verify_pairing_exponential_top(sc.d, &a, &bmat, &c) {
                Ok(rep) => break Some(rep),
                Err(_) if attempt < 20 => attempt += 1,
                Err(_) => break None,
            }
        };
        match rep {
            Some(rep) => {
                let det_ok = !rep.det_components.is_zero();
                st.record(rep.ok && det_ok, None, || {
                    format!(
                        "triple {t}: top inverse entry {} vs expected {}; \
                         component determinant {}",
                        rep.top_inverse_entry, rep.expected_top_entry, rep.det_components
                    )
                });
            }
            None => st.record(false, None, || {
                format!("triple {t}: could not sample an invertible mixed block")
            }),
        }
    }
    st.note(format!(
        "{samples} seeded pairing exponentials: top inverse entry matches the \
         signed inverse determinant and the component matrix is nonsingular"
    ));
    st.finish()
}

/// A seeded triangular (hence invertible) transition matrix; entries below
/// the diagonal may depend on the base coordinates.
fn random_transition(
    m: u8,
    cap: u8,
    d: u8,
    rng: &mut ChaCha8Rng,
    holomorphic: bool,
) -> Vec<Vec<Jet>> {
    let n = d as usize;
    let mut out = vec![vec![Jet::zero(m, cap); n]; n];
    for r in 0..n {
        for c in 0..n {
            if r == c {
                out[r][c] = Jet::constant(m, cap, nonzero_rational(rng));
            } else if r > c {
                let mut jet = Jet::constant(m, cap, small_rational(rng));
                if m > 0 && rng.random_bool(0.7) {
                    let var = if holomorphic {
                        Jet::var_z(m, cap, 0)
                    } else {
                        Jet::var_zb(m, cap, 0)
                    };
                    jet = jet.add(&var.scale(&small_rational(rng)));
                }
                out[r][c] = jet;
            }
        }
    }
    out
}

fn suite_trivialization(b: &Built, sc: &Scenario, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut st = SuiteState::new("trivialization");
    let (m, d, cap) = (sc.m, sc.d, sc.degree);
    let setup = trace_setup(&b.star).ok();
    for t in 0..3 {
        let amat = random_transition(m, cap, d, rng, true);
        let bmat = random_transition(m, cap, d, rng, false);
        let run = (|| -> Result<()> {
            let s2 = b.star.change_trivialization(&amat, &bmat)?;
            for _ in 0..2 {
                let f = { let p = rng.random_range(0..=1); random_homogeneous(m, d, cap, rng, p) };
                let g = { let p = rng.random_range(0..=1); random_homogeneous(m, d, cap, rng, p) };
                let lhs = s2.mul(
                    &transform_components(&f, &amat, &bmat)?,
                    &transform_components(&g, &amat, &bmat)?,
                );
                let rhs = transform_components(&b.star.mul(&f, &g), &amat, &bmat)?;
                let (ok, bound) = sf_agree(&lhs, &rhs);
                st.record(ok, bound, || {
                    format!("transition {t}: products differ across the frame change")
                });
            }
            if let Some(setup) = &setup {
                let density2 = supertrace_density(&s2, &setup.td, &setup.ber)?;
                let f = if m == 0 {
                    { let p = rng.random_range(0..=1); random_homogeneous(m, d, cap, rng, p) }
                } else {
                    random_gaussian(m, d, cap, rng)
                };
                let tf = transform_components(&f, &amat, &bmat)?;
                let s_orig = supertrace_via_density(&setup.density, &setup.strf, &f)?;
                let s_new = supertrace_via_density(&density2, &setup.strf, &tf)?;
                let (ok, bound) = scalar_agree(&s_orig, &s_new);
                st.record(ok, bound, || {
                    format!(
                        "transition {t}: supertrace not invariant ({s_orig} vs {s_new})"
                    )
                });
            }
            Ok(())
        })();
        if let Err(e) = run {
            st.record(false, None, || format!("transition {t}: {e}"));
        }
    }
    if setup.is_none() {
        st.note(
            "supertrace invariance skipped: canonical supertrace theory not \
             applicable to this pairing"
                .to_string(),
        );
    }
    st.note("3 seeded triangular frame changes".to_string());
    st.finish()
}

fn run_suite(name: &str, b: &Built, sc: &Scenario, seed: u64) -> SuiteReport {
    let mut rng = suite_rng(seed, name);
    match name {
        "associativity" => suite_associativity(b, sc, &mut rng),
        "separation" => suite_separation(b, sc, &mut rng),
        "naturality" => suite_naturality(b, sc, &mut rng),
        "operator_identities" => suite_operator_identities(b, sc),
        "matrix_inverse" => suite_matrix_inverse(b, sc),
        "supertrace" => suite_supertrace(b, sc, &mut rng),
        "trace_pairing" => suite_trace_pairing(b, sc, &mut rng),
        "pairing_top" => suite_pairing_top(sc, &mut rng),
        "trivialization" => suite_trivialization(b, sc, &mut rng),
        other => fail(other, format!("unknown suite {other:?}")),
    }
}

fn resolve_suites(requested: Option<&[String]>) -> Result<Vec<&'static str>> {
    match requested {
        None => Ok(SUITE_NAMES.to_vec()),
        Some(list) => {
            for s in list {
                if !SUITE_NAMES.contains(&s.as_str()) {
                    return Err(AlgebraError::Validation(format!(
                        "unknown suite {s:?}; available: {}",
                        SUITE_NAMES.join(", ")
                    )));
                }
            }
            Ok(SUITE_NAMES
                .iter()
                .copied()
                .filter(|n| list.iter().any(|s| s == n))
                .collect())
        }
    }
}

fn density_report(b: &Built) -> Option<DensityReport> {
    let setup = trace_setup(&b.star).ok()?;
    Some(DensityReport {
        tau: setup.density.tau().clone(),
        rho: setup.density.rho().clone(),
        kappa: setup.td.kappa.clone(),
    })
}

/// All exponent lists of the given length with entries summing to at most
/// `total`.
fn exponent_lists(slots: usize, total: u32) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..slots {
        let mut next = Vec::new();
        for base in &out {
            let used: u32 = base.iter().map(|&e| e as u32).sum();
            for e in 0..=(total - used) as u8 {
                let mut ext = base.clone();
                ext.push(e);
                next.push(ext);
            }
        }
        out = next;
    }
    out
}

/// The generator-and-coordinate monomial basis of total degree at most
/// `degree` (jet degree plus number of Grassmann generators).
fn monomial_basis(m: u8, d: u8, cap: u8, degree: u32) -> Vec<SuperCoeff<Jet>> {
    let mut out = Vec::new();
    for i in 0..(1u16 << d) {
        for j in 0..(1u16 << d) {
            let g = card(i) + card(j);
            if g > degree {
                continue;
            }
            for exps in exponent_lists(2 * m as usize, degree - g) {
                let (ze, zbe) = exps.split_at(m as usize);
                out.push(SuperCoeff::basis(
                    d,
                    i,
                    j,
                    Jet::monomial(m, cap, ze, zbe, CRat::one()),
                ));
            }
        }
    }
    out
}

/// Renders a generator-coefficient pair compactly, collapsing constant jets
/// to their value: `(1) th1 thb2`, `(3/2 + 1/2i) z1`, ...
fn render_super_coeff(c: &SuperCoeff<Jet>) -> String {
    use std::fmt::Write as _;
    if c.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut first = true;
    for (&(i, j), jet) in c.comps() {
        if !first {
            out.push_str(" + ");
        }
        first = false;
        if crate::trace::jet_is_constant(jet) {
            let _ = write!(out, "({})", jet.constant_term());
        } else {
            let _ = write!(out, "({jet})");
        }
        let mut mask = i;
        while mask != 0 {
            let p = mask.trailing_zeros();
            let _ = write!(out, " th{}", p + 1);
            mask &= mask - 1;
        }
        let mut mask = j;
        while mask != 0 {
            let p = mask.trailing_zeros();
            let _ = write!(out, " thb{}", p + 1);
            mask &= mask - 1;
        }
    }
    out
}

/// Product coefficient tables `C_order(left, right)` on the monomial basis
/// of total degree at most `basis_degree`, orders `0..=order_max`; zero
/// entries are omitted.
pub fn product_table(
    b: &Built,
    sc: &Scenario,
    basis_degree: u32,
    order_max: i64,
) -> Vec<ProductTableEntry> {
    let basis = monomial_basis(sc.m, sc.d, sc.degree, basis_degree);
    let mut out = Vec::new();
    for f in &basis {
        for g in &basis {
            for r in 0..=order_max {
                let value = b.star.c_r(r, f, g);
                if value.is_zero() {
                    continue;
                }
                out.push(ProductTableEntry {
                    order: r,
                    left: render_super_coeff(f),
                    right: render_super_coeff(g),
                    value: render_super_coeff(&value),
                });
            }
        }
    }
    out
}

/// Builds the scenario and prints its product coefficient tables on the
/// monomial basis of total degree at most `basis_degree`.
pub fn dump_products(
    sc: &Scenario,
    basis_degree: u32,
    max_budget: Option<u64>,
) -> Result<Vec<ProductTableEntry>> {
    let built = build(sc, max_budget)?;
    Ok(product_table(&built, sc, basis_degree, sc.nu_order))
}

/// Runs the scenario's suites and assembles the report.
pub fn run(sc: &Scenario, opts: &RunOptions) -> Result<Report> {
    let built = build(sc, opts.max_budget)?;
    let seed = opts.seed.unwrap_or(sc.seed);
    let requested = opts.suites.clone().or_else(|| sc.suites.clone());
    let names = resolve_suites(requested.as_deref())?;
    let mut suites = Vec::new();
    let mut timings = BTreeMap::new();
    for name in names {
        let t0 = Instant::now();
        suites.push(run_suite(name, &built, sc, seed));
        timings.insert(name.to_string(), t0.elapsed().as_millis());
    }
    let all_passed = suites.iter().all(|s| s.pass);
    Ok(Report {
        scenario: sc.clone(),
        seed,
        is_star_product: built.star.is_star_product(),
        suites,
        all_passed,
        densities: density_report(&built),
        product_table: product_table(&built, sc, 1, sc.nu_order.min(2)),
        timings_ms: if opts.timings { Some(timings) } else { None },
    })
}
