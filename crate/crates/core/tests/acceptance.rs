//! Acceptance criteria, one test per criterion. Each test writes a
//! `criterion N ...: PASS|FAIL` line to stderr outside the test harness
//! capture.

mod common;

use std::io::Write;

use num_complex::Complex64;

use common::{cfg, rng};
use mage_core::expr::{is_zero, parse_expr, Coord, Point, ScalarExpr, Verdict, ZeroTestConfig};
use mage_core::exterior::{
    canonical_symplectic, endo_of_form, hodge_lepage, parse_form, parse_mixed_form, pfaffian,
    Endo4, Form, MixedForm, VectorFieldSym,
};
use mage_core::gcs::{
    bivectors_to_gcs, build_gcs, dbar_at, hitchin_bivector_check, spin_act, spinor_frame,
    BivectorPair, GTSection, pairing,
};
use mage_core::kaehler::{
    algebraic_triple, hitchin_commute_check, nijenhuis, quaternionic_frame, validate_triple,
    Definiteness,
};
use mage_core::ma::{
    classify, divergence_certificate, equation_pfaffian, equation_to_form, euler, lr_test,
    GlobalClass, MAEquation,
};
use mage_core::solutions::{
    conjugate, equation_gcs, is_generating, lemma_b_check, level_set_check, pluriharmonic_check,
    uv_forms, uv_holomorphicity,
};

const TOL: f64 = 1e-8;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "criterion {n:>2} {name}: {status} {detail}");
}

fn zero(v: &Verdict) -> bool {
    v.is_zero()
}

fn e(s: &str) -> ScalarExpr {
    parse_expr(s).unwrap()
}

fn f(s: &str) -> Form {
    parse_form(s).unwrap()
}

fn omega() -> Form {
    canonical_symplectic()
}

#[test]
fn criterion_01_laplace_golden() {
    let c = cfg();
    let eq = MAEquation::laplace();
    let w = equation_to_form(&eq);
    let form_ok = zero(&(&w - &f("dq1^dp2 - dq2^dp1")).is_zero(&c));
    let pf_ok = equation_pfaffian(&eq).as_const() == Some(Complex64::new(1.0, 0.0));
    let elliptic = classify(&eq, &c).verdict == GlobalClass::Elliptic;
    let lr = lr_test(&eq, &c).unwrap().lr_integrable;
    let g = build_gcs(&w, &omega(), &c).unwrap();
    let square = zero(&g.square);
    let mut spectral = true;
    for pt in c.points(20, 1) {
        let frame = spinor_frame(&g, &pt).unwrap();
        spectral &= frame.dimensions() == [1, 4, 6, 4, 1] && frame.spectrum_residual() <= TOL;
    }
    let pass = form_ok && pf_ok && elliptic && lr && square && spectral;
    report(
        1,
        "Laplace golden",
        pass,
        &format!("form {form_ok}, pf=1 {pf_ok}, elliptic {elliptic}, lr {lr}, J²=-1 {square}, (1,4,6,4,1)x20 {spectral}"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_born_infeld() {
    let c = cfg();
    let (w0, _) = hodge_lepage(&equation_to_form(&MAEquation::born_infeld()));
    let target = f("3*p1*dp2 - 3*p2*dp1").wedge(&omega());
    let dw = zero(&(&w0.d() - &target).is_zero(&c));
    let eu = euler(&w0).is_zero(&c);
    let cert = divergence_certificate(&w0, &c).unwrap();
    let pass = dw && eu.is_nonzero() && !cert.is_divergent;
    report(
        2,
        "Born-Infeld",
        pass,
        &format!("dω0 identity {dw}, euler witness {:?}, divergent {}", eu.witness(), cert.is_divergent),
    );
    assert!(pass);
}

#[test]
fn criterion_03_tricomi() {
    let c = cfg();
    let w = equation_to_form(&MAEquation::tricomi(1.0, 2.0, ScalarExpr::q1()));
    let cert = divergence_certificate(&w, &c).unwrap();
    let alpha = zero(&(&cert.alpha - &f("2*dq1 - dq2")).is_zero(&c));
    let mu = cert.mu.clone().expect("potential");
    let dmu = zero(&(&Form::scalar(mu.clone()).d() + &cert.alpha).is_zero(&c));
    let closed = zero(&(&w + &omega().scale(&mu)).d().is_zero(&c));
    let pass = alpha && cert.is_divergent && dmu && closed;
    report(
        3,
        "Tricomi",
        pass,
        &format!("α_ω {alpha}, divergent {}, μ = {mu}, dμ=-α {dmu}, d(ω+μΩ)=0 {closed}", cert.is_divergent),
    );
    assert!(pass);
}

#[test]
fn criterion_04_von_karman_golden() {
    let c = cfg();
    let reference = f("p1*dq2^dp1 + dq1^dp2");
    let w = equation_to_form(&MAEquation::von_karman());
    let k = w.coeff(0b1001).as_const().unwrap() / reference.coeff(0b1001).as_const().unwrap();
    let proportional = zero(&(&w - &reference.scale(&ScalarExpr::constant(k))).is_zero(&c));
    let eq = MAEquation::von_karman_closed();
    let (u, v) = uv_forms(&eq, &c).unwrap();
    let u_ref = parse_mixed_form("p1*dq2^dp1 + dq1^dp2 + 2*p1*dq1^dq2^dp1^dp2").unwrap();
    let v_ref = parse_mixed_form("1 + p1*dq2^dp1 + dq1^dp2 + (p1-1)*dq1^dq2^dp1^dp2").unwrap();
    let matches = zero(&(&u - &u_ref).is_zero(&c)) && zero(&(&v - &v_ref).is_zero(&c));
    let closed = zero(&u.d().is_zero(&c)) && zero(&v.d().is_zero(&c));
    let real = zero(&(&u - &u.conj()).is_zero(&c)) && zero(&(&v - &v.conj()).is_zero(&c));
    let g = equation_gcs(&eq, &c).unwrap();
    let mut worst = 0.0f64;
    for pt in c.points(10, 4) {
        let frame = spinor_frame(&g, &pt).unwrap();
        for x in [&u, &v] {
            let val = x.evaluate(&pt).unwrap();
            worst = worst.max((val - frame.project(0, &val)).norm() / val.norm().max(1.0));
        }
    }
    let pass = proportional && matches && closed && real && worst <= TOL;
    report(
        4,
        "Von Karman golden",
        pass,
        &format!(
            "ω = {}·ω_ref {proportional}, U/V exact {matches}, closed {closed}, real {real}, U0 residual {worst:.1e}",
            k.re
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_gualtieri_operator() {
    let c = cfg();
    let g = build_gcs(&f("dq1^dp2 - dq2^dp1"), &omega(), &c).unwrap();
    let phi = g.phi().unwrap();
    let half_i = ScalarExpr::constant(Complex64::new(0.0, 0.5));
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut split = 0.0f64;
    for n in 0..10 {
        let alpha = common::one_form(&mut r, 2);
        let family = alpha.to_mixed().wedge(&phi);
        let expected = phi.scale(&(&alpha.d().perp().coeff(0) * &half_i));
        for pt in c.points(10, 50 + n) {
            let res = dbar_at(&g, &family, &pt, 1).unwrap();
            let want = expected.evaluate(&pt).unwrap();
            worst = worst.max((res.dbar - want).norm() / want.norm().max(1.0));
            split = split.max(res.residual);
        }
    }
    let bad = build_gcs(&f("dq1^dp2 - dq2^dp1 + p1*dq1^dq2"), &omega(), &c).unwrap();
    let bad_phi = bad.phi().unwrap();
    let mut witness = None;
    for pt in c.points(10, 55) {
        let res = dbar_at(&bad, &bad_phi, &pt, 2).unwrap();
        if res.residual > 1e-4 {
            witness = Some((pt, res.residual));
            break;
        }
    }
    let pass = worst <= TOL && split <= TOL && witness.is_some();
    report(
        5,
        "Gualtieri operator",
        pass,
        &format!("∂̄ error {worst:.1e}, split residual {split:.1e}, non-closed witness {witness:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_generating_equivalence() {
    let c = cfg();
    let mut r = rng(6);
    let (mut agree, mut trues, mut falses, mut level_ok) = (true, 0, 0, true);
    let mut worst = 0.0f64;
    for n in 0..20 {
        let eq = if n % 2 == 0 {
            common::constant_equation(&mut r)
        } else {
            common::divergent_equation(&mut r, 1)
        };
        let funcs = [
            common::linear(&mut r),
            common::linear(&mut r),
            common::nonconstant_poly(&mut r, 2),
            common::nonconstant_poly(&mut r, 2),
            common::nonconstant_poly(&mut r, 3),
        ];
        for fun in &funcs {
            let generating = is_generating(&eq, fun, &c).unwrap();
            let ph = pluriharmonic_check(&eq, fun, &c).unwrap();
            agree &= ph.pluriharmonic.is_zero() == generating.is_zero();
            if generating.is_zero() {
                trues += 1;
                let g = conjugate(&eq, fun, &c).unwrap();
                let ls = level_set_check(&eq, fun, &g, &c).unwrap();
                worst = worst.max(ls.residual);
                level_ok &= ls.passes();
            } else {
                falses += 1;
            }
        }
    }
    let pass = agree && level_ok && trues > 0 && falses > 0;
    report(
        6,
        "generating-function equivalence",
        pass,
        &format!("100 cases agree {agree}, {trues} generating / {falses} not, level-set residual {worst:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_uv_holomorphicity() {
    let c = cfg();
    let mut r = rng(7);
    let pairs = [
        (MAEquation::von_karman_closed(), e("p1*p2")),
        (MAEquation::laplace(), e("q1*p2 - q2*p1")),
        (MAEquation::wave(), e("2*q1 - p2 + q2")),
        (common::constant_equation(&mut r), common::linear(&mut r)),
    ];
    let mut ok = true;
    let mut worst = 0.0f64;
    for (eq, fun) in &pairs {
        assert!(is_generating(eq, fun, &c).unwrap().is_zero());
        let g = conjugate(eq, fun, &c).unwrap();
        let rep = uv_holomorphicity(eq, fun, &g, &c).unwrap();
        ok &= rep.holomorphic && zero(&rep.algebraic) && rep.pointwise <= TOL;
        worst = worst.max(rep.pointwise);
    }
    let eq = MAEquation::von_karman_closed();
    let fun = e("p1*p2");
    let broken = &conjugate(&eq, &fun, &c).unwrap() + &e("q1^2");
    let rep = uv_holomorphicity(&eq, &fun, &broken, &c).unwrap();
    let witness = rep.algebraic.witness();
    let pass = ok && !rep.holomorphic && witness.is_some() && rep.pointwise > TOL;
    report(
        7,
        "UV holomorphicity",
        pass,
        &format!("4 pairs ∂̄(fU + igV) ≤ {worst:.1e}, broken pair witness {witness:?} size {:.2e}", rep.pointwise),
    );
    assert!(pass);
}

/// The matrices `I±` for the Von Karman triple in the order
/// `(p2, p1, q2, q1)`, before the factor `1/2`.
fn reference_i_pm() -> [[[&'static str; 4]; 4]; 2] {
    [
        [
            ["0", "-1", "1", "0"],
            ["-1/p1", "0", "0", "-1/p1"],
            ["-(1+4*p1)/p1", "0", "0", "-1/p1"],
            ["0", "1+4*p1", "-1", "0"],
        ],
        [
            ["0", "-1", "-1", "0"],
            ["-1/p1", "0", "0", "1/p1"],
            ["(1+4*p1)/p1", "0", "0", "-1/p1"],
            ["0", "-(1+4*p1)", "-1", "0"],
        ],
    ]
}

/// Entrywise agreement under the basis reversal `i ↦ 3 - i`.
fn matches_reference(t: &Endo4, rows: &[[&str; 4]; 4], c: &ZeroTestConfig) -> bool {
    let diff = Endo4::from_fn(|i, j| t.get(3 - i, 3 - j) - &e(rows[i][j]).scale(0.5));
    diff.is_zero(c).is_zero()
}

struct KahlerChecks {
    closed: Verdict,
    lambda_mu: bool,
    matrices: bool,
    squares: bool,
    integrable: bool,
    commute: bool,
    positive: bool,
    indefinite: bool,
}

impl KahlerChecks {
    fn all(&self) -> bool {
        self.closed.is_zero()
            && self.lambda_mu
            && self.matrices
            && self.squares
            && self.integrable
            && self.commute
            && self.positive
            && self.indefinite
    }
}

fn kaehler_checks(theta: &Form) -> KahlerChecks {
    let c = cfg().with_box(Coord::P1, -2.0, -0.3);
    let w = f("p1*dq2^dp1 + dq1^dp2");
    let om = omega();
    let t = algebraic_triple(&w, &om, theta, &c).unwrap();
    let lambda_mu = zero(&is_zero(&(&t.lambda_sq + &e("1+4*p1")), &c)) && zero(&is_zero(&(&t.mu_sq + &e("p1")), &c));
    let frame = quaternionic_frame(&t, &c).unwrap();
    let [plus, minus] = reference_i_pm();
    let matrices = matches_reference(&frame.i_plus, &plus, &c) && matches_reference(&frame.i_minus, &minus, &c);
    let squares = zero(&frame.checks.squares);
    let integrable = zero(&nijenhuis(&frame.i_plus).is_zero(&c)) && zero(&nijenhuis(&frame.i_minus).is_zero(&c));
    let b1 = &w - &om.scale(&ScalarExpr::i());
    let b2 = &-&w - &theta.scale(&ScalarExpr::i());
    let h = hitchin_commute_check(&b1, &b2, &c).unwrap();
    let commute = h.holds && h.commutator.is_some_and(|x| x <= TOL);
    let positive = c.points(50, 8).iter().all(|p| frame.metric_class(p) == Definiteness::Positive);
    let outside = cfg().with_box(Coord::P1, -0.2, 2.0);
    let indefinite = outside.points(20, 9).iter().any(|p| frame.metric_class(p) == Definiteness::Indefinite);
    KahlerChecks {
        closed: t.closed,
        lambda_mu,
        matrices,
        squares,
        integrable,
        commute,
        positive,
        indefinite,
    }
}

/// Known red: the Θ of this example is not closed, so the triple is not a
/// generalized Kähler partner and `I±` are not integrable. The closed
/// `Θ' = (1+4p1)dp1∧dp2 + dq1∧dq2` passes every sub-check.
#[test]
fn criterion_08_kaehler_partner() {
    let given = f("dp1^dp2 + (1+4*p1)*dq1^dq2");
    let fixed = f("(1+4*p1)*dp1^dp2 + dq1^dq2");
    let c = cfg().with_box(Coord::P1, -2.0, -0.3);
    let strict = validate_triple(&f("p1*dq2^dp1 + dq1^dp2"), &omega(), &given, &c);
    let a = kaehler_checks(&given);
    let b = kaehler_checks(&fixed);
    let pass = strict.is_ok() && a.all();
    report(
        8,
        "Kähler partner",
        pass,
        &format!(
            "Θ as given: closed {} (witness {:?}), λ²/μ² {}, I± {}, squares {}, Nijenhuis(I±)=0 {}, commute {}; \
             closed Θ': all sub-checks {} (G>0 {}, indefinite beyond -1/4 {})",
            a.closed.is_zero(),
            a.closed.witness(),
            a.lambda_mu,
            a.matrices,
            a.squares,
            a.integrable,
            a.commute,
            b.all(),
            b.positive,
            b.indefinite,
        ),
    );
    // red for the documented reason only
    assert!(!pass);
    assert!(strict.is_err() && a.closed.is_nonzero() && !a.integrable && !a.commute);
    assert!(a.lambda_mu && a.squares);
    assert!(b.all());
}

#[test]
fn criterion_09_identity_suite() {
    let c = cfg();
    let mut r = rng(9);
    let om = omega();
    let mut ok = [true; 8];
    for _ in 0..20 {
        let w = common::two_form(&mut r, 2);
        let (w0, lambda) = hodge_lepage(&w);
        let pf = pfaffian(&w0);
        let a0 = endo_of_form(&w0);
        ok[0] &= zero(&(&(&a0 * &a0) + &Endo4::scalar(pf.clone())).is_zero(&c));
        let a = endo_of_form(&w);
        let rhs = &a.scale(&lambda.scale(2.0)) - &Endo4::scalar(&(&lambda * &lambda) + &pf);
        ok[1] &= zero(&(&(&a * &a) - &rhs).is_zero(&c));
        ok[2] &= zero(&lemma_b_check(&w, &c));

        let x = VectorFieldSym(std::array::from_fn(|_| common::poly(&mut r, 2)));
        let u = GTSection::new(x.clone(), common::one_form(&mut r, 2));
        let theta = MixedForm::from_parts(&[
            Form::scalar(common::poly(&mut r, 2)),
            common::one_form(&mut r, 1),
            common::two_form(&mut r, 1),
        ]);
        let twice = spin_act(&u, &spin_act(&u, &theta));
        ok[3] &= zero(&(&twice - &theta.scale(&pairing(&u, &u))).is_zero(&c));

        let cw = common::closed_two_form(&mut r, 1);
        let th = &cw - &om.scale(&ScalarExpr::i());
        let ann = GTSection::new(x.clone(), -&th.interior(&x));
        ok[4] &= zero(&spin_act(&ann, &mage_core::gcs::exp_form(&th)).is_zero(&c));

        let prim = w0.clone();
        let shift = common::poly(&mut r, 2);
        let (p2, l2) = hodge_lepage(&(&prim + &om.scale(&shift)));
        ok[5] &= zero(&(&p2 - &prim).is_zero(&c))
            && zero(&is_zero(&(&l2 - &shift), &c))
            && zero(&w0.wedge(&om).is_zero(&c))
            && zero(&(&w0.wedge(&w0) - &om.wedge(&om).scale(&pf)).is_zero(&c));

        let beta = Form::one_form(std::array::from_fn(|_| common::expr(&mut r, 2)));
        ok[6] &= zero(&beta.d().d().is_zero(&c)) && zero(&theta.d().d().is_zero(&c));

        let alpha = Form::one_form(std::array::from_fn(|_| common::expr(&mut r, 1)));
        ok[7] &= zero(&(&alpha.wedge(&om).perp() - &alpha).is_zero(&c));
    }
    let names = ["A0²=-pf", "A² relation", "lemma B", "Clifford", "annihilator", "Hodge-Lepage", "d²=0", "⊥(α∧Ω)=α"];
    let detail: Vec<String> = names.iter().zip(ok).map(|(n, b)| format!("{n} {b}")).collect();
    let pass = ok.iter().all(|&b| b);
    report(9, "identity suite (20 each)", pass, &detail.join(", "));
    assert!(pass);
}

#[test]
fn criterion_10_bivector_layer() {
    let c = cfg();
    let mut r = rng(10);
    let om = omega();
    let (mut tried, mut done, mut ok) = (0, 0, true);
    while done < 10 {
        tried += 1;
        assert!(tried < 200, "no nondegenerate pairs found");
        // a constant part keeps Π invertible over the box
        let w = &common::two_form(&mut r, 0) + &common::one_form(&mut r, 2).d().scale(&ScalarExpr::real(0.2));
        let pair = BivectorPair::dual_of(&w, &om);
        let rep = hitchin_bivector_check(&pair, &c);
        if !rep.nondegenerate.is_zero() || !degenerate_free(&pair, &c) {
            continue;
        }
        done += 1;
        let g = build_gcs(&w, &om, &c).unwrap();
        let h = bivectors_to_gcs(&pair, &c).unwrap();
        ok &= rep.holds && zero(&g.matrix().sub(&h.matrix()).is_zero(&c));
    }
    let bad = BivectorPair::dual_of(&f("dq1^dp2 + 2*dq1^dq2 + q1*p2*dq2^dp1"), &om);
    let rep = hitchin_bivector_check(&bad, &c);
    let witness = rep.difference.clone().and(rep.mixed.clone()).witness();
    let pass = ok && !rep.holds && witness.is_some();
    report(
        10,
        "bivector layer",
        pass,
        &format!("10 dual pairs ({tried} drawn) Hitchin and equal to build_gcs {ok}, non-closed witness {witness:?}"),
    );
    assert!(pass);
}

/// `Π` invertible at every sample point, not only generically.
fn degenerate_free(pair: &BivectorPair, c: &ZeroTestConfig) -> bool {
    let det = pair.big_pi.sharp().det();
    c.points(c.samples, 11)
        .iter()
        .all(|p: &Point| det.evaluate(p).map(|z| z.norm() > 1e-3).unwrap_or(false))
}
