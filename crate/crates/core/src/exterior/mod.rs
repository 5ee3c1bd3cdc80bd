//! Exterior algebra on `T*R^2` with coordinates `(q1, q2, p1, p2)`.
//!
//! A basis monomial `dx_{i1} ∧ … ∧ dx_{ik}` with `i1 < … < ik` is keyed by
//! the bitmask with bits `i1, …, ik` set (bit 0 is `dq1`, bit 3 is `dp2`).
//! Every sign is a permutation parity relative to this fixed order.

mod endo;
mod multivector;
mod parse;
mod vector;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use nalgebra::SVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{is_zero_all, Coord, EvalError, Point, ScalarExpr, Verdict, ZeroTestConfig};

pub use endo::Endo4;
pub use multivector::{Bivector, Multivector};
pub use parse::{parse_form, parse_mixed_form};
pub use vector::VectorFieldSym;

/// Numeric value of a mixed form, indexed by basis bitmask.
pub type SpinorVec = SVector<Complex64, 16>;

/// Mask of the top-degree monomial `dq1∧dq2∧dp1∧dp2`.
pub const TOP: u8 = 0b1111;

/// Sign of `dx_a ∧ dx_b` relative to `dx_{a∪b}`, or `None` when they share
/// a factor.
pub fn wedge_sign(a: u8, b: u8) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0;
    for j in 0..4 {
        if b & (1 << j) != 0 {
            inversions += (a >> (j + 1)).count_ones();
        }
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

pub fn mask_of(coords: &[Coord]) -> Option<(u8, f64)> {
    let mut mask = 0u8;
    let mut sign = 1.0;
    for c in coords {
        let bit = 1u8 << c.index();
        sign *= wedge_sign(mask, bit)?;
        mask |= bit;
    }
    Some((mask, sign))
}

pub fn mask_name(mask: u8, prefix: &str) -> String {
    Coord::ALL
        .iter()
        .filter(|c| mask & (1 << c.index()) != 0)
        .map(|c| format!("{prefix}{c}"))
        .collect::<Vec<_>>()
        .join("^")
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Terms(BTreeMap<u8, ScalarExpr>);

impl Terms {
    fn add_term(&mut self, mask: u8, c: ScalarExpr) {
        if c.is_const_zero() {
            return;
        }
        let next = match self.0.remove(&mask) {
            Some(old) => old + c,
            None => c,
        };
        if !next.is_const_zero() {
            self.0.insert(mask, next);
        }
    }

    fn get(&self, mask: u8) -> ScalarExpr {
        self.0.get(&mask).cloned().unwrap_or_default()
    }

    fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Terms {
        let mut out = Terms::default();
        for (m, c) in &self.0 {
            out.add_term(*m, f(c));
        }
        out
    }

    fn add(&self, o: &Terms) -> Terms {
        let mut out = self.clone();
        for (m, c) in &o.0 {
            out.add_term(*m, c.clone());
        }
        out
    }

    fn wedge(&self, o: &Terms) -> Terms {
        let mut out = Terms::default();
        for (a, ca) in &self.0 {
            for (b, cb) in &o.0 {
                if let Some(s) = wedge_sign(*a, *b) {
                    out.add_term(a | b, (ca * cb).scale(s));
                }
            }
        }
        out
    }

    fn d(&self) -> Terms {
        let mut out = Terms::default();
        for (m, c) in &self.0 {
            for v in Coord::ALL {
                let bit = 1u8 << v.index();
                if let Some(s) = wedge_sign(bit, *m) {
                    out.add_term(m | bit, c.differentiate(v).scale(s));
                }
            }
        }
        out
    }

    /// Contraction with the coordinate field `∂_j`.
    fn interior_basis(&self, j: usize) -> Terms {
        let bit = 1u8 << j;
        let mut out = Terms::default();
        for (m, c) in &self.0 {
            if m & bit != 0 {
                let below = (m & (bit - 1)).count_ones();
                let s = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
                out.add_term(m & !bit, c.scale(s));
            }
        }
        out
    }

    fn interior(&self, x: &VectorFieldSym) -> Terms {
        let mut out = Terms::default();
        for j in 0..4 {
            if x.0[j].is_const_zero() {
                continue;
            }
            let part = self.interior_basis(j).map(|c| &x.0[j] * c);
            out = out.add(&part);
        }
        out
    }

    fn perp(&self) -> Terms {
        self.interior_basis(0)
            .interior_basis(2)
            .add(&self.interior_basis(1).interior_basis(3))
    }

    fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        let exprs: Vec<ScalarExpr> = self.0.values().cloned().collect();
        is_zero_all(&exprs, cfg)
    }

    fn evaluate(&self, pt: &Point) -> std::result::Result<SpinorVec, EvalError> {
        let mut v = SpinorVec::zeros();
        let mut ev = crate::expr::Evaluator::new(*pt);
        for (m, c) in &self.0 {
            v[*m as usize] = ev.eval(c)?.0;
        }
        Ok(v)
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if *m == 0 {
                write!(f, "{c}")?;
                continue;
            }
            if !c.is_const_one() {
                match c.node() {
                    crate::expr::Node::Sum(_) | crate::expr::Node::Quotient(..) => {
                        write!(f, "({c})*")?
                    }
                    _ => write!(f, "{c}*")?,
                }
            }
            f.write_str(&mask_name(*m, "d"))?;
        }
        Ok(())
    }
}

/// Homogeneous exterior form of fixed degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    degree: usize,
    terms: Terms,
}

impl Form {
    pub fn zero(degree: usize) -> Form {
        assert!(degree <= 4, "form degree {degree} exceeds 4");
        Form {
            degree,
            terms: Terms::default(),
        }
    }

    pub fn scalar(c: impl Into<ScalarExpr>) -> Form {
        let mut f = Form::zero(0);
        f.terms.add_term(0, c.into());
        f
    }

    /// The coordinate 1-form `dx`.
    pub fn dx(c: Coord) -> Form {
        Form::basis(&[c])
    }

    /// Signed basis monomial, e.g. `basis(&[P1, Q2]) = -dq2∧dp1`; zero if a
    /// coordinate repeats.
    pub fn basis(coords: &[Coord]) -> Form {
        let mut f = Form::zero(coords.len().min(4));
        if let Some((mask, sign)) = mask_of(coords) {
            f.terms.add_term(mask, ScalarExpr::real(sign));
        }
        f
    }

    pub fn one_form(c: [ScalarExpr; 4]) -> Form {
        let mut f = Form::zero(1);
        for (k, e) in c.into_iter().enumerate() {
            f.terms.add_term(1 << k, e);
        }
        f
    }

    /// Builds from `(mask, coefficient)` pairs; panics on a mask of the
    /// wrong degree.
    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (u8, ScalarExpr)>) -> Form {
        let mut f = Form::zero(degree);
        for (m, c) in terms {
            assert_eq!(m.count_ones() as usize, degree, "mask {m:#06b} has wrong degree");
            f.terms.add_term(m, c);
        }
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, mask: u8) -> ScalarExpr {
        self.terms.get(mask)
    }

    /// Coefficients of a 1-form in basis order.
    pub fn components(&self) -> [ScalarExpr; 4] {
        std::array::from_fn(|k| self.coeff(1 << k))
    }

    /// Top-degree coefficient against `dq1∧dq2∧dp1∧dp2`.
    pub fn top(&self) -> ScalarExpr {
        self.coeff(TOP)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &ScalarExpr)> {
        self.terms.0.iter().map(|(m, c)| (*m, c))
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.0.is_empty()
    }

    pub fn map_coeffs(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Form {
        Form {
            degree: self.degree,
            terms: self.terms.map(f),
        }
    }

    pub fn scale(&self, s: &ScalarExpr) -> Form {
        self.map_coeffs(|c| s * c)
    }

    pub fn conj(&self) -> Form {
        self.map_coeffs(|c| c.conj())
    }

    pub fn re(&self) -> Form {
        self.map_coeffs(|c| c.re())
    }

    pub fn im(&self) -> Form {
        self.map_coeffs(|c| c.im())
    }

    pub fn wedge(&self, o: &Form) -> Form {
        let degree = self.degree + o.degree;
        if degree > 4 {
            return Form::zero(4);
        }
        Form {
            degree,
            terms: self.terms.wedge(&o.terms),
        }
    }

    pub fn d(&self) -> Form {
        if self.degree == 4 {
            return Form::zero(4);
        }
        Form {
            degree: self.degree + 1,
            terms: self.terms.d(),
        }
    }

    pub fn interior(&self, x: &VectorFieldSym) -> Form {
        if self.degree == 0 {
            return Form::zero(0);
        }
        Form {
            degree: self.degree - 1,
            terms: self.terms.interior(x),
        }
    }

    /// Contraction with `∂q1∧∂p1 + ∂q2∧∂p2`, normalized so that
    /// `perp(α∧Ω) = α` for 1-forms `α`.
    pub fn perp(&self) -> Form {
        if self.degree < 2 {
            return Form::zero(0);
        }
        Form {
            degree: self.degree - 2,
            terms: self.terms.perp(),
        }
    }

    pub fn lie_derivative(&self, x: &VectorFieldSym) -> Form {
        &self.d().interior(x) + &self.interior(x).d()
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        self.terms.is_zero(cfg)
    }

    pub fn evaluate(&self, pt: &Point) -> std::result::Result<SpinorVec, EvalError> {
        self.terms.evaluate(pt)
    }

    /// Value on a pair of vectors for a 2-form, `w(X, Y)`.
    pub fn pair(&self, x: &VectorFieldSym, y: &VectorFieldSym) -> ScalarExpr {
        self.interior(x).interior(y).coeff(0)
    }

    pub fn to_mixed(&self) -> MixedForm {
        MixedForm {
            terms: self.terms.clone(),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.terms.fmt_with(f)
    }
}

impl serde::Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Add for &Form {
    type Output = Form;
    fn add(self, o: &Form) -> Form {
        assert_eq!(self.degree, o.degree, "adding forms of different degree");
        Form {
            degree: self.degree,
            terms: self.terms.add(&o.terms),
        }
    }
}

impl Sub for &Form {
    type Output = Form;
    fn sub(self, o: &Form) -> Form {
        self + &(-o)
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.map_coeffs(|c| -c)
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, o: Form) -> Form {
        &self + &o
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, o: Form) -> Form {
        &self - &o
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}

/// Inhomogeneous form: an element of the 16-dimensional spinor space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MixedForm {
    terms: Terms,
}

impl MixedForm {
    pub fn zero() -> MixedForm {
        MixedForm::default()
    }

    pub fn scalar(c: impl Into<ScalarExpr>) -> MixedForm {
        Form::scalar(c).to_mixed()
    }

    pub fn from_parts(parts: &[Form]) -> MixedForm {
        parts
            .iter()
            .fold(MixedForm::zero(), |acc, p| &acc + &p.to_mixed())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u8, ScalarExpr)>) -> MixedForm {
        let mut f = MixedForm::zero();
        for (m, c) in terms {
            assert!(m < 16, "mask {m} out of range");
            f.terms.add_term(m, c);
        }
        f
    }

    pub fn coeff(&self, mask: u8) -> ScalarExpr {
        self.terms.get(mask)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &ScalarExpr)> {
        self.terms.0.iter().map(|(m, c)| (*m, c))
    }

    /// Homogeneous component of degree `k`.
    pub fn part(&self, k: usize) -> Form {
        Form::from_terms(
            k,
            self.terms
                .0
                .iter()
                .filter(|(m, _)| m.count_ones() as usize == k)
                .map(|(m, c)| (*m, c.clone())),
        )
    }

    pub fn map_coeffs(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> MixedForm {
        MixedForm {
            terms: self.terms.map(f),
        }
    }

    pub fn scale(&self, s: &ScalarExpr) -> MixedForm {
        self.map_coeffs(|c| s * c)
    }

    pub fn conj(&self) -> MixedForm {
        self.map_coeffs(|c| c.conj())
    }

    pub fn wedge(&self, o: &MixedForm) -> MixedForm {
        MixedForm {
            terms: self.terms.wedge(&o.terms),
        }
    }

    pub fn d(&self) -> MixedForm {
        MixedForm {
            terms: self.terms.d(),
        }
    }

    pub fn interior(&self, x: &VectorFieldSym) -> MixedForm {
        MixedForm {
            terms: self.terms.interior(x),
        }
    }

    pub fn perp(&self) -> MixedForm {
        MixedForm {
            terms: self.terms.perp(),
        }
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        self.terms.is_zero(cfg)
    }

    pub fn evaluate(&self, pt: &Point) -> std::result::Result<SpinorVec, EvalError> {
        self.terms.evaluate(pt)
    }
}

impl fmt::Display for MixedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.terms.fmt_with(f)
    }
}

impl serde::Serialize for MixedForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl From<Form> for MixedForm {
    fn from(f: Form) -> MixedForm {
        f.to_mixed()
    }
}

impl Add for &MixedForm {
    type Output = MixedForm;
    fn add(self, o: &MixedForm) -> MixedForm {
        MixedForm {
            terms: self.terms.add(&o.terms),
        }
    }
}

impl Sub for &MixedForm {
    type Output = MixedForm;
    fn sub(self, o: &MixedForm) -> MixedForm {
        self + &(-o)
    }
}

impl Neg for &MixedForm {
    type Output = MixedForm;
    fn neg(self) -> MixedForm {
        self.map_coeffs(|c| -c)
    }
}

impl Add for MixedForm {
    type Output = MixedForm;
    fn add(self, o: MixedForm) -> MixedForm {
        &self + &o
    }
}

impl Sub for MixedForm {
    type Output = MixedForm;
    fn sub(self, o: MixedForm) -> MixedForm {
        &self - &o
    }
}

impl Neg for MixedForm {
    type Output = MixedForm;
    fn neg(self) -> MixedForm {
        -&self
    }
}

/// `Ω = dq1∧dp1 + dq2∧dp2`.
pub fn canonical_symplectic() -> Form {
    &Form::basis(&[Coord::Q1, Coord::P1]) + &Form::basis(&[Coord::Q2, Coord::P2])
}

pub fn wedge(a: &Form, b: &Form) -> Form {
    a.wedge(b)
}

pub fn ext_d(a: &Form) -> Form {
    a.d()
}

pub fn interior(x: &VectorFieldSym, a: &Form) -> Form {
    a.interior(x)
}

pub fn perp(a: &Form) -> Form {
    a.perp()
}

/// The scalar `pf` with `w∧w = pf·Ω∧Ω`.
pub fn pfaffian(w: &Form) -> ScalarExpr {
    assert_eq!(w.degree(), 2, "pfaffian of a {}-form", w.degree());
    // Ω∧Ω = -2 dq1∧dq2∧dp1∧dp2
    w.wedge(w).top().scale(-0.5)
}

/// Splits `w = w0 + λΩ` with `⊥w0 = 0`.
pub fn hodge_lepage(w: &Form) -> (Form, ScalarExpr) {
    assert_eq!(w.degree(), 2, "hodge_lepage of a {}-form", w.degree());
    let lambda = w.perp().coeff(0).scale(0.5);
    let primitive = w - &canonical_symplectic().scale(&lambda);
    (primitive, lambda)
}

/// Coefficient matrix `W_ij = w(∂_i, ∂_j)` of a 2-form.
pub fn form_matrix(w: &Form) -> Endo4 {
    assert_eq!(w.degree(), 2, "form_matrix of a {}-form", w.degree());
    Endo4::from_fn(|i, j| {
        if i == j {
            return ScalarExpr::zero();
        }
        let c = w.coeff((1 << i) | (1 << j));
        if i < j {
            c
        } else {
            -c
        }
    })
}

/// Inverse of [`form_matrix`]; only the strict upper triangle is read.
pub fn form_from_matrix(m: &Endo4) -> Form {
    let mut terms = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            terms.push(((1u8 << i) | (1 << j), m.get(i, j).clone()));
        }
    }
    Form::from_terms(2, terms)
}

/// The endomorphism `A` with `w(X, Y) = Ω(AX, Y)`.
pub fn endo_of_form(w: &Form) -> Endo4 {
    // Ω's matrix squares to -1, so its inverse is its negative
    let omega_inv = -&form_matrix(&canonical_symplectic());
    &omega_inv * &form_matrix(w)
}

/// The 2-form `Ω(A·, ·)`.
pub fn form_of_endo(a: &Endo4) -> Form {
    form_from_matrix(&(&a.transpose() * &form_matrix(&canonical_symplectic())))
}

/// `(T*α)(X) = α(TX)`.
pub fn dual_transpose(t: &Endo4, alpha: &Form) -> Form {
    assert_eq!(alpha.degree(), 1, "dual_transpose of a {}-form", alpha.degree());
    let a = alpha.components();
    Form::one_form(std::array::from_fn(|j| {
        ScalarExpr::sum((0..4).map(|i| &a[i] * t.get(i, j)))
    }))
}

/// Pullback of a 2-form along `q ↦ (q, ∂f/∂q)`; returns the `dq1∧dq2`
/// coefficient.
pub fn graph_pullback(w: &Form, f: &ScalarExpr) -> Result<ScalarExpr> {
    if f.depends_on(Coord::P1) || f.depends_on(Coord::P2) {
        return Err(Error::precondition("function depends on p1 or p2", None));
    }
    assert_eq!(w.degree(), 2, "graph_pullback of a {}-form", w.degree());
    let grad = [f.differentiate(Coord::Q1), f.differentiate(Coord::Q2)];
    let on_graph = |e: &ScalarExpr| {
        e.map_vars(&|c| match c {
            Coord::P1 => Some(grad[0].clone()),
            Coord::P2 => Some(grad[1].clone()),
            _ => None,
        })
    };
    let pulled: [Form; 4] = [
        Form::dx(Coord::Q1),
        Form::dx(Coord::Q2),
        Form::one_form([
            grad[0].differentiate(Coord::Q1),
            grad[0].differentiate(Coord::Q2),
            ScalarExpr::zero(),
            ScalarExpr::zero(),
        ]),
        Form::one_form([
            grad[1].differentiate(Coord::Q1),
            grad[1].differentiate(Coord::Q2),
            ScalarExpr::zero(),
            ScalarExpr::zero(),
        ]),
    ];
    let mut acc = Form::zero(2);
    for (m, c) in w.terms() {
        let idx: Vec<usize> = (0..4).filter(|k| m & (1 << k) != 0).collect();
        let piece = pulled[idx[0]].wedge(&pulled[idx[1]]).scale(&on_graph(c));
        acc = &acc + &piece;
    }
    Ok(acc.coeff(0b0011))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use Coord::*;

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    #[test]
    fn signs_follow_basis_order() {
        let a = Form::basis(&[Q1, P2]);
        let b = Form::basis(&[Q2, P1]);
        // dq1∧dp2∧dq2∧dp1 is an even permutation of the basis order
        assert_eq!(a.wedge(&b).top(), ScalarExpr::one());
        assert!(Form::dx(Q1).wedge(&Form::dx(Q1)).is_structurally_zero());
        let om = canonical_symplectic();
        assert_eq!(om.wedge(&om).top(), ScalarExpr::real(-2.0));
    }

    #[test]
    fn perp_calibration() {
        assert_eq!(Form::basis(&[Q1, P1]).perp().coeff(0), ScalarExpr::one());
        assert!(Form::basis(&[Q1, Q2]).perp().is_structurally_zero());
        assert_eq!(canonical_symplectic().perp().coeff(0), ScalarExpr::real(2.0));
        let alpha = Form::dx(Q1).scale(&ScalarExpr::p2());
        let back = alpha.wedge(&canonical_symplectic()).perp();
        assert!((&back - &alpha).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn pfaffian_values() {
        let laplace = &Form::basis(&[Q1, P2]) - &Form::basis(&[Q2, P1]);
        assert_eq!(pfaffian(&laplace), ScalarExpr::one());
        let wave = &Form::basis(&[Q1, P2]) + &Form::basis(&[Q2, P1]);
        assert_eq!(pfaffian(&wave), ScalarExpr::real(-1.0));
        assert!(pfaffian(&Form::zero(2)).is_const_zero());
    }

    #[test]
    fn hodge_lepage_examples() {
        let (p, l) = hodge_lepage(&canonical_symplectic());
        assert!(p.is_structurally_zero());
        assert_eq!(l, ScalarExpr::one());
        let (p, l) = hodge_lepage(&Form::basis(&[Q1, P1]));
        assert_eq!(l, ScalarExpr::real(0.5));
        let want = (&Form::basis(&[Q1, P1]) - &Form::basis(&[Q2, P2])).scale(&ScalarExpr::real(0.5));
        assert!((&p - &want).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn endo_of_omega_is_identity() {
        let a = endo_of_form(&canonical_symplectic());
        assert!((&a - &Endo4::identity()).is_zero(&cfg()).is_zero());
        let laplace = &Form::basis(&[Q1, P2]) - &Form::basis(&[Q2, P1]);
        let a = endo_of_form(&laplace);
        assert!((&(&a * &a) + &Endo4::identity()).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn graph_pullback_of_laplace() {
        let laplace = &Form::basis(&[Q1, P2]) - &Form::basis(&[Q2, P1]);
        let f = parse_expr("q1^2 - q2^2").unwrap();
        assert!(is_zero_all(&[graph_pullback(&laplace, &f).unwrap()], &cfg()).is_zero());
        let f = parse_expr("q1^2").unwrap();
        assert_eq!(graph_pullback(&laplace, &f).unwrap(), ScalarExpr::real(2.0));
        assert!(graph_pullback(&laplace, &ScalarExpr::p1()).is_err());
    }
}
