//! Seeded random instances shared by the integration tests.

#![allow(dead_code)]

use mage_core::expr::{Coord, ScalarExpr, ZeroTestConfig};
use mage_core::exterior::{canonical_symplectic, hodge_lepage, Form};
use mage_core::ma::MAEquation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cfg() -> ZeroTestConfig {
    ZeroTestConfig::default()
}

fn coefficient(r: &mut ChaCha8Rng) -> f64 {
    let k: i32 = r.random_range(1..=3);
    if r.random_bool(0.5) {
        k as f64
    } else {
        -k as f64
    }
}

fn monomial(r: &mut ChaCha8Rng, max_degree: u32) -> ScalarExpr {
    let deg = r.random_range(0..=max_degree);
    let factors: Vec<ScalarExpr> = (0..deg)
        .map(|_| ScalarExpr::var(Coord::from_index(r.random_range(0..4))))
        .collect();
    ScalarExpr::product(factors).scale(coefficient(r))
}

/// Sum of one to three monomials of degree at most `max_degree`.
pub fn poly(r: &mut ChaCha8Rng, max_degree: u32) -> ScalarExpr {
    let n = r.random_range(1..=3);
    ScalarExpr::sum((0..n).map(|_| monomial(r, max_degree)))
}

/// Polynomial with at least one non-constant monomial.
pub fn nonconstant_poly(r: &mut ChaCha8Rng, max_degree: u32) -> ScalarExpr {
    let c = Coord::from_index(r.random_range(0..4));
    &poly(r, max_degree) + &ScalarExpr::var(c).scale(coefficient(r))
}

/// Random expression mixing polynomials with the transcendental functions.
pub fn expr(r: &mut ChaCha8Rng, depth: u32) -> ScalarExpr {
    if depth == 0 {
        return poly(r, 2);
    }
    let a = expr(r, depth - 1);
    match r.random_range(0..7) {
        0 => &a + &expr(r, depth - 1),
        1 => &a * &expr(r, depth - 1),
        2 => a.sin(),
        3 => a.cos(),
        4 => a.scale(0.5).exp(),
        5 => ScalarExpr::quotient(a, &poly(r, 1).powi(2) + &ScalarExpr::real(1.5)),
        _ => a.powi(2),
    }
}

pub fn one_form(r: &mut ChaCha8Rng, max_degree: u32) -> Form {
    Form::one_form(std::array::from_fn(|_| poly(r, max_degree)))
}

pub fn two_form(r: &mut ChaCha8Rng, max_degree: u32) -> Form {
    Form::from_terms(
        2,
        [0b0011u8, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100].map(|m| (m, poly(r, max_degree))),
    )
}

/// Closed 2-form `dβ` plus a constant 2-form.
pub fn closed_two_form(r: &mut ChaCha8Rng, max_degree: u32) -> Form {
    &one_form(r, max_degree + 1).d() + &two_form(r, 0)
}

/// Divergent equation read from the primitive part of a closed 2-form.
pub fn divergent_equation(r: &mut ChaCha8Rng, max_degree: u32) -> MAEquation {
    let (w0, _) = hodge_lepage(&closed_two_form(r, max_degree));
    MAEquation::from_primitive_form(&w0, &cfg()).expect("primitive part")
}

/// Constant-coefficient equation with nonvanishing pfaffian.
pub fn constant_equation(r: &mut ChaCha8Rng) -> MAEquation {
    loop {
        let (w0, _) = hodge_lepage(&two_form(r, 0));
        let pf = mage_core::exterior::pfaffian(&w0).as_const().unwrap();
        if pf.norm() > 0.1 {
            return MAEquation::from_primitive_form(&w0, &cfg()).unwrap();
        }
    }
}

pub fn linear(r: &mut ChaCha8Rng) -> ScalarExpr {
    ScalarExpr::sum(Coord::ALL.map(|c| ScalarExpr::var(c).scale(coefficient(r))))
}

pub fn omega() -> Form {
    canonical_symplectic()
}
