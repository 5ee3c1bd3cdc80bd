//! Schouten brackets and structures built from pairs of bivectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{is_zero, Coord, ScalarExpr, Verdict, ZeroTestConfig};
use crate::exterior::{form_matrix, wedge_sign, Bivector, Endo4, Form, Multivector};

use super::GCStructure;

/// `∂/∂ξ_i` acting from the right on a multivector written in the odd
/// variables `ξ_i = ∂_i`.
fn right_derivative(p: &Multivector, i: usize) -> Multivector {
    let bit = 1u8 << i;
    let terms = p.terms().filter(|(m, _)| m & bit != 0).map(|(m, c)| {
        let rest = m & !bit;
        // ξ_m = s · ξ_rest ξ_i
        let s = wedge_sign(rest, bit).unwrap();
        (rest, c.scale(s))
    });
    Multivector::from_terms(p.degree() - 1, terms.collect::<Vec<_>>())
}

fn partial(p: &Multivector, c: Coord) -> Multivector {
    p.map_coeffs(|e| e.differentiate(c))
}

/// `[P, Q] = Σ_i ∂ʳ_{ξ_i}P · ∂_{x_i}Q - (-1)^{(p-1)(q-1)} ∂ʳ_{ξ_i}Q · ∂_{x_i}P`.
pub fn schouten(p: &Multivector, q: &Multivector) -> Multivector {
    let (dp, dq) = (p.degree(), q.degree());
    let degree = (dp + dq).saturating_sub(1);
    if dp == 0 && dq == 0 {
        return Multivector::zero(0);
    }
    let mut out = Multivector::zero(degree);
    for c in Coord::ALL {
        let i = c.index();
        if dp > 0 {
            out = &out + &right_derivative(p, i).wedge(&partial(q, c));
        }
        if dq > 0 {
            // (-1)^{(p-1)(q-1)} is -1 exactly when p and q are both even
            let s = if dp % 2 == 0 && dq % 2 == 0 { -1.0 } else { 1.0 };
            out = &out - &right_derivative(q, i).wedge(&partial(p, c)).scale(&ScalarExpr::real(s));
        }
    }
    out
}

/// A pair `(π, Π)` of real bivectors, read as `P = π + iΠ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivectorPair {
    pub pi: Bivector,
    pub big_pi: Bivector,
}

impl BivectorPair {
    pub fn new(pi: Bivector, big_pi: Bivector) -> Self {
        assert!(pi.degree() == 2 && big_pi.degree() == 2, "pair of bivectors expected");
        BivectorPair { pi, big_pi }
    }

    /// The pair dual to a Hitchin pair: `P♯ = -(Θ♭)⁻¹` for `Θ = ω - iΩ`.
    pub fn dual_of(w: &Form, omega: &Form) -> Self {
        let theta = w - &omega.scale(&ScalarExpr::i());
        let p = Bivector::dual_of_form(&theta);
        BivectorPair::new(p.re(), p.im())
    }

    /// `π♯ = A Π♯` with `Π` dual to `Ω`; for `A² = -1` this is a Poisson
    /// pair whose structure has vanishing upper block.
    pub fn twisted(a: &Endo4, omega: &Form) -> Self {
        let big_pi = Bivector::dual_of_form(omega);
        let pi_sharp = a * &big_pi.sharp();
        BivectorPair::new(Bivector::from_matrix(&pi_sharp.transpose()), big_pi)
    }

    pub fn complex(&self) -> Bivector {
        &self.pi + &self.big_pi.scale(&ScalarExpr::i())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitchinBivectorReport {
    /// `[Π, Π] - [π, π]`.
    pub difference: Verdict,
    /// `[π, Π]`.
    pub mixed: Verdict,
    /// `det Π♯ ≠ 0`.
    pub nondegenerate: Verdict,
    pub holds: bool,
}

/// Checks `[π, π] = [Π, Π]`, `[π, Π] = 0` and nondegeneracy of `Π`.
pub fn hitchin_bivector_check(pair: &BivectorPair, cfg: &ZeroTestConfig) -> HitchinBivectorReport {
    let pp = schouten(&pair.pi, &pair.pi);
    let bb = schouten(&pair.big_pi, &pair.big_pi);
    let difference = (&bb - &pp).is_zero(cfg);
    let mixed = schouten(&pair.pi, &pair.big_pi).is_zero(cfg);
    let det = pair.big_pi.sharp().det();
    // a vanishing determinant is the failure here
    let nondegenerate = match is_zero(&det, cfg) {
        Verdict::Zero => Verdict::NonZero {
            witness: crate::expr::Point::origin(),
            value: [0.0, 0.0],
            component: 0,
        },
        Verdict::NonZero { .. } => Verdict::Zero,
        v => v,
    };
    let holds = difference.is_zero() && mixed.is_zero() && nondegenerate.is_zero();
    HitchinBivectorReport {
        difference,
        mixed,
        nondegenerate,
        holds,
    }
}

/// `𝕁 = [[A, π_A♯], [σ♭, -Aᵀ]]` with `σ♭ = (Π♯)⁻¹`, `A = π♯σ♭` and
/// `π_A = -(1 + A²)Π`.
pub fn bivectors_to_gcs(pair: &BivectorPair, cfg: &ZeroTestConfig) -> Result<GCStructure> {
    let report = hitchin_bivector_check(pair, cfg);
    if !report.nondegenerate.is_zero() {
        return Err(Error::degenerate("Π is degenerate", report.nondegenerate.witness()));
    }
    let big_sharp = pair.big_pi.sharp();
    let sigma_flat = big_sharp.inverse();
    let a = &pair.pi.sharp() * &sigma_flat;
    let one_plus = &Endo4::identity() + &(&a * &a);
    let upper = -&(&one_plus * &big_sharp);
    let integrable = report.difference.clone().and(report.mixed.clone());
    let mut g = GCStructure::from_blocks(a, upper, sigma_flat.clone(), integrable, cfg)?;
    g.w_tilde = Some(crate::exterior::form_from_matrix(&sigma_flat.transpose()));
    Ok(g)
}

/// Coefficient of `ξ_iξ_jξ_k` in `[P, P]` from the index formula
/// `2 Σ_cyclic Σ_l P^{al} ∂_l P^{bc}`.
pub fn schouten_square_by_indices(p: &Bivector) -> Multivector {
    let m = form_matrix(&Form::from_terms(2, p.terms().map(|(k, c)| (k, c.clone())).collect::<Vec<_>>()));
    let mut terms = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                let cyc = [(i, j, k), (j, k, i), (k, i, j)];
                let sum = ScalarExpr::sum(cyc.iter().flat_map(|&(a, b, c)| {
                    let m = &m;
                    (0..4).map(move |l| m.get(a, l) * &m.get(b, c).differentiate(Coord::from_index(l)))
                }));
                terms.push(((1u8 << i) | (1 << j) | (1 << k), sum.scale(2.0)));
            }
        }
    }
    Multivector::from_terms(3, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{canonical_symplectic, parse_form};
    use crate::gcs::build_gcs;

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    fn bv(terms: &[(u8, ScalarExpr)]) -> Bivector {
        Multivector::from_terms(2, terms.to_vec())
    }

    #[test]
    fn vector_fields_give_lie_bracket() {
        let x = Multivector::vector([ScalarExpr::p1(), ScalarExpr::zero(), ScalarExpr::q1(), ScalarExpr::one()]);
        let y = Multivector::vector([ScalarExpr::zero(), ScalarExpr::q1() * ScalarExpr::p2(), ScalarExpr::zero(), ScalarExpr::q2()]);
        let br = schouten(&x, &y);
        // [X, Y] = X(Y) - Y(X)
        let expect = Multivector::vector([
            ScalarExpr::zero(),
            ScalarExpr::p1() * ScalarExpr::p2() + ScalarExpr::q1(),
            ScalarExpr::zero(),
            ScalarExpr::zero(),
        ]);
        assert!((&br - &expect).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn square_matches_index_formula() {
        let p = bv(&[
            (0b0101, ScalarExpr::q1()),
            (0b0110, ScalarExpr::p1() * ScalarExpr::q2()),
            (0b1010, ScalarExpr::p2().powi(2)),
            (0b1100, ScalarExpr::one()),
        ]);
        let a = schouten(&p, &p);
        let b = schouten_square_by_indices(&p);
        assert!((&a - &b).is_zero(&cfg()).is_zero());
        assert!(a.is_zero(&cfg()).is_nonzero());
    }

    #[test]
    fn dual_of_closed_pair_is_hitchin() {
        let w = parse_form("p1*dq2^dp1 + dq1^dp2 + q1*dq1^dp1").unwrap();
        let om = canonical_symplectic();
        let pair = BivectorPair::dual_of(&w, &om);
        assert!(hitchin_bivector_check(&pair, &cfg()).holds);
    }

    #[test]
    fn dual_pair_rebuilds_structure() {
        let w = parse_form("p1*dq2^dp1 + 2*dq1^dq2").unwrap();
        let om = canonical_symplectic();
        let g = build_gcs(&w, &om, &cfg()).unwrap();
        let h = bivectors_to_gcs(&BivectorPair::dual_of(&w, &om), &cfg()).unwrap();
        assert!(h.integrable.is_zero());
        assert!(g.matrix().sub(&h.matrix()).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn twisted_pair_has_no_upper_block() {
        let lap = parse_form("dq1^dp2 - dq2^dp1").unwrap();
        let a = crate::exterior::endo_of_form(&lap);
        let pair = BivectorPair::twisted(&a, &canonical_symplectic());
        let g = bivectors_to_gcs(&pair, &cfg()).unwrap();
        assert!(g.upper.is_zero(&cfg()).is_zero());
        assert!(g.integrable.is_zero());
    }
}
