use std::ops::{Add, Neg, Sub};

use nalgebra::Vector4;
use num_complex::Complex64;

use crate::expr::{is_zero_all, Coord, EvalError, Point, ScalarExpr, Verdict, ZeroTestConfig};

use super::{canonical_symplectic, form_matrix, Form};

/// Vector field with components on `(∂q1, ∂q2, ∂p1, ∂p2)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorFieldSym(pub [ScalarExpr; 4]);

impl VectorFieldSym {
    pub fn zero() -> Self {
        VectorFieldSym::default()
    }

    /// The coordinate field `∂_c`.
    pub fn basis(c: Coord) -> Self {
        let mut v = VectorFieldSym::zero();
        v.0[c.index()] = ScalarExpr::one();
        v
    }

    pub fn component(&self, c: Coord) -> &ScalarExpr {
        &self.0[c.index()]
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sum(
            Coord::ALL
                .into_iter()
                .filter(|c| !self.0[c.index()].is_const_zero())
                .map(|c| &self.0[c.index()] * &f.differentiate(c)),
        )
    }

    /// Lie bracket `[X, Y]`.
    pub fn bracket(&self, y: &VectorFieldSym) -> VectorFieldSym {
        VectorFieldSym(std::array::from_fn(|j| self.apply(&y.0[j]) - y.apply(&self.0[j])))
    }

    pub fn scale(&self, s: &ScalarExpr) -> VectorFieldSym {
        VectorFieldSym(std::array::from_fn(|j| s * &self.0[j]))
    }

    pub fn conj(&self) -> VectorFieldSym {
        VectorFieldSym(std::array::from_fn(|j| self.0[j].conj()))
    }

    /// Hamiltonian field of `h`: `ι_X Ω = dh` for the canonical `Ω`.
    pub fn hamiltonian(h: &ScalarExpr) -> VectorFieldSym {
        // ι_X Ω has components Ωmᵀ X, and (Ωmᵀ)⁻¹ = Ωm
        let om = form_matrix(&canonical_symplectic());
        let dh: [ScalarExpr; 4] = std::array::from_fn(|k| h.differentiate(Coord::from_index(k)));
        om.apply(&VectorFieldSym(dh))
    }

    /// The 1-form `ι_X w` of a 2-form `w`.
    pub fn flat(&self, w: &Form) -> Form {
        w.interior(self)
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        is_zero_all(&self.0, cfg)
    }

    pub fn evaluate(&self, pt: &Point) -> Result<Vector4<Complex64>, EvalError> {
        let mut v = Vector4::zeros();
        let mut ev = crate::expr::Evaluator::new(*pt);
        for k in 0..4 {
            v[k] = ev.eval(&self.0[k])?.0;
        }
        Ok(v)
    }
}

impl Add for &VectorFieldSym {
    type Output = VectorFieldSym;
    fn add(self, o: &VectorFieldSym) -> VectorFieldSym {
        VectorFieldSym(std::array::from_fn(|j| &self.0[j] + &o.0[j]))
    }
}

impl Sub for &VectorFieldSym {
    type Output = VectorFieldSym;
    fn sub(self, o: &VectorFieldSym) -> VectorFieldSym {
        VectorFieldSym(std::array::from_fn(|j| &self.0[j] - &o.0[j]))
    }
}

impl Neg for &VectorFieldSym {
    type Output = VectorFieldSym;
    fn neg(self) -> VectorFieldSym {
        VectorFieldSym(std::array::from_fn(|j| -&self.0[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn hamiltonian_contracts_to_differential() {
        let h = parse_expr("q1*p2 + p1^2*q2").unwrap();
        let x = VectorFieldSym::hamiltonian(&h);
        let lhs = canonical_symplectic().interior(&x);
        let dh = Form::scalar(h).d();
        assert!((&lhs - &dh).is_zero(&ZeroTestConfig::default()).is_zero());
    }

    #[test]
    fn coordinate_fields_commute() {
        let x = VectorFieldSym::basis(Coord::Q1);
        let y = VectorFieldSym::basis(Coord::P2);
        assert!(x.bracket(&y).0.iter().all(|c| c.is_const_zero()));
    }
}
