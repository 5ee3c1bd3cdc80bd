use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::expr::{Coord, EvalError, Point, ScalarExpr, Verdict, ZeroTestConfig};

use super::{form_matrix, mask_of, Endo4, Form, SpinorVec, Terms};

/// Multivector field on the frame `(∂q1, ∂q2, ∂p1, ∂p2)`, keyed by bitmask
/// exactly as forms are.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    degree: usize,
    terms: Terms,
}

/// Degree-2 multivector.
pub type Bivector = Multivector;

impl Multivector {
    pub fn zero(degree: usize) -> Multivector {
        assert!(degree <= 4, "multivector degree {degree} exceeds 4");
        Multivector {
            degree,
            terms: Terms::default(),
        }
    }

    pub fn scalar(c: impl Into<ScalarExpr>) -> Multivector {
        let mut m = Multivector::zero(0);
        m.terms.add_term(0, c.into());
        m
    }

    pub fn basis(coords: &[Coord]) -> Multivector {
        let mut m = Multivector::zero(coords.len().min(4));
        if let Some((mask, sign)) = mask_of(coords) {
            m.terms.add_term(mask, ScalarExpr::real(sign));
        }
        m
    }

    pub fn vector(c: [ScalarExpr; 4]) -> Multivector {
        Multivector::from_terms(1, c.into_iter().enumerate().map(|(k, e)| (1u8 << k, e)))
    }

    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (u8, ScalarExpr)>) -> Multivector {
        let mut m = Multivector::zero(degree);
        for (mask, c) in terms {
            assert_eq!(mask.count_ones() as usize, degree, "mask {mask:#06b} has wrong degree");
            m.terms.add_term(mask, c);
        }
        m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, mask: u8) -> ScalarExpr {
        self.terms.get(mask)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &ScalarExpr)> {
        self.terms.0.iter().map(|(m, c)| (*m, c))
    }

    pub fn map_coeffs(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Multivector {
        Multivector {
            degree: self.degree,
            terms: self.terms.map(f),
        }
    }

    pub fn scale(&self, s: &ScalarExpr) -> Multivector {
        self.map_coeffs(|c| s * c)
    }

    pub fn conj(&self) -> Multivector {
        self.map_coeffs(|c| c.conj())
    }

    pub fn re(&self) -> Multivector {
        self.map_coeffs(|c| c.re())
    }

    pub fn im(&self) -> Multivector {
        self.map_coeffs(|c| c.im())
    }

    pub fn wedge(&self, o: &Multivector) -> Multivector {
        let degree = self.degree + o.degree;
        if degree > 4 {
            return Multivector::zero(4);
        }
        Multivector {
            degree,
            terms: self.terms.wedge(&o.terms),
        }
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        self.terms.is_zero(cfg)
    }

    pub fn evaluate(&self, pt: &Point) -> Result<SpinorVec, EvalError> {
        self.terms.evaluate(pt)
    }

    /// Coefficient matrix `P_ij = P(dx_i, dx_j)` of a bivector.
    pub fn matrix(&self) -> Endo4 {
        assert_eq!(self.degree, 2, "matrix of a degree-{} multivector", self.degree);
        // identical bookkeeping to forms
        let as_form = Form {
            degree: 2,
            terms: self.terms.clone(),
        };
        form_matrix(&as_form)
    }

    pub fn from_matrix(m: &Endo4) -> Bivector {
        let f = super::form_from_matrix(m);
        Multivector {
            degree: 2,
            terms: f.terms,
        }
    }

    /// Matrix of `ξ ↦ ι_ξ P` acting on 1-form components.
    pub fn sharp(&self) -> Endo4 {
        self.matrix().transpose()
    }

    /// The bivector `P` with `P♯ = -(w♭)⁻¹`, where `w♭ X = ι_X w`. For the
    /// canonical symplectic form this is `∂q1∧∂p1 + ∂q2∧∂p2`.
    pub fn dual_of_form(w: &Form) -> Bivector {
        // w♭ = Wᵀ = -W and P♯ = Pᵀ = -P, so P = -W⁻¹
        Bivector::from_matrix(&-&form_matrix(w).inverse())
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.0.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if *m == 0 {
                write!(f, "{c}")?;
                continue;
            }
            if !c.is_const_one() {
                write!(f, "({c})*")?;
            }
            f.write_str(&super::mask_name(*m, "∂"))?;
        }
        Ok(())
    }
}

impl serde::Serialize for Multivector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, o: &Multivector) -> Multivector {
        assert_eq!(self.degree, o.degree, "adding multivectors of different degree");
        Multivector {
            degree: self.degree,
            terms: self.terms.add(&o.terms),
        }
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, o: &Multivector) -> Multivector {
        self + &(-o)
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.map_coeffs(|c| -c)
    }
}
