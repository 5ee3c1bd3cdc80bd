use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Coord, Func, Node, ScalarExpr};

/// Values of `(q1, q2, p1, p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point(pub [f64; 4]);

impl Point {
    pub fn new(x: [f64; 4]) -> Self {
        debug_assert!(x.iter().all(|v| v.is_finite()), "non-finite point {x:?}");
        Point(x)
    }

    pub fn origin() -> Self {
        Point([0.0; 4])
    }

    pub fn get(&self, c: Coord) -> f64 {
        self.0[c.index()]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(q1={}, q2={}, p1={}, p2={})",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

/// Why an evaluation produced no finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("non-finite intermediate value")]
    NonFinite,
}

fn check(z: Complex64) -> Result<Complex64, EvalError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl ScalarExpr {
    /// Evaluates at `pt`. Principal branches are used for `sqrt` and `ln`,
    /// with negative reals mapped to the upper side of the cut.
    pub fn evaluate(&self, pt: &Point) -> Result<Complex64, EvalError> {
        Evaluator::new(*pt).eval(self).map(|(v, _)| v)
    }

    /// Evaluates and also returns the largest modulus seen at any node,
    /// which sets the scale for relative zero tests.
    pub fn evaluate_with_scale(&self, pt: &Point) -> Result<(Complex64, f64), EvalError> {
        Evaluator::new(*pt).eval(self)
    }
}

/// Evaluation at a fixed point that visits each shared subtree once, so
/// expressions built by repeated matrix products stay linear in their DAG
/// size. One evaluator may serve many expressions at the same point.
pub struct Evaluator {
    pt: Point,
    memo: HashMap<*const Node, (ScalarExpr, Complex64, f64)>,
}

impl Evaluator {
    pub fn new(pt: Point) -> Self {
        Evaluator {
            pt,
            memo: HashMap::new(),
        }
    }

    pub fn point(&self) -> &Point {
        &self.pt
    }

    /// Value and largest node modulus within the expression.
    pub fn eval(&mut self, e: &ScalarExpr) -> Result<(Complex64, f64), EvalError> {
        let key = Arc::as_ptr(&e.0);
        let shared = Arc::strong_count(&e.0) > 1
            && !matches!(e.node(), Node::Const(_) | Node::Var(_));
        if shared {
            if let Some((_, v, s)) = self.memo.get(&key) {
                return Ok((*v, *s));
            }
        }
        let mut scale = 0.0f64;
        let mut sub = |ev: &mut Evaluator, x: &ScalarExpr| -> Result<Complex64, EvalError> {
            let (v, s) = ev.eval(x)?;
            scale = scale.max(s);
            Ok(v)
        };
        let v = match e.node() {
            Node::Const(c) => *c,
            Node::Var(c) => Complex64::new(self.pt.get(*c), 0.0),
            Node::Sum(ts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in ts {
                    acc += sub(self, t)?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in fs {
                    acc *= sub(self, f)?;
                }
                acc
            }
            Node::Quotient(a, b) => {
                let num = sub(self, a)?;
                let den = sub(self, b)?;
                if den == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Node::Pow(b, n) => {
                let base = sub(self, b)?;
                if *n < 0 && base == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::DivisionByZero);
                }
                base.powi(*n)
            }
            Node::Func(f, a) => {
                let x = sub(self, a)?;
                if *f == Func::Ln && x == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::LogOfZero);
                }
                f.apply(x)
            }
        };
        let v = check(v)?;
        let scale = scale.max(v.norm());
        if shared {
            self.memo.insert(key, (e.clone(), v, scale));
        }
        Ok((v, scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn direct_substitution() {
        let e = parse_expr("q1 + i*q2").unwrap();
        let v = e.evaluate(&Point::new([1.0, 2.0, 0.0, 0.0])).unwrap();
        assert_eq!(v, Complex64::new(1.0, 2.0));
    }

    #[test]
    fn pole_is_reported() {
        let e = parse_expr("1/p1").unwrap();
        let r = e.evaluate(&Point::new([0.0, 3.0, 0.0, 1.0]));
        assert_eq!(r, Err(EvalError::DivisionByZero));
        let e = parse_expr("p1^-2").unwrap();
        assert!(e.evaluate(&Point::origin()).is_err());
        let e = parse_expr("ln(q1)").unwrap();
        assert_eq!(e.evaluate(&Point::origin()), Err(EvalError::LogOfZero));
    }

    #[test]
    fn principal_sqrt_branch() {
        let e = parse_expr("sqrt(-p1)").unwrap();
        let v = e.evaluate(&Point::new([0.0, 0.0, -4.0, 0.0])).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        // negative radicand sits on the upper side of the cut
        let v = e.evaluate(&Point::new([0.0, 0.0, 4.0, 0.0])).unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_coefficients() {
        let e = parse_expr("p1*p2 + i*q1").unwrap();
        let v = e.evaluate(&Point::new([1.0, 0.0, 2.0, 3.0])).unwrap();
        assert_eq!(v, Complex64::new(6.0, 1.0));
    }
}
