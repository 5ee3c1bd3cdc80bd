use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::expr::{is_zero_all, EvalError, Point, ScalarExpr, Verdict, ZeroTestConfig};

use super::VectorFieldSym;

/// 4×4 matrix of expressions acting on vector-field components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Endo4(pub [[ScalarExpr; 4]; 4]);

impl Endo4 {
    pub fn from_fn(f: impl Fn(usize, usize) -> ScalarExpr) -> Endo4 {
        Endo4(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn zero() -> Endo4 {
        Endo4::default()
    }

    pub fn identity() -> Endo4 {
        Endo4::scalar(ScalarExpr::one())
    }

    pub fn scalar(s: ScalarExpr) -> Endo4 {
        Endo4::from_fn(|i, j| if i == j { s.clone() } else { ScalarExpr::zero() })
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.0[i][j]
    }

    pub fn transpose(&self) -> Endo4 {
        Endo4::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Endo4 {
        Endo4::from_fn(|i, j| f(&self.0[i][j]))
    }

    pub fn scale(&self, s: &ScalarExpr) -> Endo4 {
        self.map(|c| s * c)
    }

    pub fn conj(&self) -> Endo4 {
        self.map(|c| c.conj())
    }

    pub fn trace(&self) -> ScalarExpr {
        ScalarExpr::sum((0..4).map(|i| self.0[i][i].clone()))
    }

    pub fn apply(&self, x: &VectorFieldSym) -> VectorFieldSym {
        VectorFieldSym(std::array::from_fn(|i| {
            ScalarExpr::sum((0..4).map(|j| &self.0[i][j] * &x.0[j]))
        }))
    }

    /// Determinant of the 3×3 minor obtained by deleting row `r`, column `c`.
    fn minor(&self, r: usize, c: usize) -> ScalarExpr {
        let rows: Vec<usize> = (0..4).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..4).filter(|&j| j != c).collect();
        let m = |i: usize, j: usize| &self.0[rows[i]][cols[j]];
        let t = |a: usize, b: usize, c: usize| ScalarExpr::product([m(0, a).clone(), m(1, b).clone(), m(2, c).clone()]);
        ScalarExpr::sum([
            t(0, 1, 2),
            t(1, 2, 0),
            t(2, 0, 1),
            -t(0, 2, 1),
            -t(1, 0, 2),
            -t(2, 1, 0),
        ])
    }

    fn cofactor(&self, r: usize, c: usize) -> ScalarExpr {
        let m = self.minor(r, c);
        if (r + c).is_multiple_of(2) {
            m
        } else {
            -m
        }
    }

    pub fn det(&self) -> ScalarExpr {
        ScalarExpr::sum((0..4).map(|j| &self.0[0][j] * &self.cofactor(0, j)))
    }

    pub fn adjugate(&self) -> Endo4 {
        Endo4::from_fn(|i, j| self.cofactor(j, i))
    }

    /// Symbolic inverse `adj / det`; singular wherever `det` vanishes.
    pub fn inverse(&self) -> Endo4 {
        let det = self.det();
        self.adjugate().map(|c| c / &det)
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        let all: Vec<ScalarExpr> = self.0.iter().flatten().cloned().collect();
        is_zero_all(&all, cfg)
    }

    pub fn evaluate(&self, pt: &Point) -> Result<Matrix4<Complex64>, EvalError> {
        let mut m = Matrix4::zeros();
        let mut ev = crate::expr::Evaluator::new(*pt);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = ev.eval(&self.0[i][j])?.0;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for Endo4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            f.write_str(&cells.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &Endo4 {
    type Output = Endo4;
    fn mul(self, o: &Endo4) -> Endo4 {
        Endo4::from_fn(|i, j| ScalarExpr::sum((0..4).map(|k| &self.0[i][k] * &o.0[k][j])))
    }
}

impl Add for &Endo4 {
    type Output = Endo4;
    fn add(self, o: &Endo4) -> Endo4 {
        Endo4::from_fn(|i, j| &self.0[i][j] + &o.0[i][j])
    }
}

impl Sub for &Endo4 {
    type Output = Endo4;
    fn sub(self, o: &Endo4) -> Endo4 {
        Endo4::from_fn(|i, j| &self.0[i][j] - &o.0[i][j])
    }
}

impl Neg for &Endo4 {
    type Output = Endo4;
    fn neg(self) -> Endo4 {
        self.map(|c| -c)
    }
}

impl Mul for Endo4 {
    type Output = Endo4;
    fn mul(self, o: Endo4) -> Endo4 {
        &self * &o
    }
}

impl Add for Endo4 {
    type Output = Endo4;
    fn add(self, o: Endo4) -> Endo4 {
        &self + &o
    }
}

impl Sub for Endo4 {
    type Output = Endo4;
    fn sub(self, o: Endo4) -> Endo4 {
        &self - &o
    }
}

impl Neg for Endo4 {
    type Output = Endo4;
    fn neg(self) -> Endo4 {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn inverse_times_self_is_identity() {
        let m = Endo4::from_fn(|i, j| {
            let s = format!("{}*q1 + {} + p2^{}", i + 2 * j, (i * j) % 3, (i + j) % 2);
            parse_expr(&s).unwrap()
        });
        let pt = Point::new([0.3, -0.7, 1.1, 0.4]);
        let prod = (&m * &m.inverse()).evaluate(&pt).unwrap();
        assert!((prod - Matrix4::identity()).norm() < 1e-9);
        let det = m.det().evaluate(&pt).unwrap();
        assert!((det - m.evaluate(&pt).unwrap().determinant()).norm() < 1e-9);
    }
}
