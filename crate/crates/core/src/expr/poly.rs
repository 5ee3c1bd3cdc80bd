//! Sparse multivariate polynomials in `(q1, q2, p1, p2)`.
//!
//! Used where an exact antiderivative is needed: potentials of closed
//! 1-forms with polynomial coefficients. Conversion from [`ScalarExpr`]
//! succeeds for sums, products, non-negative powers and quotients whose
//! denominator divides the numerator exactly.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Coord, Node, Point, ScalarExpr};

type Monomial = [u32; 4];

const CANCEL_EPS: f64 = 1e-12;
const MAX_DIVISION_STEPS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Complex64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Poly::zero();
        p.add_term([0; 4], c);
        p
    }

    pub fn var(v: Coord) -> Self {
        let mut m = [0; 4];
        m[v.index()] = 1;
        let mut p = Poly::zero();
        p.add_term(m, Complex64::new(1.0, 0.0));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    fn add_term(&mut self, m: Monomial, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    fn max_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients that are rounding residue relative to `scale`.
    fn prune(&mut self, scale: f64) {
        let cut = CANCEL_EPS * scale.max(1.0);
        self.terms.retain(|_, c| c.norm() > cut);
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, *c);
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, c * s);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2], ma[3] + mb[3]];
                r.add_term(m, ca * cb);
            }
        }
        r
    }

    pub fn powu(&self, n: u32) -> Poly {
        let mut r = Poly::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    fn leading(&self) -> Option<(Monomial, Complex64)> {
        self.terms.iter().next_back().map(|(m, c)| (*m, *c))
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    /// Lex-order long division; a nonzero remainder means no exact quotient.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let scale = self.max_norm();
        let mut r = self.clone();
        let mut q = Poly::zero();
        let mut steps = 0;
        while let Some((rm, rc)) = r.leading() {
            steps += 1;
            if steps > MAX_DIVISION_STEPS || (0..4).any(|k| rm[k] < dm[k]) {
                return None;
            }
            let m = [rm[0] - dm[0], rm[1] - dm[1], rm[2] - dm[2], rm[3] - dm[3]];
            let mut t = Poly::zero();
            t.add_term(m, rc / dc);
            q = q.add(&t);
            r = r.sub(&t.mul(d));
            r.terms.remove(&rm);
            r.prune(scale);
        }
        Some(q)
    }

    pub fn from_expr(e: &ScalarExpr) -> Option<Poly> {
        match e.node() {
            Node::Const(c) => Some(Poly::constant(*c)),
            Node::Var(v) => Some(Poly::var(*v)),
            Node::Sum(ts) => ts
                .iter()
                .try_fold(Poly::zero(), |acc, t| Some(acc.add(&Poly::from_expr(t)?))),
            Node::Product(fs) => fs.iter().try_fold(
                Poly::constant(Complex64::new(1.0, 0.0)),
                |acc, f| Some(acc.mul(&Poly::from_expr(f)?)),
            ),
            Node::Quotient(a, b) => {
                let num = Poly::from_expr(a)?;
                let den = Poly::from_expr(b)?;
                if num.is_zero() {
                    return Some(Poly::zero());
                }
                num.div_exact(&den)
            }
            Node::Pow(b, n) => {
                let base = Poly::from_expr(b)?;
                if *n >= 0 {
                    Some(base.powu(*n as u32))
                } else {
                    // only constant bases survive a negative power
                    match (base.terms.len(), base.terms.get(&[0; 4])) {
                        (1, Some(c)) => Some(Poly::constant(c.powi(*n))),
                        _ => None,
                    }
                }
            }
            Node::Func(..) => None,
        }
    }

    pub fn differentiate(&self, v: Coord) -> Poly {
        let k = v.index();
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            if m[k] > 0 {
                let mut m2 = *m;
                m2[k] -= 1;
                r.add_term(m2, c * m[k] as f64);
            }
        }
        r
    }

    pub fn evaluate(&self, pt: &Point) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = *c;
                for (x, e) in pt.0.iter().zip(m.iter()) {
                    v *= x.powi(*e as i32);
                }
                v
            })
            .sum()
    }

    pub fn to_expr(&self) -> ScalarExpr {
        ScalarExpr::sum(self.terms.iter().map(|(m, c)| {
            let factors = Coord::ALL
                .into_iter()
                .filter(|v| m[v.index()] > 0)
                .map(|v| ScalarExpr::var(v).powi(m[v.index()] as i32));
            ScalarExpr::product(std::iter::once(ScalarExpr::constant(*c)).chain(factors))
        }))
    }
}

/// Radial homotopy potential of the 1-form `Σ a_k dx_k`:
/// `h(x) = ∫₀¹ Σ x_k a_k(t x) dt`, so `h(0) = 0` and `dh = a` whenever the
/// form is closed. For non-closed input the result is still defined; callers
/// certify `dh = a` separately.
pub fn radial_potential(a: &[Poly; 4]) -> Poly {
    let mut h = Poly::zero();
    for (k, ak) in a.iter().enumerate() {
        for (m, c) in &ak.terms {
            let deg: u32 = m.iter().sum();
            let mut m2 = *m;
            m2[k] += 1;
            h.add_term(m2, c / (deg as f64 + 1.0));
        }
    }
    h
}
