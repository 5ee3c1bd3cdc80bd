//! Symbolic scalar expressions over the phase-space coordinates `(q1, q2, p1, p2)`.
//!
//! Expressions are immutable trees behind [`Arc`], so cloning is cheap and
//! subtrees are shared freely between forms, matrices and derivatives. The
//! constructors fold constants and flatten nested sums and products; no other
//! simplification is attempted. Identities are certified numerically by
//! [`is_zero`], never by rewriting.

mod display;
mod eval;
mod parse;
pub mod poly;
mod zero;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

pub use eval::{EvalError, Evaluator, Point};
pub use parse::{parse_expr, ParseError};
pub use zero::{is_zero, is_zero_all, SampleBox, Verdict, ZeroTestConfig};

/// One of the four fixed phase-space coordinates, in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coord {
    Q1,
    Q2,
    P1,
    P2,
}

impl Coord {
    pub const ALL: [Coord; 4] = [Coord::Q1, Coord::Q2, Coord::P1, Coord::P2];

    /// Position in the global basis `(q1, q2, p1, p2)`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Coord {
        Coord::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Coord::Q1 => "q1",
            Coord::Q2 => "q2",
            Coord::P1 => "p1",
            Coord::P2 => "p2",
        }
    }

    pub fn from_name(s: &str) -> Option<Coord> {
        Coord::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        [Func::Sqrt, Func::Exp, Func::Ln, Func::Sin, Func::Cos]
            .into_iter()
            .find(|f| f.name() == s)
    }

    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Sqrt => normalize_zero_imag(z).sqrt(),
            Func::Exp => z.exp(),
            Func::Ln => normalize_zero_imag(z).ln(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
        }
    }
}

/// Maps a `-0.0` imaginary part to `+0.0` so that negative reals land on the
/// upper side of the principal branch cut: `sqrt(-4) = 2i`, never `-2i`.
fn normalize_zero_imag(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Results of a rewrite keyed by shared node, holding the source alive.
type Memo = HashMap<*const Node, (ScalarExpr, ScalarExpr)>;

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Complex64),
    Var(Coord),
    Sum(Vec<ScalarExpr>),
    Product(Vec<ScalarExpr>),
    Quotient(ScalarExpr, ScalarExpr),
    /// Integer power with a nonzero exponent other than 1.
    Pow(ScalarExpr, i32),
    Func(Func, ScalarExpr),
}

/// Symbolic function of `(q1, q2, p1, p2)` with complex constants.
#[derive(Clone, PartialEq)]
pub struct ScalarExpr(Arc<Node>);

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

impl Default for ScalarExpr {
    fn default() -> Self {
        ScalarExpr::zero()
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl ScalarExpr {
    fn from_node(node: Node) -> Self {
        ScalarExpr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        ScalarExpr::from_node(Node::Const(c.into()))
    }

    pub fn real(x: f64) -> Self {
        ScalarExpr::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        ScalarExpr::real(0.0)
    }

    pub fn one() -> Self {
        ScalarExpr::real(1.0)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        ScalarExpr::constant(Complex64::new(0.0, 1.0))
    }

    pub fn var(c: Coord) -> Self {
        ScalarExpr::from_node(Node::Var(c))
    }

    pub fn q1() -> Self {
        ScalarExpr::var(Coord::Q1)
    }
    pub fn q2() -> Self {
        ScalarExpr::var(Coord::Q2)
    }
    pub fn p1() -> Self {
        ScalarExpr::var(Coord::P1)
    }
    pub fn p2() -> Self {
        ScalarExpr::var(Coord::P2)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// True only for the literal constant zero (after folding).
    pub fn is_const_zero(&self) -> bool {
        self.as_const() == Some(Complex64::new(0.0, 0.0))
    }

    pub fn is_const_one(&self) -> bool {
        self.as_const() == Some(Complex64::new(1.0, 0.0))
    }

    /// Sum with flattening and constant folding.
    pub fn sum<I: IntoIterator<Item = ScalarExpr>>(terms: I) -> Self {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut out = Vec::new();
        let push = |t: ScalarExpr, out: &mut Vec<ScalarExpr>, acc: &mut Complex64| match t
            .node()
        {
            Node::Const(c) => *acc += c,
            _ => out.push(t),
        };
        for t in terms {
            match t.node() {
                Node::Sum(inner) => {
                    for s in inner {
                        push(s.clone(), &mut out, &mut acc);
                    }
                }
                _ => push(t, &mut out, &mut acc),
            }
        }
        if acc != Complex64::new(0.0, 0.0) || out.is_empty() {
            out.insert(0, ScalarExpr::constant(acc));
        }
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        ScalarExpr::from_node(Node::Sum(out))
    }

    /// Product with flattening and constant folding. A zero constant factor
    /// absorbs the whole product.
    pub fn product<I: IntoIterator<Item = ScalarExpr>>(factors: I) -> Self {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut out = Vec::new();
        for f in factors {
            let items: Vec<ScalarExpr> = match f.node() {
                Node::Product(inner) => inner.clone(),
                _ => vec![f],
            };
            for g in items {
                match g.node() {
                    Node::Const(c) => acc *= c,
                    _ => out.push(g),
                }
            }
        }
        if acc == Complex64::new(0.0, 0.0) {
            return ScalarExpr::zero();
        }
        if out.is_empty() {
            return ScalarExpr::constant(acc);
        }
        if acc != Complex64::new(1.0, 0.0) {
            out.insert(0, ScalarExpr::constant(acc));
        }
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        ScalarExpr::from_node(Node::Product(out))
    }

    pub fn quotient(num: ScalarExpr, den: ScalarExpr) -> Self {
        if num.is_const_zero() {
            return ScalarExpr::zero();
        }
        if den.is_const_one() {
            return num;
        }
        if let Some(d) = den.as_const() {
            if d != Complex64::new(0.0, 0.0) {
                let inv = Complex64::new(1.0, 0.0) / d;
                if finite(inv) {
                    return ScalarExpr::product([ScalarExpr::constant(inv), num]);
                }
            }
        }
        ScalarExpr::from_node(Node::Quotient(num, den))
    }

    pub fn pow(base: ScalarExpr, n: i32) -> Self {
        if n == 0 {
            return ScalarExpr::one();
        }
        if n == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            let v = c.powi(n);
            if finite(v) {
                return ScalarExpr::constant(v);
            }
        }
        if let Node::Pow(inner, m) = base.node() {
            if let Some(k) = m.checked_mul(n) {
                return ScalarExpr::pow(inner.clone(), k);
            }
        }
        ScalarExpr::from_node(Node::Pow(base, n))
    }

    pub fn func(f: Func, arg: ScalarExpr) -> Self {
        if let Some(c) = arg.as_const() {
            let v = f.apply(c);
            if finite(v) {
                return ScalarExpr::constant(v);
            }
        }
        ScalarExpr::from_node(Node::Func(f, arg))
    }

    pub fn sqrt(&self) -> Self {
        ScalarExpr::func(Func::Sqrt, self.clone())
    }
    pub fn exp(&self) -> Self {
        ScalarExpr::func(Func::Exp, self.clone())
    }
    pub fn ln(&self) -> Self {
        ScalarExpr::func(Func::Ln, self.clone())
    }
    pub fn sin(&self) -> Self {
        ScalarExpr::func(Func::Sin, self.clone())
    }
    pub fn cos(&self) -> Self {
        ScalarExpr::func(Func::Cos, self.clone())
    }

    pub fn powi(&self, n: i32) -> Self {
        ScalarExpr::pow(self.clone(), n)
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        ScalarExpr::product([ScalarExpr::constant(c), self.clone()])
    }

    /// Exact partial derivative with respect to `v`. Shared subtrees are
    /// differentiated once, so the result keeps the sharing of the input.
    pub fn differentiate(&self, v: Coord) -> ScalarExpr {
        self.rebuild(&mut Memo::new(), &|e, memo| e.diff_node(v, memo))
    }

    fn diff_node(&self, v: Coord, memo: &mut Memo) -> ScalarExpr {
        let d = |e: &ScalarExpr, memo: &mut Memo| e.rebuild(memo, &|x, m| x.diff_node(v, m));
        match self.node() {
            Node::Const(_) => ScalarExpr::zero(),
            Node::Var(c) => {
                if *c == v {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            }
            Node::Sum(ts) => ScalarExpr::sum(ts.iter().map(|t| d(t, memo)).collect::<Vec<_>>()),
            Node::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (k, f) in fs.iter().enumerate() {
                    let df = d(f, memo);
                    if df.is_const_zero() {
                        continue;
                    }
                    let rest = fs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, g)| g.clone());
                    terms.push(ScalarExpr::product(std::iter::once(df).chain(rest)));
                }
                ScalarExpr::sum(terms)
            }
            Node::Quotient(a, b) => {
                let da = d(a, memo);
                let db = d(b, memo);
                if db.is_const_zero() {
                    return ScalarExpr::quotient(da, b.clone());
                }
                let num = &(&da * b) - &(a * &db);
                ScalarExpr::quotient(num, b.powi(2))
            }
            Node::Pow(b, n) => {
                let db = d(b, memo);
                ScalarExpr::product([ScalarExpr::real(*n as f64), b.powi(n - 1), db])
            }
            Node::Func(f, a) => {
                let da = d(a, memo);
                if da.is_const_zero() {
                    return ScalarExpr::zero();
                }
                let outer = match f {
                    Func::Sqrt => ScalarExpr::quotient(ScalarExpr::real(0.5), self.clone()),
                    Func::Exp => self.clone(),
                    Func::Ln => ScalarExpr::quotient(ScalarExpr::one(), a.clone()),
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                };
                &outer * &da
            }
        }
    }

    /// Applies `f` to this node, reusing the result for shared subtrees.
    fn rebuild(&self, memo: &mut Memo, f: &dyn Fn(&ScalarExpr, &mut Memo) -> ScalarExpr) -> ScalarExpr {
        let shared = Arc::strong_count(&self.0) > 1 && !matches!(self.node(), Node::Const(_) | Node::Var(_));
        let key = Arc::as_ptr(&self.0);
        if shared {
            if let Some((_, out)) = memo.get(&key) {
                return out.clone();
            }
        }
        let out = f(self, memo);
        if shared {
            memo.insert(key, (self.clone(), out.clone()));
        }
        out
    }

    /// Replace every occurrence of coordinate `v` by `by`.
    pub fn substitute(&self, v: Coord, by: &ScalarExpr) -> ScalarExpr {
        self.map_vars(&|c| if c == v { Some(by.clone()) } else { None })
    }

    /// Simultaneous substitution; `None` leaves the coordinate in place.
    pub fn map_vars(&self, f: &dyn Fn(Coord) -> Option<ScalarExpr>) -> ScalarExpr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(c) => f(*c).unwrap_or_else(|| self.clone()),
            Node::Sum(ts) => ScalarExpr::sum(ts.iter().map(|t| t.map_vars(f))),
            Node::Product(fs) => ScalarExpr::product(fs.iter().map(|t| t.map_vars(f))),
            Node::Quotient(a, b) => ScalarExpr::quotient(a.map_vars(f), b.map_vars(f)),
            Node::Pow(b, n) => ScalarExpr::pow(b.map_vars(f), *n),
            Node::Func(g, a) => ScalarExpr::func(*g, a.map_vars(f)),
        }
    }

    /// Complex conjugate, valid because every coordinate is real. `sqrt`
    /// and `ln` commute with conjugation away from their branch cut.
    pub fn conj(&self) -> ScalarExpr {
        self.rebuild(&mut Memo::new(), &ScalarExpr::conj_node)
    }

    fn conj_node(&self, memo: &mut Memo) -> ScalarExpr {
        let c = |e: &ScalarExpr, memo: &mut Memo| e.rebuild(memo, &ScalarExpr::conj_node);
        match self.node() {
            Node::Const(z) => ScalarExpr::constant(z.conj()),
            Node::Var(_) => self.clone(),
            Node::Sum(ts) => ScalarExpr::sum(ts.iter().map(|t| c(t, memo)).collect::<Vec<_>>()),
            Node::Product(fs) => ScalarExpr::product(fs.iter().map(|t| c(t, memo)).collect::<Vec<_>>()),
            Node::Quotient(a, b) => {
                let a = c(a, memo);
                ScalarExpr::quotient(a, c(b, memo))
            }
            Node::Pow(b, n) => ScalarExpr::pow(c(b, memo), *n),
            Node::Func(g, a) => ScalarExpr::func(*g, c(a, memo)),
        }
    }

    pub fn re(&self) -> ScalarExpr {
        (self + &self.conj()).scale(0.5)
    }

    pub fn im(&self) -> ScalarExpr {
        (self - &self.conj()).scale(Complex64::new(0.0, -0.5))
    }

    pub fn depends_on(&self, v: Coord) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(c) => *c == v,
            Node::Sum(ts) | Node::Product(ts) => ts.iter().any(|t| t.depends_on(v)),
            Node::Quotient(a, b) => a.depends_on(v) || b.depends_on(v),
            Node::Pow(b, _) => b.depends_on(v),
            Node::Func(_, a) => a.depends_on(v),
        }
    }

    /// Number of tree nodes, counting shared subtrees once per use.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Sum(ts) | Node::Product(ts) => ts.iter().map(|t| t.size()).sum(),
            Node::Quotient(a, b) => a.size() + b.size(),
            Node::Pow(b, _) => b.size(),
            Node::Func(_, a) => a.size(),
        }
    }
}

/// Serializes as the printed expression.
impl Serialize for ScalarExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl From<f64> for ScalarExpr {
    fn from(x: f64) -> Self {
        ScalarExpr::real(x)
    }
}

impl From<Complex64> for ScalarExpr {
    fn from(z: Complex64) -> Self {
        ScalarExpr::constant(z)
    }
}

impl From<Coord> for ScalarExpr {
    fn from(c: Coord) -> Self {
        ScalarExpr::var(c)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                let f: fn(&ScalarExpr, &ScalarExpr) -> ScalarExpr = $body;
                f(self, rhs)
            }
        }
        impl $tr<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                (&self).$m(rhs)
            }
        }
        impl $tr<ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| ScalarExpr::sum([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| ScalarExpr::sum([a.clone(), -b]));
binop!(Mul, mul, |a, b| ScalarExpr::product([a.clone(), b.clone()]));
binop!(Div, div, |a, b| ScalarExpr::quotient(a.clone(), b.clone()));

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        self.scale(-1.0)
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        (&self).neg()
    }
}
