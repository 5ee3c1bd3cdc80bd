use std::fmt;

use num_complex::Complex64;

use super::{Node, ScalarExpr};

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        write!(f, "(-{:?})", -x)
    } else {
        write!(f, "{x:?}")
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        return write_real(f, c.re);
    }
    f.write_str("(")?;
    if c.re != 0.0 {
        write_real(f, c.re)?;
        f.write_str(" + ")?;
    }
    write_real(f, c.im)?;
    f.write_str("*i)")
}

impl ScalarExpr {
    /// Atomic nodes print without surrounding parentheses.
    fn is_atomic(&self) -> bool {
        match self.node() {
            Node::Var(_) | Node::Func(..) => true,
            Node::Const(c) => c.im == 0.0 && c.re >= 0.0 && !c.re.is_sign_negative(),
            _ => false,
        }
    }

    fn write_wrapped(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_atomic() {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

/// Prints in the input grammar, so `parse_expr(&e.to_string())` rebuilds an
/// equivalent expression.
impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_const(f, *c),
            Node::Var(v) => write!(f, "{v}"),
            Node::Sum(ts) => {
                for (k, t) in ts.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    match t.node() {
                        Node::Sum(_) => write!(f, "({t})")?,
                        _ => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
            Node::Product(fs) => {
                for (k, t) in fs.iter().enumerate() {
                    if k > 0 {
                        f.write_str("*")?;
                    }
                    match t.node() {
                        Node::Sum(_) | Node::Quotient(..) => write!(f, "({t})")?,
                        _ => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
            Node::Quotient(a, b) => {
                a.write_wrapped(f)?;
                f.write_str("/")?;
                b.write_wrapped(f)
            }
            Node::Pow(b, n) => {
                b.write_wrapped(f)?;
                write!(f, "^{n}")
            }
            Node::Func(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse_expr;

    #[test]
    fn prints_in_input_grammar() {
        let e = parse_expr("1 - p1^2").unwrap();
        assert_eq!(e.to_string(), "1.0 + (-1.0)*p1^2");
        let e = parse_expr("(q1 + 2*i)/(p2^-3)").unwrap();
        let back = parse_expr(&e.to_string()).unwrap();
        assert_eq!(back.to_string(), e.to_string());
    }
}
