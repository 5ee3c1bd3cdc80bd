//! Text notation for forms: terms such as `p1*dq2^dp1` joined by `+` or
//! `-`, where `^` between basis differentials is the wedge product.
//! Coefficients use the expression grammar; a term without differentials is
//! a degree-0 component.

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Coord, ScalarExpr};

use super::{mask_of, Form, MixedForm};

/// Splits at top-level `+`/`-` that act as binary operators.
fn split_terms(src: &str) -> Result<Vec<(f64, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut sign = 1.0;
    let bytes = src.as_bytes();
    for (k, ch) in src.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::FormSyntax(format!("unbalanced `)` at byte {k}")));
                }
            }
            '+' | '-' if depth == 0 && is_binary(bytes, k) => {
                out.push((sign, src[start..k].trim().to_string()));
                sign = if ch == '-' { -1.0 } else { 1.0 };
                start = k + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::FormSyntax("unbalanced `(`".into()));
    }
    out.push((sign, src[start..].trim().to_string()));
    // a leading sign leaves an empty first piece
    if out.len() > 1 && out[0].1.is_empty() && out[0].0 == 1.0 {
        out.remove(0);
    }
    for (_, t) in &out {
        if t.is_empty() {
            return Err(Error::FormSyntax(format!("empty term in `{src}`")));
        }
    }
    Ok(out)
}

fn is_binary(bytes: &[u8], k: usize) -> bool {
    let mut j = k;
    while j > 0 && bytes[j - 1].is_ascii_whitespace() {
        j -= 1;
    }
    if j == 0 {
        return false;
    }
    let prev = bytes[j - 1];
    if b"*/^(+-".contains(&prev) {
        return false;
    }
    if prev == b'e' || prev == b'E' {
        // exponent of a numeric literal such as 1e-3
        let mut s = j - 1;
        while s > 0 && (bytes[s - 1].is_ascii_alphanumeric() || bytes[s - 1] == b'_' || bytes[s - 1] == b'.') {
            s -= 1;
        }
        let first = bytes[s];
        if first.is_ascii_digit() || first == b'.' {
            return false;
        }
    }
    true
}

/// Splits at top-level `*`.
fn split_factors(term: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (k, ch) in term.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(term[start..k].trim());
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(term[start..].trim());
    out
}

/// Recognizes `dq1^dp2`-style factors.
fn basis_factor(f: &str) -> Option<Vec<Coord>> {
    f.split('^')
        .map(|p| p.trim().strip_prefix('d').and_then(Coord::from_name))
        .collect()
}

fn parse_terms(src: &str) -> Result<Vec<(u8, ScalarExpr)>> {
    let mut out = Vec::new();
    for (sign, term) in split_terms(src)? {
        let mut sign = sign;
        let mut coeff = Vec::new();
        let mut mask = None;
        for f in split_factors(&term) {
            let mut stripped = f;
            let mut local = 1.0;
            while let Some(rest) = stripped.strip_prefix('-') {
                stripped = rest.trim_start();
                local = -local;
            }
            match basis_factor(stripped) {
                Some(coords) => {
                    if mask.is_some() {
                        return Err(Error::FormSyntax(format!("more than one wedge factor in `{term}`")));
                    }
                    let (m, s) = mask_of(&coords)
                        .ok_or_else(|| Error::FormSyntax(format!("repeated differential in `{f}`")))?;
                    mask = Some(m);
                    sign *= s * local;
                }
                None => coeff.push(f),
            }
        }
        let c = if coeff.is_empty() {
            ScalarExpr::one()
        } else {
            parse_expr(&coeff.join("*"))?
        };
        out.push((mask.unwrap_or(0), c.scale(sign)));
    }
    Ok(out)
}

/// Parses a homogeneous form; all terms must share one degree.
pub fn parse_form(src: &str) -> Result<Form> {
    let terms = parse_terms(src)?;
    let degree = terms[0].0.count_ones() as usize;
    if let Some((m, _)) = terms.iter().find(|(m, _)| m.count_ones() as usize != degree) {
        return Err(Error::FormSyntax(format!(
            "mixed degrees {} and {} in `{src}`",
            degree,
            m.count_ones()
        )));
    }
    Ok(Form::from_terms(degree, terms))
}

pub fn parse_mixed_form(src: &str) -> Result<MixedForm> {
    Ok(MixedForm::from_terms(parse_terms(src)?))
}
