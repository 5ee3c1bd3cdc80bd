//! Monge-Ampère equations in two variables and their effective forms.
//!
//! An equation `A f11 + 2B f12 + C f22 + D (f11 f22 - f12²) + E = 0` with
//! coefficients depending on `(q, p = ∂f)` corresponds to the primitive
//! 2-form
//!
//! ```text
//! ω = E dq1∧dq2 + A dp1∧dq2 + B (dq1∧dp1 - dq2∧dp2) + C dq1∧dp2 + D dp1∧dp2
//! ```
//!
//! whose pullback along the graph of `df` is the left-hand side.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::poly::{radial_potential, Poly};
use crate::expr::{is_zero, parse_expr, Coord, Point, ScalarExpr, Verdict, ZeroTestConfig};
use crate::exterior::{
    canonical_symplectic, endo_of_form, graph_pullback, hodge_lepage, pfaffian, Endo4, Form,
};

const CLASSIFY_SALT: u64 = 0xc1a5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MAEquation {
    pub a: ScalarExpr,
    pub b: ScalarExpr,
    pub c: ScalarExpr,
    pub d: ScalarExpr,
    pub e: ScalarExpr,
}

impl MAEquation {
    pub fn new(a: ScalarExpr, b: ScalarExpr, c: ScalarExpr, d: ScalarExpr, e: ScalarExpr) -> Self {
        MAEquation { a, b, c, d, e }
    }

    /// Parses the five coefficients `A, B, C, D, E`.
    pub fn parse(a: &str, b: &str, c: &str, d: &str, e: &str) -> Result<Self> {
        Ok(MAEquation::new(
            parse_expr(a)?,
            parse_expr(b)?,
            parse_expr(c)?,
            parse_expr(d)?,
            parse_expr(e)?,
        ))
    }

    pub fn zero() -> Self {
        MAEquation::from_reals(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    fn from_reals(a: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        MAEquation::new(
            ScalarExpr::real(a),
            ScalarExpr::real(b),
            ScalarExpr::real(c),
            ScalarExpr::real(d),
            ScalarExpr::real(e),
        )
    }

    /// `f11 + f22 = 0`.
    pub fn laplace() -> Self {
        MAEquation::from_reals(1.0, 0.0, 1.0, 0.0, 0.0)
    }

    /// `f11 - f22 = 0`.
    pub fn wave() -> Self {
        MAEquation::from_reals(1.0, 0.0, -1.0, 0.0, 0.0)
    }

    /// `f1 f11 - f22 = 0`.
    pub fn von_karman() -> Self {
        let mut eq = MAEquation::from_reals(0.0, 0.0, -1.0, 0.0, 0.0);
        eq.a = ScalarExpr::p1();
        eq
    }

    /// The negated Von Karman equation, whose form is exactly
    /// `p1 dq2∧dp1 + dq1∧dp2`.
    pub fn von_karman_closed() -> Self {
        let mut eq = MAEquation::from_reals(0.0, 0.0, 1.0, 0.0, 0.0);
        eq.a = -ScalarExpr::p1();
        eq
    }

    /// Born-Infeld with `q1 = t`, `q2 = x`:
    /// `(1 - f_t²) f_xx + 2 f_t f_x f_tx - (1 + f_x²) f_tt = 0`.
    pub fn born_infeld() -> Self {
        MAEquation::new(
            -(ScalarExpr::one() + ScalarExpr::p2().powi(2)),
            ScalarExpr::p1() * ScalarExpr::p2(),
            ScalarExpr::one() - ScalarExpr::p1().powi(2),
            ScalarExpr::zero(),
            ScalarExpr::zero(),
        )
    }

    /// The Tricomi-type example with form
    /// `(α p1 + β p2 + γ) dq1∧dq2 + dq1∧dp2 - q2 dq2∧dp1`.
    pub fn tricomi(alpha: f64, beta: f64, gamma: ScalarExpr) -> Self {
        MAEquation::new(
            ScalarExpr::q2(),
            ScalarExpr::zero(),
            ScalarExpr::one(),
            ScalarExpr::zero(),
            ScalarExpr::sum([
                ScalarExpr::p1().scale(alpha),
                ScalarExpr::p2().scale(beta),
                gamma,
            ]),
        )
    }

    /// Reads the coefficients back from a primitive 2-form.
    pub fn from_primitive_form(w: &Form, cfg: &ZeroTestConfig) -> Result<Self> {
        if w.degree() != 2 {
            return Err(Error::precondition("expected a 2-form", None));
        }
        let trace = w.perp().coeff(0);
        if let Verdict::NonZero { witness, .. } = is_zero(&trace, cfg) {
            return Err(Error::precondition("form is not primitive", Some(witness)));
        }
        Ok(MAEquation::new(
            -w.coeff(0b0110),
            w.coeff(0b0101),
            w.coeff(0b1001),
            w.coeff(0b1100),
            w.coeff(0b0011),
        ))
    }

    pub fn negate(&self) -> Self {
        MAEquation::new(-&self.a, -&self.b, -&self.c, -&self.d, -&self.e)
    }
}

/// The effective 2-form of an equation (always primitive).
pub fn equation_to_form(eq: &MAEquation) -> Form {
    use Coord::*;
    let parts = [
        (Form::basis(&[Q1, Q2]), &eq.e),
        (Form::basis(&[P1, Q2]), &eq.a),
        (&Form::basis(&[Q1, P1]) - &Form::basis(&[Q2, P2]), &eq.b),
        (Form::basis(&[Q1, P2]), &eq.c),
        (Form::basis(&[P1, P2]), &eq.d),
    ];
    parts
        .iter()
        .fold(Form::zero(2), |acc, (f, c)| &acc + &f.scale(c))
}

/// Left-hand side of the equation evaluated on `f(q1, q2)`.
pub fn ma_residual(eq: &MAEquation, f: &ScalarExpr) -> Result<ScalarExpr> {
    graph_pullback(&equation_to_form(eq), f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalClass {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Mixed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub pfaffian: ScalarExpr,
    pub points: Vec<(Point, PointClass)>,
    pub verdict: GlobalClass,
    pub singular_samples: usize,
}

impl ClassificationReport {
    pub fn count(&self, c: PointClass) -> usize {
        self.points.iter().filter(|(_, k)| *k == c).count()
    }
}

/// Pfaffian of the primitive part of the equation's form.
pub fn equation_pfaffian(eq: &MAEquation) -> ScalarExpr {
    let (w0, _) = hodge_lepage(&equation_to_form(eq));
    pfaffian(&w0)
}

/// Sign of the pfaffian at sample points. Parabolic requires the pfaffian
/// to vanish identically.
pub fn classify(eq: &MAEquation, cfg: &ZeroTestConfig) -> ClassificationReport {
    let pf = equation_pfaffian(eq);
    let mut report = ClassificationReport {
        pfaffian: pf.clone(),
        points: Vec::new(),
        verdict: GlobalClass::Inconclusive,
        singular_samples: 0,
    };
    match is_zero(&pf, cfg) {
        Verdict::Zero => {
            report.points = cfg
                .points(cfg.samples, CLASSIFY_SALT)
                .into_iter()
                .map(|p| (p, PointClass::Parabolic))
                .collect();
            report.verdict = GlobalClass::Parabolic;
            return report;
        }
        Verdict::Inconclusive { singular, .. } => {
            report.singular_samples = singular;
            return report;
        }
        Verdict::NonZero { .. } => {}
    }
    for pt in cfg.points(cfg.samples, CLASSIFY_SALT) {
        match pf.evaluate_with_scale(&pt) {
            Ok((v, scale)) => {
                let class = if v.re.abs() <= cfg.atol + cfg.rtol * scale {
                    PointClass::Parabolic
                } else if v.re > 0.0 {
                    PointClass::Elliptic
                } else {
                    PointClass::Hyperbolic
                };
                report.points.push((pt, class));
            }
            Err(_) => report.singular_samples += 1,
        }
    }
    if 2 * report.singular_samples > cfg.samples {
        return report;
    }
    let e = report.count(PointClass::Elliptic);
    let h = report.count(PointClass::Hyperbolic);
    let n = report.points.len();
    report.verdict = if e == n {
        GlobalClass::Elliptic
    } else if h == n {
        GlobalClass::Hyperbolic
    } else {
        GlobalClass::Mixed
    };
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrReport {
    pub class: GlobalClass,
    #[serde(skip)]
    pub j0: Endo4,
    pub lr_integrable: bool,
    /// Point where `d(ω0/√|pf|)` fails to vanish.
    pub witness: Option<Point>,
}

/// Lychagin-Roubtsov test: builds `J0 = A0/√|pf|` and checks closedness of
/// `ω0/√|pf|`.
pub fn lr_test(eq: &MAEquation, cfg: &ZeroTestConfig) -> Result<LrReport> {
    let report = classify(eq, cfg);
    let sign = match report.verdict {
        GlobalClass::Elliptic => 1.0,
        GlobalClass::Hyperbolic => -1.0,
        GlobalClass::Inconclusive => {
            return Err(Error::Inconclusive("classification of the pfaffian".into()))
        }
        other => {
            return Err(Error::degenerate(
                format!("pfaffian: equation is {other:?} on the sample box"),
                report.points.first().map(|p| p.0),
            ))
        }
    };
    let (w0, _) = hodge_lepage(&equation_to_form(eq));
    let root = report.pfaffian.scale(sign).sqrt();
    let j0 = endo_of_form(&w0).map(|c| c / &root);
    let normalized = w0.map_coeffs(|c| c / &root);
    let verdict = normalized.d().is_zero(cfg);
    if let Verdict::Inconclusive { .. } = verdict {
        return Err(Error::Inconclusive("closedness of the normalized form".into()));
    }
    Ok(LrReport {
        class: report.verdict,
        j0,
        lr_integrable: verdict.is_zero(),
        witness: verdict.witness(),
    })
}

/// `E(ω) = d ⊥ dω`.
pub fn euler(w: &Form) -> Form {
    w.d().perp().d()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    pub is_divergent: bool,
    /// The 1-form with `dω = α∧Ω`.
    pub alpha: Form,
    /// Potential with `dμ = -α`, when one was found.
    pub mu: Option<ScalarExpr>,
    /// `ω + μΩ`, closed by construction and certified.
    pub closed: Option<Form>,
    /// Witness of `dα ≠ 0` for non-divergent forms.
    pub witness: Option<Point>,
}

/// Polynomial potential `h` with `dh = a` and `h(0) = 0`, certified.
pub fn polynomial_potential(a: &Form, cfg: &ZeroTestConfig) -> Result<ScalarExpr> {
    let comps = a.components();
    let polys: Option<Vec<Poly>> = comps.iter().map(Poly::from_expr).collect();
    let polys = polys.ok_or_else(|| Error::NonPolynomial(a.to_string()))?;
    let arr: [Poly; 4] = std::array::from_fn(|k| polys[k].clone());
    let h = radial_potential(&arr).to_expr();
    match (&Form::scalar(h.clone()).d() - a).is_zero(cfg) {
        Verdict::Zero => Ok(h),
        Verdict::NonZero { witness, .. } => {
            Err(Error::precondition("1-form is not closed", Some(witness)))
        }
        Verdict::Inconclusive { .. } => Err(Error::Inconclusive("potential check".into())),
    }
}

pub fn divergence_certificate(w: &Form, cfg: &ZeroTestConfig) -> Result<DivergenceCertificate> {
    let om = canonical_symplectic();
    let dw = w.d();
    let alpha = dw.perp();
    if let Verdict::NonZero { witness, .. } = (&dw - &alpha.wedge(&om)).is_zero(cfg) {
        return Err(Error::Calibration(format!("dω ≠ ⊥(dω)∧Ω at {witness}")));
    }
    let mut cert = DivergenceCertificate {
        is_divergent: false,
        alpha: alpha.clone(),
        mu: None,
        closed: None,
        witness: None,
    };
    match alpha.d().is_zero(cfg) {
        Verdict::Zero => cert.is_divergent = true,
        Verdict::NonZero { witness, .. } => {
            cert.witness = Some(witness);
            return Ok(cert);
        }
        Verdict::Inconclusive { .. } => return Err(Error::Inconclusive("closedness of α_ω".into())),
    }
    match polynomial_potential(&-&alpha, cfg) {
        Ok(mu) => {
            let closed = w + &om.scale(&mu);
            match closed.d().is_zero(cfg) {
                Verdict::Zero => {}
                v => {
                    return Err(Error::Calibration(format!(
                        "ω + μΩ not closed: {v:?}"
                    )))
                }
            }
            cert.mu = Some(mu);
            cert.closed = Some(closed);
        }
        Err(Error::NonPolynomial(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(cert)
}

/// Closed representative `ω + μΩ` of a divergent equation together with `μ`.
pub fn closed_representative(eq: &MAEquation, cfg: &ZeroTestConfig) -> Result<(Form, ScalarExpr)> {
    let w = equation_to_form(eq);
    let cert = divergence_certificate(&w, cfg)?;
    if !cert.is_divergent {
        return Err(Error::precondition("equation is not of divergent type", cert.witness));
    }
    match (cert.closed, cert.mu) {
        (Some(c), Some(mu)) => Ok((c, mu)),
        _ => Err(Error::NonPolynomial(cert.alpha.to_string())),
    }
}

/// Rectangle of surface parameters sampled on an `n × n` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGrid {
    pub s: (f64, f64),
    pub t: (f64, f64),
    pub n: usize,
}

impl ParamGrid {
    pub fn params(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let lerp = |(lo, hi): (f64, f64), k: usize, n: usize| {
            if n <= 1 {
                (lo + hi) / 2.0
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        (0..self.n).flat_map(move |i| (0..self.n).map(move |j| (lerp(self.s, i, self.n), lerp(self.t, j, self.n))))
    }
}

const FD_STEP: f64 = 1e-5;

fn form_matrix_at(w: &Form, pt: &Point) -> Result<Matrix4<Complex64>> {
    crate::exterior::form_matrix(w)
        .evaluate(pt)
        .map_err(|source| Error::Singular { point: *pt, source })
}

/// Largest `|w(∂s, ∂t)|` over the grid for each form, with central
/// difference tangents.
pub fn bilagrangian_residual(
    surface: impl Fn(f64, f64) -> Point,
    forms: &[Form],
    grid: &ParamGrid,
) -> Result<Vec<f64>> {
    let mut worst = vec![0.0f64; forms.len()];
    let h = FD_STEP;
    for (s, t) in grid.params() {
        let pt = surface(s, t);
        let diff = |a: Point, b: Point| {
            nalgebra::Vector4::from_fn(|k, _| Complex64::new((a.0[k] - b.0[k]) / (2.0 * h), 0.0))
        };
        let ts = diff(surface(s + h, t), surface(s - h, t));
        let tt = diff(surface(s, t + h), surface(s, t - h));
        for (k, w) in forms.iter().enumerate() {
            let m = form_matrix_at(w, &pt)?;
            let v = (ts.transpose() * m * tt)[(0, 0)].norm();
            worst[k] = worst[k].max(v);
        }
    }
    Ok(worst)
}
