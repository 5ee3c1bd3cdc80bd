//! Generating functions, conservation laws and level-set solutions.
//!
//! Every operation works with the closed representative `ω + μΩ` of a
//! divergent equation; for other equations the primitive form of the
//! equation is used as is.

use nalgebra::{Matrix4x2, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{is_zero, Point, ScalarExpr, Verdict, ZeroTestConfig};
use crate::exterior::{
    canonical_symplectic, dual_transpose, endo_of_form, form_matrix, hodge_lepage, Endo4, Form,
    MixedForm, VectorFieldSym,
};
use crate::gcs::{build_gcs, dbar_at, dj_on_function, u0_real_check, GCStructure, EIGEN_TOL};
use crate::ma::{divergence_certificate, equation_to_form, polynomial_potential, MAEquation};

const SALT_LEVEL: u64 = 0x1e7e1;
const SALT_INDEX: u64 = 0x1d3;
const SALT_UV: u64 = 0x0f0f;

/// The closed representative when one exists, else the equation's form.
pub fn structure_form(eq: &MAEquation, cfg: &ZeroTestConfig) -> Result<Form> {
    let w = equation_to_form(eq);
    let cert = divergence_certificate(&w, cfg)?;
    Ok(cert.closed.unwrap_or(w))
}

fn closed_form(eq: &MAEquation, cfg: &ZeroTestConfig) -> Result<Form> {
    let w = equation_to_form(eq);
    let cert = divergence_certificate(&w, cfg)?;
    if !cert.is_divergent {
        return Err(Error::precondition("equation is not of divergent type", cert.witness));
    }
    cert.closed.ok_or_else(|| Error::NonPolynomial(cert.alpha.to_string()))
}

/// `B = λ - A0` from the decomposition `w = w0 + λΩ`.
pub fn b_tensor_of_form(w: &Form) -> Endo4 {
    let (w0, lambda) = hodge_lepage(w);
    &Endo4::scalar(lambda) - &endo_of_form(&w0)
}

pub fn b_tensor(eq: &MAEquation, cfg: &ZeroTestConfig) -> Result<Endo4> {
    Ok(b_tensor_of_form(&structure_form(eq, cfg)?))
}

/// `α∧w - B*α∧Ω = 0` for the four coordinate 1-forms.
pub fn lemma_b_check(w: &Form, cfg: &ZeroTestConfig) -> Verdict {
    let b = b_tensor_of_form(w);
    let om = canonical_symplectic();
    let mut v = Verdict::Zero;
    for c in crate::expr::Coord::ALL {
        let a = Form::dx(c);
        v = v.and((&a.wedge(w) - &dual_transpose(&b, &a).wedge(&om)).is_zero(cfg));
    }
    v
}

fn df(f: &ScalarExpr) -> Form {
    Form::scalar(f.clone()).d()
}

/// `f` with its conjugate `g` (`dg = -B*df`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratingPair {
    pub f: ScalarExpr,
    pub g: Option<ScalarExpr>,
    /// `B*df`.
    pub bdf: Form,
    /// `d(B*df) = 0`.
    pub generating: Verdict,
}

/// `d(B*df) = 0`.
pub fn is_generating(eq: &MAEquation, f: &ScalarExpr, cfg: &ZeroTestConfig) -> Result<Verdict> {
    let b = b_tensor(eq, cfg)?;
    Ok(dual_transpose(&b, &df(f)).d().is_zero(cfg))
}

/// The conjugate `g` with `dg = -B*df` and `g(0) = 0`.
pub fn conjugate(eq: &MAEquation, f: &ScalarExpr, cfg: &ZeroTestConfig) -> Result<ScalarExpr> {
    Ok(generating_pair(eq, f, cfg)?.g.expect("conjugate computed"))
}

pub fn generating_pair(eq: &MAEquation, f: &ScalarExpr, cfg: &ZeroTestConfig) -> Result<GeneratingPair> {
    let b = b_tensor(eq, cfg)?;
    let bdf = dual_transpose(&b, &df(f));
    let generating = bdf.d().is_zero(cfg);
    match &generating {
        Verdict::Zero => {}
        Verdict::NonZero { witness, .. } => {
            return Err(Error::precondition("f is not a generating function", Some(*witness)))
        }
        Verdict::Inconclusive { .. } => return Err(Error::Inconclusive("d(B*df)".into())),
    }
    let g = polynomial_potential(&-&bdf, cfg)?;
    Ok(GeneratingPair {
        f: f.clone(),
        g: Some(g),
        bdf,
        generating,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetReport {
    /// Largest `|ω(X_f, X_g)|` and `|Ω(X_f, X_g)|`, relative to `|X_f||X_g|`.
    pub residual: f64,
    /// Points where `X_f, X_g` are dependent.
    pub rank_deficient: Vec<Point>,
    /// `s` with `X_g = s·BX_f` at every sampled point, if any.
    pub sign: Option<f64>,
    pub samples: usize,
}

impl LevelSetReport {
    pub fn passes(&self) -> bool {
        self.residual <= EIGEN_TOL && self.rank_deficient.len() < self.samples
    }
}

fn eval_vec(x: &VectorFieldSym, pt: &Point) -> Result<Vector4<Complex64>> {
    x.evaluate(pt).map_err(|source| Error::Singular { point: *pt, source })
}

/// Checks that `ω` and `Ω` vanish on `span{X_f, X_g}`.
pub fn level_set_check(
    eq: &MAEquation,
    f: &ScalarExpr,
    g: &ScalarExpr,
    cfg: &ZeroTestConfig,
) -> Result<LevelSetReport> {
    let w = structure_form(eq, cfg)?;
    let b = b_tensor_of_form(&w);
    let xf = VectorFieldSym::hamiltonian(f);
    let xg = VectorFieldSym::hamiltonian(g);
    let bxf = b.apply(&xf);
    let wm = form_matrix(&w);
    let om = form_matrix(&canonical_symplectic());
    let mut report = LevelSetReport {
        residual: 0.0,
        rank_deficient: Vec::new(),
        sign: None,
        samples: cfg.samples,
    };
    let mut signs = [true, true];
    for pt in cfg.points(cfg.samples, SALT_LEVEL) {
        let (vf, vg, vb) = (eval_vec(&xf, &pt)?, eval_vec(&xg, &pt)?, eval_vec(&bxf, &pt)?);
        let m = Matrix4x2::from_columns(&[vf, vg]);
        let sv = m.singular_values();
        if sv[1] <= 1e-8 * sv[0].max(1.0) || sv[0] == 0.0 {
            report.rank_deficient.push(pt);
            continue;
        }
        let sing = |source| Error::Singular { point: pt, source };
        let (wn, on) = (wm.evaluate(&pt).map_err(sing)?, om.evaluate(&pt).map_err(sing)?);
        let scale = (vf.norm() * vg.norm()).max(1.0);
        let rw = (vf.transpose() * wn * vg)[(0, 0)].norm() / scale;
        let ro = (vf.transpose() * on * vg)[(0, 0)].norm() / scale;
        report.residual = report.residual.max(rw).max(ro);
        let tol = EIGEN_TOL * vg.norm().max(1.0);
        signs[0] &= (vg - vb).norm() <= tol;
        signs[1] &= (vg + vb).norm() <= tol;
    }
    if report.rank_deficient.len() < report.samples {
        report.sign = match signs {
            [true, false] => Some(1.0),
            [false, true] => Some(-1.0),
            [true, true] => Some(0.0),
            _ => None,
        };
    }
    Ok(report)
}

/// `dα = fω + gΩ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationLaw {
    pub alpha: Form,
    pub f: ScalarExpr,
    pub g: ScalarExpr,
    /// `dα - fω - gΩ`.
    pub residual: Verdict,
}

pub fn conservation_decompose(eq: &MAEquation, alpha: &Form, cfg: &ZeroTestConfig) -> Result<ConservationLaw> {
    if alpha.degree() != 1 {
        return Err(Error::precondition("α must be a 1-form", None));
    }
    let w = structure_form(eq, cfg)?;
    let om = canonical_symplectic();
    let (w0, lambda) = hodge_lepage(&w);
    let (t0, lambda_a) = hodge_lepage(&alpha.d());
    let f = match t0.is_zero(cfg) {
        Verdict::Zero => ScalarExpr::zero(),
        _ => {
            let pt = cfg.points(1, SALT_INDEX)[0];
            let mut best = (0u8, 0.0);
            for (m, c) in w0.terms() {
                let v = c.evaluate(&pt).map(|z| z.norm()).unwrap_or(0.0);
                if v > best.1 {
                    best = (m, v);
                }
            }
            if best.1 == 0.0 {
                return Err(Error::degenerate("primitive part of ω vanishes", Some(pt)));
            }
            let f = ScalarExpr::quotient(t0.coeff(best.0), w0.coeff(best.0));
            match (&t0 - &w0.scale(&f)).is_zero(cfg) {
                Verdict::Zero => f,
                Verdict::NonZero { witness, .. } => {
                    return Err(Error::precondition(
                        "dα is not proportional to ω modulo Ω (not a conservation law)",
                        Some(witness),
                    ))
                }
                Verdict::Inconclusive { .. } => return Err(Error::Inconclusive("proportionality".into())),
            }
        }
    };
    let g = &lambda_a - &(&f * &lambda);
    let residual = (&(&alpha.d() - &w.scale(&f)) - &om.scale(&g)).is_zero(cfg);
    Ok(ConservationLaw {
        alpha: alpha.clone(),
        f,
        g,
        residual,
    })
}

/// The structure of the closed pair `(ω + μΩ, Ω)`.
pub fn equation_gcs(eq: &MAEquation, cfg: &ZeroTestConfig) -> Result<GCStructure> {
    build_gcs(&closed_form(eq, cfg)?, &canonical_symplectic(), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PluriharmonicReport {
    /// `d𝕁df = 0`.
    pub pluriharmonic: Verdict,
    /// `d(B*df) = 0`.
    pub generating: Verdict,
}

/// `d𝕁df = 0`, checked against `d(B*df) = 0`; disagreement is an error.
pub fn pluriharmonic_check(eq: &MAEquation, f: &ScalarExpr, cfg: &ZeroTestConfig) -> Result<PluriharmonicReport> {
    let g = equation_gcs(eq, cfg)?;
    let pluriharmonic = dj_on_function(&g, f)?.is_zero(cfg);
    let generating = is_generating(eq, f, cfg)?;
    if pluriharmonic.is_zero() != generating.is_zero() {
        return Err(Error::Calibration(format!(
            "pluriharmonicity ({pluriharmonic:?}) disagrees with d(B*df) = 0 ({generating:?})"
        )));
    }
    Ok(PluriharmonicReport {
        pluriharmonic,
        generating,
    })
}

/// `U = ω∧Φ` and `V = (iΩ + 1)∧Φ` for a closed primitive `ω`.
pub fn uv_forms(eq: &MAEquation, cfg: &ZeroTestConfig) -> Result<(MixedForm, MixedForm)> {
    let g = equation_gcs(eq, cfg)?;
    uv_of(&g, cfg)
}

fn uv_of(g: &GCStructure, cfg: &ZeroTestConfig) -> Result<(MixedForm, MixedForm)> {
    let w = g.w.clone().expect("structure from a pair");
    let (_, lambda) = hodge_lepage(&w);
    if let Verdict::NonZero { witness, .. } = is_zero(&lambda, cfg) {
        return Err(Error::precondition("closed form is not primitive", Some(witness)));
    }
    let u = u0_real_check(g, &w, &ScalarExpr::zero(), cfg)?;
    let v = u0_real_check(g, &Form::zero(2), &ScalarExpr::one(), cfg)?;
    for (name, x) in [("U", &u), ("V", &v)] {
        if let Verdict::NonZero { witness, .. } = x.d().is_zero(cfg) {
            return Err(Error::Calibration(format!("{name} is not closed at {witness}")));
        }
    }
    Ok((u, v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UvReport {
    /// `df∧ω + dg∧Ω`.
    pub algebraic: Verdict,
    /// Largest `|∂̄(fU + igV)|` at sample points.
    pub pointwise: f64,
    pub holomorphic: bool,
}

/// Holomorphicity of `fU + igV`: certifies `df∧ω + dg∧Ω = 0` and checks
/// `∂̄(fU + igV) = 0` at sample points.
pub fn uv_holomorphicity(
    eq: &MAEquation,
    f: &ScalarExpr,
    g: &ScalarExpr,
    cfg: &ZeroTestConfig,
) -> Result<UvReport> {
    let gcs = equation_gcs(eq, cfg)?;
    let (u, v) = uv_of(&gcs, cfg)?;
    let w = gcs.w.clone().expect("structure from a pair");
    let algebraic = (&df(f).wedge(&w) + &df(g).wedge(&canonical_symplectic())).is_zero(cfg);
    // with dg = -B*df and Φ in the 2i-eigenspace the ∂̄-closed combination
    // is fU + igV
    let family = &u.scale(f) + &v.scale(&(g * &ScalarExpr::i()));
    let mut pointwise = 0.0f64;
    for pt in cfg.points(8, SALT_UV) {
        let r = dbar_at(&gcs, &family, &pt, 0)?;
        pointwise = pointwise.max(r.dbar.norm());
    }
    let holomorphic = algebraic.is_zero();
    if holomorphic != (pointwise <= EIGEN_TOL) && !matches!(algebraic, Verdict::Inconclusive { .. }) {
        return Err(Error::Calibration(format!(
            "symbolic ∂̄ verdict {algebraic:?} disagrees with pointwise size {pointwise:.3e}"
        )));
    }
    Ok(UvReport {
        algebraic,
        pointwise,
        holomorphic,
    })
}
