//! Generalized complex geometry on `T ⊕ T*`.
//!
//! Sections are written in the frame `(∂q1, ∂q2, ∂p1, ∂p2, dq1, dq2, dp1,
//! dp2)`. A structure is stored by its blocks
//!
//! ```text
//! 𝕁 = | A      U  |     U : T* → T,   L : T → T*
//!     | L    -Aᵀ  |
//! ```
//!
//! acting on column vectors `(X; ξ)` of components.

mod bivector;
mod spinor;

use std::ops::Mul;

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{is_zero, is_zero_all, Coord, EvalError, Point, ScalarExpr, Verdict, ZeroTestConfig};
use crate::exterior::{
    canonical_symplectic, dual_transpose, form_matrix, pfaffian, Endo4, Form, MixedForm,
    VectorFieldSym,
};

pub use bivector::{
    bivectors_to_gcs, hitchin_bivector_check, schouten, schouten_square_by_indices, BivectorPair, HitchinBivectorReport,
};
pub use spinor::{
    dbar_at, spin_matrix, spinor_frame, u0_real_check, DbarResult, SpinorFrame, EIGEN_TOL,
};

pub type Mat8c = SMatrix<Complex64, 8, 8>;

/// A section `X + ξ` of `T ⊕ T*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GTSection {
    pub x: VectorFieldSym,
    pub xi: Form,
}

impl GTSection {
    pub fn new(x: VectorFieldSym, xi: Form) -> Self {
        assert_eq!(xi.degree(), 1, "section needs a 1-form part");
        GTSection { x, xi }
    }

    pub fn zero() -> Self {
        GTSection::new(VectorFieldSym::zero(), Form::zero(1))
    }

    pub fn vector(x: VectorFieldSym) -> Self {
        GTSection::new(x, Form::zero(1))
    }

    pub fn covector(xi: Form) -> Self {
        GTSection::new(VectorFieldSym::zero(), xi)
    }

    /// The `k`-th frame element: `∂_k` for `k < 4`, `dx_{k-4}` otherwise.
    pub fn frame(k: usize) -> Self {
        if k < 4 {
            GTSection::vector(VectorFieldSym::basis(Coord::from_index(k)))
        } else {
            GTSection::covector(Form::dx(Coord::from_index(k - 4)))
        }
    }

    pub fn components(&self) -> [ScalarExpr; 8] {
        let xi = self.xi.components();
        std::array::from_fn(|k| if k < 4 { self.x.0[k].clone() } else { xi[k - 4].clone() })
    }

    pub fn from_components(c: &[ScalarExpr; 8]) -> Self {
        GTSection::new(
            VectorFieldSym(std::array::from_fn(|k| c[k].clone())),
            Form::one_form(std::array::from_fn(|k| c[k + 4].clone())),
        )
    }

    pub fn add(&self, o: &GTSection) -> GTSection {
        GTSection::new(&self.x + &o.x, &self.xi + &o.xi)
    }

    pub fn scale(&self, s: &ScalarExpr) -> GTSection {
        GTSection::new(self.x.scale(s), self.xi.scale(s))
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        is_zero_all(&self.components(), cfg)
    }
}

/// `(X + ξ, Y + η) = ½(ξ(Y) + η(X))`.
pub fn pairing(u: &GTSection, v: &GTSection) -> ScalarExpr {
    let a = u.xi.interior(&v.x).coeff(0);
    let b = v.xi.interior(&u.x).coeff(0);
    (a + b).scale(0.5)
}

/// `[X+ξ, Y+η] = [X,Y] + L_X η - L_Y ξ - ½ d(ι_X η - ι_Y ξ)`.
pub fn courant(u: &GTSection, v: &GTSection) -> GTSection {
    let x = u.x.bracket(&v.x);
    let contr = &v.xi.interior(&u.x) - &u.xi.interior(&v.x);
    let xi = &(&v.xi.lie_derivative(&u.x) - &u.xi.lie_derivative(&v.x))
        - &contr.d().scale(&ScalarExpr::real(0.5));
    GTSection::new(x, xi)
}

/// `ρ(X + ξ)θ = ι_X θ + ξ∧θ`.
pub fn spin_act(u: &GTSection, theta: &MixedForm) -> MixedForm {
    &theta.interior(&u.x) + &u.xi.to_mixed().wedge(theta)
}

/// `Φ = exp(Θ) = 1 + Θ + Θ²/2` with `Θ = ω - iΩ`.
pub fn phi(w: &Form, omega: &Form) -> MixedForm {
    let theta = w - &omega.scale(&ScalarExpr::i());
    exp_form(&theta)
}

/// `exp` of a 2-form in dimension four.
pub fn exp_form(theta: &Form) -> MixedForm {
    let sq = theta.wedge(theta).scale(&ScalarExpr::real(0.5));
    MixedForm::from_parts(&[Form::scalar(1.0), theta.clone(), sq])
}

/// Symbolic 8×8 matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mat8(pub [[ScalarExpr; 8]; 8]);

impl Mat8 {
    pub fn from_blocks(a: &Endo4, u: &Endo4, l: &Endo4, d: &Endo4) -> Mat8 {
        Mat8(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                match (i < 4, j < 4) {
                    (true, true) => a.get(i, j),
                    (true, false) => u.get(i, j - 4),
                    (false, true) => l.get(i - 4, j),
                    (false, false) => d.get(i - 4, j - 4),
                }
                .clone()
            })
        }))
    }

    pub fn identity() -> Mat8 {
        Mat8(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { ScalarExpr::one() } else { ScalarExpr::zero() })
        }))
    }

    /// Matrix of the pairing: `½ [[0, I], [I, 0]]`.
    pub fn pairing() -> Mat8 {
        Mat8(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                if (i + 4 == j) || (j + 4 == i) {
                    ScalarExpr::real(0.5)
                } else {
                    ScalarExpr::zero()
                }
            })
        }))
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.0[i][j]
    }

    pub fn transpose(&self) -> Mat8 {
        Mat8(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].clone())))
    }

    pub fn add(&self, o: &Mat8) -> Mat8 {
        Mat8(std::array::from_fn(|i| std::array::from_fn(|j| &self.0[i][j] + &o.0[i][j])))
    }

    pub fn sub(&self, o: &Mat8) -> Mat8 {
        Mat8(std::array::from_fn(|i| std::array::from_fn(|j| &self.0[i][j] - &o.0[i][j])))
    }

    pub fn apply(&self, c: &[ScalarExpr; 8]) -> [ScalarExpr; 8] {
        std::array::from_fn(|i| ScalarExpr::sum((0..8).map(|j| &self.0[i][j] * &c[j])))
    }

    pub fn entries(&self) -> Vec<ScalarExpr> {
        self.0.iter().flatten().cloned().collect()
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        is_zero_all(&self.entries(), cfg)
    }

    pub fn evaluate(&self, pt: &Point) -> std::result::Result<Mat8c, EvalError> {
        let mut m = Mat8c::zeros();
        let mut ev = crate::expr::Evaluator::new(*pt);
        for i in 0..8 {
            for j in 0..8 {
                m[(i, j)] = ev.eval(&self.0[i][j])?.0;
            }
        }
        Ok(m)
    }
}

impl Mul for &Mat8 {
    type Output = Mat8;
    fn mul(self, o: &Mat8) -> Mat8 {
        Mat8(std::array::from_fn(|i| {
            std::array::from_fn(|j| ScalarExpr::sum((0..8).map(|k| &self.0[i][k] * &o.0[k][j])))
        }))
    }
}

/// A generalized complex structure with its constituent blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GCStructure {
    #[serde(skip)]
    pub a: Endo4,
    #[serde(skip)]
    pub upper: Endo4,
    #[serde(skip)]
    pub lower: Endo4,
    /// The symplectic form `Ω`, when built from a Hitchin pair.
    pub omega: Option<Form>,
    /// The closed form `ω`, when built from a Hitchin pair.
    pub w: Option<Form>,
    /// `ω̃ = -Ω((1 + A²)·, ·)`.
    pub w_tilde: Option<Form>,
    /// Integrability: `dω = 0` for pairs of forms, the Schouten conditions
    /// for pairs of bivectors.
    pub integrable: Verdict,
    /// `𝕁² + 1`.
    pub square: Verdict,
    /// `𝕁ᵀG + G𝕁` for the pairing matrix `G`.
    pub skew: Verdict,
}

/// Matrix of `X ↦ ι_X w`, sending vector components to 1-form components.
pub fn flat_matrix(w: &Form) -> Endo4 {
    form_matrix(w).transpose()
}

impl GCStructure {
    pub fn matrix(&self) -> Mat8 {
        Mat8::from_blocks(&self.a, &self.upper, &self.lower, &-&self.a.transpose())
    }

    pub fn apply(&self, u: &GTSection) -> GTSection {
        GTSection::from_components(&self.matrix().apply(&u.components()))
    }

    /// `B = λ - A0`, which equals `tr(A)/2 - A` since `A = λ + A0` with
    /// `A0` traceless.
    pub fn b_tensor(&self) -> Endo4 {
        let half_trace = self.a.trace().scale(0.5);
        &Endo4::scalar(half_trace) - &self.a
    }

    /// The spinor line `Φ = exp(ω - iΩ)`, when the forms are known.
    pub fn phi(&self) -> Option<MixedForm> {
        match (&self.w, &self.omega) {
            (Some(w), Some(om)) => Some(phi(w, om)),
            _ => None,
        }
    }

    pub fn theta(&self) -> Option<Form> {
        match (&self.w, &self.omega) {
            (Some(w), Some(om)) => Some(w - &om.scale(&ScalarExpr::i())),
            _ => None,
        }
    }

    fn from_blocks(a: Endo4, upper: Endo4, lower: Endo4, integrable: Verdict, cfg: &ZeroTestConfig) -> Result<GCStructure> {
        let mut g = GCStructure {
            a,
            upper,
            lower,
            omega: None,
            w: None,
            w_tilde: None,
            integrable,
            square: Verdict::Zero,
            skew: Verdict::Zero,
        };
        let j = g.matrix();
        g.square = (&j * &j).add(&Mat8::identity()).is_zero(cfg);
        let p = Mat8::pairing();
        g.skew = (&j.transpose() * &p).add(&(&p * &j)).is_zero(cfg);
        for (name, v) in [("J^2 = -1", &g.square), ("pairing skew-symmetry", &g.skew)] {
            if let Verdict::NonZero { witness, .. } = v {
                return Err(Error::Calibration(format!("{name} fails at {witness}")));
            }
        }
        Ok(g)
    }
}

/// Crainic's structure of the pair `(ω, Ω)`:
/// `A = Ω♭⁻¹ω♭`, upper block `Ω♭⁻¹`, lower block `ω̃♭ = -Ω♭(1 + A²)`.
pub fn build_gcs(w: &Form, omega: &Form, cfg: &ZeroTestConfig) -> Result<GCStructure> {
    let pf = pfaffian(omega);
    match is_zero(&pf, cfg) {
        Verdict::NonZero { .. } => {}
        Verdict::Zero => return Err(Error::degenerate("symplectic form (pfaffian vanishes)", None)),
        Verdict::Inconclusive { .. } => return Err(Error::Inconclusive("nondegeneracy of Ω".into())),
    }
    let om_flat = flat_matrix(omega);
    let om_flat_inv = om_flat.inverse();
    let a = &om_flat_inv * &flat_matrix(w);
    let one_plus = &Endo4::identity() + &(&a * &a);
    let lower = -&(&om_flat * &one_plus);
    let integrable = w.d().is_zero(cfg);
    let mut g = GCStructure::from_blocks(a, om_flat_inv, lower.clone(), integrable, cfg)?;
    g.omega = Some(omega.clone());
    g.w = Some(w.clone());
    g.w_tilde = Some(crate::exterior::form_from_matrix(&lower.transpose()));
    Ok(g)
}

/// The standard structure of the canonical symplectic form.
pub fn standard_symplectic(cfg: &ZeroTestConfig) -> Result<GCStructure> {
    build_gcs(&Form::zero(2), &canonical_symplectic(), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigensectionReport {
    /// `ρ(X - ι_XΘ)Φ = 0` for the four coordinate fields.
    pub annihilation: Verdict,
    /// Courant brackets of those sections are again annihilators.
    pub bracket_closure: Verdict,
}

/// The sections `∂_k - ι_{∂_k}Θ` spanning the annihilator of `Φ`.
pub fn annihilator_frame(theta: &Form) -> Vec<GTSection> {
    Coord::ALL
        .into_iter()
        .map(|c| {
            let x = VectorFieldSym::basis(c);
            let xi = -&theta.interior(&x);
            GTSection::new(x, xi)
        })
        .collect()
}

pub fn eigensection_check(g: &GCStructure, cfg: &ZeroTestConfig) -> Result<EigensectionReport> {
    let (Some(theta), Some(phi)) = (g.theta(), g.phi()) else {
        return Err(Error::precondition("structure has no spinor line", None));
    };
    let frame = annihilator_frame(&theta);
    let mut annihilation = Verdict::Zero;
    for s in &frame {
        annihilation = annihilation.and(spin_act(s, &phi).is_zero(cfg));
    }
    let mut closure = Verdict::Zero;
    for i in 0..frame.len() {
        for j in (i + 1)..frame.len() {
            let br = courant(&frame[i], &frame[j]);
            closure = closure.and(spin_act(&br, &phi).is_zero(cfg));
        }
    }
    Ok(EigensectionReport {
        annihilation,
        bracket_closure: closure,
    })
}

/// `𝕁df = B*df + (B*²df + df)∧Ω` for a structure built from a pair.
pub fn j_df(g: &GCStructure, f: &ScalarExpr) -> Result<MixedForm> {
    let Some(omega) = &g.omega else {
        return Err(Error::precondition("structure has no symplectic form", None));
    };
    let df = Form::scalar(f.clone()).d();
    let b = g.b_tensor();
    let bdf = dual_transpose(&b, &df);
    let b2df = dual_transpose(&b, &bdf);
    let three = (&b2df + &df).wedge(omega);
    Ok(&bdf.to_mixed() + &three.to_mixed())
}

/// `d(𝕁df)` for a structure built from a pair.
pub fn dj_on_function(g: &GCStructure, f: &ScalarExpr) -> Result<MixedForm> {
    Ok(j_df(g, f)?.d())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::parse_form;

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    fn laplace() -> Form {
        parse_form("dq1^dp2 - dq2^dp1").unwrap()
    }

    #[test]
    fn pairing_examples() {
        let u = GTSection::frame(0).add(&GTSection::frame(4));
        assert_eq!(pairing(&u, &u), ScalarExpr::one());
        assert!(pairing(&GTSection::frame(0), &GTSection::frame(1)).is_const_zero());
        assert!(pairing(&GTSection::frame(4), &GTSection::frame(6)).is_const_zero());
    }

    #[test]
    fn standard_structure_blocks() {
        let g = standard_symplectic(&cfg()).unwrap();
        assert!(g.a.is_zero(&cfg()).is_zero());
        let om = flat_matrix(&canonical_symplectic());
        assert!((&g.lower + &om).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn laplace_pair_is_integrable() {
        let g = build_gcs(&laplace(), &canonical_symplectic(), &cfg()).unwrap();
        assert!(g.integrable.is_zero());
        assert!(g.square.is_zero());
        let r = eigensection_check(&g, &cfg()).unwrap();
        assert!(r.annihilation.is_zero());
        assert!(r.bracket_closure.is_zero());
    }

    #[test]
    fn non_closed_pair() {
        let w = parse_form("q2*dq1^dp2 - dq2^dp1").unwrap();
        let g = build_gcs(&w, &canonical_symplectic(), &cfg()).unwrap();
        assert!(g.integrable.is_nonzero());
        let r = eigensection_check(&g, &cfg()).unwrap();
        assert!(r.annihilation.is_zero());
        assert!(r.bracket_closure.is_nonzero());
    }

    #[test]
    fn degenerate_omega_rejected() {
        let w = parse_form("dq1^dq2").unwrap();
        assert!(build_gcs(&laplace(), &w, &cfg()).is_err());
    }

    #[test]
    fn courant_is_antisymmetric() {
        let u = GTSection::new(
            VectorFieldSym([ScalarExpr::p1(), ScalarExpr::zero(), ScalarExpr::q2(), ScalarExpr::one()]),
            parse_form("q1*dp2 + p1^2*dq2").unwrap(),
        );
        assert!(courant(&u, &u).is_zero(&cfg()).is_zero());
    }
}
