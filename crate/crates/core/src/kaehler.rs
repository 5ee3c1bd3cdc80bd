//! Generalized Kähler partners built from a triple `(ω, Ω, Θ)`.
//!
//! With `A_ω`, `A_Θ` defined by `ω = Ω(A_ω·, ·)` and `Θ = Ω(A_Θ·, ·)`, the
//! normalized endomorphisms `P = A_ω/μ` and `Q = A_Θ/λ` are anticommuting
//! complex structures. The frame is
//!
//! ```text
//! J = -PQ,   I = JP = -Q,   K = JQ = P,   G = (PQ)ᵀ Ω
//! ```
//!
//! and `I± = (K ± λJ)/(2μ) = A_ω(1 ∓ A_Θ)/(2μ²)`. The triple `(I, J, K)`
//! is determined up to a common sign; it is oriented so that `G` is
//! positive where it is definite.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{is_zero, Coord, Point, ScalarExpr, Verdict, ZeroTestConfig};
use crate::exterior::{dual_transpose, form_matrix, Endo4, Form, VectorFieldSym};
use crate::gcs::{build_gcs, GCStructure, EIGEN_TOL};
use crate::ma::polynomial_potential;
use crate::solutions::b_tensor_of_form;

/// Smallest admissible value of `λ²` and `μ²` at sample points.
pub const RADICAND_MIN: f64 = 0.05;

const SALT_TRIPLE: u64 = 0x7e1;
const SALT_FRAME: u64 = 0xf7a;
const SALT_COMMUTE: u64 = 0xc0c0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KahlerTriple {
    pub w: Form,
    pub omega: Form,
    pub theta: Form,
    /// `Θ² = λ²Ω²`.
    pub lambda_sq: ScalarExpr,
    /// `ω² = μ²Ω²`.
    pub mu_sq: ScalarExpr,
    pub lambda: ScalarExpr,
    pub mu: ScalarExpr,
    /// `dω = dΩ = dΘ = 0`.
    pub closed: Verdict,
}

fn require_zero(v: Verdict, what: &str) -> Result<()> {
    match v {
        Verdict::Zero => Ok(()),
        Verdict::NonZero { witness, .. } => Err(Error::precondition(what.to_string(), Some(witness))),
        Verdict::Inconclusive { .. } => Err(Error::Inconclusive(what.to_string())),
    }
}

/// Ratio of the top coefficients of two 4-forms.
fn top_ratio(a: &Form, b: &Form) -> ScalarExpr {
    ScalarExpr::quotient(a.top(), b.top())
}

/// Certifies every invariant of a triple, closedness included.
pub fn validate_triple(w: &Form, omega: &Form, theta: &Form, cfg: &ZeroTestConfig) -> Result<KahlerTriple> {
    let t = algebraic_triple(w, omega, theta, cfg)?;
    for (f, name) in [(w, "ω"), (omega, "Ω"), (theta, "Θ")] {
        require_zero(f.d().is_zero(cfg), &format!("{name} is not closed"))?;
    }
    Ok(t)
}

/// Certifies the pointwise invariants of a triple and records closedness
/// without requiring it.
pub fn algebraic_triple(w: &Form, omega: &Form, theta: &Form, cfg: &ZeroTestConfig) -> Result<KahlerTriple> {
    let mut closed = Verdict::Zero;
    for (f, name) in [(w, "ω"), (omega, "Ω"), (theta, "Θ")] {
        if f.degree() != 2 {
            return Err(Error::precondition(format!("{name} must be a 2-form"), None));
        }
        closed = closed.and(f.d().is_zero(cfg));
    }
    require_zero(omega.wedge(theta).is_zero(cfg), "Ω∧Θ ≠ 0")?;
    require_zero(w.wedge(theta).is_zero(cfg), "ω∧Θ ≠ 0")?;
    require_zero(w.wedge(omega).is_zero(cfg), "ω∧Ω ≠ 0")?;
    let (w2, o2, t2) = (w.wedge(w), omega.wedge(omega), theta.wedge(theta));
    if is_zero(&o2.top(), cfg).is_zero() {
        return Err(Error::degenerate("Ω", None));
    }
    require_zero((&(&w2.scale(&ScalarExpr::real(4.0)) - &o2) - &t2).is_zero(cfg), "4ω² ≠ Ω² + Θ²")?;
    let lambda_sq = top_ratio(&t2, &o2);
    let mu_sq = top_ratio(&w2, &o2);
    require_zero(
        is_zero(&(&mu_sq - &(&lambda_sq + &ScalarExpr::one()).scale(0.25)), cfg),
        "μ² ≠ (1 + λ²)/4",
    )?;
    for pt in cfg.points(cfg.samples, SALT_TRIPLE) {
        for (r, name) in [(&lambda_sq, "λ²"), (&mu_sq, "μ²")] {
            let v = r.evaluate(&pt).map_err(|source| Error::Singular { point: pt, source })?;
            if v.re < RADICAND_MIN || v.im.abs() > EIGEN_TOL {
                return Err(Error::precondition(
                    format!("{name} = {:.4} is not bounded below by {RADICAND_MIN} on the box", v.re),
                    Some(pt),
                ));
            }
        }
    }
    Ok(KahlerTriple {
        w: w.clone(),
        omega: omega.clone(),
        theta: theta.clone(),
        lambda: lambda_sq.sqrt(),
        mu: mu_sq.sqrt(),
        lambda_sq,
        mu_sq,
        closed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameChecks {
    /// `I² = J² = K² = I±² = -1`.
    pub squares: Verdict,
    /// `ω = μG(I·,·)`, `Ω = G(J·,·)`, `Θ = λG(K·,·)`.
    pub display: Verdict,
    /// `G = Gᵀ`.
    pub symmetric: Verdict,
    /// `ω = ((Ω+Θ)/2)(I₋·,·)` and `ω = ((Ω-Θ)/2)(I₊·,·)`.
    pub splitting: Verdict,
    /// Sign `s` with `IJ = sK` at every sampled point, if any.
    pub ij_sign: Option<f64>,
    /// Sampled points with their positive-definiteness.
    pub definite: Vec<(Point, bool)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuaternionicFrame {
    #[serde(skip)]
    pub g: Endo4,
    #[serde(skip)]
    pub i: Endo4,
    #[serde(skip)]
    pub j: Endo4,
    #[serde(skip)]
    pub k: Endo4,
    #[serde(skip)]
    pub i_plus: Endo4,
    #[serde(skip)]
    pub i_minus: Endo4,
    /// `N = μλG`, free of radicals.
    #[serde(skip)]
    pub n: Endo4,
    /// `±1`: the sign of `J` relative to `-A_ωA_Θ/(μλ)`.
    pub orientation: f64,
    pub checks: FrameChecks,
}

/// Matrix `T` with `w = Ω(T·, ·)`.
fn endo_rel(w: &Form, omega: &Form) -> Endo4 {
    &form_matrix(omega).inverse() * &form_matrix(w)
}

fn sampled_ij_sign(i: &Endo4, j: &Endo4, k: &Endo4, pts: &[Point]) -> Option<f64> {
    let ij = i * j;
    let mut ok = [true, true];
    for pt in pts {
        let (Ok(a), Ok(b)) = (ij.evaluate(pt), k.evaluate(pt)) else {
            return None;
        };
        ok[0] &= (a - b).norm() <= EIGEN_TOL * b.norm().max(1.0);
        ok[1] &= (a + b).norm() <= EIGEN_TOL * b.norm().max(1.0);
    }
    match ok {
        [true, _] => Some(1.0),
        [false, true] => Some(-1.0),
        _ => None,
    }
}

/// Definiteness of a real symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
    Singular,
}

fn definiteness(m: &Endo4, pt: &Point) -> Definiteness {
    let Ok(m) = m.evaluate(pt) else {
        return Definiteness::Singular;
    };
    let re: Matrix4<f64> = m.map(|c| c.re);
    let sym = (re + re.transpose()) * 0.5;
    let ev = SymmetricEigen::new(sym).eigenvalues;
    let tol = EIGEN_TOL * ev.amax().max(1.0);
    if ev.iter().all(|&e| e > tol) {
        Definiteness::Positive
    } else if ev.iter().all(|&e| e < -tol) {
        Definiteness::Negative
    } else if ev.iter().any(|&e| e.abs() <= tol) {
        Definiteness::Singular
    } else {
        Definiteness::Indefinite
    }
}

impl QuaternionicFrame {
    /// Definiteness of `G` at `pt`, read from the radical-free `N = μλG`;
    /// `G` is real and positive-definite exactly where `λ², μ² > 0` and
    /// `N` is positive-definite.
    pub fn metric_class(&self, pt: &Point) -> Definiteness {
        definiteness(&self.n, pt)
    }
}

pub fn quaternionic_frame(t: &KahlerTriple, cfg: &ZeroTestConfig) -> Result<QuaternionicFrame> {
    let aw = endo_rel(&t.w, &t.omega);
    let at = endo_rel(&t.theta, &t.omega);
    let om = form_matrix(&t.omega);
    let pq_raw = &aw * &at;
    // orient (I, J, K) so that G is positive where it is definite
    let pts = cfg.points(10, SALT_FRAME);
    let n_raw = &pq_raw.transpose() * &om;
    let negative = pts.iter().filter(|p| definiteness(&n_raw, p) == Definiteness::Negative).count();
    let positive = pts.iter().filter(|p| definiteness(&n_raw, p) == Definiteness::Positive).count();
    let orientation = if negative > positive { -1.0 } else { 1.0 };
    let n = n_raw.scale(&ScalarExpr::real(orientation));
    let inv_ml = ScalarExpr::quotient(ScalarExpr::real(orientation), &t.mu * &t.lambda);
    let spq = pq_raw.scale(&inv_ml);
    let j = -&spq;
    let i = at.scale(&ScalarExpr::quotient(ScalarExpr::real(-orientation), t.lambda.clone()));
    let k = aw.scale(&ScalarExpr::quotient(ScalarExpr::real(orientation), t.mu.clone()));
    let g = &spq.transpose() * &om;
    let two_mu_sq = ScalarExpr::quotient(ScalarExpr::real(orientation), t.mu_sq.scale(2.0));
    let one = Endo4::identity();
    let i_plus = (&aw * &(&one - &at)).scale(&two_mu_sq);
    let i_minus = (&aw * &(&one + &at)).scale(&two_mu_sq);

    let neg_one = Endo4::scalar(ScalarExpr::real(-1.0));
    let mut squares = Verdict::Zero;
    for x in [&i, &j, &k, &i_plus, &i_minus] {
        squares = squares.and((&(x * x) - &neg_one).is_zero(cfg));
    }
    let wm = form_matrix(&t.w);
    let tm = form_matrix(&t.theta);
    let display = (&wm - &(&i.transpose() * &g).scale(&t.mu))
        .is_zero(cfg)
        .and((&om - &(&j.transpose() * &g)).is_zero(cfg))
        .and((&tm - &(&k.transpose() * &g).scale(&t.lambda)).is_zero(cfg));
    let symmetric = (&g - &g.transpose()).is_zero(cfg);
    let half = ScalarExpr::real(0.5);
    let splitting = (&wm - &(&i_minus.transpose() * &(&om + &tm)).scale(&half))
        .is_zero(cfg)
        .and((&wm - &(&i_plus.transpose() * &(&om - &tm)).scale(&half)).is_zero(cfg));
    let ij_sign = sampled_ij_sign(&i, &j, &k, &pts);
    let definite = pts.iter().map(|p| (*p, definiteness(&n, p) == Definiteness::Positive)).collect();
    for (v, what) in [(&squares, "squares"), (&display, "display equations"), (&symmetric, "symmetry of G")] {
        if let Verdict::NonZero { witness, .. } = v {
            return Err(Error::precondition(format!("inconsistent triple: {what}"), Some(*witness)));
        }
    }
    Ok(QuaternionicFrame {
        g,
        i,
        j,
        k,
        i_plus,
        i_minus,
        n,
        orientation,
        checks: FrameChecks {
            squares,
            display,
            symmetric,
            splitting,
            ij_sign,
            definite,
        },
    })
}

/// `N(∂_a, ∂_b) = [T∂_a, T∂_b] - T[T∂_a, ∂_b] - T[∂_a, T∂_b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nijenhuis(pub [[VectorFieldSym; 4]; 4]);

impl Nijenhuis {
    pub fn get(&self, a: usize, b: usize) -> &VectorFieldSym {
        &self.0[a][b]
    }

    pub fn is_zero(&self, cfg: &ZeroTestConfig) -> Verdict {
        let all: Vec<ScalarExpr> = self.0.iter().flatten().flat_map(|v| v.0.iter().cloned()).collect();
        crate::expr::is_zero_all(&all, cfg)
    }
}

pub fn nijenhuis(t: &Endo4) -> Nijenhuis {
    let tx: Vec<VectorFieldSym> = Coord::ALL
        .into_iter()
        .map(|c| t.apply(&VectorFieldSym::basis(c)))
        .collect();
    Nijenhuis(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let (ea, eb) = (VectorFieldSym::basis(Coord::from_index(a)), VectorFieldSym::basis(Coord::from_index(b)));
            let first = tx[a].bracket(&tx[b]);
            let second = t.apply(&tx[a].bracket(&eb));
            let third = t.apply(&ea.bracket(&tx[b]));
            &(&first - &second) - &third
        })
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateLemmaReport {
    /// `d(I₊*dg) + d(I₋*dg)`.
    pub plus_minus: Verdict,
    /// `d((K/μ)*dg)`.
    pub k_closed: Verdict,
    /// Closedness of `df = -(B*)⁻¹dg`.
    pub conjugate: Verdict,
    /// Recovered `f` when the candidate has polynomial coefficients.
    pub f: Option<ScalarExpr>,
    pub holds: bool,
}

/// Checks that the three characterizations of a conjugate function agree.
pub fn conjugate_lemma_check(
    t: &KahlerTriple,
    frame: &QuaternionicFrame,
    g: &ScalarExpr,
    cfg: &ZeroTestConfig,
) -> Result<ConjugateLemmaReport> {
    let dg = Form::scalar(g.clone()).d();
    let plus_minus =
        (&dual_transpose(&frame.i_plus, &dg).d() + &dual_transpose(&frame.i_minus, &dg).d()).is_zero(cfg);
    let k_mu = frame.k.scale(&ScalarExpr::quotient(ScalarExpr::one(), t.mu.clone()));
    let k_closed = dual_transpose(&k_mu, &dg).d().is_zero(cfg);
    let b = b_tensor_of_form(&t.w);
    let candidate = -&dual_transpose(&b.inverse(), &dg);
    let conjugate = candidate.d().is_zero(cfg);
    let f = if conjugate.is_zero() {
        polynomial_potential(&candidate, cfg).ok()
    } else {
        None
    };
    let verdicts = [&plus_minus, &k_closed, &conjugate];
    if verdicts.iter().any(|v| matches!(v, Verdict::Inconclusive { .. })) {
        return Err(Error::Inconclusive("conjugate lemma".into()));
    }
    let holds = plus_minus.is_zero();
    if verdicts.iter().any(|v| v.is_zero() != holds) {
        return Err(Error::Calibration(format!(
            "conjugate lemma characterizations disagree: {plus_minus:?} / {k_closed:?} / {conjugate:?}"
        )));
    }
    Ok(ConjugateLemmaReport {
        plus_minus,
        k_closed,
        conjugate,
        f,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitchinCommuteReport {
    /// `(β1 - β2)²`.
    pub difference: Verdict,
    /// `(β1 - β̄2)²`.
    pub conjugate_difference: Verdict,
    /// `dβ1 = dβ2 = 0`.
    pub closed: Verdict,
    pub holds: bool,
    /// Largest `‖[𝕁1, 𝕁2]‖` at sample points, when the squared conditions
    /// hold.
    pub commutator: Option<f64>,
}

fn structure_of(beta: &Form, cfg: &ZeroTestConfig) -> Result<GCStructure> {
    // β = ω - iΩ
    build_gcs(&beta.re(), &-&beta.im(), cfg)
}

pub fn hitchin_commute_check(b1: &Form, b2: &Form, cfg: &ZeroTestConfig) -> Result<HitchinCommuteReport> {
    let closed = b1.d().is_zero(cfg).and(b2.d().is_zero(cfg));
    let (g1, g2) = (structure_of(b1, cfg)?, structure_of(b2, cfg)?);
    let d = b1 - b2;
    let difference = d.wedge(&d).is_zero(cfg);
    let dc = b1 - &b2.conj();
    let conjugate_difference = dc.wedge(&dc).is_zero(cfg);
    let squares = difference.is_zero() && conjugate_difference.is_zero();
    let holds = squares && closed.is_zero();
    let commutator = if squares {
        let (m1, m2) = (g1.matrix(), g2.matrix());
        let mut worst = 0.0f64;
        for pt in cfg.points(cfg.samples, SALT_COMMUTE) {
            let sing = |source| Error::Singular { point: pt, source };
            let (a, b) = (m1.evaluate(&pt).map_err(sing)?, m2.evaluate(&pt).map_err(sing)?);
            worst = worst.max((a * b - b * a).norm());
        }
        Some(worst)
    } else {
        None
    };
    Ok(HitchinCommuteReport {
        difference,
        conjugate_difference,
        closed,
        holds,
        commutator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{canonical_symplectic, parse_form};

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default().with_box(Coord::P1, -2.0, -0.5)
    }

    fn vk() -> (Form, Form, Form) {
        (
            parse_form("p1*dq2^dp1 + dq1^dp2").unwrap(),
            canonical_symplectic(),
            parse_form("(1+4*p1)*dp1^dp2 + dq1^dq2").unwrap(),
        )
    }

    #[test]
    fn von_karman_triple() {
        let (w, om, th) = vk();
        let t = validate_triple(&w, &om, &th, &cfg()).unwrap();
        assert!(is_zero(&(&t.lambda_sq + &crate::expr::parse_expr("1+4*p1").unwrap()), &cfg()).is_zero());
        assert!(is_zero(&(&t.mu_sq + &ScalarExpr::p1()), &cfg()).is_zero());
        let f = quaternionic_frame(&t, &cfg()).unwrap();
        assert!(f.checks.definite.iter().all(|(_, d)| *d));
        assert!(f.checks.splitting.is_zero());
        assert!(nijenhuis(&f.i_plus).is_zero(&cfg()).is_zero());
        assert!(nijenhuis(&f.i_minus).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn partner_with_non_closed_theta() {
        let (w, om, _) = vk();
        let th = parse_form("dp1^dp2 + (1+4*p1)*dq1^dq2").unwrap();
        assert!(validate_triple(&w, &om, &th, &cfg()).is_err());
        let t = algebraic_triple(&w, &om, &th, &cfg()).unwrap();
        assert!(t.closed.is_nonzero());
        let f = quaternionic_frame(&t, &cfg()).unwrap();
        assert!(nijenhuis(&f.i_plus).is_zero(&cfg()).is_nonzero());
        let b1 = &w - &om.scale(&ScalarExpr::i());
        let b2 = &-&w - &th.scale(&ScalarExpr::i());
        let r = hitchin_commute_check(&b1, &b2, &cfg()).unwrap();
        assert!(r.difference.is_zero() && r.conjugate_difference.is_zero());
        assert!(r.closed.is_nonzero());
        assert!(!r.holds);
    }

    #[test]
    fn rejects_bad_theta() {
        let (w, om, _) = vk();
        assert!(validate_triple(&w, &om, &Form::zero(2), &cfg()).is_err());
        let th = parse_form("q1*dp1^dp2 + (1+4*p1)*dq1^dq2").unwrap();
        assert!(validate_triple(&w, &om, &th, &cfg()).is_err());
    }

    #[test]
    fn nijenhuis_trivial() {
        assert!(nijenhuis(&Endo4::identity()).is_zero(&cfg()).is_zero());
    }

    #[test]
    fn von_karman_commuting_pair() {
        let (w, om, th) = vk();
        let b1 = &w - &om.scale(&ScalarExpr::i());
        let b2 = &-&w - &th.scale(&ScalarExpr::i());
        let r = hitchin_commute_check(&b1, &b2, &cfg()).unwrap();
        assert!(r.holds);
        assert!(r.commutator.unwrap() <= 1e-8);
    }
}
