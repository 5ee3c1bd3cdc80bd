//! Pointwise spinor decomposition `∧•T*⊗ℂ = U_{-2} ⊕ … ⊕ U_2`.

use std::sync::OnceLock;

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Point, ScalarExpr, Verdict, ZeroTestConfig};
use crate::exterior::{canonical_symplectic, wedge_sign, Form, MixedForm, SpinorVec};

use super::{exp_form, flat_matrix, GCStructure, Mat8c};

pub type Mat16c = SMatrix<Complex64, 16, 16>;

/// Tolerance for eigen-relations and membership tests.
pub const EIGEN_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `ρ(e_a)` for the frame element `e_a`: interior product for `a < 4`,
/// exterior product for `a ≥ 4`.
fn frame_action(a: usize) -> Mat16c {
    let mut m = Mat16c::zeros();
    for src in 0u8..16 {
        if a < 4 {
            let bit = 1u8 << a;
            if src & bit != 0 {
                // ι_{∂a} (dx_a ∧ rest) = rest
                let rest = src & !bit;
                let s = wedge_sign(bit, rest).unwrap();
                m[(rest as usize, src as usize)] = Complex64::new(s, 0.0);
            }
        } else {
            let bit = 1u8 << (a - 4);
            if let Some(s) = wedge_sign(bit, src) {
                m[((src | bit) as usize, src as usize)] = Complex64::new(s, 0.0);
            }
        }
    }
    m
}

fn frame_actions() -> &'static [Mat16c; 8] {
    static CELL: OnceLock<[Mat16c; 8]> = OnceLock::new();
    CELL.get_or_init(|| std::array::from_fn(frame_action))
}

/// `ρ(u)` for a numeric section `u` in the standard frame.
pub fn spin_matrix(u: &[Complex64; 8]) -> Mat16c {
    let acts = frame_actions();
    let mut m = Mat16c::zeros();
    for (a, c) in u.iter().enumerate() {
        if *c != Complex64::new(0.0, 0.0) {
            m += acts[a] * *c;
        }
    }
    m
}

/// `Σ_a ρ(𝕁e_a)ρ(ẽ_a)` with `ẽ_a` the pairing-dual frame: the dual of `∂_i`
/// is `2dx_i` and the dual of `dx_i` is `2∂_i`.
fn raw_action(j: &Mat8c) -> Mat16c {
    let acts = frame_actions();
    let mut m = Mat16c::zeros();
    for a in 0..8 {
        let col: [Complex64; 8] = std::array::from_fn(|r| j[(r, a)]);
        let dual = if a < 4 { &acts[a + 4] } else { &acts[a - 4] };
        m += spin_matrix(&col) * dual * Complex64::new(2.0, 0.0);
    }
    m
}

/// Scale making the standard symplectic structure act on `exp(-iΩ)` by
/// `2i`.
fn calibration() -> Result<Complex64> {
    static CELL: OnceLock<std::result::Result<Complex64, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let pt = Point::origin();
        let omega = canonical_symplectic();
        let flat = flat_matrix(&omega).evaluate(&pt).map_err(|e| e.to_string())?;
        let inv = flat.try_inverse().ok_or("canonical form is degenerate")?;
        let mut j = Mat8c::zeros();
        j.fixed_view_mut::<4, 4>(0, 4).copy_from(&inv);
        j.fixed_view_mut::<4, 4>(4, 0).copy_from(&-flat);
        let phi = exp_form(&omega.scale(&-ScalarExpr::i()))
            .evaluate(&pt)
            .map_err(|e| e.to_string())?;
        let m = raw_action(&j);
        let image = m * phi;
        let lambda = image[0] / phi[0];
        if (image - phi * lambda).norm() > EIGEN_TOL * phi.norm() {
            return Err("exp(-iΩ) is not an eigenvector of the spin action".into());
        }
        Ok(Complex64::new(0.0, 2.0) / lambda)
    })
    .clone()
    .map_err(Error::Calibration)
}

/// The spin action of `𝕁` at a point and its spectral projectors.
#[derive(Debug, Clone)]
pub struct SpinorFrame {
    pub point: Point,
    /// Action of `𝕁` on `∧•T*⊗ℂ`, with eigenvalue `ik` on `U_k`.
    pub action: Mat16c,
    /// Projectors onto `U_{-2}, …, U_2`.
    pub projectors: [Mat16c; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSummary {
    pub point: Point,
    /// `dim U_k` for `k = -2..=2`.
    pub dimensions: [usize; 5],
    /// `‖Π_k (M - ik)‖`.
    pub spectrum_residual: f64,
}

impl SpinorFrame {
    pub fn projector(&self, k: i32) -> &Mat16c {
        assert!((-2..=2).contains(&k), "no U_{k} in dimension four");
        &self.projectors[(k + 2) as usize]
    }

    pub fn project(&self, k: i32, v: &SpinorVec) -> SpinorVec {
        if (-2..=2).contains(&k) {
            self.projector(k) * v
        } else {
            SpinorVec::zeros()
        }
    }

    pub fn dimensions(&self) -> [usize; 5] {
        std::array::from_fn(|k| self.projectors[k].trace().re.round() as usize)
    }

    pub fn spectrum_residual(&self) -> f64 {
        let mut prod = Mat16c::identity();
        for k in -2..=2 {
            prod *= self.action - Mat16c::identity() * (I * k as f64);
        }
        prod.norm()
    }

    pub fn summary(&self) -> FrameSummary {
        FrameSummary {
            point: self.point,
            dimensions: self.dimensions(),
            spectrum_residual: self.spectrum_residual(),
        }
    }
}

/// Builds the spinor decomposition of `g` at `pt`.
pub fn spinor_frame(g: &GCStructure, pt: &Point) -> Result<SpinorFrame> {
    let j = g
        .matrix()
        .evaluate(pt)
        .map_err(|e| Error::Singular { point: *pt, source: e })?;
    let c = calibration()?;
    let action = raw_action(&j) * c;
    if let Some(phi) = g.phi() {
        let v = phi.evaluate(pt).map_err(|e| Error::Singular { point: *pt, source: e })?;
        if (action * v - v * (I * 2.0)).norm() > EIGEN_TOL * v.norm().max(1.0) {
            return Err(Error::Calibration(format!("spinor line is not the 2i-eigenspace at {pt}")));
        }
    }
    let id = Mat16c::identity();
    let projectors = std::array::from_fn(|ki| {
        let k = ki as i32 - 2;
        let mut p = id;
        for jj in -2..=2 {
            if jj != k {
                p = p * (action - id * (I * jj as f64)) / (I * (k - jj) as f64);
            }
        }
        p
    });
    let frame = SpinorFrame {
        point: *pt,
        action,
        projectors,
    };
    let res = frame.spectrum_residual();
    if res > EIGEN_TOL * action.norm().powi(5).max(1.0) {
        return Err(Error::Calibration(format!(
            "spin action at {pt} has eigenvalues outside {{-2i..2i}} (residual {res:.3e})"
        )));
    }
    Ok(frame)
}

/// `d` split at a point for a section of `U_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbarResult {
    pub point: Point,
    pub k: i32,
    /// `π_{k+1} dθ`.
    #[serde(serialize_with = "ser_vec")]
    pub dbar: SpinorVec,
    /// `π_{k-1} dθ`.
    #[serde(serialize_with = "ser_vec")]
    pub del: SpinorVec,
    /// `‖dθ - ∂θ - ∂̄θ‖`.
    pub residual: f64,
}

fn ser_vec<S: serde::Serializer>(v: &SpinorVec, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(16))?;
    for c in v.iter() {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

fn rel_norm(v: &SpinorVec, scale: f64) -> f64 {
    v.norm() / scale.max(1.0)
}

/// `∂̄` of a family of mixed forms that lies in `U_k` near `pt`.
pub fn dbar_at(g: &GCStructure, family: &MixedForm, pt: &Point, k: i32) -> Result<DbarResult> {
    if !(-2..=2).contains(&k) {
        return Err(Error::precondition(format!("U_{k} is empty"), None));
    }
    let frame = spinor_frame(g, pt)?;
    let sing = |e| Error::Singular { point: *pt, source: e };
    let v = family.evaluate(pt).map_err(sing)?;
    let off = v - frame.project(k, &v);
    if rel_norm(&off, v.norm()) > EIGEN_TOL {
        return Err(Error::precondition(
            format!("family is not in U_{k} (off-component {:.3e})", off.norm()),
            Some(*pt),
        ));
    }
    let dv = family.d().evaluate(pt).map_err(sing)?;
    let dbar = frame.project(k + 1, &dv);
    let del = frame.project(k - 1, &dv);
    let residual = (dv - dbar - del).norm();
    Ok(DbarResult {
        point: *pt,
        k,
        dbar,
        del,
        residual,
    })
}

/// `(θ + a(iΩ + 1))∧Φ` for a primitive 1-or-2-form mix `θ` and function
/// `a`, certified real and checked to lie in `U_0` at sample points.
pub fn u0_real_check(
    g: &GCStructure,
    theta: &Form,
    a: &ScalarExpr,
    cfg: &ZeroTestConfig,
) -> Result<MixedForm> {
    let (Some(phi), Some(omega)) = (g.phi(), g.omega.clone()) else {
        return Err(Error::precondition("structure has no spinor line", None));
    };
    if theta.degree() != 2 {
        return Err(Error::precondition("θ must be a 2-form", None));
    }
    match theta.perp().is_zero(cfg) {
        Verdict::Zero => {}
        v => return Err(Error::precondition("θ is not primitive", v.witness())),
    }
    let shift = MixedForm::from_parts(&[Form::scalar(1.0), omega.scale(&ScalarExpr::i())]).scale(a);
    let elem = (&theta.to_mixed() + &shift).wedge(&phi);
    match (&elem - &elem.conj()).is_zero(cfg) {
        Verdict::Zero => {}
        v => return Err(Error::precondition("element is not real", v.witness())),
    }
    for pt in cfg.points(4, 0x0a0a) {
        let frame = spinor_frame(g, &pt)?;
        let v = elem.evaluate(&pt).map_err(|e| Error::Singular { point: pt, source: e })?;
        let off = v - frame.project(0, &v);
        if rel_norm(&off, v.norm()) > EIGEN_TOL {
            return Err(Error::precondition(
                format!("element is not in U_0 (off-component {:.3e})", off.norm()),
                Some(pt),
            ));
        }
    }
    Ok(elem)
}

#[cfg(test)]
mod tests {
    use super::super::{build_gcs, standard_symplectic};
    use super::*;
    use crate::exterior::parse_form;

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    #[test]
    fn standard_structure_dimensions() {
        let g = standard_symplectic(&cfg()).unwrap();
        let f = spinor_frame(&g, &Point::new([0.3, -0.2, 0.5, 1.0])).unwrap();
        assert_eq!(f.dimensions(), [1, 4, 6, 4, 1]);
    }

    #[test]
    fn projectors_are_complete_and_idempotent() {
        let w = parse_form("p1*dq2^dp1 + dq1^dp2").unwrap();
        let g = build_gcs(&w, &canonical_symplectic(), &cfg()).unwrap();
        let f = spinor_frame(&g, &Point::new([0.1, 0.7, -0.4, 0.2])).unwrap();
        let mut sum = Mat16c::zeros();
        for k in -2..=2 {
            let p = f.projector(k);
            assert!((p * p - p).norm() < 1e-8);
            sum += p;
        }
        assert!((sum - Mat16c::identity()).norm() < 1e-8);
        assert_eq!(f.dimensions(), [1, 4, 6, 4, 1]);
    }

    #[test]
    fn projectors_respect_conjugation() {
        let w = parse_form("p1*dq2^dp1 + dq1^dp2").unwrap();
        let g = build_gcs(&w, &canonical_symplectic(), &cfg()).unwrap();
        let f = spinor_frame(&g, &Point::new([0.1, 0.7, -0.4, 0.2])).unwrap();
        let v = SpinorVec::from_fn(|r, _| Complex64::new(r as f64 * 0.3 - 1.0, (r * r) as f64 * 0.1));
        for k in -2..=2 {
            let lhs = f.project(-k, &v.map(|c| c.conj()));
            let rhs = f.project(k, &v).map(|c| c.conj());
            assert!((lhs - rhs).norm() < 1e-8);
        }
    }
}
