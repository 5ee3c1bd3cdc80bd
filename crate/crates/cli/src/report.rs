//! The JSON report. Field order is fixed by the struct layout, so identical
//! input and seed give byte-identical output.

use serde::Serialize;

use mage_core::expr::{Point, Verdict, ZeroTestConfig};

/// A verdict together with the tolerance and seed that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Checked {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigBlock {
    pub seed: u64,
    pub samples: usize,
    pub atol: f64,
    pub rtol: f64,
    #[serde(rename = "box")]
    pub sample_box: BoxBlock,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxBlock {
    pub q1: [f64; 2],
    pub q2: [f64; 2],
    pub p1: [f64; 2],
    pub p2: [f64; 2],
}

impl ConfigBlock {
    pub fn of(cfg: &ZeroTestConfig) -> Self {
        let b = cfg.sample_box.0.map(|(lo, hi)| [lo, hi]);
        ConfigBlock {
            seed: cfg.seed,
            samples: cfg.samples,
            atol: cfg.atol,
            rtol: cfg.rtol,
            sample_box: BoxBlock {
                q1: b[0],
                q2: b[1],
                p1: b[2],
                p2: b[3],
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationBlock {
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(rename = "C")]
    pub c: String,
    #[serde(rename = "D")]
    pub d: String,
    #[serde(rename = "E")]
    pub e: String,
    pub form: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationBlock {
    pub verdict: String,
    pub pfaffian: String,
    pub elliptic: usize,
    pub hyperbolic: usize,
    pub parabolic: usize,
    pub singular: usize,
    pub elliptic_witness: Option<Point>,
    pub hyperbolic_witness: Option<Point>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LrBlock {
    pub applicable: bool,
    pub lr_integrable: Option<bool>,
    pub witness: Option<Point>,
    pub reason: Option<String>,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceBlock {
    pub is_divergent: bool,
    pub alpha_omega: String,
    pub mu: Option<String>,
    pub closed_form: Option<String>,
    pub witness: Option<Point>,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumBlock {
    pub point: Point,
    /// Multiplicities of the eigenvalues `-2i, -i, 0, i, 2i`.
    pub multiplicities: [usize; 5],
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitBlock {
    pub family: String,
    pub points: usize,
    pub max_residual: f64,
    pub holds: bool,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GcsBlock {
    pub source: &'static str,
    pub w: String,
    pub square: Checked,
    pub skew: Checked,
    pub integrable: Checked,
    pub annihilation: Checked,
    pub bracket_closure: Checked,
    pub spectra: Vec<SpectrumBlock>,
    pub split: SplitBlock,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetBlock {
    pub residual: f64,
    pub sign: Option<f64>,
    pub samples: usize,
    pub rank_deficient: usize,
    pub passes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UvBlock {
    pub algebraic: Checked,
    pub pointwise: f64,
    pub holomorphic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenfunBlock {
    pub f: String,
    pub is_generating: Checked,
    pub pluriharmonic: Checked,
    pub conjugate: Option<String>,
    pub g: Option<String>,
    pub g_source: Option<&'static str>,
    pub level_set: Option<LevelSetBlock>,
    pub uv: Option<UvBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConservationBlock {
    pub alpha: String,
    pub f: String,
    pub g: String,
    pub residual: Checked,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricBlock {
    pub samples: usize,
    pub positive: usize,
    pub negative: usize,
    pub indefinite: usize,
    pub singular: usize,
    pub positive_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameBlock {
    pub squares: Checked,
    pub display: Checked,
    pub symmetric: Checked,
    pub splitting: Checked,
    pub i_plus: Vec<Vec<String>>,
    pub i_minus: Vec<Vec<String>>,
    pub nijenhuis_plus: Checked,
    pub nijenhuis_minus: Checked,
    pub metric: MetricBlock,
}

#[derive(Debug, Clone, Serialize)]
pub struct HitchinBlock {
    pub difference: Checked,
    pub conjugate_difference: Checked,
    pub closed: Checked,
    pub commutator: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KaehlerBlock {
    pub theta: String,
    pub lambda_sq: String,
    pub mu_sq: String,
    pub closed: Checked,
    pub frame: Option<FrameBlock>,
    pub hitchin: Option<HitchinBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub status: &'static str,
    pub exit_code: i32,
    pub message: Option<String>,
    pub witness: Option<Point>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: ConfigBlock,
    pub equation: EquationBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<LrBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergenceBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gcs: Option<GcsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<GenfunBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservation: Option<ConservationBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kaehler: Option<KaehlerBlock>,
    pub outcome: Outcome,
}
