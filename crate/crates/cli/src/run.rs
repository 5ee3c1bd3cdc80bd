//! The five commands. Each fills its blocks of the report and leaves the
//! outcome to the caller.

use mage_core::expr::poly::Poly;
use mage_core::expr::{Point, ScalarExpr, Verdict, ZeroTestConfig};
use mage_core::exterior::{canonical_symplectic, Endo4, Form};
use mage_core::gcs::{build_gcs, dbar_at, eigensection_check, spinor_frame};
use mage_core::kaehler::{algebraic_triple, hitchin_commute_check, nijenhuis, quaternionic_frame, Definiteness};
use mage_core::ma::{classify, divergence_certificate, equation_to_form, lr_test, GlobalClass, PointClass};
use mage_core::solutions::{
    conjugate, conservation_decompose, is_generating, level_set_check, pluriharmonic_check, structure_form,
    uv_holomorphicity,
};
use mage_core::{Error, Result};

use crate::input::EquationFile;
use crate::report::*;

const SALT_SPECTRA: u64 = 0x5bec;
const SALT_SPLIT: u64 = 0x5b1e;
const SALT_METRIC: u64 = 0x3e7c;
const SPECTRA_POINTS: usize = 3;
const SPLIT_POINTS: usize = 6;
const SPLIT_TOL: f64 = 1e-8;
const METRIC_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Classify,
    Analyze,
    Genfun,
    Conslaw,
    Kaehler,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Analyze => "analyze",
            Command::Genfun => "genfun",
            Command::Conslaw => "conslaw",
            Command::Kaehler => "kaehler",
        }
    }
}

/// State shared by the blocks of one report.
pub struct Run<'a> {
    pub cfg: ZeroTestConfig,
    pub file: &'a EquationFile,
    pub report: Report,
    pub summary: Vec<String>,
    inconclusive: bool,
    /// A failed hypothesis found while the report was still produced.
    pub violation: Option<(String, Option<Point>)>,
}

impl<'a> Run<'a> {
    pub fn new(command: Command, file: &'a EquationFile, cfg: ZeroTestConfig) -> Self {
        let [a, b, c, d, e] = file.coefficients.clone();
        let report = Report {
            command: command.name(),
            config: ConfigBlock::of(&cfg),
            equation: EquationBlock {
                a,
                b,
                c,
                d,
                e,
                form: tidy_form(&equation_to_form(&file.equation)),
            },
            classification: None,
            lr: None,
            divergence: None,
            gcs: None,
            solutions: None,
            conservation: None,
            kaehler: None,
            outcome: Outcome {
                status: "ok",
                exit_code: 0,
                message: None,
                witness: None,
            },
        };
        Run {
            cfg,
            file,
            report,
            summary: Vec::new(),
            inconclusive: false,
            violation: None,
        }
    }

    pub fn inconclusive(&self) -> bool {
        self.inconclusive
    }

    fn check(&mut self, v: Verdict) -> Checked {
        self.inconclusive |= matches!(v, Verdict::Inconclusive { .. });
        Checked {
            verdict: v,
            tol: self.cfg.atol.max(self.cfg.rtol),
            seed: self.cfg.seed,
        }
    }

    fn tol(&self) -> f64 {
        self.cfg.atol.max(self.cfg.rtol)
    }

    fn note(&mut self, line: String) {
        self.summary.push(line);
    }

    pub fn execute(&mut self, command: Command) -> Result<()> {
        match command {
            Command::Classify => self.classify(),
            Command::Analyze => self.analyze(),
            Command::Genfun => self.genfun(),
            Command::Conslaw => self.conslaw(),
            Command::Kaehler => self.kaehler(),
        }
    }

    fn classify(&mut self) -> Result<()> {
        let eq = &self.file.equation;
        let rep = classify(eq, &self.cfg);
        let first = |k| rep.points.iter().find(|(_, c)| *c == k).map(|(p, _)| *p);
        let verdict = serde_json::to_value(rep.verdict)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        self.inconclusive |= rep.verdict == GlobalClass::Inconclusive;
        self.report.classification = Some(ClassificationBlock {
            verdict: verdict.clone(),
            pfaffian: tidy(&rep.pfaffian),
            elliptic: rep.count(PointClass::Elliptic),
            hyperbolic: rep.count(PointClass::Hyperbolic),
            parabolic: rep.count(PointClass::Parabolic),
            singular: rep.singular_samples,
            elliptic_witness: first(PointClass::Elliptic),
            hyperbolic_witness: first(PointClass::Hyperbolic),
        });
        self.note(format!("class: {verdict} (pfaffian {})", tidy(&rep.pfaffian)));
        let lr = match lr_test(eq, &self.cfg) {
            Ok(lr) => LrBlock {
                applicable: true,
                lr_integrable: Some(lr.lr_integrable),
                witness: lr.witness,
                reason: None,
                tol: self.tol(),
                seed: self.cfg.seed,
            },
            Err(Error::Degenerate { what, witness }) => LrBlock {
                applicable: false,
                lr_integrable: None,
                witness,
                reason: Some(format!("degenerate {what}")),
                tol: self.tol(),
                seed: self.cfg.seed,
            },
            Err(Error::Inconclusive(what)) => {
                self.inconclusive = true;
                LrBlock {
                    applicable: false,
                    lr_integrable: None,
                    witness: None,
                    reason: Some(format!("inconclusive: {what}")),
                    tol: self.tol(),
                    seed: self.cfg.seed,
                }
            }
            Err(e) => return Err(e),
        };
        self.note(match lr.lr_integrable {
            Some(b) => format!("lr_integrable: {b}"),
            None => format!("lr test not applicable: {}", lr.reason.clone().unwrap_or_default()),
        });
        self.report.lr = Some(lr);
        Ok(())
    }

    fn analyze(&mut self) -> Result<()> {
        let eq = &self.file.equation;
        let form = equation_to_form(eq);
        let cert = divergence_certificate(&form, &self.cfg)?;
        self.note(format!(
            "divergent: {}{}",
            cert.is_divergent,
            cert.mu.as_ref().map(|m| format!(", mu = {}", tidy(m))).unwrap_or_default()
        ));
        self.report.divergence = Some(DivergenceBlock {
            is_divergent: cert.is_divergent,
            alpha_omega: tidy_form(&cert.alpha),
            mu: cert.mu.as_ref().map(tidy),
            closed_form: cert.closed.as_ref().map(tidy_form),
            witness: cert.witness,
            tol: self.tol(),
            seed: self.cfg.seed,
        });
        let (source, w) = match cert.closed {
            Some(c) => ("closed representative", c),
            None => ("equation form", form),
        };
        let g = build_gcs(&w, &canonical_symplectic(), &self.cfg)?;
        let eig = eigensection_check(&g, &self.cfg)?;
        let mut spectra = Vec::new();
        for pt in self.cfg.points(SPECTRA_POINTS, SALT_SPECTRA) {
            let s = spinor_frame(&g, &pt)?.summary();
            spectra.push(SpectrumBlock {
                point: s.point,
                multiplicities: s.dimensions,
                residual: s.spectrum_residual,
            });
        }
        let phi = g.phi().ok_or_else(|| Error::precondition("structure has no spinor line", None))?;
        let family = Form::dx(mage_core::expr::Coord::Q1).to_mixed().wedge(&phi);
        let mut worst = 0.0f64;
        for pt in self.cfg.points(SPLIT_POINTS, SALT_SPLIT) {
            worst = worst.max(dbar_at(&g, &family, &pt, 1)?.residual);
        }
        let block = GcsBlock {
            source,
            w: tidy_form(&w),
            square: self.check(g.square.clone()),
            skew: self.check(g.skew.clone()),
            integrable: self.check(g.integrable.clone()),
            annihilation: self.check(eig.annihilation),
            bracket_closure: self.check(eig.bracket_closure),
            spectra,
            split: SplitBlock {
                family: "dq1^Phi".into(),
                points: SPLIT_POINTS,
                max_residual: worst,
                holds: worst <= SPLIT_TOL,
                tol: SPLIT_TOL,
            },
        };
        self.note(format!(
            "gcs ({source}): square {}, skew {}, integrable {}, d = del + dbar {}",
            word(&block.square),
            word(&block.skew),
            word(&block.integrable),
            block.split.holds
        ));
        self.report.gcs = Some(block);
        Ok(())
    }

    fn genfun(&mut self) -> Result<()> {
        let eq = &self.file.equation;
        let f = self.file.inputs.f.clone().ok_or(missing("f"))?;
        let generating = is_generating(eq, &f, &self.cfg)?;
        let ph = pluriharmonic_check(eq, &f, &self.cfg)?;
        let mut block = GenfunBlock {
            f: tidy(&f),
            is_generating: self.check(generating.clone()),
            pluriharmonic: self.check(ph.pluriharmonic),
            conjugate: None,
            g: None,
            g_source: None,
            level_set: None,
            uv: None,
        };
        if generating.is_zero() {
            let conj = conjugate(eq, &f, &self.cfg)?;
            let (g, src) = match &self.file.inputs.g {
                Some(g) => (g.clone(), "input"),
                None => (conj.clone(), "conjugate"),
            };
            let ls = level_set_check(eq, &f, &g, &self.cfg)?;
            let uv = uv_holomorphicity(eq, &f, &g, &self.cfg)?;
            block.conjugate = Some(tidy(&conj));
            block.g = Some(tidy(&g));
            block.g_source = Some(src);
            block.level_set = Some(LevelSetBlock {
                residual: ls.residual,
                sign: ls.sign,
                samples: ls.samples,
                rank_deficient: ls.rank_deficient.len(),
                passes: ls.passes(),
            });
            block.uv = Some(UvBlock {
                algebraic: self.check(uv.algebraic),
                pointwise: uv.pointwise,
                holomorphic: uv.holomorphic,
            });
            self.note(format!(
                "generating: true, conjugate g = {}, level set {}, fU + igV holomorphic {}",
                tidy(&conj),
                if ls.passes() { "ok" } else { "fails" },
                uv.holomorphic
            ));
        } else {
            self.note(format!("generating: {}", word(&block.is_generating)));
        }
        self.report.solutions = Some(block);
        Ok(())
    }

    fn conslaw(&mut self) -> Result<()> {
        let alpha = self.file.inputs.alpha.clone().ok_or(missing("alpha"))?;
        let law = conservation_decompose(&self.file.equation, &alpha, &self.cfg)?;
        self.note(format!("d(alpha) = f w + g Omega with f = {}, g = {}", tidy(&law.f), tidy(&law.g)));
        let residual = self.check(law.residual);
        self.report.conservation = Some(ConservationBlock {
            alpha: tidy_form(&alpha),
            f: tidy(&law.f),
            g: tidy(&law.g),
            residual,
        });
        Ok(())
    }

    fn kaehler(&mut self) -> Result<()> {
        let theta = self.file.inputs.theta.clone().ok_or(missing("theta"))?;
        let w = structure_form(&self.file.equation, &self.cfg)?;
        let om = canonical_symplectic();
        let t = algebraic_triple(&w, &om, &theta, &self.cfg)?;
        let closed = self.check(t.closed.clone());
        let mut block = KaehlerBlock {
            theta: tidy_form(&theta),
            lambda_sq: tidy(&t.lambda_sq),
            mu_sq: tidy(&t.mu_sq),
            closed,
            frame: None,
            hitchin: None,
        };
        let frame = quaternionic_frame(&t, &self.cfg)?;
        let mut counts = [0usize; 4];
        for pt in self.cfg.points(METRIC_POINTS, SALT_METRIC) {
            let k = match frame.metric_class(&pt) {
                Definiteness::Positive => 0,
                Definiteness::Negative => 1,
                Definiteness::Indefinite => 2,
                Definiteness::Singular => 3,
            };
            counts[k] += 1;
        }
        let fb = FrameBlock {
            squares: self.check(frame.checks.squares.clone()),
            display: self.check(frame.checks.display.clone()),
            symmetric: self.check(frame.checks.symmetric.clone()),
            splitting: self.check(frame.checks.splitting.clone()),
            i_plus: rows(&frame.i_plus),
            i_minus: rows(&frame.i_minus),
            nijenhuis_plus: self.check(nijenhuis(&frame.i_plus).is_zero(&self.cfg)),
            nijenhuis_minus: self.check(nijenhuis(&frame.i_minus).is_zero(&self.cfg)),
            metric: MetricBlock {
                samples: METRIC_POINTS,
                positive: counts[0],
                negative: counts[1],
                indefinite: counts[2],
                singular: counts[3],
                positive_fraction: counts[0] as f64 / METRIC_POINTS as f64,
            },
        };
        let b1 = &w - &om.scale(&ScalarExpr::i());
        let b2 = &-&w - &theta.scale(&ScalarExpr::i());
        let h = hitchin_commute_check(&b1, &b2, &self.cfg)?;
        let hb = HitchinBlock {
            difference: self.check(h.difference),
            conjugate_difference: self.check(h.conjugate_difference),
            closed: self.check(h.closed),
            commutator: h.commutator,
            holds: h.holds,
        };
        self.note(format!(
            "triple: lambda^2 = {}, mu^2 = {}, theta closed {}",
            tidy(&t.lambda_sq),
            tidy(&t.mu_sq),
            word(&block.closed)
        ));
        self.note(format!(
            "I+- squares {}, Nijenhuis(I+) {}, Nijenhuis(I-) {}, splitting {}, G positive at {}/{} points, Hitchin commute {}",
            word(&fb.squares),
            word(&fb.nijenhuis_plus),
            word(&fb.nijenhuis_minus),
            word(&fb.splitting),
            counts[0],
            METRIC_POINTS,
            hb.holds
        ));
        if t.closed.is_nonzero() {
            self.violation = Some(("theta is not closed".into(), t.closed.witness()));
        }
        block.frame = Some(fb);
        block.hitchin = Some(hb);
        self.report.kaehler = Some(block);
        Ok(())
    }
}

fn word(c: &Checked) -> &'static str {
    match c.verdict {
        Verdict::Zero => "ZERO",
        Verdict::NonZero { .. } => "NONZERO",
        Verdict::Inconclusive { .. } => "INCONCLUSIVE",
    }
}

fn rows(t: &Endo4) -> Vec<Vec<String>> {
    (0..4).map(|i| (0..4).map(|j| tidy(t.get(i, j))).collect()).collect()
}

/// Canonical polynomial form when the expression is a polynomial.
fn tidy(e: &ScalarExpr) -> String {
    match Poly::from_expr(e) {
        Some(p) => p.to_expr().to_string(),
        None => e.to_string(),
    }
}

fn tidy_form(w: &Form) -> String {
    w.map_coeffs(|c| Poly::from_expr(c).map_or_else(|| c.clone(), |p| p.to_expr())).to_string()
}

fn missing(name: &str) -> Error {
    Error::Config(format!("missing input `{name}` in [inputs]"))
}
