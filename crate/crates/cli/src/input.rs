//! Equation files: INI text with `[equation]`, `[analysis]` and `[inputs]`.

use ini::Ini;
use thiserror::Error;

use mage_core::expr::{parse_expr, Coord, ScalarExpr};
use mage_core::exterior::{parse_form, Form};
use mage_core::ma::MAEquation;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed file: {0}")]
    Syntax(String),
    #[error("[{section}] {key}: {message}")]
    Value {
        section: &'static str,
        key: String,
        message: String,
    },
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key {key} in [{section}]")]
    UnknownKey { section: &'static str, key: String },
    #[error("missing section [equation]")]
    MissingEquation,
    #[error("missing input `{0}` in [inputs]")]
    MissingInput(&'static str),
    #[error("invalid box `{0}`: expected coord=lo:hi with coord in q1,q2,p1,p2 and lo <= hi")]
    Box(String),
}

/// One `coord=lo:hi` interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    pub coord: Coord,
    pub lo: f64,
    pub hi: f64,
}

impl std::str::FromStr for BoxSpec {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, InputError> {
        let bad = || InputError::Box(s.to_string());
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let coord = Coord::ALL
            .into_iter()
            .find(|c| c.name() == name.trim())
            .ok_or_else(bad)?;
        let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad());
        }
        Ok(BoxSpec { coord, lo, hi })
    }
}

/// Settings from `[analysis]`; each may be overridden on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Analysis {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub boxes: Vec<BoxSpec>,
}

/// Optional inputs from `[inputs]`.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub f: Option<ScalarExpr>,
    pub g: Option<ScalarExpr>,
    pub alpha: Option<Form>,
    pub theta: Option<Form>,
}

#[derive(Debug, Clone)]
pub struct EquationFile {
    /// Coefficient sources as written, in the order `A..E`.
    pub coefficients: [String; 5],
    pub equation: MAEquation,
    pub analysis: Analysis,
    pub inputs: Inputs,
}

const COEFFS: [&str; 5] = ["A", "B", "C", "D", "E"];

impl EquationFile {
    pub fn read(path: &str) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, InputError> {
        let ini = Ini::load_from_str(text).map_err(|e| InputError::Syntax(e.to_string()))?;
        let mut coefficients = COEFFS.map(|_| "0".to_string());
        let mut seen_equation = false;
        let mut analysis = Analysis::default();
        let mut inputs = Inputs::default();
        for (section, props) in ini.iter() {
            match section {
                None if props.is_empty() => {}
                None => return Err(InputError::Syntax("keys outside any section".into())),
                Some("equation") => {
                    seen_equation = true;
                    for (key, value) in props.iter() {
                        let k = COEFFS
                            .iter()
                            .position(|c| c.eq_ignore_ascii_case(key))
                            .ok_or_else(|| InputError::UnknownKey {
                                section: "equation",
                                key: key.to_string(),
                            })?;
                        parse_expr(value).map_err(|e| value_error("equation", key, e))?;
                        coefficients[k] = value.trim().to_string();
                    }
                }
                Some("analysis") => {
                    for (key, value) in props.iter() {
                        let value = value.trim();
                        match key {
                            "seed" => analysis.seed = Some(value.parse().map_err(|e| value_error("analysis", key, e))?),
                            "samples" => {
                                analysis.samples = Some(value.parse().map_err(|e| value_error("analysis", key, e))?)
                            }
                            "tol" => analysis.tol = Some(value.parse().map_err(|e| value_error("analysis", key, e))?),
                            "box" => {
                                for spec in value.split_whitespace() {
                                    analysis.boxes.push(spec.parse()?);
                                }
                            }
                            _ => {
                                return Err(InputError::UnknownKey {
                                    section: "analysis",
                                    key: key.to_string(),
                                })
                            }
                        }
                    }
                }
                Some("inputs") => {
                    for (key, value) in props.iter() {
                        match key {
                            "f" => inputs.f = Some(parse_expr(value).map_err(|e| value_error("inputs", key, e))?),
                            "g" => inputs.g = Some(parse_expr(value).map_err(|e| value_error("inputs", key, e))?),
                            "alpha" => inputs.alpha = Some(form_of_degree(key, value, 1)?),
                            "theta" => inputs.theta = Some(form_of_degree(key, value, 2)?),
                            _ => {
                                return Err(InputError::UnknownKey {
                                    section: "inputs",
                                    key: key.to_string(),
                                })
                            }
                        }
                    }
                }
                Some(other) => return Err(InputError::UnknownSection(other.to_string())),
            }
        }
        if !seen_equation {
            return Err(InputError::MissingEquation);
        }
        let [a, b, c, d, e] = &coefficients;
        let equation = MAEquation::parse(a, b, c, d, e).map_err(|e| InputError::Syntax(e.to_string()))?;
        Ok(EquationFile {
            coefficients,
            equation,
            analysis,
            inputs,
        })
    }
}

fn value_error(section: &'static str, key: &str, e: impl std::fmt::Display) -> InputError {
    InputError::Value {
        section,
        key: key.to_string(),
        message: e.to_string(),
    }
}

fn form_of_degree(key: &str, value: &str, degree: usize) -> Result<Form, InputError> {
    let form = parse_form(value).map_err(|e| value_error("inputs", key, e))?;
    if form.degree() != degree && !form.is_structurally_zero() {
        return Err(value_error("inputs", key, format!("expected a {degree}-form")));
    }
    Ok(form)
}
