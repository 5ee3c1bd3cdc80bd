//! Randomized identity testing.
//!
//! An expression is declared zero when it vanishes, up to a tolerance scaled
//! by the largest intermediate value, at every sample drawn from a box.
//! Points where evaluation is singular are redrawn a bounded number of times.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Coord, Point, ScalarExpr};

/// Per-coordinate sampling intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox(pub [(f64, f64); 4]);

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox([(-2.0, 2.0); 4])
    }
}

impl SampleBox {
    pub fn with(mut self, c: Coord, lo: f64, hi: f64) -> Self {
        self.0[c.index()] = (lo, hi);
        self
    }

    pub fn interval(&self, c: Coord) -> (f64, f64) {
        self.0[c.index()]
    }

    pub fn is_valid(&self) -> bool {
        self.0
            .iter()
            .all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point {
        let mut x = [0.0; 4];
        for (k, (lo, hi)) in self.0.iter().enumerate() {
            x[k] = if lo == hi { *lo } else { rng.random_range(*lo..*hi) };
        }
        Point(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub sample_box: SampleBox,
    pub atol: f64,
    pub rtol: f64,
    pub seed: u64,
    pub max_resample: usize,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 32,
            sample_box: SampleBox::default(),
            atol: 1e-9,
            rtol: 1e-9,
            seed: 0x5eed_cafe,
            max_resample: 8,
        }
    }
}

impl ZeroTestConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn with_box(mut self, c: Coord, lo: f64, hi: f64) -> Self {
        self.sample_box = self.sample_box.with(c, lo, hi);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.atol = tol;
        self.rtol = tol;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.samples >= 8
            && self.atol > 0.0
            && self.rtol > 0.0
            && self.sample_box.is_valid()
    }

    /// A deterministic generator; `salt` separates independent streams
    /// drawn under the same seed.
    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    /// `n` points from the sampling box.
    pub fn points(&self, n: usize, salt: u64) -> Vec<Point> {
        let mut rng = self.rng(salt);
        (0..n).map(|_| self.sample_box.draw(&mut rng)).collect()
    }

    pub fn draw_point(&self, rng: &mut ChaCha8Rng) -> Point {
        self.sample_box.draw(rng)
    }
}

/// Outcome of a randomized zero test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Zero,
    NonZero {
        witness: Point,
        /// Value at the witness as `[re, im]`.
        value: [f64; 2],
        /// Index of the offending expression for multi-expression tests.
        component: usize,
    },
    Inconclusive {
        singular: usize,
        total: usize,
    },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero)
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, Verdict::NonZero { .. })
    }

    pub fn witness(&self) -> Option<Point> {
        match self {
            Verdict::NonZero { witness, .. } => Some(*witness),
            _ => None,
        }
    }

    /// Combines verdicts of independent checks: any witness wins, then any
    /// inconclusive result.
    pub fn and(self, other: Verdict) -> Verdict {
        match (&self, &other) {
            (Verdict::NonZero { .. }, _) => self,
            (_, Verdict::NonZero { .. }) => other,
            (Verdict::Inconclusive { .. }, _) => self,
            (_, Verdict::Inconclusive { .. }) => other,
            _ => Verdict::Zero,
        }
    }
}

/// Randomized identity test for a single expression.
pub fn is_zero(e: &ScalarExpr, cfg: &ZeroTestConfig) -> Verdict {
    is_zero_all(std::slice::from_ref(e), cfg)
}

/// Tests that every expression vanishes; they share sample points, and a
/// point is singular if any of them is singular there.
pub fn is_zero_all(exprs: &[ScalarExpr], cfg: &ZeroTestConfig) -> Verdict {
    let live: Vec<(usize, &ScalarExpr)> = exprs
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_const_zero())
        .collect();
    if live.is_empty() {
        return Verdict::Zero;
    }
    // constant expressions need no sampling
    if live.iter().all(|(_, e)| e.as_const().is_some()) {
        for (k, e) in &live {
            let c = e.as_const().unwrap();
            if c.norm() > cfg.atol + cfg.rtol * c.norm() {
                return Verdict::NonZero {
                    witness: Point::origin(),
                    value: [c.re, c.im],
                    component: *k,
                };
            }
        }
        return Verdict::Zero;
    }
    let mut rng = cfg.rng(0);
    let mut singular = 0;
    for _ in 0..cfg.samples {
        let mut attempt = 0;
        loop {
            let pt = cfg.draw_point(&mut rng);
            match eval_all(&live, &pt) {
                Ok(vals) => {
                    for (k, v, scale) in vals {
                        if v.norm() > cfg.atol + cfg.rtol * scale {
                            return Verdict::NonZero {
                                witness: pt,
                                value: [v.re, v.im],
                                component: k,
                            };
                        }
                    }
                    break;
                }
                Err(_) => {
                    attempt += 1;
                    if attempt > cfg.max_resample {
                        singular += 1;
                        break;
                    }
                }
            }
        }
    }
    if 2 * singular > cfg.samples {
        Verdict::Inconclusive {
            singular,
            total: cfg.samples,
        }
    } else {
        Verdict::Zero
    }
}

fn eval_all(
    live: &[(usize, &ScalarExpr)],
    pt: &Point,
) -> Result<Vec<(usize, Complex64, f64)>, super::EvalError> {
    let mut ev = super::Evaluator::new(*pt);
    live.iter()
        .map(|(k, e)| ev.eval(e).map(|(v, s)| (*k, v, s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    #[test]
    fn commutativity_is_zero() {
        let e = parse_expr("p1*p2 - p2*p1").unwrap();
        assert_eq!(is_zero(&e, &cfg()), Verdict::Zero);
    }

    #[test]
    fn nonzero_has_witness() {
        let e = parse_expr("p1^2 - 1").unwrap();
        match is_zero(&e, &cfg()) {
            Verdict::NonZero { witness, value, .. } => {
                let p = witness.get(Coord::P1);
                assert!((p * p - 1.0 - value[0]).abs() < 1e-12);
                assert!(value[0].abs() > 1e-9);
            }
            v => panic!("expected witness, got {v:?}"),
        }
    }

    #[test]
    fn pythagoras() {
        let e = parse_expr("sin(q1)^2 + cos(q1)^2 - 1").unwrap();
        assert_eq!(is_zero(&e, &cfg()), Verdict::Zero);
    }

    #[test]
    fn mostly_singular_is_inconclusive() {
        let e = parse_expr("1/(p1 - p1)").unwrap();
        assert!(matches!(is_zero(&e, &cfg()), Verdict::Inconclusive { .. }));
    }

    #[test]
    fn deterministic_under_seed() {
        let e = parse_expr("q1*p2 - 0.3").unwrap();
        let c = cfg().with_seed(99);
        assert_eq!(is_zero(&e, &c), is_zero(&e, &c));
        assert_ne!(is_zero(&e, &c), is_zero(&e, &cfg().with_seed(100)));
    }

    #[test]
    fn singular_points_are_resampled() {
        // singular only on the measure-zero set p1 = 0
        let e = parse_expr("p1/p1 - 1").unwrap();
        assert_eq!(is_zero(&e, &cfg()), Verdict::Zero);
    }
}
