//! Symbolic-numeric engine for Monge-Ampère equations in two variables and
//! the generalized complex geometry they induce on `T*ℝ²`.
//!
//! Identities are certified by seeded randomized zero tests that return a
//! [`expr::Verdict`]; failures carry a witness point.
//!
//! ```
//! use mage_core::expr::{parse_expr, ZeroTestConfig};
//! use mage_core::ma::{classify, GlobalClass, MAEquation};
//! use mage_core::solutions::is_generating;
//!
//! let cfg = ZeroTestConfig::default();
//! let eq = MAEquation::laplace();
//! assert_eq!(classify(&eq, &cfg).verdict, GlobalClass::Elliptic);
//! let f = parse_expr("q1*p2 - q2*p1").unwrap();
//! assert!(is_generating(&eq, &f, &cfg).unwrap().is_zero());
//! ```

pub mod error;
pub mod expr;
pub mod exterior;
pub mod gcs;
pub mod kaehler;
pub mod ma;
pub mod solutions;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/equations.md")]
    mod equations {}
    #[doc = include_str!("../../../book/src/gcs.md")]
    mod gcs {}
    #[doc = include_str!("../../../book/src/solutions.md")]
    mod solutions {}
    #[doc = include_str!("../../../book/src/kaehler.md")]
    mod kaehler {}
}
