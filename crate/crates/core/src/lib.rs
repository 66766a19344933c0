//! Numerical laboratory for Bishop operators `T f(x) = x f({x + α})` and their
//! weighted relatives `φ(x) f({x + α})` on `L^p([0, 1])`.
//!
//! The crate covers exact rotations and quadrature ([`numerics`]), operator
//! iterates and power norms ([`operator`]), the determinant criterion for
//! cyclicity at rational α and the constructive approximation algorithm
//! ([`cyclicity`]), continued fractions and gap conditions ([`diophantine`]),
//! the bank/δ/ψ pipeline that produces irrational parameters ([`psi`]), and
//! a set of probes for structural claims ([`probes`]).

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cyclicity;
pub mod diophantine;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod numerics;
pub mod operator;
pub mod probes;
pub mod psi;

pub use error::{Error, Result};
pub use expr::{parse_function, FuncExpr};
pub use numerics::{AlphaValue, GridSpec, MeasureEstimate};
pub use operator::OperatorSpec;
