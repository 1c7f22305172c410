//! Exact scalars: parameter polynomials, Laurent polynomials in `s = t^(1/2)`
//! and the rational functions that all invariants live in.

mod laurent;
mod param;
mod qpoly;
mod ratfunc;

pub use laurent::HalfLaurent;
pub use param::{Monomial, Param, ParamPoly, PARAM_NAMES};
pub use qpoly::{cyclotomic, QPoly};
pub use ratfunc::{quantum_integer, sign_pow, t_geometric, RatFunc};

/// Exact rationals.
pub type Q = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parameters are not allowed in a denominator: {0}")]
    ParamInDenominator(String),
    #[error("pole at t = 1 in {0}")]
    PoleAtOne(String),
}

/// Shorthand for a rational `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}
