//! Exact arithmetic: rationals, elements of real quadratic fields, and
//! univariate polynomials and rational functions over them.

mod poly;
mod quad;
mod ratfun;

pub use poly::Poly;
pub use quad::{squarefree_decompose, QuadElem};
pub use ratfun::{poly_derivative, ratfun_equal, RatFun};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Unbounded rational number, always stored in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("incompatible radicands sqrt({0}) and sqrt({1})")]
    MixedRadicands(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("polynomials in different variables '{0}' and '{1}'")]
    MixedVariables(char, char),
    #[error("malformed quadratic element '{0}'")]
    Malformed(String),
}

/// Binary field operation selector used by [`qf_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field arithmetic on two quadratic elements.
pub fn qf_arith(op: FieldOp, x: &QuadElem, y: &QuadElem) -> Result<QuadElem, ExactError> {
    match op {
        FieldOp::Add => x.checked_add(y),
        FieldOp::Sub => x.checked_sub(y),
        FieldOp::Mul => x.checked_mul(y),
        FieldOp::Div => x.checked_div(y),
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Renders `p/q`, or just `p` for integers.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` with an optional leading sign.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let valid = |t: &str, signed: bool| {
        let body = if signed { t.strip_prefix('-').unwrap_or(t) } else { t };
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(n, true) || !valid(d, false) {
        return None;
    }
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Integer power of a rational, negative exponents allowed for nonzero bases.
pub fn rational_pow(r: &Rational, e: i64) -> Result<Rational, ExactError> {
    if e < 0 {
        if r.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        return rational_pow(&r.recip(), -e);
    }
    let mut acc = Rational::one();
    let mut base = r.clone();
    let mut e = e as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    Ok(acc)
}
