//! Certified values of the right-hand-side constants and the closed forms
//! built from them.

mod arith;
mod bsplit;
mod closedform;
mod hurwitz;

pub use arith::{factorize, kronecker, normalize_discriminant};
pub use bsplit::{atan_inv, atanh_inv, pi_chudnovsky, pi_machin, pi_takano, zeta3};
pub use closedform::{closedform_eval, ClosedForm, Monomial};
pub use hurwitz::{bernoulli, hurwitz_zeta2, l_value};

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::exactnum::{fmt_rational, QuadElem, Rational};
use crate::precision::{bits_for_digits, Mag, embed_quad, ApproxReal, PrecisionError};
use crate::syntax::quad_expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstError {
    #[error("discriminant must be nonzero")]
    ZeroDiscriminant,
    #[error("{0} is not a discriminant (need d = 0 or 1 mod 4)")]
    InvalidDiscriminant(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
}

/// A basis constant appearing in closed forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstAtom {
    Pi,
    /// `L_d(2)` for a discriminant `d`; `G = L(-4)`, `K = L(-3)`.
    LValue(i64),
    /// `log r` for a positive rational `r`.
    Log(Rational),
    Zeta3,
    /// Positive square root of a positive element; integers are kept squarefree.
    Sqrt(QuadElem),
}

impl ConstAtom {
    pub fn catalan() -> Self {
        ConstAtom::LValue(-4)
    }

    pub fn k_const() -> Self {
        ConstAtom::LValue(-3)
    }

    fn rank(&self) -> u8 {
        match self {
            ConstAtom::Pi => 0,
            ConstAtom::Sqrt(_) => 1,
            ConstAtom::LValue(_) => 2,
            ConstAtom::Zeta3 => 3,
            ConstAtom::Log(_) => 4,
        }
    }

    /// Squarefree integer radicand, if this is `sqrt(n)` with integer `n`.
    pub fn sqrt_int(&self) -> Option<u64> {
        match self {
            ConstAtom::Sqrt(q) => q.as_rational().filter(|r| r.is_integer())?.to_integer().to_u64(),
            _ => None,
        }
    }
}

impl Ord for ConstAtom {
    fn cmp(&self, other: &Self) -> Ordering {
        use ConstAtom::*;
        self.rank().cmp(&other.rank()).then_with(|| match (self, other) {
            (LValue(a), LValue(b)) => a.abs().cmp(&b.abs()).then(a.cmp(b)),
            (Log(a), Log(b)) => a.cmp(b),
            (Sqrt(a), Sqrt(b)) => match (self.sqrt_int(), other.sqrt_int()) {
                (Some(x), Some(y)) => x.cmp(&y),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => a.to_string().cmp(&b.to_string()),
            },
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for ConstAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ConstAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstAtom::Pi => f.write_str("pi"),
            ConstAtom::LValue(-4) => f.write_str("G"),
            ConstAtom::LValue(-3) => f.write_str("K"),
            ConstAtom::LValue(d) => write!(f, "L({d})"),
            ConstAtom::Log(r) => write!(f, "log({})", fmt_rational(r)),
            ConstAtom::Zeta3 => f.write_str("zeta3"),
            ConstAtom::Sqrt(q) => write!(f, "sqrt({})", quad_expr(q)),
        }
    }
}

static CACHE: LazyLock<RwLock<HashMap<ConstAtom, ApproxReal>>> = LazyLock::new(Default::default);

/// Certified ball for `atom` with absolute radius at most `10^-digits`
/// (for atoms of moderate size).
pub fn const_eval(atom: &ConstAtom, digits: u32) -> Result<ApproxReal, ConstError> {
    const_eval_bits(atom, bits_for_digits(digits.max(1)))
}

/// As [`const_eval`] with the working precision given in bits.
pub fn const_eval_bits(atom: &ConstAtom, prec: u32) -> Result<ApproxReal, ConstError> {
    if let Some(v) = CACHE.read().expect("constant cache poisoned").get(atom) {
        if v.prec() >= prec {
            return Ok(v.clone().with_prec(prec));
        }
    }
    let v = compute(atom, prec)?;
    let mut cache = CACHE.write().expect("constant cache poisoned");
    let slot = cache.entry(atom.clone()).or_insert_with(|| v.clone());
    if slot.prec() < v.prec() {
        *slot = v.clone();
    }
    Ok(v)
}

fn compute(atom: &ConstAtom, prec: u32) -> Result<ApproxReal, ConstError> {
    Ok(match atom {
        ConstAtom::Pi => pi_machin(prec),
        ConstAtom::Zeta3 => zeta3(prec),
        ConstAtom::LValue(d) => hurwitz::l_value_bits(*d, prec)?,
        ConstAtom::Log(r) => log_rational(r, prec)?,
        ConstAtom::Sqrt(q) => {
            if q.signum() <= 0 {
                return Err(ConstError::InvalidArgument(format!("sqrt of non-positive {q}")));
            }
            sqrt_quad(q, prec)
        }
    })
}

/// Raises the working precision until cancellation in `a + b*sqrt(d)` no
/// longer spoils the requested radius.
fn sqrt_quad(q: &QuadElem, prec: u32) -> ApproxReal {
    let target = Mag::pow2(-i64::from(prec));
    let mut extra = 16u32;
    loop {
        if let Ok(r) = embed_quad(q, prec + extra).sqrt() {
            if r.radius() <= target {
                return r.with_prec(prec);
            }
        }
        extra *= 2;
    }
}

fn log_rational(r: &Rational, prec: u32) -> Result<ApproxReal, ConstError> {
    if !r.is_positive() {
        return Err(ConstError::InvalidArgument(format!("log of non-positive {}", fmt_rational(r))));
    }
    let to_u64 = |n: &BigInt| {
        n.to_u64()
            .ok_or_else(|| ConstError::InvalidArgument(format!("log argument {n} is too large")))
    };
    let (num, den) = (to_u64(r.numer())?, to_u64(r.denom())?);
    let w = prec + 8;
    let mut acc = ApproxReal::zero(w);
    for (n, sign) in [(num, 1i64), (den, -1)] {
        for (p, e) in factorize(n) {
            let lp = log_of_prime(p, w);
            acc = acc.add(&lp.mul_int(&BigInt::from(sign * i64::from(e))));
        }
    }
    Ok(acc.with_prec(prec))
}

fn log_of_prime(p: u64, prec: u32) -> ApproxReal {
    let atom = ConstAtom::Log(Rational::from_integer(BigInt::from(p)));
    if let Some(v) = CACHE.read().expect("constant cache poisoned").get(&atom) {
        if v.prec() >= prec {
            return v.clone().with_prec(prec);
        }
    }
    let v = bsplit::log_prime(p, prec, &mut log_of_prime);
    CACHE.write().expect("constant cache poisoned").insert(atom, v.clone());
    v
}

/// `pi^j` for small integer `j`, negative powers allowed.
pub fn pi_pow(j: i32, prec: u32) -> Result<ApproxReal, ConstError> {
    let pi = const_eval_bits(&ConstAtom::Pi, prec + 16)?;
    Ok(pi.pow_int(i64::from(j))?.with_prec(prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    #[test]
    fn sqrt_and_log_examples() {
        let s3 = const_eval(&ConstAtom::Sqrt(QuadElem::from_int(3)), 30).unwrap();
        assert_eq!(s3.mid_decimal(29), "1.73205080756887729352744634151");
        // Squared back-check.
        let back = s3.mul(&s3).sub(&ApproxReal::from_int(3, s3.prec()));
        assert!(back.abs_within_pow10(29));
        let l2 = const_eval(&ConstAtom::Log(rat(2, 1)), 30).unwrap();
        assert_eq!(l2.mid_decimal(30), "0.693147180559945309417232121458");
        let l32 = const_eval(&ConstAtom::Log(rat(3, 2)), 30).unwrap();
        assert_eq!(l32.mid_decimal(30), "0.405465108108164381978013115464");
    }

    #[test]
    fn cache_serves_lower_precision() {
        let hi = const_eval(&ConstAtom::Zeta3, 80).unwrap();
        let lo = const_eval(&ConstAtom::Zeta3, 20).unwrap();
        assert!(hi.overlaps(&lo));
        assert!(lo.radius_within_pow10(20));
    }

    #[test]
    fn atom_display() {
        assert_eq!(ConstAtom::catalan().to_string(), "G");
        assert_eq!(ConstAtom::LValue(-11).to_string(), "L(-11)");
        assert_eq!(ConstAtom::Log(rat(3, 2)).to_string(), "log(3/2)");
        let q: QuadElem = "1-1*sqrt(2)".parse().unwrap();
        assert_eq!(ConstAtom::Sqrt(q).to_string(), "sqrt(1 - sqrt(2))");
    }
}
