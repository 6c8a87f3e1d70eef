use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{fmt_rational, parse_rational, rational_pow, ExactError, Rational};

/// Writes `n = s^2 * f` with `f` squarefree. `n = 0` gives `(0, 1)`.
pub fn squarefree_decompose(n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 1);
    }
    let mut s = 1u64;
    let mut f = 1u64;
    let mut m = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            f *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (s, f * m)
}

/// Exact element `a + b*sqrt(d)` of the real quadratic field `Q(sqrt(d))`.
///
/// `d` is squarefree. Rational elements are normalized to `d = 1, b = 0`, so a
/// rational value mixes freely with any radicand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadElem {
    d: u64,
    a: Rational,
    b: Rational,
}

impl QuadElem {
    pub fn new(a: Rational, b: Rational, d: u64) -> Self {
        if d == 0 {
            return Self::rational(a);
        }
        let (s, f) = squarefree_decompose(d);
        let b = b * Rational::from_integer(BigInt::from(s));
        if f == 1 {
            return Self::rational(a + b);
        }
        if b.is_zero() {
            return Self::rational(a);
        }
        QuadElem { d: f, a, b }
    }

    pub fn rational(a: Rational) -> Self {
        QuadElem {
            d: 1,
            a,
            b: Rational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `sqrt(r)` for a non-negative rational `r`, as an exact field element.
    pub fn sqrt_rational(r: &Rational) -> Result<Self, ExactError> {
        if r.is_negative() {
            return Err(ExactError::Malformed(format!("sqrt({})", fmt_rational(r))));
        }
        // sqrt(p/q) = sqrt(p*q)/q
        let pq = r.numer() * r.denom();
        let pq: u64 = pq
            .try_into()
            .map_err(|_| ExactError::Malformed(format!("radicand too large: {}", fmt_rational(r))))?;
        let q = Rational::from_integer(r.denom().clone());
        Ok(Self::new(Rational::zero(), q.recip(), pq))
    }

    pub fn sqrt_int(n: u64) -> Self {
        Self::new(Rational::zero(), Rational::one(), n)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    fn common_radicand(&self, other: &Self) -> Result<u64, ExactError> {
        match (self.d, other.d) {
            (1, d) | (d, 1) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(ExactError::MixedRadicands(x, y)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.common_radicand(other)?;
        Ok(Self::new(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.common_radicand(other)?;
        Ok(Self::new(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.common_radicand(other)?;
        let dr = Rational::from_integer(BigInt::from(d));
        let a = &self.a * &other.a + &self.b * &other.b * dr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::new(a, b, d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        let inv = other.checked_inv()?;
        self.checked_mul(&inv)
    }

    pub fn checked_inv(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = self.norm();
        Ok(Self::new(&self.a / &n, -(&self.b / &n), self.d))
    }

    /// The nontrivial Galois automorphism `a + b sqrt(d) -> a - b sqrt(d)`.
    pub fn conj(&self) -> Self {
        QuadElem {
            d: self.d,
            a: self.a.clone(),
            b: -self.b.clone(),
        }
    }

    /// Field norm `a^2 - d b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(BigInt::from(self.d))
    }

    /// Exact sign of the real embedding with `sqrt(d) > 0`.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // Opposite signs: compare a^2 with b^2 d.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * Rational::from_integer(BigInt::from(self.d));
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact comparison of real embeddings. Fails only on mixed radicands.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, ExactError> {
        Ok(self.checked_sub(other)?.signum().cmp(&0))
    }

    pub fn pow(&self, e: i64) -> Result<Self, ExactError> {
        if self.is_rational() {
            return Ok(Self::rational(rational_pow(&self.a, e)?));
        }
        if e < 0 {
            return self.checked_inv()?.pow(-e);
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Bit size of the largest numerator/denominator, a rough measure of height.
    pub fn height_bits(&self) -> u64 {
        [
            self.a.numer().bits(),
            self.a.denom().bits(),
            self.b.numer().bits(),
            self.b.denom().bits(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }
}

fn sign_of(r: &Rational) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

impl From<Rational> for QuadElem {
    fn from(r: Rational) -> Self {
        Self::rational(r)
    }
}

impl From<i64> for QuadElem {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigInt> for QuadElem {
    fn from(n: BigInt) -> Self {
        Self::rational(Rational::from_integer(n))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&QuadElem> for &QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: &QuadElem) -> QuadElem {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{}", e))
            }
        }
        impl $tr<QuadElem> for QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: QuadElem) -> QuadElem {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QuadElem> for QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: &QuadElem) -> QuadElem {
                (&self).$method(rhs)
            }
        }
        impl $tr<QuadElem> for &QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: QuadElem) -> QuadElem {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem {
            d: self.d,
            a: -self.a.clone(),
            b: -self.b.clone(),
        }
    }
}

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        -&self
    }
}

/// Textual form `a`, `a+b*sqrt(d)`, `a-b*sqrt(d)` or `b*sqrt(d)` with `p/q`
/// rationals.
impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt({})", fmt_rational(&self.b), self.d);
        }
        let sep = if self.b.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{}*sqrt({})",
            fmt_rational(&self.a),
            sep,
            fmt_rational(&self.b.abs()),
            self.d
        )
    }
}

impl FromStr for QuadElem {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExactError::Malformed(s.to_string());
        let s = s.trim();
        let Some(body) = s.strip_suffix(')') else {
            return parse_rational(s).map(Self::rational).ok_or_else(bad);
        };
        let (head, radicand) = body.rsplit_once("*sqrt(").ok_or_else(bad)?;
        if radicand.is_empty() || !radicand.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let d: u64 = radicand.parse().map_err(|_| bad())?;
        // Split `head` into `a` and signed `b` at the last sign not in leading position.
        let split = head
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (a, b) = match split {
            Some(i) => {
                let a = parse_rational(&head[..i]).ok_or_else(bad)?;
                let b_text = &head[i..];
                let b_text = b_text.strip_prefix('+').unwrap_or(b_text);
                if b_text.starts_with("--") || b_text.starts_with("-+") || b_text.starts_with('+') {
                    return Err(bad());
                }
                (a, parse_rational(b_text).ok_or_else(bad)?)
            }
            None => (Rational::zero(), parse_rational(head).ok_or_else(bad)?),
        };
        Ok(Self::new(a, b, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{qf_arith, rat, FieldOp};

    fn q(a: i64, b: i64, d: u64) -> QuadElem {
        QuadElem::new(rat(a, 1), rat(b, 1), d)
    }

    #[test]
    fn multiplication_by_hand() {
        assert_eq!(q(1, 1, 2) * q(3, 1, 2), q(5, 4, 2));
    }

    #[test]
    fn add_zero_is_identity() {
        let x = q(7, -3, 5);
        assert_eq!(qf_arith(FieldOp::Add, &x, &QuadElem::zero()).unwrap(), x);
    }

    #[test]
    fn rationalized_division() {
        let r = qf_arith(FieldOp::Div, &QuadElem::one(), &q(12, -4, 5)).unwrap();
        assert_eq!(r, QuadElem::new(rat(3, 16), rat(1, 16), 5));
        assert_eq!(&r * &q(12, -4, 5), QuadElem::one());
    }

    #[test]
    fn division_by_zero_and_mixed_radicands() {
        assert_eq!(
            QuadElem::one().checked_div(&QuadElem::zero()),
            Err(ExactError::DivisionByZero)
        );
        assert_eq!(
            q(0, 1, 2).checked_add(&q(0, 1, 3)),
            Err(ExactError::MixedRadicands(2, 3))
        );
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(q(12, 4, 5).conj(), q(12, -4, 5));
        assert_eq!(QuadElem::from_int(7).conj(), QuadElem::from_int(7));
        let (x, y) = (q(1, 1, 2), q(3, 1, 2));
        assert_eq!((&x * &y).conj(), q(5, -4, 2));
        assert_eq!((&x * &y).conj(), x.conj() * y.conj());
    }

    #[test]
    fn radicand_is_normalized() {
        // sqrt(20) = 2 sqrt(5)
        assert_eq!(QuadElem::sqrt_int(20), q(0, 2, 5));
        assert_eq!(QuadElem::sqrt_int(49), QuadElem::from_int(7));
        assert_eq!(squarefree_decompose(720), (12, 5));
        let h = QuadElem::sqrt_rational(&rat(3, 4)).unwrap();
        assert_eq!(h, QuadElem::new(rat(0, 1), rat(1, 2), 3));
    }

    #[test]
    fn golden_ratio_eighth_power() {
        let phi = QuadElem::new(rat(1, 2), rat(1, 2), 5);
        let p8 = phi.pow(8).unwrap();
        assert_eq!(p8, &(QuadElem::from_int(21) * &phi) + &QuadElem::from_int(13));
    }

    #[test]
    fn exact_sign() {
        assert_eq!(q(12, -4, 5).signum(), 1);
        assert_eq!(q(1121, -338, 11).signum(), -1);
        assert_eq!(q(-3, 2, 2).signum(), -1);
        assert_eq!(QuadElem::zero().signum(), 0);
        assert_eq!(q(37102, -15147, 6).signum(), -1);
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "-7/3", "3/16+1/16*sqrt(5)", "12-4*sqrt(5)", "-2*sqrt(7)", "1/2-1/2*sqrt(5)"] {
            let x: QuadElem = s.parse().unwrap();
            assert_eq!(x.to_string(), s);
        }
        for s in ["", "1+", "sqrt(5)", "1+2*sqrt(-5)", "1/0", "1--2*sqrt(3)", "a"] {
            assert!(s.parse::<QuadElem>().is_err(), "{s}");
        }
    }
}
