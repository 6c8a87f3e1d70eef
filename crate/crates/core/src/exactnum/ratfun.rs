use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{ExactError, Poly, QuadElem};

/// Quotient of two polynomials in one variable.
///
/// Only the denominator's leading coefficient is normalized (to 1) on
/// construction; common factors are cancelled lazily by [`RatFun::reduced`].
/// Equality is decided by cross-multiplication and never needs a GCD.
#[derive(Clone, Debug)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<Self, ExactError> {
        let lead = den.leading().ok_or(ExactError::DivisionByZero)?.clone();
        let inv = lead.checked_inv()?;
        Ok(RatFun {
            num: num.scale(&inv),
            den: den.scale(&inv),
        })
    }

    pub fn from_poly(p: Poly) -> Self {
        let var = p.variable();
        RatFun { num: p, den: Poly::one(var) }
    }

    pub fn constant(var: char, c: QuadElem) -> Self {
        Self::from_poly(Poly::constant(var, c))
    }

    pub fn zero(var: char) -> Self {
        Self::from_poly(Poly::zero(var))
    }

    pub fn one(var: char) -> Self {
        Self::from_poly(Poly::one(var))
    }

    pub fn var(var: char) -> Self {
        Self::from_poly(Poly::var(var))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn variable(&self) -> char {
        self.num.variable()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// Returns the constant value when the function does not depend on its variable.
    pub fn as_constant(&self) -> Option<QuadElem> {
        let r = self.reduced().ok()?;
        Some(&r.num.as_constant()? / &r.den.as_constant()?)
    }

    /// Exact equality `f.num * g.den == g.num * f.den`.
    pub fn equals(&self, other: &Self) -> bool {
        match (self.num.checked_mul(&other.den), other.num.checked_mul(&self.den)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        if self.den == other.den {
            return Self::new(self.num.checked_add(&other.num)?, self.den.clone());
        }
        let num = self
            .num
            .checked_mul(&other.den)?
            .checked_add(&other.num.checked_mul(&self.den)?)?;
        Self::new(num, self.den.checked_mul(&other.den)?)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        Self::new(self.num.checked_mul(&other.num)?, self.den.checked_mul(&other.den)?)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        if other.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Self::new(self.num.checked_mul(&other.den)?, self.den.checked_mul(&other.num)?)
    }

    pub fn scale(&self, c: &QuadElem) -> Self {
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i32) -> Result<Self, ExactError> {
        let base = if e < 0 {
            Self::one(self.variable()).checked_div(self)?
        } else {
            self.clone()
        };
        let mut acc = Self::one(self.variable());
        for _ in 0..e.unsigned_abs() {
            acc = acc.checked_mul(&base)?;
        }
        Ok(acc)
    }

    /// Quotient-rule derivative `(f/g)' = (f'g - fg')/g^2`.
    pub fn derivative(&self) -> Self {
        let num = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::new(num, &self.den * &self.den).expect("nonzero denominator")
    }

    /// Value at a point; fails where the denominator vanishes.
    pub fn eval(&self, x: &QuadElem) -> Result<QuadElem, ExactError> {
        self.num.eval(x).checked_div(&self.den.eval(x))
    }

    /// `f(var + c)`.
    pub fn shift(&self, c: &QuadElem) -> Self {
        Self::new(self.num.shift(c), self.den.shift(c)).expect("shift keeps the leading coefficient")
    }

    pub fn conj(&self) -> Self {
        Self::new(self.num.conj(), self.den.conj()).expect("conjugate of nonzero is nonzero")
    }

    /// Cancels the polynomial GCD of numerator and denominator.
    pub fn reduced(&self) -> Result<Self, ExactError> {
        if self.num.is_zero() {
            return Ok(Self::zero(self.variable()));
        }
        let g = self.num.gcd(&self.den)?;
        let (n, _) = self.num.div_rem(&g)?;
        let (d, _) = self.den.div_rem(&g)?;
        Self::new(n, d)
    }
}

/// Free-function form of [`RatFun::equals`].
pub fn ratfun_equal(f: &RatFun, g: &RatFun) -> bool {
    f.equals(g)
}

/// Free-function form of [`RatFun::derivative`].
pub fn poly_derivative(f: &RatFun) -> RatFun {
    f.derivative()
}

impl PartialEq for RatFun {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl Add<&RatFun> for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub<&RatFun> for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Mul<&RatFun> for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Div<&RatFun> for &RatFun {
    type Output = RatFun;
    fn div(self, rhs: &RatFun) -> RatFun {
        self.checked_div(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced().unwrap_or_else(|_| self.clone());
        if r.is_polynomial() {
            write!(f, "{}", r.num)
        } else {
            write!(f, "({})/({})", r.num, r.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints('x', c)
    }

    #[test]
    fn cancellation_equality() {
        let f = RatFun::new(p(&[-1, 0, 1]), p(&[-1, 1])).unwrap();
        let g = RatFun::from_poly(p(&[1, 1]));
        assert!(ratfun_equal(&f, &g));
        let g1 = &g + &RatFun::one('x');
        assert!(!ratfun_equal(&f, &g1));
        assert_eq!(f.reduced().unwrap().den(), &Poly::one('x'));
    }

    #[test]
    fn derivative_examples() {
        let cube = RatFun::from_poly(p(&[0, 0, 0, 1]));
        assert_eq!(poly_derivative(&cube), RatFun::from_poly(p(&[0, 0, 3])));
        let geo = RatFun::new(p(&[1]), p(&[1, -1])).unwrap();
        let expect = RatFun::new(p(&[1]), &p(&[1, -1]) * &p(&[1, -1])).unwrap();
        assert_eq!(poly_derivative(&geo), expect);
        let h = RatFun::new(p(&[0, 1]), p(&[1, 1])).unwrap();
        let expect = RatFun::new(p(&[1]), &p(&[1, 1]) * &p(&[1, 1])).unwrap();
        assert_eq!(poly_derivative(&h), expect);
    }

    #[test]
    fn constant_detection() {
        let f = RatFun::new(p(&[2, 2]), p(&[1, 1])).unwrap();
        assert_eq!(f.as_constant(), Some(QuadElem::from_int(2)));
        let h = RatFun::new(p(&[0, 1]), p(&[1, 1])).unwrap();
        assert_eq!(h.as_constant(), None);
        assert_eq!(h.eval(&QuadElem::from_int(1)).unwrap(), QuadElem::rational(rat(1, 2)));
    }
}
