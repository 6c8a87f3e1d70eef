use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{ExactError, QuadElem};

/// Dense univariate polynomial with coefficients in a real quadratic field.
/// `coeffs[i]` is the coefficient of `var^i`; no trailing zeros are stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    var: char,
    coeffs: Vec<QuadElem>,
}

impl Poly {
    pub fn new(var: char, coeffs: Vec<QuadElem>) -> Self {
        let mut p = Poly { var, coeffs };
        p.trim();
        p
    }

    pub fn zero(var: char) -> Self {
        Poly { var, coeffs: Vec::new() }
    }

    pub fn constant(var: char, c: QuadElem) -> Self {
        Self::new(var, vec![c])
    }

    pub fn one(var: char) -> Self {
        Self::constant(var, QuadElem::one())
    }

    /// The polynomial `var`.
    pub fn var(var: char) -> Self {
        Self::new(var, vec![QuadElem::zero(), QuadElem::one()])
    }

    /// `u*var + v` for integers.
    pub fn linear(var: char, u: i64, v: i64) -> Self {
        Self::new(var, vec![QuadElem::from_int(v), QuadElem::from_int(u)])
    }

    pub fn from_ints(var: char, coeffs: &[i64]) -> Self {
        Self::new(var, coeffs.iter().map(|&c| QuadElem::from_int(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(QuadElem::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn variable(&self) -> char {
        self.var
    }

    pub fn with_variable(mut self, var: char) -> Self {
        self.var = var;
        self
    }

    pub fn coeffs(&self) -> &[QuadElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> QuadElem {
        self.coeffs.get(i).cloned().unwrap_or_else(QuadElem::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&QuadElem> {
        self.coeffs.last()
    }

    pub fn as_constant(&self) -> Option<QuadElem> {
        match self.coeffs.len() {
            0 => Some(QuadElem::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).checked_add(&other.coeff(i))?);
        }
        Ok(Self::new(self.var, out))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.var));
        }
        let mut out = vec![QuadElem::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].checked_add(&a.checked_mul(b)?)?;
            }
        }
        Ok(Self::new(self.var, out))
    }

    pub fn scale(&self, c: &QuadElem) -> Self {
        Self::new(self.var, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.var);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &QuadElem) -> QuadElem {
        let mut acc = QuadElem::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn eval_int(&self, x: i64) -> QuadElem {
        self.eval(&QuadElem::from_int(x))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &QuadElem::from_int(i as i64))
            .collect();
        Self::new(self.var, coeffs)
    }

    /// `p(var + c)`, computed by repeated synthetic division.
    pub fn shift(&self, c: &QuadElem) -> Self {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = &a[j + 1] * c;
                a[j] = &a[j] + &t;
            }
        }
        Self::new(self.var, a)
    }

    /// Euclidean division over the coefficient field.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), ExactError> {
        let dd = divisor.degree().ok_or(ExactError::DivisionByZero)?;
        let lead = divisor.leading().expect("nonzero").clone();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![QuadElem::zero(); rem.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = rem.last().expect("nonempty").checked_div(&lead)?;
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] = rem[shift + i].checked_sub(&c.checked_mul(dc)?)?;
            }
            quo[shift] = c;
            rem.pop();
            while rem.last().is_some_and(QuadElem::is_zero) {
                rem.pop();
            }
        }
        Ok((Self::new(self.var, quo), Self::new(self.var, rem)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Result<Self, ExactError> {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Result<Self, ExactError> {
        match self.leading() {
            None => Ok(self.clone()),
            Some(l) => {
                let inv = l.checked_inv()?;
                Ok(self.scale(&inv))
            }
        }
    }

    pub fn conj(&self) -> Self {
        Self::new(self.var, self.coeffs.iter().map(QuadElem::conj).collect())
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.var, self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let text = c.to_string();
            let coeff = if c.is_rational() { text } else { format!("({text})") };
            match i {
                0 => write!(f, "{coeff}")?,
                1 => write!(f, "{coeff}*{}", self.var)?,
                _ => write!(f, "{coeff}*{}^{i}", self.var)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matches_evaluation() {
        let p = Poly::from_ints('k', &[22, 78, 63]);
        let s = p.shift(&QuadElem::from_int(3));
        for x in -4..5 {
            assert_eq!(s.eval_int(x), p.eval_int(x + 3));
        }
    }

    #[test]
    fn gcd_of_shared_factor() {
        let a = &Poly::from_ints('x', &[-1, 1]) * &Poly::from_ints('x', &[1, 1]);
        let b = &Poly::from_ints('x', &[-1, 1]) * &Poly::from_ints('x', &[2, 1]);
        assert_eq!(a.gcd(&b).unwrap(), Poly::from_ints('x', &[-1, 1]));
    }

    #[test]
    fn derivative_of_cube() {
        assert_eq!(Poly::from_ints('x', &[0, 0, 0, 1]).derivative(), Poly::from_ints('x', &[0, 0, 3]));
    }
}
