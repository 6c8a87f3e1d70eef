//! Rational combinations of products of basis constants.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{const_eval_bits, normalize_discriminant, ConstAtom, ConstError};
use crate::exactnum::{fmt_rational, rational_pow, squarefree_decompose, QuadElem, Rational};
use crate::precision::{bits_for_digits, ApproxReal, Mag};
use crate::syntax::{eval_quad, parse_expr, BinOp, Expr};

/// Product of atoms with nonzero integer exponents.
pub type Monomial = BTreeMap<ConstAtom, i32>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClosedForm {
    terms: BTreeMap<Monomial, Rational>,
}

impl ClosedForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(r: Rational) -> Self {
        Self::term(r, Monomial::new())
    }

    pub fn atom(a: ConstAtom) -> Self {
        Self::term(Rational::one(), Monomial::from([(a, 1)]))
    }

    /// `c * m`, with the monomial normalized.
    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut out = Self::zero();
        out.push(c, m);
        out
    }

    /// `sqrt(q)` for a positive element; rational radicands are made squarefree.
    pub fn sqrt(q: &QuadElem) -> Result<Self, ConstError> {
        if q.signum() < 0 {
            return Err(ConstError::InvalidArgument(format!("sqrt of negative {q}")));
        }
        if q.is_zero() {
            return Ok(Self::zero());
        }
        match q.as_rational() {
            Some(r) => {
                let s = QuadElem::sqrt_rational(r).map_err(|e| ConstError::InvalidArgument(e.to_string()))?;
                if s.is_rational() {
                    return Ok(Self::constant(s.a().clone()));
                }
                let atom = ConstAtom::Sqrt(QuadElem::from_int(s.d() as i64));
                Ok(Self::term(s.b().clone(), Monomial::from([(atom, 1)])))
            }
            None => Ok(Self::atom(ConstAtom::Sqrt(q.clone()))),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sole term, if there is exactly one.
    pub fn single(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn push(&mut self, c: Rational, m: Monomial) {
        let (k, m) = normalize(m);
        let c = c * k;
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.push(c.clone(), m.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.push(c * r, m.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (a, e) in m2 {
                    *m.entry(a.clone()).or_insert(0) += e;
                }
                out.push(c1 * c2, m);
            }
        }
        out
    }

    /// Inverse of a single nonzero term.
    pub fn recip(&self) -> Result<Self, ConstError> {
        let (m, c) = self
            .single()
            .ok_or_else(|| ConstError::InvalidArgument(format!("cannot divide by the sum '{self}'")))?;
        let inv: Monomial = m.iter().map(|(a, e)| (a.clone(), -e)).collect();
        Ok(Self::term(c.recip(), inv))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ConstError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self, ConstError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::constant(Rational::one());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn from_expr(e: &Expr) -> Result<Self, ConstError> {
        let bad = |m: String| ConstError::InvalidArgument(m);
        match e {
            Expr::Int(n) => Ok(Self::constant(Rational::from_integer(n.clone()))),
            Expr::Neg(x) => Ok(Self::from_expr(x)?.neg()),
            Expr::Ident(s) => match s.as_str() {
                "pi" => Ok(Self::atom(ConstAtom::Pi)),
                "G" => Ok(Self::atom(ConstAtom::catalan())),
                "K" => Ok(Self::atom(ConstAtom::k_const())),
                "zeta3" => Ok(Self::atom(ConstAtom::Zeta3)),
                other => Err(bad(format!("'{other}' is not a constant"))),
            },
            Expr::Call(name, args) => {
                let [arg] = args.as_slice() else {
                    return Err(bad(format!("'{name}' takes one argument")));
                };
                let q = || eval_quad(arg).map_err(bad);
                let rational = || {
                    q()?.as_rational()
                        .cloned()
                        .ok_or_else(|| bad(format!("argument of '{name}' must be rational")))
                };
                match name.as_str() {
                    "sqrt" => Self::sqrt(&q()?),
                    "log" => {
                        let r = rational()?;
                        if !r.is_positive() {
                            return Err(bad(format!("log of non-positive {}", fmt_rational(&r))));
                        }
                        if r.is_one() {
                            return Ok(Self::zero());
                        }
                        Ok(Self::atom(ConstAtom::Log(r)))
                    }
                    "L" => {
                        let r = rational()?;
                        let d = r
                            .is_integer()
                            .then(|| r.to_integer().to_i64())
                            .flatten()
                            .ok_or_else(|| bad(format!("L needs an integer, got {}", fmt_rational(&r))))?;
                        Ok(Self::atom(ConstAtom::LValue(normalize_discriminant(d)?)))
                    }
                    other => Err(bad(format!("'{other}' is not allowed in a closed form"))),
                }
            }
            Expr::Bin(op, a, b) => {
                if *op == BinOp::Pow {
                    let n = b.as_int().ok_or_else(|| bad("exponent must be an integer".into()))?;
                    return Self::from_expr(a)?.pow(n);
                }
                let (x, y) = (Self::from_expr(a)?, Self::from_expr(b)?);
                match op {
                    BinOp::Add => Ok(x.add(&y)),
                    BinOp::Sub => Ok(x.sub(&y)),
                    BinOp::Mul => Ok(x.mul(&y)),
                    BinOp::Div => x.div(&y),
                    BinOp::Pow => unreachable!(),
                }
            }
        }
    }

    /// Certified value with absolute radius at most `2^-prec`.
    pub fn eval_bits(&self, prec: u32) -> Result<ApproxReal, ConstError> {
        if self.is_zero() {
            return Ok(ApproxReal::zero(prec));
        }
        let target = Mag::pow2(-i64::from(prec));
        let height = self
            .terms
            .values()
            .map(|c| c.numer().bits().saturating_sub(c.denom().bits()))
            .max()
            .unwrap_or(0) as u32;
        let mut extra = 32 + height;
        loop {
            let w = prec + extra;
            let mut acc = ApproxReal::zero(w);
            for (m, c) in &self.terms {
                let mut t = ApproxReal::from_rational(c, w);
                for (a, e) in m {
                    let v = const_eval_bits(a, w + 8)?.pow_int(i64::from(*e))?;
                    t = t.mul(&v);
                }
                acc = acc.add(&t);
            }
            if acc.radius() <= target || extra > 8 * prec + 256 {
                return Ok(acc.with_prec(prec));
            }
            extra *= 2;
        }
    }

    /// Value of a single-term form's monomial without its coefficient.
    pub fn monomial_value(m: &Monomial, prec: u32) -> Result<ApproxReal, ConstError> {
        Self::term(Rational::one(), m.clone()).eval_bits(prec)
    }
}

/// Merges integer square roots into one squarefree radicand and reduces
/// their exponents mod 2; returns the rational factor pulled out.
fn normalize(m: Monomial) -> (Rational, Monomial) {
    let mut k = Rational::one();
    let mut out = Monomial::new();
    let mut radicand = 1u64;
    for (a, e) in m {
        if e == 0 {
            continue;
        }
        match a.sqrt_int() {
            Some(n) => {
                let n_r = Rational::from_integer(BigInt::from(n));
                k *= rational_pow(&n_r, i64::from(e.div_euclid(2))).expect("nonzero radicand");
                if e.rem_euclid(2) == 1 {
                    match radicand.checked_mul(n) {
                        Some(p) => radicand = p,
                        None => {
                            out.insert(a, 1);
                        }
                    }
                }
            }
            None => {
                out.insert(a, e);
            }
        }
    }
    if radicand > 1 {
        let (s, f) = squarefree_decompose(radicand);
        k *= Rational::from_integer(BigInt::from(s));
        if f > 1 {
            out.insert(ConstAtom::Sqrt(QuadElem::from_int(f as i64)), 1);
        }
    }
    (k, out)
}

/// Certified ball for a closed form, radius at most `10^-digits`.
pub fn closedform_eval(cf: &ClosedForm, digits: u32) -> Result<ApproxReal, ConstError> {
    cf.eval_bits(bits_for_digits(digits.max(1)))
}

fn write_atom_power(f: &mut fmt::Formatter<'_>, a: &ConstAtom, e: i32) -> fmt::Result {
    if e == 1 {
        write!(f, "{a}")
    } else {
        write!(f, "{a}^{e}")
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, c: &Rational, m: &Monomial) -> fmt::Result {
    let num: Vec<_> = m.iter().filter(|(_, e)| **e > 0).collect();
    let den: Vec<_> = m.iter().filter(|(_, e)| **e < 0).collect();
    let mut first = true;
    if !c.is_one() || num.is_empty() {
        write!(f, "{}", fmt_rational(c))?;
        first = false;
    }
    for (a, e) in num {
        if !first {
            f.write_str("*")?;
        }
        write_atom_power(f, a, *e)?;
        first = false;
    }
    for (a, e) in den {
        f.write_str("/")?;
        write_atom_power(f, a, -e)?;
    }
    Ok(())
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            write_term(f, &mag, m)?;
        }
        Ok(())
    }
}

impl FromStr for ClosedForm {
    type Err = ConstError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let e = parse_expr(s).map_err(|e| ConstError::InvalidArgument(e.to_string()))?;
        Self::from_expr(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::precision::ApproxReal;

    fn cf(s: &str) -> ClosedForm {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_text() {
        assert_eq!(cf("3*pi/2").to_string(), "3/2*pi");
        assert_eq!(cf("32/27*sqrt(3)").to_string(), "32/27*sqrt(3)");
        assert_eq!(cf("sqrt(12)").to_string(), "2*sqrt(3)");
        assert_eq!(cf("sqrt(3/4)").to_string(), "1/2*sqrt(3)");
        assert_eq!(cf("sqrt(2)*sqrt(6)").to_string(), "2*sqrt(3)");
        assert_eq!(cf("555*zeta3/(77*pi)").to_string(), "555/77*zeta3/pi");
        assert_eq!(cf("-pi^2/6 + 1").to_string(), "1 - 1/6*pi^2");
        assert_eq!(cf("L(-1)").to_string(), "G");
        assert_eq!(cf("log(1)").to_string(), "0");
        let big = cf("320*(11/3*sqrt(33)*L(-11) - 27*K)");
        assert_eq!(big.to_string(), "3520/3*sqrt(33)*L(-11) - 8640*K");
        for c in [big, cf("555/77*zeta3/pi"), cf("1 - 1/6*pi^2"), cf("sqrt(7*(1-1728*(1/3-1/5*sqrt(7))))*pi")] {
            assert_eq!(cf(&c.to_string()), c);
        }
    }

    #[test]
    fn rejects_bad_forms() {
        assert!("1/(pi + 1)".parse::<ClosedForm>().is_err());
        assert!("L(-2)".parse::<ClosedForm>().is_ok());
        assert!("L(1/2)".parse::<ClosedForm>().is_err());
        assert!("log(-2)".parse::<ClosedForm>().is_err());
        assert!("H(k,1)".parse::<ClosedForm>().is_err());
        assert!("sqrt(-3)".parse::<ClosedForm>().is_err());
    }

    #[test]
    fn evaluation_examples() {
        let v = closedform_eval(&cf("3/2*pi"), 30).unwrap();
        assert_eq!(v.mid_decimal(30), "4.712388980384689857693965074919");
        assert!(v.radius_within_pow10(30));
        let v = closedform_eval(&cf("32/27*sqrt(3)"), 30).unwrap();
        assert_eq!(v.mid_decimal(27), "2.052800957118669384921417886");
        let z = closedform_eval(&ClosedForm::zero(), 30).unwrap();
        assert!(z.is_exact() && z.mid_is_zero());
    }

    #[test]
    fn sqrt_powers_reduce() {
        let s = ClosedForm::sqrt(&QuadElem::from_int(3)).unwrap();
        assert_eq!(s.pow(2).unwrap(), ClosedForm::constant(rat(3, 1)));
        assert_eq!(s.pow(-1).unwrap().to_string(), "1/3*sqrt(3)");
        let check = s.pow(3).unwrap().eval_bits(100).unwrap();
        let direct = ApproxReal::from_int(27, 120).sqrt().unwrap();
        assert!(check.overlaps(&direct));
    }
}
