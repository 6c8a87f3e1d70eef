//! Arbitrary-precision real arithmetic with rigorous error radii.
//!
//! An [`ApproxReal`] is a ball `[mid - rad, mid + rad]` with a binary
//! midpoint `man * 2^exp` and a [`Mag`] radius. Every operation returns a ball
//! containing the image of every point of its inputs; midpoints are rounded to
//! the working precision and the rounding error is folded into the radius.

mod mag;

pub use mag::Mag;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{QuadElem, Rational};

/// Returned by [`to_digits`] for balls with zero radius.
pub const EXACT_DIGITS: i64 = 1_000_000;

/// Guard bits added on top of the bits implied by a decimal digit request.
pub const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrecisionError {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("square root of an interval containing negative numbers")]
    NegativeSqrt,
}

/// Bits of working precision for a decimal digit request.
pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
}

#[derive(Clone, Debug)]
pub struct ApproxReal {
    man: BigInt,
    exp: i64,
    rad: Mag,
    prec: u32,
}

fn bits(x: &BigInt) -> i64 {
    x.bits() as i64
}

impl ApproxReal {
    pub fn zero(prec: u32) -> Self {
        ApproxReal {
            man: BigInt::zero(),
            exp: 0,
            rad: Mag::ZERO,
            prec,
        }
    }

    pub fn from_int(n: impl Into<BigInt>, prec: u32) -> Self {
        ApproxReal {
            man: n.into(),
            exp: 0,
            rad: Mag::ZERO,
            prec,
        }
        .rounded()
    }

    /// Ball around `man * 2^exp` with the given radius.
    pub fn from_parts(man: BigInt, exp: i64, rad: Mag, prec: u32) -> Self {
        ApproxReal { man, exp, rad, prec }.rounded()
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        let (p, q) = (r.numer(), r.denom());
        if p.is_zero() {
            return Self::zero(prec);
        }
        if q.is_one() {
            return Self::from_int(p.clone(), prec);
        }
        let s = i64::from(prec) + 2 + bits(q) - bits(p);
        let (quot, rem) = if s >= 0 {
            num_integer::Integer::div_rem(&(p << s as u64), q)
        } else {
            num_integer::Integer::div_rem(p, &(q << (-s) as u64))
        };
        let rad = if rem.is_zero() { Mag::ZERO } else { Mag::pow2(-s) };
        ApproxReal {
            man: quot,
            exp: -s,
            rad,
            prec,
        }
        .rounded()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = prec;
        self.rounded()
    }

    pub fn radius(&self) -> Mag {
        self.rad
    }

    pub fn add_error(mut self, err: Mag) -> Self {
        self.rad = self.rad.add_up(err);
        self
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn mid_is_zero(&self) -> bool {
        self.man.is_zero()
    }

    /// Upper bound of `|x|` over the ball.
    pub fn abs_upper(&self) -> Mag {
        Mag::from_big_up(&self.man, self.exp).add_up(self.rad)
    }

    /// Lower bound of `|x|` over the ball (zero if the ball contains zero).
    pub fn abs_lower(&self) -> Mag {
        Mag::from_big_down(&self.man, self.exp).sub_down(self.rad)
    }

    pub fn mid_abs(&self) -> Mag {
        Mag::from_big_up(&self.man, self.exp)
    }

    pub fn contains_zero(&self) -> bool {
        Mag::from_big_down(&self.man, self.exp) <= self.rad
    }

    /// Sign of every point of the ball, or `None` if it straddles zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.man.is_zero() && self.rad.is_zero() {
            return Some(Ordering::Equal);
        }
        if self.contains_zero() {
            return None;
        }
        Some(if self.man.is_positive() { Ordering::Greater } else { Ordering::Less })
    }

    fn rounded(mut self) -> Self {
        let b = bits(&self.man);
        let p = i64::from(self.prec.max(8));
        if b > p {
            let s = b - p;
            let mag = self.man.magnitude();
            let lost = mag.trailing_zeros().is_some_and(|tz| (tz as i64) < s);
            let kept = mag >> (s as u64);
            self.man = BigInt::from_biguint(self.man.sign(), kept);
            self.exp += s;
            if lost {
                self.rad = self.rad.add_up(Mag::pow2(self.exp));
            }
        }
        if self.man.is_zero() {
            self.exp = 0;
        }
        self
    }

    pub fn neg(&self) -> Self {
        ApproxReal {
            man: -&self.man,
            exp: self.exp,
            rad: self.rad,
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Self {
        if self.man.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        if other.man.is_zero() {
            return ApproxReal {
                rad: self.rad.add_up(other.rad),
                prec,
                ..self.clone()
            }
            .rounded();
        }
        if self.man.is_zero() {
            return ApproxReal {
                rad: other.rad.add_up(self.rad),
                prec,
                ..other.clone()
            }
            .rounded();
        }
        let top = (self.exp + bits(&self.man)).max(other.exp + bits(&other.man));
        let floor = top - i64::from(prec) - 16;
        let e = self.exp.min(other.exp).max(floor);
        let mut rad = self.rad.add_up(other.rad);
        let mut align = |x: &BigInt, ex: i64| -> BigInt {
            if ex >= e {
                x << (ex - e) as u64
            } else {
                let s = (e - ex) as u64;
                rad = rad.add_up(Mag::pow2(e));
                x >> s
            }
        };
        let a = align(&self.man, self.exp);
        let b = align(&other.man, other.exp);
        ApproxReal {
            man: a + b,
            exp: e,
            rad,
            prec,
        }
        .rounded()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        let ma = self.mid_abs();
        let mb = other.mid_abs();
        let rad = ma
            .mul_up(other.rad)
            .add_up(mb.mul_up(self.rad))
            .add_up(self.rad.mul_up(other.rad));
        ApproxReal {
            man: &self.man * &other.man,
            exp: self.exp + other.exp,
            rad,
            prec,
        }
        .rounded()
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        if r.denom().is_one() {
            self.mul_int(r.numer())
        } else {
            self.mul(&Self::from_rational(r, self.prec))
        }
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        let nm = Mag::from_big_up(n, 0);
        ApproxReal {
            man: &self.man * n,
            exp: self.exp,
            rad: self.rad.mul_up(nm),
            prec: self.prec,
        }
        .rounded()
    }

    pub fn mul_2exp(&self, e: i64) -> Self {
        ApproxReal {
            man: self.man.clone(),
            exp: if self.man.is_zero() { 0 } else { self.exp + e },
            rad: self.rad.mul_2exp(e),
            prec: self.prec,
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PrecisionError> {
        let prec = self.prec.max(other.prec);
        let b_low = other.abs_lower();
        if b_low.is_zero() {
            return Err(PrecisionError::DivisionByZero);
        }
        if self.man.is_zero() {
            let rad = if self.rad.is_zero() { Mag::ZERO } else { self.rad.div_up(b_low) };
            return Ok(ApproxReal {
                man: BigInt::zero(),
                exp: 0,
                rad,
                prec,
            });
        }
        let s = i64::from(prec) + 4 + bits(&other.man) - bits(&self.man);
        let quot = if s >= 0 {
            &(&self.man << s as u64) / &other.man
        } else {
            &self.man / &(&other.man << (-s) as u64)
        };
        let exp = self.exp - other.exp - s;
        // |a/b - ma/mb| <= (ra + |ma/mb| rb) / (|mb| - rb)
        let q_up = Mag::from_big_up(&quot, exp).add_up(Mag::pow2(exp));
        let mut rad = Mag::pow2(exp);
        if !self.rad.is_zero() || !other.rad.is_zero() {
            let num = self.rad.add_up(q_up.mul_up(other.rad));
            rad = rad.add_up(num.div_up(b_low));
        }
        Ok(ApproxReal {
            man: quot,
            exp,
            rad,
            prec,
        }
        .rounded())
    }

    pub fn recip(&self) -> Result<Self, PrecisionError> {
        Self::from_int(1, self.prec).div(self)
    }

    pub fn div_int(&self, n: i64) -> Result<Self, PrecisionError> {
        self.div(&Self::from_int(n, self.prec))
    }

    pub fn sqrt(&self) -> Result<Self, PrecisionError> {
        if self.man.is_negative() || Mag::from_big_down(&self.man, self.exp) < self.rad {
            if self.man.is_zero() && self.rad.is_zero() {
                return Ok(self.clone());
            }
            return Err(PrecisionError::NegativeSqrt);
        }
        if self.man.is_zero() {
            return Ok(self.clone());
        }
        let prec = i64::from(self.prec);
        let mut shift = (2 * prec + 8 - bits(&self.man)).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let scaled = (&self.man << shift as u64).magnitude().clone();
        let root = BigInt::from(scaled.sqrt());
        let exp = (self.exp - shift) / 2;
        let mut rad = Mag::pow2(exp);
        if !self.rad.is_zero() {
            // |sqrt(x) - sqrt(m)| <= r / sqrt(m)
            let sm = Mag::from_big_down(&self.man, self.exp).sqrt_down();
            rad = rad.add_up(self.rad.div_up(sm));
        }
        Ok(ApproxReal {
            man: root,
            exp,
            rad,
            prec: self.prec,
        }
        .rounded())
    }

    pub fn pow_int(&self, e: i64) -> Result<Self, PrecisionError> {
        if e < 0 {
            return self.recip()?.pow_int(-e);
        }
        let mut acc = Self::from_int(1, self.prec);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Midpoint as an `f64` (lossy, for diagnostics).
    pub fn to_f64(&self) -> f64 {
        if self.man.is_zero() {
            return 0.0;
        }
        let b = bits(&self.man);
        let s = (b - 60).max(0);
        let top: i64 = (&self.man >> s as u64).try_into().unwrap_or(0);
        (top as f64) * 2f64.powi((self.exp + s).clamp(-1100, 1100) as i32)
    }

    /// `log10` of the radius, `-inf` when exact.
    pub fn radius_log10(&self) -> f64 {
        self.rad.log2() / std::f64::consts::LOG2_10
    }

    /// Whether `other` lies inside this ball.
    pub fn contains(&self, other: &Self) -> bool {
        let d = self.sub(&other.with_radius(Mag::ZERO));
        let dist = Mag::from_big_up(&d.man, d.exp);
        dist.add_up(other.rad) <= self.rad.add_up(d.rad.mul_2exp(0))
    }

    /// Whether the two balls overlap.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.sub(other).contains_zero()
    }

    fn with_radius(&self, rad: Mag) -> Self {
        ApproxReal { rad, ..self.clone() }
    }

    /// Midpoint rounded to `frac` decimal places, as a plain decimal string.
    pub fn mid_decimal(&self, frac: u32) -> String {
        let scale = BigInt::from(10u32).pow(frac);
        let v = &self.man * &scale;
        let rounded = if self.exp >= 0 {
            v << self.exp as u64
        } else {
            let s = (-self.exp) as u64;
            let half = BigInt::one() << (s - 1);
            if v.is_negative() {
                -((-v + &half) >> s)
            } else {
                (v + half) >> s
            }
        };
        let neg = rounded.is_negative();
        let digits = rounded.abs().to_string();
        let frac = frac as usize;
        let padded = if digits.len() <= frac {
            format!("{}{}", "0".repeat(frac + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (ip, fp) = padded.split_at(padded.len() - frac);
        let sign = if neg { "-" } else { "" };
        if frac == 0 {
            format!("{sign}{ip}")
        } else {
            format!("{sign}{ip}.{fp}")
        }
    }

    /// Renders only the certified decimals, followed by `…` when truncated.
    pub fn render(&self) -> String {
        if self.rad.is_zero() {
            return self.mid_decimal(40.min(self.prec / 3));
        }
        let frac = (-self.radius_log10()).floor();
        if frac < 0.0 {
            return format!("{:e} ± {:e}", self.to_f64(), self.rad.to_f64());
        }
        format!("{}…", self.mid_decimal(frac as u32))
    }
}

impl ApproxReal {
    /// Whether the radius is at most `10^-d`.
    pub fn radius_within_pow10(&self, d: i64) -> bool {
        self.rad.is_zero() || self.radius_log10() <= -(d as f64)
    }

    /// Whether every point of the ball has absolute value at most `10^-d`.
    pub fn abs_within_pow10(&self, d: i64) -> bool {
        let up = self.abs_upper();
        up.is_zero() || up.log2() / std::f64::consts::LOG2_10 <= -(d as f64)
    }

    /// Midpoint scaled by `2^bits` and rounded toward zero.
    pub fn to_fixed(&self, bits: u32) -> BigInt {
        let e = self.exp + i64::from(bits);
        if e >= 0 {
            &self.man << e as u64
        } else {
            let s = (-e) as u64;
            if self.man.is_negative() {
                -((-&self.man) >> s)
            } else {
                &self.man >> s
            }
        }
    }

    /// Ball `man * 2^-bits` with radius `2^-bits` (inverse of [`to_fixed`]).
    pub fn from_fixed(man: BigInt, bits: u32, prec: u32) -> Self {
        Self::from_parts(man, -i64::from(bits), Mag::pow2(-i64::from(bits)), prec)
    }
}

/// Real embedding `a + b*sqrt(d)` with `sqrt(d) > 0`, at `prec` bits.
pub fn embed_quad(x: &QuadElem, prec: u32) -> ApproxReal {
    let a = ApproxReal::from_rational(x.a(), prec);
    if x.b().is_zero() {
        return a;
    }
    let root = ApproxReal::from_int(x.d(), prec + 8).sqrt().expect("radicand is positive");
    a.add(&root.mul_rational(x.b()).with_prec(prec))
}

/// Embeds a quadratic element with radius at most `10^-digits`.
pub fn qf_embed(x: &QuadElem, digits: u32) -> ApproxReal {
    let mag = |r: &Rational| r.numer().bits() as i64 - r.denom().bits() as i64 + 1;
    let top = mag(x.a()).max(mag(x.b()) + (64 - x.d().leading_zeros()) as i64);
    embed_quad(x, bits_for_digits(digits) + top.max(0) as u32 + 4)
}

/// Certified correct decimal digits `floor(-log10(rad / max(|mid|, 1)))`.
pub fn to_digits(x: &ApproxReal) -> i64 {
    if x.rad.is_zero() {
        return EXACT_DIGITS;
    }
    let mid_log2 = x.mid_abs().log2().max(0.0);
    let rel = (x.rad.log2() - mid_log2) / std::f64::consts::LOG2_10;
    (-rel - 1e-9).floor() as i64
}

impl fmt::Display for ApproxReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Operation selector for [`ball_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    PowInt(i64),
}

/// Dispatches one ball operation; `y` is ignored by unary operations.
pub fn ball_arith(op: BallOp, x: &ApproxReal, y: Option<&ApproxReal>) -> Result<ApproxReal, PrecisionError> {
    let need = || y.expect("binary ball operation needs two operands");
    match op {
        BallOp::Add => Ok(x.add(need())),
        BallOp::Sub => Ok(x.sub(need())),
        BallOp::Mul => Ok(x.mul(need())),
        BallOp::Div => x.div(need()),
        BallOp::Sqrt => x.sqrt(),
        BallOp::PowInt(e) => x.pow_int(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    const P: u32 = 200;

    #[test]
    fn exact_integer_addition() {
        let s = ApproxReal::from_int(1, P).add(&ApproxReal::from_int(2, P));
        assert_eq!(s.mid_decimal(5), "3.00000");
        assert!(s.radius() <= Mag::pow2(-(P as i64)));
    }

    #[test]
    fn zero_absorbs() {
        let x = ApproxReal::from_rational(&rat(1, 3), P).add_error(Mag::pow2(-10));
        let z = x.mul(&ApproxReal::zero(P));
        assert!(z.mid_is_zero());
        assert!(z.radius().is_zero());
    }

    #[test]
    fn sqrt_two_fifty_digits() {
        let prec = bits_for_digits(50);
        let r = ApproxReal::from_int(2, prec).sqrt().unwrap();
        assert!(r.radius_log10() <= -50.0);
        assert!(r.mid_decimal(20).starts_with("1.41421356237309504880"));
        // Newton oracle on integers: floor(sqrt(2 * 10^100)).
        let oracle = (BigInt::from(2) * BigInt::from(10).pow(100u32)).sqrt();
        assert_eq!(r.mid_decimal(50).replace('.', "")[..50], oracle.to_string()[..50]);
        // squared back-check |m^2 - 2| <= 2 r m + r^2
        let sq = r.mul(&r);
        assert!(sq.contains(&ApproxReal::from_int(2, prec)));
    }

    #[test]
    fn digit_counting() {
        let tenth_mille = Mag::new_up(1, 0).div_up(Mag::new_up(10000, 0));
        let x = ApproxReal::from_rational(&rat(314159, 100000), 64).add_error(tenth_mille);
        assert_eq!(to_digits(&x), 4);
        assert_eq!(to_digits(&ApproxReal::from_int(5, 64)), EXACT_DIGITS);
        // |mid| ~ 2^20 ~ 10^6 with radius 2^-14 ~ 10^-4: floor(34 log10 2) = 10
        let big = ApproxReal::from_int(1 << 20, 64).add_error(Mag::pow2(-14));
        assert_eq!(to_digits(&big), 10);
    }

    #[test]
    fn division_errors() {
        let z = ApproxReal::from_int(0, P).add_error(Mag::pow2(-5));
        assert_eq!(ApproxReal::from_int(1, P).div(&z).unwrap_err(), PrecisionError::DivisionByZero);
        let neg = ApproxReal::from_int(-1, P);
        assert_eq!(neg.sqrt().unwrap_err(), PrecisionError::NegativeSqrt);
    }

    #[test]
    fn render_truncates() {
        let x = ApproxReal::from_rational(&rat(1, 3), 64).add_error(Mag::pow2(-20));
        assert_eq!(x.render(), "0.333333…");
    }
}
