//! Unsigned low-precision magnitudes `man * 2^exp` with directed rounding,
//! used for error radii.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};

const MAG_BITS: u32 = 30;
const MAG_LIMIT: u128 = 1 << MAG_BITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mag {
    man: u64,
    exp: i64,
}

fn bitlen(x: u128) -> u32 {
    128 - x.leading_zeros()
}

impl Mag {
    pub const ZERO: Mag = Mag { man: 0, exp: 0 };

    fn norm_up(m: u128, mut e: i64) -> Mag {
        if m == 0 {
            return Mag::ZERO;
        }
        let mut m = m;
        while m >= MAG_LIMIT {
            let s = bitlen(m) - MAG_BITS;
            let lost = m & ((1u128 << s) - 1);
            m = (m >> s) + u128::from(lost != 0);
            e += i64::from(s);
        }
        Mag { man: m as u64, exp: e }
    }

    fn norm_down(m: u128, mut e: i64) -> Mag {
        if m == 0 {
            return Mag::ZERO;
        }
        let mut m = m;
        if m >= MAG_LIMIT {
            let s = bitlen(m) - MAG_BITS;
            m >>= s;
            e += i64::from(s);
        }
        Mag { man: m as u64, exp: e }
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Mag {
        Mag { man: 1, exp: e }
    }

    pub fn new_up(man: u64, exp: i64) -> Mag {
        Self::norm_up(u128::from(man), exp)
    }

    /// `(man, exp)` with value `man * 2^exp`.
    pub fn parts(self) -> (u64, i64) {
        (self.man, self.exp)
    }

    pub fn is_zero(self) -> bool {
        self.man == 0
    }

    /// Upper bound of `|x| * 2^e`.
    pub fn from_big_up(x: &BigInt, e: i64) -> Mag {
        Self::from_biguint(x.magnitude(), e, true)
    }

    /// Lower bound of `|x| * 2^e`.
    pub fn from_big_down(x: &BigInt, e: i64) -> Mag {
        Self::from_biguint(x.magnitude(), e, false)
    }

    fn from_biguint(x: &BigUint, e: i64, up: bool) -> Mag {
        let bits = x.bits();
        if bits == 0 {
            return Mag::ZERO;
        }
        if bits <= 64 {
            let v = u128::from(u64::try_from(x).expect("fits"));
            return if up { Self::norm_up(v, e) } else { Self::norm_down(v, e) };
        }
        let s = bits - 64;
        let top: u64 = u64::try_from(x >> s).expect("fits");
        let truncated = up && x.trailing_zeros().is_some_and(|tz| tz < s);
        let v = u128::from(top) + u128::from(truncated);
        if up {
            Self::norm_up(v, e + s as i64)
        } else {
            Self::norm_down(v, e + s as i64)
        }
    }

    pub fn add_up(self, other: Mag) -> Mag {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= other.exp { (self, other) } else { (other, self) };
        let gap = hi.exp - lo.exp;
        if gap > 90 {
            // lo < 2^(lo.exp + 30) <= 2^(hi.exp - 60): one unit of hi absorbs it.
            return Self::norm_up(u128::from(hi.man) + 1, hi.exp);
        }
        let v = (u128::from(hi.man) << gap) + u128::from(lo.man);
        Self::norm_up(v, lo.exp)
    }

    /// Lower bound of `self - other`, clamped at zero.
    pub fn sub_down(self, other: Mag) -> Mag {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return Mag::ZERO;
        }
        if self.exp >= other.exp {
            let gap = self.exp - other.exp;
            if gap > 90 {
                return Self::norm_down(u128::from(self.man).saturating_sub(1), self.exp);
            }
            let a = u128::from(self.man) << gap;
            Self::norm_down(a.saturating_sub(u128::from(other.man)), other.exp)
        } else {
            let gap = other.exp - self.exp;
            if gap > 90 {
                return Mag::ZERO;
            }
            let b = u128::from(other.man) << gap;
            Self::norm_down(u128::from(self.man).saturating_sub(b), self.exp)
        }
    }

    pub fn mul_up(self, other: Mag) -> Mag {
        Self::norm_up(u128::from(self.man) * u128::from(other.man), self.exp + other.exp)
    }

    pub fn mul_down(self, other: Mag) -> Mag {
        Self::norm_down(u128::from(self.man) * u128::from(other.man), self.exp + other.exp)
    }

    /// Upper bound of `self / other`; `other` must be nonzero.
    pub fn div_up(self, other: Mag) -> Mag {
        assert!(!other.is_zero(), "division by zero magnitude");
        let q = (u128::from(self.man) << 60) / u128::from(other.man) + 1;
        Self::norm_up(q, self.exp - 60 - other.exp)
    }

    pub fn mul_2exp(self, e: i64) -> Mag {
        if self.is_zero() {
            self
        } else {
            Mag { man: self.man, exp: self.exp + e }
        }
    }

    pub fn mul_u64_up(self, k: u64) -> Mag {
        Self::norm_up(u128::from(self.man) * u128::from(k), self.exp)
    }

    /// Lower bound of the square root.
    pub fn sqrt_down(self) -> Mag {
        if self.is_zero() {
            return self;
        }
        let (mut m, mut e) = (u128::from(self.man), self.exp);
        if e.rem_euclid(2) == 1 {
            m <<= 1;
            e -= 1;
        }
        // Scale up for a 30-bit root.
        m <<= 60;
        e -= 60;
        Self::norm_down(isqrt_u128(m), e / 2)
    }

    pub fn sqrt_up(self) -> Mag {
        let s = self.sqrt_down();
        s.add_up(Mag::pow2(s.exp))
    }

    /// Approximate base-2 logarithm (for display and digit counting only).
    pub fn log2(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            (self.man as f64).log2() + self.exp as f64
        }
    }

    /// Exponent `e` with `self < 2^e`.
    pub fn upper_exp(self) -> i64 {
        self.exp + i64::from(bitlen(u128::from(self.man)))
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            (self.man as f64) * 2f64.powi(self.exp.clamp(-1100, 1100) as i32)
        }
    }
}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mag {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ua, ub) = (self.upper_exp(), other.upper_exp());
        if ua != ub {
            return ua.cmp(&ub);
        }
        // Same magnitude class: compare aligned mantissas.
        let e = self.exp.min(other.exp);
        let a = u128::from(self.man) << (self.exp - e);
        let b = u128::from(other.man) << (other.exp - e);
        a.cmp(&b)
    }
}

fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directed_rounding_brackets() {
        let a = Mag::new_up(1_000_000_007, 0);
        let b = Mag::new_up(3, 0);
        assert!(a.div_up(b).to_f64() >= 1_000_000_007.0 / 3.0);
        assert!(a.sub_down(b).to_f64() <= 1_000_000_004.0);
        assert_eq!(Mag::new_up(9, 0).sqrt_down().to_f64(), 3.0);
        assert!(Mag::new_up(2, 0).sqrt_up().to_f64() >= std::f64::consts::SQRT_2);
        assert!(Mag::new_up(2, 0).sqrt_down().to_f64() <= std::f64::consts::SQRT_2);
        assert!(Mag::pow2(-3000).add_up(Mag::pow2(5)) > Mag::pow2(5));
        assert!(Mag::pow2(-3000) < Mag::pow2(-2999));
    }

    #[test]
    fn bigint_bounds() {
        let x: BigInt = "123456789012345678901234567890".parse().unwrap();
        let up = Mag::from_big_up(&x, 0).to_f64();
        let down = Mag::from_big_down(&x, 0).to_f64();
        assert!(down <= 1.2345678901234568e29 && up >= 1.2345678901234567e29);
    }
}
