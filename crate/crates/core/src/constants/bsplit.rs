//! Binary splitting for hypergeometric-type series and the constants built on
//! it: pi (three ways), logarithms of primes and Apery's constant.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::arith::factorize;
use crate::precision::ApproxReal;

/// Products over a block `[lo, hi)` of the series
/// `sum_j a(j)/b(j) * prod_{i<=j} p(i)/q(i)`; the block sum is `t/(b*q)`.
#[derive(Clone, Debug)]
pub struct Split {
    pub p: BigInt,
    pub q: BigInt,
    pub b: BigInt,
    pub t: BigInt,
}

/// Per-index data `[a, b, p, q]`.
pub type TermData = [BigInt; 4];

pub fn bsplit(lo: u64, hi: u64, f: &impl Fn(u64) -> TermData) -> Split {
    assert!(hi > lo);
    if hi - lo == 1 {
        let [a, b, p, q] = f(lo);
        let t = &a * &p;
        return Split { p, q, b, t };
    }
    let mid = lo + (hi - lo) / 2;
    let l = bsplit(lo, mid, f);
    let r = bsplit(mid, hi, f);
    Split {
        t: &r.b * &r.q * &l.t + &l.b * &l.p * &r.t,
        p: l.p * r.p,
        q: l.q * r.q,
        b: l.b * r.b,
    }
}

/// Sum of the first `n` terms as a ball, plus an upper bound on `|t_n|`,
/// the first omitted term.
fn partial(n: u64, f: &impl Fn(u64) -> TermData, prec: u32) -> (ApproxReal, ApproxReal) {
    let s = bsplit(0, n, f);
    let w = prec + 16;
    let num = ApproxReal::from_int(s.t.clone(), w);
    let den = ApproxReal::from_int(&s.b * &s.q, w);
    let sum = num.div(&den).expect("positive denominator");
    let [a, b, p, q] = f(n);
    let next_num = ApproxReal::from_int((a * s.p * p).abs(), w);
    let next_den = ApproxReal::from_int((b * s.q * q).abs(), w);
    let next = next_num.div(&next_den).expect("positive denominator");
    (sum, next)
}

fn terms_for(prec: u32, bits_per_term: f64) -> u64 {
    (f64::from(prec + 16) / bits_per_term).ceil() as u64 + 2
}

/// `arctan(1/n)` for integer `n >= 2`.
pub fn atan_inv(n: u64, prec: u32) -> ApproxReal {
    let n2 = BigInt::from(n) * BigInt::from(n);
    let f = |j: u64| -> TermData {
        let (p, q) = if j == 0 {
            (BigInt::one(), BigInt::from(n))
        } else {
            (-BigInt::one(), n2.clone())
        };
        [BigInt::one(), BigInt::from(2 * j + 1), p, q]
    };
    let terms = terms_for(prec, 2.0 * (n as f64).log2());
    let (sum, next) = partial(terms, &f, prec);
    // Alternating with decreasing magnitudes.
    sum.add_error(next.abs_upper()).with_prec(prec)
}

/// `artanh(1/n)` for integer `n >= 2`.
pub fn atanh_inv(n: u64, prec: u32) -> ApproxReal {
    let n2 = BigInt::from(n) * BigInt::from(n);
    let f = |j: u64| -> TermData {
        let q = if j == 0 { BigInt::from(n) } else { n2.clone() };
        [BigInt::one(), BigInt::from(2 * j + 1), BigInt::one(), q]
    };
    let terms = terms_for(prec, 2.0 * (n as f64).log2());
    let (sum, next) = partial(terms, &f, prec);
    // Positive terms with ratio below 1/n^2 <= 1/4: the tail is at most 4/3 of
    // the first omitted term, bounded here by twice it.
    let tail = next.abs_upper().mul_2exp(1);
    sum.add_error(tail).with_prec(prec)
}

/// Machin: `pi = 16 arctan(1/5) - 4 arctan(1/239)`.
pub fn pi_machin(prec: u32) -> ApproxReal {
    let w = prec + 8;
    let a = atan_inv(5, w).mul_int(&BigInt::from(16));
    let b = atan_inv(239, w).mul_int(&BigInt::from(4));
    a.sub(&b).with_prec(prec)
}

/// Takano: `pi/4 = 12 atan(1/49) + 32 atan(1/57) - 5 atan(1/239) + 12 atan(1/110443)`.
pub fn pi_takano(prec: u32) -> ApproxReal {
    let w = prec + 8;
    let parts = [(12i64, 49u64), (32, 57), (-5, 239), (12, 110443)];
    let mut acc = ApproxReal::zero(w);
    for (c, n) in parts {
        acc = acc.add(&atan_inv(n, w).mul_int(&BigInt::from(c)));
    }
    acc.mul_int(&BigInt::from(4)).with_prec(prec)
}

/// Chudnovsky: `pi = 426880 sqrt(10005) / sum_k a_k prod p/q`.
pub fn pi_chudnovsky(prec: u32) -> ApproxReal {
    let w = prec + 16;
    let c3_24 = BigInt::from(10_939_058_860_032_000u64);
    let f = |k: u64| -> TermData {
        let a = BigInt::from(13_591_409u64) + BigInt::from(545_140_134u64) * BigInt::from(k);
        if k == 0 {
            return [a, BigInt::one(), BigInt::one(), BigInt::one()];
        }
        let k = k as i64;
        let p = -BigInt::from((6 * k - 5) * (2 * k - 1) * (6 * k - 1));
        let q = BigInt::from(k).pow(3) * &c3_24;
        [a, BigInt::one(), p, q]
    };
    let terms = terms_for(prec, 47.11);
    let (sum, next) = partial(terms, &f, w);
    // Term ratios are below 1e-13, so the tail is under twice the first omitted term.
    let sum = sum.add_error(next.abs_upper().mul_2exp(1));
    let root = ApproxReal::from_int(10005, w).sqrt().expect("positive");
    let num = root.mul_int(&BigInt::from(426_880));
    num.div(&sum).expect("sum is near 1/pi").with_prec(prec)
}

/// `log p` for a prime `p`, via `log p = log(p-1) + 2 artanh(1/(2p-1))`.
pub fn log_prime(p: u64, prec: u32, log_of: &mut impl FnMut(u64, u32) -> ApproxReal) -> ApproxReal {
    let w = prec + 8;
    let step = atanh_inv(2 * p - 1, w).mul_2exp(1);
    if p == 2 {
        return step.with_prec(prec);
    }
    let mut acc = step;
    for (q, e) in factorize(p - 1) {
        acc = acc.add(&log_of(q, w).mul_int(&BigInt::from(e)));
    }
    acc.with_prec(prec)
}

/// Apery's constant via `zeta(3) = 5/2 sum_{k>=1} (-1)^(k-1) / (k^3 binom(2k,k))`.
pub fn zeta3(prec: u32) -> ApproxReal {
    let f = |j: u64| -> TermData {
        if j == 0 {
            return [BigInt::one(), BigInt::one(), BigInt::one(), BigInt::from(2)];
        }
        let j = BigInt::from(j);
        let p = -(&j * &j * &j);
        let q = BigInt::from(2) * (BigInt::from(2) * &j + 1u32) * (&j + 1u32) * (&j + 1u32);
        [BigInt::one(), BigInt::one(), p, q]
    };
    let terms = terms_for(prec, 2.0);
    let (sum, next) = partial(terms, &f, prec + 8);
    let s = sum.add_error(next.abs_upper());
    s.mul_int(&BigInt::from(5)).mul_2exp(-1).with_prec(prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::bits_for_digits;

    const PI_48: &str = "3.141592653589793238462643383279502884197169399375";

    #[test]
    fn pi_fifty_digits() {
        let p = pi_machin(bits_for_digits(50));
        assert!(p.radius_within_pow10(50));
        assert_eq!(&p.mid_decimal(48), PI_48);
    }

    #[test]
    fn three_pi_formulas_agree() {
        let prec = bits_for_digits(300);
        let m = pi_machin(prec);
        let c = pi_chudnovsky(prec);
        let t = pi_takano(prec);
        assert!(m.overlaps(&c) && m.overlaps(&t));
        assert!(m.sub(&c).abs_within_pow10(299));
        assert!(m.sub(&t).abs_within_pow10(299));
    }

    #[test]
    fn log_two_and_back_check() {
        let prec = bits_for_digits(30);
        let l2 = log_prime(2, prec, &mut |_, _| unreachable!());
        assert_eq!(l2.mid_decimal(30), "0.693147180559945309417232121458");
        // Low-precision exp back-check.
        let x = l2.to_f64();
        assert!((x.exp() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn apery_constant() {
        let z = zeta3(bits_for_digits(40));
        assert_eq!(z.mid_decimal(30), "1.202056903159594285399738161511");
        assert!(z.radius_within_pow10(40));
    }
}
