//! `zeta(2, a)` by Euler-Maclaurin summation and the Dirichlet values
//! `L_d(2)` assembled from it.

use std::sync::{LazyLock, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::arith::kronecker;
use super::ConstError;
use crate::exactnum::Rational;
use crate::kernels::binomial;
use crate::precision::{bits_for_digits, ApproxReal, Mag};

static BERNOULLI: LazyLock<Mutex<Vec<Rational>>> =
    LazyLock::new(|| Mutex::new(vec![Rational::one()]));

/// Bernoulli number `B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> Rational {
    let mut table = BERNOULLI.lock().expect("bernoulli table poisoned");
    while table.len() <= n {
        let m = table.len();
        if m > 1 && m % 2 == 1 {
            table.push(Rational::zero());
            continue;
        }
        // sum_{j<=m} binom(m+1, j) B_j = 0
        let mut acc = Rational::zero();
        for (j, b) in table.iter().enumerate() {
            if !b.is_zero() {
                acc += Rational::from_integer(binomial(m as u64 + 1, j as u64)) * b;
            }
        }
        table.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    table[n].clone()
}

/// `zeta(2, a) = sum_{n>=0} (n+a)^-2` for rational `0 < a <= 1`.
pub fn hurwitz_zeta2(a: &Rational, digits: u32) -> Result<ApproxReal, ConstError> {
    if !a.is_positive() || a > &Rational::one() {
        return Err(ConstError::InvalidArgument(format!("hurwitz parameter {a} outside (0, 1]")));
    }
    Ok(hurwitz_bits(a, bits_for_digits(digits.max(1)), digits.max(1)))
}

fn hurwitz_bits(a: &Rational, prec: u32, digits: u32) -> ApproxReal {
    let w = prec + 16;
    let n = (f64::from(digits) * 1.2).ceil() as u64 + 4;
    let mut acc = ApproxReal::zero(w);
    for i in 0..n {
        let t = Rational::from_integer(BigInt::from(i)) + a;
        acc = acc.add(&ApproxReal::from_rational(&(t.clone() * t).recip(), w));
    }
    let x = Rational::from_integer(BigInt::from(n)) + a;
    let x2 = &x * &x;
    let mut corr = x.recip() + (Rational::from_integer(BigInt::from(2)) * &x2).recip();
    let target = Mag::pow2(-i64::from(w));
    let mut xpow = x.clone(); // x^(2j-1)
    let mut j = 1usize;
    let remainder = loop {
        xpow *= &x2;
        corr += bernoulli(2 * j) / &xpow;
        let next = bernoulli(2 * j + 2) / (&xpow * &x2);
        let bound = ApproxReal::from_rational(&next.abs(), w).abs_upper().mul_2exp(1);
        if bound <= target || j > 4 * digits as usize + 16 {
            break bound;
        }
        j += 1;
    };
    acc.add(&ApproxReal::from_rational(&corr, w)).add_error(remainder).with_prec(prec)
}

/// `L_d(2) = sum_k (d/k) k^-2` for a discriminant `d`.
pub fn l_value(d: i64, digits: u32) -> Result<ApproxReal, ConstError> {
    l_value_bits(d, bits_for_digits(digits.max(1)))
}

pub(crate) fn l_value_bits(d: i64, prec: u32) -> Result<ApproxReal, ConstError> {
    if d == 0 {
        return Err(ConstError::ZeroDiscriminant);
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(ConstError::InvalidDiscriminant(d));
    }
    let q = d.unsigned_abs();
    let w = prec + 2 * (64 - q.leading_zeros()) + 8;
    let digits = (f64::from(w) / std::f64::consts::LOG2_10).ceil() as u32;
    let mut acc = ApproxReal::zero(w);
    for a in 1..=q {
        let chi = kronecker(d, a);
        if chi == 0 {
            continue;
        }
        let z = hurwitz_bits(&Rational::new(BigInt::from(a), BigInt::from(q)), w, digits);
        acc = if chi > 0 { acc.add(&z) } else { acc.sub(&z) };
    }
    let q2 = BigInt::from(q) * BigInt::from(q);
    Ok(acc.div(&ApproxReal::from_int(q2, w))?.with_prec(prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::pi_machin;
    use crate::exactnum::rat;

    /// Partial sums over whole periods with Richardson extrapolation on the
    /// `1/M^2` tail, in plain floating point.
    fn direct_l(d: i64, periods: u64) -> f64 {
        let q = d.unsigned_abs();
        let s = |m: u64| -> f64 {
            let mut acc = 0.0f64;
            for k in (1..=m * q).rev() {
                acc += f64::from(kronecker(d, k)) / (k as f64 * k as f64);
            }
            acc
        };
        let (a, b) = (s(periods), s(2 * periods));
        (4.0 * b - a) / 3.0
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(12), rat(-691, 2730));
        assert_eq!(bernoulli(13), rat(0, 1));
        assert_eq!(bernoulli(20), rat(-174611, 330));
    }

    #[test]
    fn zeta_two_at_one_and_half() {
        let prec = bits_for_digits(30);
        let pi = pi_machin(prec + 8);
        let pi2 = pi.mul(&pi);
        let z1 = hurwitz_zeta2(&rat(1, 1), 30).unwrap();
        assert!(z1.radius_within_pow10(30));
        assert!(z1.sub(&pi2.div_int(6).unwrap()).abs_within_pow10(30));
        assert_eq!(z1.mid_decimal(20), "1.64493406684822643647");
        let zh = hurwitz_zeta2(&rat(1, 2), 30).unwrap();
        assert!(zh.sub(&pi2.div_int(2).unwrap()).abs_within_pow10(29));
    }

    #[test]
    fn catalan_from_quarter_shifts() {
        let a = hurwitz_zeta2(&rat(1, 4), 20).unwrap();
        let b = hurwitz_zeta2(&rat(3, 4), 20).unwrap();
        let g = a.sub(&b).div_int(16).unwrap();
        assert_eq!(g.mid_decimal(20), "0.91596559417721901505");
    }

    #[test]
    fn named_l_values() {
        let g = l_value(-4, 30).unwrap();
        assert_eq!(g.mid_decimal(30), "0.915965594177219015054603514932");
        let k = l_value(-3, 30).unwrap();
        assert_eq!(k.mid_decimal(30), "0.781302412896486296867187429624");
        assert!(l_value(-2, 10).is_err());
        assert!(l_value(0, 10).is_err());
    }

    #[test]
    fn character_sums_vanish() {
        for d in [-3i64, -4, -8, -11, -15, -24, -39, -68, -87, -111] {
            let s: i32 = (1..=d.unsigned_abs()).map(|a| kronecker(d, a)).sum();
            assert_eq!(s, 0, "d = {d}");
            for k in (1..10_000u64).step_by(97) {
                assert_eq!(kronecker(d, k), kronecker(d, k + d.unsigned_abs()));
            }
        }
    }

    #[test]
    fn hurwitz_path_matches_direct_sums() {
        for d in [-3i64, -4, -8, -11, -15, -24, -39, -68, -87, -111] {
            let v = l_value(d, 20).unwrap().to_f64();
            let periods = 1_000_000 / d.unsigned_abs() / 2;
            let o = direct_l(d, periods);
            assert!((v - o).abs() < 1e-10, "d = {d}: {v} vs {o}");
        }
    }
}
