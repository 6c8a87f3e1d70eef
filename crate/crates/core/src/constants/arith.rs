//! Integer number theory: Kronecker symbols, discriminant normalization and
//! small factorizations.

use super::ConstError;

/// Jacobi symbol `(a/n)` for odd positive `n`.
fn jacobi(a: i64, n: u64) -> i32 {
    debug_assert!(n % 2 == 1);
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut sign = 1;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Kronecker symbol `(d/k)` for `k >= 1`.
pub fn kronecker(d: i64, k: u64) -> i32 {
    assert!(k >= 1, "kronecker symbol needs k >= 1");
    let twos = k.trailing_zeros();
    let odd = k >> twos;
    let mut sign = 1;
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        let two = match d.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        };
        if twos % 2 == 1 {
            sign = two;
        }
    }
    sign * jacobi(d, odd)
}

/// `c` if `c = 0, 1 (mod 4)`, else `4c`.
pub fn normalize_discriminant(c: i64) -> Result<i64, ConstError> {
    if c == 0 {
        return Err(ConstError::ZeroDiscriminant);
    }
    Ok(match c.rem_euclid(4) {
        0 | 1 => c,
        _ => 4 * c,
    })
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Legendre symbol by Euler's criterion, independent of the Jacobi loop.
    fn euler_criterion(a: i64, p: u64) -> i32 {
        let a = a.rem_euclid(p as i64) as u128;
        if a == 0 {
            return 0;
        }
        let (mut base, mut e, mut acc) = (a, (p - 1) / 2, 1u128);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u128;
            }
            base = base * base % p as u128;
            e >>= 1;
        }
        if acc == 1 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn examples() {
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(17, 1), 1);
        assert_eq!(kronecker(-4, 1), 1);
        assert_eq!(kronecker(12, 3), 0);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-8, 3), 1);
        assert_eq!(normalize_discriminant(-3).unwrap(), -3);
        assert_eq!(normalize_discriminant(-1).unwrap(), -4);
        assert_eq!(normalize_discriminant(8).unwrap(), 8);
        assert_eq!(normalize_discriminant(-2).unwrap(), -8);
        assert!(normalize_discriminant(0).is_err());
    }

    #[test]
    fn odd_primes_match_euler_criterion() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101] {
            for d in [-111i64, -87, -68, -39, -24, -15, -11, -8, -4, -3, 5, 8, 12, 13] {
                assert_eq!(kronecker(d, p), euler_criterion(d, p), "({d}/{p})");
            }
        }
    }

    #[test]
    fn completely_multiplicative() {
        for d in [-111i64, -24, -8, -4, -3, 5, 12] {
            for a in 1..60u64 {
                for b in 1..60u64 {
                    assert_eq!(kronecker(d, a * b), kronecker(d, a) * kronecker(d, b));
                }
            }
        }
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(432), vec![(2, 4), (3, 3)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(97), vec![(97, 1)]);
    }
}
