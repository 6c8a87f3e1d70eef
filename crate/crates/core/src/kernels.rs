//! Binomial kernels `c_k`: exact values, exact term ratios, growth constants.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;

use crate::exactnum::{Poly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelFamily {
    /// `binom(2k,k)^3`
    Central3,
    /// `binom(2k,k)^2 binom(3k,k)`
    Central2With3k,
    /// `binom(2k,k)^2 binom(4k,2k)`
    Central2With4k2k,
    /// `binom(2k,k) binom(3k,k) binom(6k,3k)`
    Triple236,
    Bin6k3k,
    Bin3kk,
    Bin4k2k,
    Bin4kk,
}

/// One factor `binom(top*k, bottom*k)^power`.
#[derive(Clone, Copy, Debug)]
struct BinomFactor {
    top: u32,
    bottom: u32,
    power: u32,
}

const fn f(top: u32, bottom: u32, power: u32) -> BinomFactor {
    BinomFactor { top, bottom, power }
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 8] = [
        KernelFamily::Central3,
        KernelFamily::Central2With3k,
        KernelFamily::Central2With4k2k,
        KernelFamily::Triple236,
        KernelFamily::Bin6k3k,
        KernelFamily::Bin3kk,
        KernelFamily::Bin4k2k,
        KernelFamily::Bin4kk,
    ];

    fn factors(self) -> &'static [BinomFactor] {
        use KernelFamily::*;
        const C3: &[BinomFactor] = &[f(2, 1, 3)];
        const C2_3: &[BinomFactor] = &[f(2, 1, 2), f(3, 1, 1)];
        const C2_42: &[BinomFactor] = &[f(2, 1, 2), f(4, 2, 1)];
        const T236: &[BinomFactor] = &[f(2, 1, 1), f(3, 1, 1), f(6, 3, 1)];
        const B63: &[BinomFactor] = &[f(6, 3, 1)];
        const B31: &[BinomFactor] = &[f(3, 1, 1)];
        const B42: &[BinomFactor] = &[f(4, 2, 1)];
        const B41: &[BinomFactor] = &[f(4, 1, 1)];
        match self {
            Central3 => C3,
            Central2With3k => C2_3,
            Central2With4k2k => C2_42,
            Triple236 => T236,
            Bin6k3k => B63,
            Bin3kk => B31,
            Bin4k2k => B42,
            Bin4kk => B41,
        }
    }

    /// Catalog tag, e.g. `central^2*binom(3k,k)`.
    pub fn tag(self) -> &'static str {
        use KernelFamily::*;
        match self {
            Central3 => "central^3",
            Central2With3k => "central^2*binom(3k,k)",
            Central2With4k2k => "central^2*binom(4k,2k)",
            Triple236 => "binom(2k,k)*binom(3k,k)*binom(6k,3k)",
            Bin6k3k => "binom(6k,3k)",
            Bin3kk => "binom(3k,k)",
            Bin4k2k => "binom(4k,2k)",
            Bin4kk => "binom(4k,k)",
        }
    }

    /// The multiset of `binom(top*k, bottom*k)` factors, flattened by power.
    pub fn binomials(self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for b in self.factors() {
            for _ in 0..b.power {
                out.push((b.top, b.bottom));
            }
        }
        out.sort_unstable();
        out
    }

    /// Identifies a family from its flattened binomial multiset.
    pub fn from_binomials(mut bs: Vec<(u32, u32)>) -> Option<Self> {
        bs.sort_unstable();
        Self::ALL.into_iter().find(|f| f.binomials() == bs)
    }

    /// Exact product of the binomial coefficients at index `k`.
    pub fn value(self, k: u64) -> BigInt {
        let mut acc = BigInt::one();
        for b in self.factors() {
            let c = binomial(u64::from(b.top) * k, u64::from(b.bottom) * k);
            for _ in 0..b.power {
                acc *= &c;
            }
        }
        acc
    }

    /// `(P, Q)` with `c_{k+1}/c_k = P(k)/Q(k)` as polynomials in `var`.
    pub fn ratio_polys(self, var: char) -> (Poly, Poly) {
        let mut num = Poly::one(var);
        let mut den = Poly::one(var);
        for b in self.factors() {
            let (a, lo) = (i64::from(b.top), i64::from(b.bottom));
            let hi = a - lo;
            for _ in 0..b.power {
                for i in 1..=a {
                    num = &num * &Poly::linear(var, a, i);
                }
                for i in 1..=lo {
                    den = &den * &Poly::linear(var, lo, i);
                }
                for i in 1..=hi {
                    den = &den * &Poly::linear(var, hi, i);
                }
            }
        }
        (num, den)
    }

    /// Exact `c_{k+1}/c_k`.
    pub fn ratio(self, k: u64) -> Rational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        let k = k as i128;
        for b in self.factors() {
            let (a, lo) = (i128::from(b.top), i128::from(b.bottom));
            let hi = a - lo;
            for _ in 0..b.power {
                for i in 1..=a {
                    num *= BigInt::from(a * k + i);
                }
                for i in 1..=lo {
                    den *= BigInt::from(lo * k + i);
                }
                for i in 1..=hi {
                    den *= BigInt::from(hi * k + i);
                }
            }
        }
        Rational::new(num, den)
    }

    /// `lim c_k^(1/k)`, exactly.
    pub fn growth_rate(self) -> Rational {
        let mut acc = Rational::one();
        for b in self.factors() {
            let (a, lo) = (i64::from(b.top), i64::from(b.bottom));
            let hi = a - lo;
            let pw = |x: i64| BigInt::from(x).pow(x as u32);
            let g = Rational::new(pw(a), pw(lo) * pw(hi));
            for _ in 0..b.power {
                acc *= &g;
            }
        }
        acc
    }
}

/// `binom(n, k)` by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn kernel_value(f: KernelFamily, k: u64) -> BigInt {
    f.value(k)
}

pub fn kernel_ratio(f: KernelFamily, k: u64) -> Rational {
    f.ratio(k)
}

pub fn growth_rate(f: KernelFamily) -> Rational {
    f.growth_rate()
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown kernel tag '{0}'")]
pub struct UnknownKernel(pub String);

impl FromStr for KernelFamily {
    type Err = UnknownKernel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Self::ALL
            .into_iter()
            .find(|f| f.tag() == t)
            .ok_or_else(|| UnknownKernel(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use KernelFamily::*;

    /// Pascal's triangle, independent of the multiplicative formula.
    fn pascal(n: usize) -> Vec<Vec<BigInt>> {
        let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![BigInt::one(); i + 1];
            for j in 1..i {
                row[j] = &prev[j - 1] + &prev[j];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn values_match_pascal() {
        let t = pascal(60);
        assert_eq!(kernel_value(Bin6k3k, 1), BigInt::from(20));
        assert_eq!(kernel_value(Bin6k3k, 2), t[12][6]);
        assert_eq!(kernel_value(Bin6k3k, 2), BigInt::from(924));
        assert_eq!(kernel_value(Central3, 1), BigInt::from(8));
        for k in 0..10usize {
            let c2 = &t[2 * k][k];
            assert_eq!(kernel_value(Triple236, k as u64), c2 * &t[3 * k][k] * &t[6 * k][3 * k]);
            assert_eq!(kernel_value(Bin4kk, k as u64), t[4 * k][k]);
        }
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(kernel_ratio(Bin6k3k, 0), rat(20, 1));
        assert_eq!(kernel_ratio(Bin6k3k, 1), rat(231, 5));
        assert_eq!(kernel_ratio(Central3, 0), rat(8, 1));
    }

    #[test]
    fn ratio_recurrence_is_exact() {
        for f in KernelFamily::ALL {
            let mut v = kernel_value(f, 0);
            for k in 0..=200u64 {
                let next = Rational::from_integer(v.clone()) * kernel_ratio(f, k);
                assert!(next.is_integer());
                v = next.to_integer();
                if k % 37 == 0 {
                    assert_eq!(v, kernel_value(f, k + 1), "{f} at {k}");
                }
            }
        }
    }

    #[test]
    fn ratio_polys_agree_with_ratio() {
        for f in KernelFamily::ALL {
            let (p, q) = f.ratio_polys('k');
            for k in 0..20 {
                let r = &p.eval_int(k) / &q.eval_int(k);
                assert_eq!(r.as_rational().unwrap(), &kernel_ratio(f, k as u64));
            }
        }
    }

    #[test]
    fn growth_constants() {
        assert_eq!(growth_rate(Central3), rat(64, 1));
        assert_eq!(growth_rate(Central2With3k), rat(108, 1));
        assert_eq!(growth_rate(Central2With4k2k), rat(256, 1));
        assert_eq!(growth_rate(Triple236), rat(1728, 1));
        assert_eq!(growth_rate(Bin6k3k), rat(64, 1));
        assert_eq!(growth_rate(Bin3kk), rat(27, 4));
        assert_eq!(growth_rate(Bin4k2k), rat(16, 1));
        assert_eq!(growth_rate(Bin4kk), rat(256, 27));
    }

    #[test]
    fn ratio_converges_to_growth() {
        // |ratio(k)/growth - 1| <= C/k on [10^3, 10^6]; C = 8 covers every family
        // (the worst observed constant is about 5.3).
        const C: f64 = 8.0;
        for f in KernelFamily::ALL {
            let g = f.growth_rate();
            for k in [1_000u64, 10_000, 100_000, 1_000_000] {
                let rel = kernel_ratio(f, k) / &g - Rational::one();
                let rel: f64 = rel.numer().to_string().parse::<f64>().unwrap()
                    / rel.denom().to_string().parse::<f64>().unwrap();
                assert!(rel.abs() <= C / k as f64, "{f} k={k} rel={rel}");
            }
        }
        let r = kernel_ratio(Bin6k3k, 1_000_000);
        let approx = r.numer().to_string().parse::<f64>().unwrap() / r.denom().to_string().parse::<f64>().unwrap();
        assert!((approx - 64.0).abs() < 0.01);
    }

    #[test]
    fn tags_round_trip() {
        for f in KernelFamily::ALL {
            assert_eq!(f.tag().parse::<KernelFamily>().unwrap(), f);
        }
        assert!("binom(5k,k)".parse::<KernelFamily>().is_err());
    }
}
