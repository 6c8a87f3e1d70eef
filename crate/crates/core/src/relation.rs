//! Integer relation detection (PSLQ) and right-hand-side discovery.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::constants::{ClosedForm, ConstError, Monomial};
use crate::exactnum::Rational;
use crate::precision::ApproxReal;

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("need at least two values")]
    TooFewValues,
    #[error("input holds only {have} reliable bits, at least {need} needed")]
    InsufficientPrecision { have: u32, need: u32 },
    #[error("input value {0} is indistinguishable from zero")]
    ZeroInput(usize),
    #[error("basis element '{0}' is not a single product of constants")]
    BadBasis(String),
    #[error(transparent)]
    Const(#[from] ConstError),
    #[error("series evaluation failed: {0}")]
    Series(String),
}

#[derive(Clone, Debug)]
pub struct RelationResult {
    pub coefficients: Option<Vec<BigInt>>,
    /// `sum c_i v_i` as a ball; zero ball when no relation was found.
    pub residual: ApproxReal,
    pub confidence_digits: i64,
}

/// Bits of input precision the PSLQ sufficiency rule asks for.
pub fn precision_hint(n: usize, max_coeff_bits: u32) -> u32 {
    2 * n as u32 * max_coeff_bits
}

/// Rounds `a / b` to the nearest integer.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (a, b) = if b.is_negative() { (-a, -b) } else { (a.clone(), b.clone()) };
    let twice: BigInt = a * 2 + &b;
    twice.div_floor(&(b * 2))
}

fn sqrt_fixed(a: &BigInt, prec: u32) -> BigInt {
    (a << prec).sqrt()
}

struct Pslq {
    n: usize,
    prec: u32,
    y: Vec<BigInt>,
    /// `n x (n-1)`, fixed point.
    h: Vec<Vec<BigInt>>,
    a: Vec<Vec<BigInt>>,
    b: Vec<Vec<BigInt>>,
}

impl Pslq {
    fn new(x: &[BigInt], prec: u32) -> Self {
        let n = x.len();
        let ident = |i: usize, j: usize| BigInt::from(u8::from(i == j));
        let mut s = vec![BigInt::zero(); n];
        for k in 0..n {
            let t: BigInt = x[k..].iter().map(|v| (v * v) >> prec).sum();
            s[k] = sqrt_fixed(&t, prec);
        }
        let t = s[0].clone();
        let y: Vec<BigInt> = x.iter().map(|v| (v << prec) / &t).collect();
        for sk in s.iter_mut() {
            *sk = (&*sk << prec) / &t;
        }
        let mut h = vec![vec![BigInt::zero(); n - 1]; n];
        for i in 0..n {
            if i < n - 1 && !s[i].is_zero() {
                h[i][i] = (&s[i + 1] << prec) / &s[i];
            }
            for j in 0..i.min(n - 1) {
                let sjj = &s[j] * &s[j + 1];
                if !sjj.is_zero() {
                    h[i][j] = ((-(&y[i] * &y[j])) << prec) / sjj;
                }
            }
        }
        let mut p = Pslq {
            n,
            prec,
            y,
            h,
            a: (0..n).map(|i| (0..n).map(|j| ident(i, j)).collect()).collect(),
            b: (0..n).map(|i| (0..n).map(|j| ident(i, j)).collect()).collect(),
        };
        for i in 1..n {
            for j in (0..i).rev() {
                p.reduce_entry(i, j);
            }
        }
        p
    }

    /// Size-reduces `H[i][j]` against `H[j][j]`; false if the pivot is zero.
    fn reduce_entry(&mut self, i: usize, j: usize) -> bool {
        if self.h[j][j].is_zero() {
            return false;
        }
        let q = round_div(&self.h[i][j], &self.h[j][j]);
        if q.is_zero() {
            return true;
        }
        let dy = &q * &self.y[i];
        self.y[j] += dy;
        for k in 0..=j {
            let d = &q * &self.h[j][k];
            self.h[i][k] -= d;
        }
        for k in 0..self.n {
            let d = &q * &self.a[j][k];
            self.a[i][k] -= d;
            let d = &q * &self.b[k][i];
            self.b[k][j] += d;
        }
        true
    }

    /// One iteration; false when the rotation degenerates.
    fn step(&mut self, gamma_pows: &[BigInt]) -> bool {
        let (n, prec) = (self.n, self.prec);
        let mut m = 0;
        let mut best = BigInt::from(-1);
        for i in 0..n - 1 {
            let sz = &gamma_pows[i + 1] * self.h[i][i].abs();
            if sz > best {
                best = sz;
                m = i;
            }
        }
        self.y.swap(m, m + 1);
        self.h.swap(m, m + 1);
        self.a.swap(m, m + 1);
        for row in self.b.iter_mut() {
            row.swap(m, m + 1);
        }
        if m + 2 < n {
            let t0 = sqrt_fixed(&((&self.h[m][m] * &self.h[m][m] + &self.h[m][m + 1] * &self.h[m][m + 1]) >> prec), prec);
            if t0.is_zero() {
                return false;
            }
            let t1 = (&self.h[m][m] << prec) / &t0;
            let t2 = (&self.h[m][m + 1] << prec) / &t0;
            for i in m..n {
                let t3 = self.h[i][m].clone();
                let t4 = self.h[i][m + 1].clone();
                self.h[i][m] = (&t1 * &t3 + &t2 * &t4) >> prec;
                self.h[i][m + 1] = (&t1 * &t4 - &t2 * &t3) >> prec;
            }
        }
        for i in m + 1..n {
            for j in (0..=(i - 1).min(m + 1)).rev() {
                if !self.reduce_entry(i, j) {
                    break;
                }
            }
        }
        true
    }

    fn column(&self, i: usize) -> Vec<BigInt> {
        (0..self.n).map(|j| self.b[j][i].clone()).collect()
    }

    /// Lower bound (fixed point) on the norm of any relation.
    fn norm_bound(&self) -> Option<BigInt> {
        let rec = self.h.iter().flatten().map(|v| v.abs()).max()?;
        (!rec.is_zero()).then(|| ((BigInt::one() << (2 * self.prec)) / rec) >> self.prec)
    }
}

/// Searches for a nonzero integer vector `c` with `sum c_i v_i = 0` and
/// `max |c_i| < 2^max_coeff_bits`. A candidate is only returned when the
/// residual ball over the inputs contains zero.
pub fn pslq(values: &[ApproxReal], max_coeff_bits: u32) -> Result<RelationResult, RelationError> {
    let n = values.len();
    if n < 2 {
        return Err(RelationError::TooFewValues);
    }
    if let Some(i) = values.iter().position(|v| v.contains_zero()) {
        return Err(RelationError::ZeroInput(i));
    }
    let top = values.iter().map(|v| v.abs_upper().upper_exp()).max().expect("n >= 2");
    // Reliable bits relative to the largest value.
    let have = values
        .iter()
        .map(|v| {
            let r = v.radius();
            let rad_exp = if r.is_zero() { -i64::from(v.prec()) } else { r.upper_exp() };
            top - rad_exp
        })
        .min()
        .expect("n >= 2")
        .clamp(0, i64::from(u32::MAX)) as u32;
    let need = (n as u32 * max_coeff_bits).max(32);
    if have < need {
        return Err(RelationError::InsufficientPrecision { have, need });
    }
    let prec = have - 4;
    let x: Vec<BigInt> = values.iter().map(|v| v.mul_2exp(-top).to_fixed(prec)).collect();
    let max_coeff = BigInt::one() << max_coeff_bits;
    // |y_i| below 2^-(prec - slack) signals a relation.
    let tol = BigInt::one() << (max_coeff_bits + 12).min(prec / 2);

    let gamma = sqrt_fixed(&((BigInt::from(4) << prec) / 3), prec);
    let gamma_pows: Vec<BigInt> = std::iter::successors(Some(BigInt::one() << prec), |g| Some((g * &gamma) >> prec))
        .take(n + 1)
        .collect();
    let max_steps = 32 * n * n * max_coeff_bits as usize;
    let mut state = Pslq::new(&x, prec);
    let none = RelationResult { coefficients: None, residual: ApproxReal::zero(prec), confidence_digits: 0 };
    for _ in 0..max_steps {
        if !state.step(&gamma_pows) {
            break;
        }
        for i in 0..n {
            if state.y[i].abs() >= tol {
                continue;
            }
            let c = state.column(i);
            if c.iter().all(|v| v.abs() < max_coeff) && c.iter().any(|v| !v.is_zero()) {
                let residual = combine(values, &c);
                if !residual.contains_zero() {
                    continue;
                }
                let scale = values.iter().zip(&c).map(|(v, ci)| v.abs_upper().mul_up(crate::precision::Mag::from_big_up(ci, 0)));
                let scale = scale.max().expect("n >= 2");
                let conf = (scale.log2() - residual.abs_upper().log2()) / std::f64::consts::LOG2_10;
                return Ok(RelationResult { coefficients: Some(c), residual, confidence_digits: conf.floor() as i64 });
            }
        }
        if let Some(bound) = state.norm_bound() {
            if bound / 100 >= max_coeff {
                break;
            }
        }
    }
    Ok(none)
}

fn combine(values: &[ApproxReal], c: &[BigInt]) -> ApproxReal {
    values
        .iter()
        .zip(c)
        .fold(ApproxReal::zero(values[0].prec()), |acc, (v, ci)| acc.add(&v.mul_int(ci)))
}

/// Parses a comma-separated basis such as `pi,pi^2,G,sqrt(33)*L(-11),1`.
pub fn parse_basis(src: &str) -> Result<Vec<Monomial>, RelationError> {
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let cf = ClosedForm::from_str(s).map_err(|_| RelationError::BadBasis(s.to_string()))?;
            match cf.single() {
                Some((m, c)) if c.is_one() => Ok(m.clone()),
                _ => Err(RelationError::BadBasis(s.to_string())),
            }
        })
        .collect()
}

/// Finds `S = sum r_i b_i` with rational `r_i` from values of `S` and the
/// basis at `bits` bits, then re-checks the relation at `2 * bits`.
pub fn discover_rhs<F>(value_at: F, basis: &[Monomial], max_coeff_bits: u32, bits: u32) -> Result<Option<ClosedForm>, RelationError>
where
    F: Fn(u32) -> Result<ApproxReal, RelationError>,
{
    let values_at = |b: u32| -> Result<Vec<ApproxReal>, RelationError> {
        let mut v = vec![value_at(b)?];
        for m in basis {
            v.push(ClosedForm::monomial_value(m, b + 8)?);
        }
        Ok(v)
    };
    let first = pslq(&values_at(bits)?, max_coeff_bits)?;
    let Some(c) = first.coefficients else {
        return Ok(None);
    };
    if c[0].is_zero() {
        return Ok(None);
    }
    let recheck = combine(&values_at(2 * bits)?, &c);
    let limit = -(f64::from(bits) * 1.5);
    let top = basis.len() as f64 + c.iter().map(|v| v.bits() as f64).sum::<f64>();
    if !recheck.contains_zero() || recheck.radius().log2() > limit + top {
        return Ok(None);
    }
    let mut out = ClosedForm::zero();
    for (m, ci) in basis.iter().zip(&c[1..]) {
        if !ci.is_zero() {
            out = out.add(&ClosedForm::term(Rational::new(-ci, c[0].clone()), m.clone()));
        }
    }
    Ok(Some(out))
}
