//! Certified summation of series and verification against closed forms.

use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::constants::{ClosedForm, ConstError};
use crate::exactnum::{ExactError, QuadElem, Rational};
use crate::precision::{ApproxReal, Mag, EXACT_DIGITS};
use crate::seriesmodel::{term_exact, term_ratio_ratfun, HarmonicAtom, SeriesDef, SeriesError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TailMode {
    Certified,
    Heuristic,
}

impl TailMode {
    pub fn tag(self) -> &'static str {
        match self {
            TailMode::Certified => "CERTIFIED",
            TailMode::Heuristic => "HEURISTIC",
        }
    }
}

impl fmt::Display for TailMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for TailMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "certified" => Ok(TailMode::Certified),
            "heuristic" => Ok(TailMode::Heuristic),
            _ => Err(format!("unknown mode '{s}' (expected certified or heuristic)")),
        }
    }
}

/// `|t_{k+1}/t_k| <= q` for all `k >= k0` (proved when `mode` is certified).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceEnvelope {
    pub k0: u64,
    pub q: Rational,
    pub mode: TailMode,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("certified mode needs a hypergeometric term; use heuristic mode for harmonic weights")]
    NotHypergeometric,
    #[error("series does not converge: limiting term ratio {0} is not below 1")]
    NonConvergent(String),
    #[error("no certified result within {0} terms")]
    TermBudget(u64),
    #[error("unknown identity '{0}'")]
    UnknownId(String),
    #[error("identity '{0}' has no closed-form right-hand side")]
    NoRhs(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Const(#[from] ConstError),
}

impl From<ExactError> for EvalError {
    fn from(e: ExactError) -> Self {
        EvalError::Series(e.into())
    }
}

/// A rational strictly above `x >= 0`, within a relative `2^-29` of it.
fn rational_above(x: &QuadElem) -> Rational {
    let mut bits = 64u32;
    loop {
        let (man, exp) = embed_relative(x, bits).abs_upper().parts();
        let r = Rational::from_integer(BigInt::from(man)) * pow2_rational(exp) + pow2_rational(-i64::from(bits));
        if QuadElem::from(r.clone()).try_cmp(x).is_ok_and(|o| o.is_gt()) {
            return r;
        }
        bits *= 2;
    }
}

fn pow2_rational(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e as u64)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-e) as u64)
    }
}

/// Finds `(k0, q)` with `|rho(k)| <= q < 1` for every real `k >= k0`, or falls
/// back to a heuristic envelope for non-hypergeometric terms.
pub fn certify_envelope(def: &SeriesDef) -> Result<ConvergenceEnvelope, EvalError> {
    let limit = def.limit_ratio();
    if limit.try_cmp(&QuadElem::one())?.is_ge() {
        return Err(EvalError::NonConvergent(limit.to_string()));
    }
    if def.base.is_zero() {
        return Ok(ConvergenceEnvelope {
            k0: def.k_start,
            q: Rational::new(BigInt::one(), BigInt::from(2)),
            mode: TailMode::Certified,
        });
    }
    let r = rational_above(&limit);
    let one = Rational::one();
    let q = (&r * Rational::new(BigInt::from(33), BigInt::from(32))).min((&one + &r) / Rational::from_integer(2.into()));
    if q >= one {
        return Err(EvalError::NonConvergent(limit.to_string()));
    }
    let rho = match term_ratio_ratfun(def) {
        Ok(rho) => rho,
        Err(SeriesError::NotHypergeometric) => {
            return Ok(ConvergenceEnvelope { k0: def.k_start, q, mode: TailMode::Heuristic });
        }
        Err(e) => return Err(e.into()),
    };
    let (n, d) = (rho.num(), rho.den());
    let q2 = QuadElem::from(&q * &q);
    let p = &(d * d).scale(&q2) - &(n * n);
    let mut k0 = def.k_start;
    while k0 < 1 << 24 {
        let s = p.shift(&QuadElem::from(k0 as i64));
        let nonneg = s.coeffs().iter().all(|c| c.signum() >= 0);
        if nonneg && s.coeff(0).signum() > 0 {
            return Ok(ConvergenceEnvelope { k0, q, mode: TailMode::Certified });
        }
        k0 = (2 * k0).max(1);
    }
    Ok(ConvergenceEnvelope { k0: def.k_start, q, mode: TailMode::Heuristic })
}

/// Result of summing a series.
#[derive(Clone, Debug)]
pub struct SeriesSum {
    pub value: ApproxReal,
    pub terms_used: u64,
    pub tail_mode: TailMode,
}

/// Embeds elements of one quadratic field at a fixed precision, reusing the
/// square root.
struct Embedder {
    root: Option<ApproxReal>,
    prec: u32,
}

impl Embedder {
    fn new(d: u64, prec: u32) -> Self {
        let root = (d > 1).then(|| ApproxReal::from_int(d, prec + 8).sqrt().expect("positive radicand"));
        Embedder { root, prec }
    }

    fn embed(&self, x: &QuadElem) -> ApproxReal {
        let a = ApproxReal::from_rational(x.a(), self.prec);
        match (&self.root, x.is_rational()) {
            (Some(r), false) => a.add(&r.mul_rational(x.b())),
            _ => a,
        }
    }
}

/// Embedding with relative radius about `2^-prec`, however much `a + b*sqrt(d)`
/// cancels.
pub fn embed_relative(x: &QuadElem, prec: u32) -> ApproxReal {
    if x.is_zero() {
        return ApproxReal::zero(prec);
    }
    let mut extra = 16;
    loop {
        let v = Embedder::new(x.d(), prec + extra).embed(x);
        let lower = v.abs_lower();
        if !lower.is_zero() && v.radius() <= lower.mul_2exp(-i64::from(prec)) {
            return v.with_prec(prec);
        }
        extra *= 2;
    }
}

fn default_budget(def: &SeriesDef, tol_bits: u32) -> u64 {
    let limit = crate::precision::embed_quad(&def.limit_ratio(), 64).to_f64();
    let per_term = if limit <= 0.0 { 64.0 } else { -limit.log2() };
    let est = f64::from(tol_bits) / per_term.max(1e-3);
    (10.0 * est) as u64 + 2_000
}

/// Sums `def` with absolute radius at most `2^-tol_bits`, working at `prec` bits.
fn sum_at(
    def: &SeriesDef,
    env: &ConvergenceEnvelope,
    mode: TailMode,
    prec: u32,
    tol_bits: u32,
    budget: u64,
) -> Result<SeriesSum, EvalError> {
    let tol = Mag::pow2(-i64::from(tol_bits));
    let tiny = Mag::pow2(-i64::from(tol_bits) - 10);
    let emb = Embedder::new(def.radicand(), prec);
    let base = embed_relative(&def.base, prec);
    let start = def.base.pow(def.k_start as i64)?.checked_mul(&QuadElem::from(def.kernel_factor(def.k_start)))?;
    let mut factor = embed_relative(&start, prec);
    let atoms = def.weight.atoms();
    let mut harm = BallHarmonics::new(&atoms, def.k_start, prec);
    let qfac = {
        let one = Rational::one();
        let r = &env.q / (&one - &env.q);
        ApproxReal::from_rational(&r, 64).abs_upper()
    };
    let mut sum = ApproxReal::zero(prec);
    let mut run = 0u32;
    let mut prev = Mag::ZERO;
    for k in def.k_start.. {
        if k - def.k_start > budget {
            return Err(EvalError::TermBudget(budget));
        }
        let kq = QuadElem::from(k as i64);
        let mut w = ApproxReal::zero(prec);
        for (atom, c) in def.weight.terms() {
            let cv = emb.embed(&c.eval(&kq)?);
            w = w.add(&match atom {
                None => cv,
                Some(a) => cv.mul(harm.get(a)),
            });
        }
        let den = def.den_value(k);
        let t = w.mul(&factor).div(&ApproxReal::from_int(den, prec)).expect("nonzero denominator");
        sum = sum.add(&t);
        let mag = t.abs_upper();
        match mode {
            TailMode::Certified if k >= env.k0 => {
                let bound = mag.mul_up(qfac);
                if bound <= tol.mul_2exp(-2) {
                    return Ok(SeriesSum {
                        value: sum.add_error(bound),
                        terms_used: k - def.k_start + 1,
                        tail_mode: mode,
                    });
                }
            }
            TailMode::Certified => {}
            TailMode::Heuristic => {
                if mag < tiny && mag <= prev {
                    run += 1;
                } else if mag < tiny && k == def.k_start {
                    run = 1;
                } else {
                    run = 0;
                }
                prev = mag;
                if run >= 32 {
                    let slack = mag.mul_u64_up(k.max(1));
                    return Ok(SeriesSum {
                        value: sum.add_error(slack),
                        terms_used: k - def.k_start + 1,
                        tail_mode: mode,
                    });
                }
            }
        }
        factor = factor.mul(&base).mul_rational(&def.kernel_step(k));
        harm.advance(k);
    }
    unreachable!("the summation loop only exits by returning")
}

/// Harmonic numbers kept as running balls.
struct BallHarmonics {
    values: Vec<(HarmonicAtom, i64, ApproxReal)>,
    prec: u32,
}

impl BallHarmonics {
    fn new(atoms: &[HarmonicAtom], k: u64, prec: u32) -> Self {
        let mut out = BallHarmonics { values: Vec::new(), prec };
        for &a in atoms {
            let mut v = ApproxReal::zero(prec);
            let n = a.index(k).max(0);
            for i in 1..=n {
                v = v.add(&out.recip_pow(i, a.order));
            }
            out.values.push((a, n, v));
        }
        out
    }

    fn recip_pow(&self, i: i64, order: u32) -> ApproxReal {
        let r = Rational::new(BigInt::one(), BigInt::from(i).pow(order));
        ApproxReal::from_rational(&r, self.prec)
    }

    fn get(&self, a: HarmonicAtom) -> &ApproxReal {
        &self.values.iter().find(|(b, _, _)| *b == a).expect("atom registered").2
    }

    fn advance(&mut self, k: u64) {
        for idx in 0..self.values.len() {
            let (a, mut n, _) = self.values[idx].clone();
            let target = a.index(k + 1);
            let mut v = self.values[idx].2.clone();
            while n < target {
                n += 1;
                v = v.add(&self.recip_pow(n, a.order));
            }
            self.values[idx] = (a, n, v);
        }
    }
}

fn resolve_mode(def: &SeriesDef, mode: Option<TailMode>) -> Result<TailMode, EvalError> {
    let hyper = def.weight.is_hypergeometric();
    match mode {
        Some(TailMode::Certified) if !hyper => Err(EvalError::NotHypergeometric),
        Some(m) => Ok(m),
        None if hyper => Ok(TailMode::Certified),
        None => Ok(TailMode::Heuristic),
    }
}

/// Sums `def` to absolute radius `2^-tol_bits`, retrying at doubled working
/// precision up to four times.
pub fn sum_series_bits(
    def: &SeriesDef,
    tol_bits: u32,
    mode: Option<TailMode>,
    budget: Option<u64>,
) -> Result<SeriesSum, EvalError> {
    let signed_limit = def.base.checked_mul(&QuadElem::from(def.kernel_growth()))?;
    if signed_limit == QuadElem::from_int(-1) {
        if mode == Some(TailMode::Certified) {
            return Err(EvalError::NonConvergent("-1 (no certified tail on the boundary)".into()));
        }
        return sum_boundary_alternating(def, tol_bits);
    }
    let mode = resolve_mode(def, mode)?;
    let mut env = certify_envelope(def)?;
    if mode == TailMode::Certified && env.mode == TailMode::Heuristic {
        return Err(EvalError::NotHypergeometric);
    }
    env.mode = mode;
    let budget = budget.unwrap_or_else(|| default_budget(def, tol_bits));
    let target = Mag::pow2(-i64::from(tol_bits));
    let mut prec = tol_bits + 48;
    let mut last = None;
    for _ in 0..=4 {
        let s = sum_at(def, &env, mode, prec, tol_bits, budget)?;
        if s.value.radius() <= target {
            return Ok(s);
        }
        last = Some(s);
        prec *= 2;
    }
    Ok(last.expect("at least one attempt"))
}

/// Sums a series whose term ratio tends to `-1` with the
/// Cohen-Rodriguez Villegas-Zagier acceleration. The error estimate compares
/// two acceleration orders, so the result is heuristic.
fn sum_boundary_alternating(def: &SeriesDef, tol_bits: u32) -> Result<SeriesSum, EvalError> {
    let rho = term_ratio_ratfun(def).map_err(|_| EvalError::NonConvergent("-1".into()))?;
    let (n, d) = (rho.num(), rho.den());
    let m = n.degree().unwrap_or(0);
    if d.degree() != Some(m) || m == 0 {
        return Err(EvalError::NonConvergent("-1".into()));
    }
    let sub = n.coeff(m - 1).checked_div(&n.coeff(m))?;
    let alpha = sub.checked_sub(&d.coeff(m - 1).checked_div(&d.coeff(m))?)?;
    if alpha.signum() >= 0 {
        return Err(EvalError::NonConvergent("-1 with non-decaying terms".into()));
    }
    let order = (f64::from(tol_bits) / 5.828f64.log2()).ceil() as u64 + 8;
    let high = order + order / 4 + 8;
    let prec = tol_bits + 64;
    let mut terms = Vec::with_capacity(high as usize);
    let mut t = term_exact(def, def.k_start)?;
    for i in 0..high {
        let k = def.k_start + i;
        let a = if i % 2 == 0 { t.clone() } else { -t.clone() };
        terms.push(embed_relative(&a, prec));
        t = t.checked_mul(&rho.eval(&QuadElem::from(k as i64))?)?;
    }
    let low_sum = cvz(&terms[..order as usize], prec);
    let high_sum = cvz(&terms, prec);
    let err = low_sum.sub(&high_sum).abs_upper().mul_2exp(1);
    Ok(SeriesSum {
        value: high_sum.add_error(err).with_prec(prec),
        terms_used: high,
        tail_mode: TailMode::Heuristic,
    })
}

/// `sum_k (-1)^k a_k` from the first `a.len()` values of `a`.
fn cvz(a: &[ApproxReal], prec: u32) -> ApproxReal {
    let n = a.len() as i64;
    let root8 = ApproxReal::from_int(8, prec).sqrt().expect("positive");
    let big = ApproxReal::from_int(3, prec).add(&root8).pow_int(n).expect("nonzero");
    let d = big.add(&big.recip().expect("nonzero")).mul_2exp(-1);
    let mut b = -Rational::one();
    let mut c = d.neg();
    let mut s = ApproxReal::zero(prec);
    for (k, ak) in a.iter().enumerate() {
        let k = k as i64;
        c = ApproxReal::from_rational(&b, prec).sub(&c);
        s = s.add(&c.mul(ak));
        b = b * Rational::from_integer(BigInt::from((k + n) * (k - n)))
            / Rational::new(BigInt::from((2 * k + 1) * (k + 1)), BigInt::from(2));
    }
    s.div(&d).expect("nonzero")
}

fn digits_to_bits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32
}

/// Ball containing the sum, with radius at most `10^-digits` when attainable.
pub fn sum_series(def: &SeriesDef, digits: u32, mode: Option<TailMode>) -> Result<ApproxReal, EvalError> {
    Ok(sum_series_bits(def, digits_to_bits(digits.max(1)) + 2, mode, None)?.value)
}

/// `sum_{k_start <= k <= n} t_k` as a ball, from exact terms.
pub fn partial_sum_ball(def: &SeriesDef, n: u64, prec: u32) -> Result<ApproxReal, EvalError> {
    let mut acc = QuadElem::zero();
    for k in def.k_start..=n {
        acc = acc.checked_add(&term_exact(def, k)?)?;
    }
    Ok(embed_relative(&acc, prec))
}

/// Bound on `sum_{k>n} |t_k|` from the envelope, valid for `n >= env.k0`.
pub fn tail_bound(def: &SeriesDef, env: &ConvergenceEnvelope, n: u64) -> Result<Mag, EvalError> {
    let tn = embed_relative(&term_exact(def, n)?, 64).abs_upper();
    let q = ApproxReal::from_rational(&(&env.q / (Rational::one() - &env.q)), 64).abs_upper();
    Ok(tn.mul_up(q))
}

/// Exact `t_{k+1}/t_k`.
pub fn term_ratio_at(def: &SeriesDef, k: u64) -> Result<QuadElem, EvalError> {
    Ok(term_exact(def, k + 1)?.checked_div(&term_exact(def, k)?)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub identity_id: String,
    pub status: Status,
    pub digits_matched: i64,
    pub residual: ApproxReal,
    pub lhs: ApproxReal,
    pub terms_used: u64,
    pub tail_mode: TailMode,
    pub elapsed: f64,
}

impl VerificationReport {
    /// `<id>\t<status>\t<digits_matched>\t<terms_used>\t<tail_mode>\t<elapsed_s>`
    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{:.3}",
            self.identity_id, self.status, self.digits_matched, self.terms_used, self.tail_mode, self.elapsed
        )
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} {:<12} digits={:<5} terms={:<6} {:<9} {:>8.3}s  lhs={}",
            self.identity_id,
            self.status,
            self.digits_matched,
            self.terms_used,
            self.tail_mode,
            self.elapsed,
            self.lhs.render()
        )
    }
}

/// `floor(-log10 |residual|)` over the whole ball.
fn digits_matched(residual: &ApproxReal) -> i64 {
    let up = residual.abs_upper();
    if up.is_zero() {
        return EXACT_DIGITS;
    }
    (-up.log2() / std::f64::consts::LOG2_10).floor() as i64
}

/// Checks `scale * sum(def) = rhs` to `digits` decimal digits.
pub fn verify_series(
    id: &str,
    def: &SeriesDef,
    scale: Option<&ClosedForm>,
    rhs: &ClosedForm,
    digits: u32,
    mode: Option<TailMode>,
) -> Result<VerificationReport, EvalError> {
    let started = Instant::now();
    let digits = digits.max(1);
    let scale_mag = match scale {
        Some(s) => s.eval_bits(32)?.abs_upper().log2().max(0.0).ceil() as u32,
        None => 0,
    };
    let mut internal = digits + 3;
    for attempt in 0..2 {
        let bits = digits_to_bits(internal) + 2;
        let sum = sum_series_bits(def, bits + scale_mag + 4, mode, None)?;
        let lhs = match scale {
            Some(s) => s.eval_bits(bits + 8 + sum.value.abs_upper().log2().max(0.0) as u32)?.mul(&sum.value),
            None => sum.value.clone(),
        };
        let rhs_v = rhs.eval_bits(bits + 4)?;
        let residual = lhs.sub(&rhs_v);
        let status = if !residual.contains_zero() {
            Status::Fail
        } else if residual.radius_within_pow10(i64::from(digits)) {
            Status::Pass
        } else {
            Status::Inconclusive
        };
        if status != Status::Inconclusive || attempt == 1 {
            return Ok(VerificationReport {
                identity_id: id.to_string(),
                status,
                digits_matched: digits_matched(&residual),
                residual,
                lhs,
                terms_used: sum.terms_used,
                tail_mode: sum.tail_mode,
                elapsed: started.elapsed().as_secs_f64(),
            });
        }
        internal *= 2;
    }
    unreachable!("the second attempt always reports")
}

/// Whether `|x| < 1` exactly.
pub fn below_one(x: &QuadElem) -> bool {
    x.abs().try_cmp(&QuadElem::one()).is_ok_and(|o| o.is_lt())
}
