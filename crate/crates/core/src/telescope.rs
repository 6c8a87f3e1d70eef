//! Exact checks of proof certificates: telescoping closed forms for partial
//! sums, an antiderivative identity, and the Beta/binomial identity.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::catalog::{IdentityRecord, RecordKind};
use crate::constants::{atan_inv, pi_machin};
use crate::exactnum::{poly_derivative, ratfun_equal, ExactError, Poly, QuadElem, RatFun, Rational};
use crate::kernels::{binomial, KernelFamily};
use crate::precision::ApproxReal;
use crate::seriesmodel::{den_from_expr, term_exact, weight_from_expr, KernelPosition, SeriesDef, SeriesError};
use crate::syntax::{eval_quad, parse_expr, BinOp, Expr};

#[derive(Debug, Error)]
pub enum TelescopeError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
    /// The closed form cannot telescope to the summand as written.
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn malformed(m: impl Into<String>) -> TelescopeError {
    TelescopeError::Malformed(m.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn tag(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertReport {
    pub id: String,
    pub verdict: Verdict,
    pub detail: String,
    /// Nonzero numerator of `R(n) - R(n-1) - t(n)` after kernel elimination.
    pub witness: Option<Poly>,
}

impl CertReport {
    fn pass(id: &str, detail: impl Into<String>) -> Self {
        CertReport { id: id.to_string(), verdict: Verdict::Pass, detail: detail.into(), witness: None }
    }

    fn fail(id: &str, detail: impl Into<String>, witness: Option<Poly>) -> Self {
        CertReport { id: id.to_string(), verdict: Verdict::Fail, detail: detail.into(), witness }
    }
}

impl fmt::Display for CertReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.id, self.verdict.tag(), self.detail)?;
        if let Some(w) = &self.witness {
            write!(f, "\twitness: {w}")?;
        }
        Ok(())
    }
}

/// `sum_{k=k_start}^n t(k) = R(n)` with `t(k) = w(k) x^k c_k^(+-1) / den(k)`
/// and `R(n) = c0 + B(n) x^(n+s) c_n^(+-1)`. `x` may stay symbolic.
#[derive(Clone, Debug)]
pub struct TelescopingCert {
    pub id: String,
    pub kernel: KernelFamily,
    pub position: KernelPosition,
    pub base: Expr,
    pub weight: Expr,
    pub den: Option<Expr>,
    pub k_start: u64,
    pub closed_form: Expr,
}

/// The certificate with `x` replaced by a number.
struct Specialized {
    summand: SeriesDef,
    c0: QuadElem,
    coeff: RatFun,
    shift: i64,
    kernel_exp: i32,
}

impl TelescopingCert {
    pub fn from_record(r: &IdentityRecord) -> Result<Self, TelescopeError> {
        if r.kind != RecordKind::Telescoping {
            return Err(malformed(format!("record '{}' is not a telescoping certificate", r.id)));
        }
        let field = |k: &str| r.field(k).ok_or_else(|| malformed(format!("missing {k}")));
        let expr = |k: &str| -> Result<Expr, TelescopeError> {
            parse_expr(field(k)?).map_err(|e| malformed(format!("{k}: {e}")))
        };
        let kernel = field("kernel")?.parse::<KernelFamily>().map_err(|e| malformed(e.to_string()))?;
        let position = match r.field("position").unwrap_or("numerator") {
            "numerator" => KernelPosition::Numerator,
            "denominator" => KernelPosition::Denominator,
            p => return Err(malformed(format!("position '{p}'"))),
        };
        let k_start = match r.field("kstart").unwrap_or("0") {
            "0" => 0,
            "1" => 1,
            s => return Err(malformed(format!("kstart '{s}'"))),
        };
        Ok(TelescopingCert {
            id: r.id.clone(),
            kernel,
            position,
            base: expr("base")?,
            weight: expr("weight")?,
            den: r.field("den").map(|_| expr("den")).transpose()?,
            k_start,
            closed_form: expr("closed_form")?,
        })
    }

    /// Whether the certificate is stated for an indeterminate `x`.
    pub fn is_symbolic(&self) -> bool {
        self.base.mentions("x") || self.weight.mentions("x") || self.closed_form.mentions("x")
    }

    /// Summand series at a concrete `x` (ignored when not symbolic).
    pub fn summand_series(&self, x: i64) -> Result<SeriesDef, TelescopeError> {
        Ok(self.specialize(x)?.summand)
    }

    /// Exact `R(n)` at a concrete `x`.
    pub fn closed_form_at(&self, n: u64, x: i64) -> Result<QuadElem, TelescopeError> {
        let s = self.specialize(x)?;
        Ok(s.c0.checked_add(&boundary_at(&s, self.kernel, n)?)?)
    }

    /// Ball for the boundary term `R(n) - c0` at a concrete `x`.
    pub fn boundary_ball(&self, n: u64, x: i64, prec: u32) -> Result<ApproxReal, TelescopeError> {
        let s = self.specialize(x)?;
        Ok(crate::precision::embed_quad(&boundary_at(&s, self.kernel, n)?, prec))
    }

    fn specialize(&self, x: i64) -> Result<Specialized, TelescopeError> {
        let xv = Expr::int(x);
        let sub = |e: &Expr| e.substitute("x", &xv);
        let base = eval_quad(&sub(&self.base)).map_err(|m| malformed(format!("base: {m}")))?;
        let weight = weight_from_expr(&sub(&self.weight))?;
        if !weight.is_hypergeometric() {
            return Err(malformed("weight must be a rational function of k"));
        }
        let den = self.den.as_ref().map(|d| den_from_expr(&sub(d))).transpose()?.unwrap_or_default();
        let summand = SeriesDef {
            kernel: Some(self.kernel),
            position: self.position,
            base,
            weight,
            den,
            k_start: self.k_start,
        };
        summand.validate()?;

        let closed = sub(&self.closed_form).substitute("n", &Expr::ident("k"));
        let mut terms = Vec::new();
        additive_terms(&closed, true, &mut terms);
        let mut c0 = QuadElem::zero();
        let mut boundary = None;
        for (positive, t) in terms {
            if t.mentions("k") {
                if boundary.replace((positive, t)).is_some() {
                    return Err(malformed("closed form has more than one boundary term"));
                }
            } else {
                let v = eval_quad(&t).map_err(|m| malformed(format!("closed form constant: {m}")))?;
                c0 = if positive { c0.checked_add(&v)? } else { c0.checked_sub(&v)? };
            }
        }
        let (positive, term) = boundary.ok_or_else(|| malformed("closed form has no boundary term"))?;
        let mut parts = Parts {
            coeff: RatFun::one('k'),
            binoms: Vec::new(),
            power: None,
        };
        if !positive {
            parts.coeff = parts.coeff.scale(&QuadElem::from_int(-1));
        }
        parts.collect(&term, true)?;

        let (shift, kernel_exp) = {
            let (beta, s, sign) = match parts.power {
                Some(p) => p,
                None => (QuadElem::one(), 0, true),
            };
            let eff = if sign { beta } else { beta.checked_inv()? };
            if eff != summand.base {
                return Err(TelescopeError::Mismatch(format!("boundary base {eff} differs from summand base {}", summand.base)));
            }
            let num: Vec<_> = parts.binoms.iter().filter(|b| b.2).map(|b| (b.0, b.1)).collect();
            let den: Vec<_> = parts.binoms.iter().filter(|b| !b.2).map(|b| (b.0, b.1)).collect();
            let exp = match (num.is_empty(), den.is_empty()) {
                (true, true) => 0,
                (false, true) => 1,
                (true, false) => -1,
                _ => return Err(malformed("kernel on both sides of the boundary term")),
            };
            if exp != 0 {
                let fam = KernelFamily::from_binomials(if exp > 0 { num } else { den });
                if fam != Some(self.kernel) {
                    return Err(TelescopeError::Mismatch("boundary kernel differs from the summand kernel".into()));
                }
            }
            (s, exp)
        };
        Ok(Specialized { summand, c0, coeff: parts.coeff, shift, kernel_exp })
    }

    /// Number of integer literals a perturbation may change.
    pub fn int_sites(&self) -> usize {
        count_ints(&self.weight) + count_ints(&self.closed_form)
    }

    /// Copy with integer literal number `site` increased by `delta`.
    pub fn perturbed(&self, site: usize, delta: i64) -> Self {
        let mut out = self.clone();
        let n = count_ints(&self.weight);
        let mut idx = 0;
        if site < n {
            out.weight = bump(&self.weight, site, delta, &mut idx);
        } else {
            out.closed_form = bump(&self.closed_form, site - n, delta, &mut idx);
        }
        out
    }
}

struct Parts {
    coeff: RatFun,
    /// `(top, bottom, in_numerator)` for each `binom(top*n, bottom*n)`.
    binoms: Vec<(u32, u32, bool)>,
    /// `(beta, s, in_numerator)` for the factor `beta^(n+s)`.
    power: Option<(QuadElem, i64, bool)>,
}

impl Parts {
    fn collect(&mut self, e: &Expr, up: bool) -> Result<(), TelescopeError> {
        match e {
            Expr::Bin(BinOp::Mul, a, b) => {
                self.collect(a, up)?;
                self.collect(b, up)
            }
            Expr::Bin(BinOp::Div, a, b) => {
                self.collect(a, up)?;
                self.collect(b, !up)
            }
            Expr::Neg(a) => {
                self.coeff = self.coeff.scale(&QuadElem::from_int(-1));
                self.collect(a, up)
            }
            Expr::Call(name, args) if name == "binom" => {
                let [top, bottom] = args.as_slice() else {
                    return Err(malformed("binom takes two arguments"));
                };
                self.binoms.push((multiple_of_n(top)?, multiple_of_n(bottom)?, up));
                Ok(())
            }
            Expr::Bin(BinOp::Pow, a, m) if matches!(**a, Expr::Call(ref c, _) if c == "binom") => {
                let m = m.as_int().filter(|&m| m > 0).ok_or_else(|| malformed("kernel power must be positive"))?;
                for _ in 0..m {
                    self.collect(a, up)?;
                }
                Ok(())
            }
            Expr::Bin(BinOp::Pow, a, b) if b.mentions("k") => {
                if a.mentions("k") {
                    return Err(malformed("base power must have a constant base"));
                }
                let beta = eval_quad(a).map_err(|m| malformed(format!("base power: {m}")))?;
                let f = weight_from_expr(b)?.as_unit().ok_or_else(|| malformed("exponent must be n + s"))?;
                let p = f.reduced()?;
                let s = p
                    .den()
                    .as_constant()
                    .filter(|d| d == &QuadElem::one())
                    .and_then(|_| (p.num().degree() == Some(1) && p.num().coeff(1) == QuadElem::one()).then(|| p.num().coeff(0)))
                    .and_then(|c| c.as_rational().filter(|r| r.is_integer()).and_then(|r| i64::try_from(r.to_integer()).ok()))
                    .ok_or_else(|| malformed("exponent must be n + s with integer s"))?;
                if self.power.replace((beta, s, up)).is_some() {
                    return Err(malformed("more than one base power"));
                }
                Ok(())
            }
            other => {
                let f = weight_from_expr(other)?.as_unit().ok_or_else(|| malformed("harmonic numbers in a closed form"))?;
                self.coeff = if up { self.coeff.checked_mul(&f)? } else { self.coeff.checked_div(&f)? };
                Ok(())
            }
        }
    }
}

/// `c` from an expression `c*n` (after renaming, `c*k`).
fn multiple_of_n(e: &Expr) -> Result<u32, TelescopeError> {
    let f = weight_from_expr(e)?.as_unit().ok_or_else(|| malformed("binom argument"))?;
    let p = f.reduced()?;
    let ok = p.den().as_constant() == Some(QuadElem::one()) && p.num().degree() == Some(1) && p.num().coeff(0).is_zero();
    let c = p.num().coeff(1);
    let c = c.as_rational().filter(|r| ok && r.is_integer()).and_then(|r| u32::try_from(r.to_integer()).ok());
    c.filter(|&c| c > 0).ok_or_else(|| malformed(format!("binom argument '{e}' must be c*n")))
}

fn additive_terms(e: &Expr, positive: bool, out: &mut Vec<(bool, Expr)>) {
    match e {
        Expr::Bin(BinOp::Add, a, b) => {
            additive_terms(a, positive, out);
            additive_terms(b, positive, out);
        }
        Expr::Bin(BinOp::Sub, a, b) => {
            additive_terms(a, positive, out);
            additive_terms(b, !positive, out);
        }
        Expr::Neg(a) => additive_terms(a, !positive, out),
        other => out.push((positive, other.clone())),
    }
}

fn boundary_at(s: &Specialized, kernel: KernelFamily, n: u64) -> Result<QuadElem, TelescopeError> {
    let nq = QuadElem::from(n as i64);
    let mut v = s.coeff.eval(&nq)?.checked_mul(&s.summand.base.pow(n as i64 + s.shift)?)?;
    let kv = QuadElem::from(Rational::from_integer(kernel.value(n)));
    v = match s.kernel_exp {
        1 => v.checked_mul(&kv)?,
        -1 => v.checked_div(&kv)?,
        _ => v,
    };
    Ok(v)
}

fn count_ints(e: &Expr) -> usize {
    match e {
        Expr::Int(_) => 1,
        Expr::Ident(_) => 0,
        Expr::Call(name, _) if name == "binom" => 0,
        Expr::Call(_, args) => args.iter().map(count_ints).sum(),
        Expr::Neg(a) => count_ints(a),
        Expr::Bin(_, a, b) => count_ints(a) + count_ints(b),
    }
}

fn bump(e: &Expr, site: usize, delta: i64, idx: &mut usize) -> Expr {
    match e {
        Expr::Int(v) => {
            let here = *idx == site;
            *idx += 1;
            if here {
                Expr::Int(v + BigInt::from(delta))
            } else {
                e.clone()
            }
        }
        Expr::Ident(_) => e.clone(),
        Expr::Call(name, _) if name == "binom" => e.clone(),
        Expr::Call(name, args) => Expr::Call(name.clone(), args.iter().map(|a| bump(a, site, delta, idx)).collect()),
        Expr::Neg(a) => Expr::Neg(Box::new(bump(a, site, delta, idx))),
        Expr::Bin(op, a, b) => {
            let a = bump(a, site, delta, idx);
            Expr::bin(*op, a, bump(b, site, delta, idx))
        }
    }
}

/// Upper bound on the degree in `x` of a polynomial expression, ignoring
/// factors whose exponent involves `n`.
fn x_degree(e: &Expr) -> Result<u32, TelescopeError> {
    Ok(match e {
        Expr::Int(_) => 0,
        Expr::Ident(s) => u32::from(s == "x"),
        Expr::Call(_, args) => {
            if args.iter().any(|a| a.mentions("x")) {
                return Err(malformed("x inside a function call"));
            }
            0
        }
        Expr::Neg(a) => x_degree(a)?,
        Expr::Bin(BinOp::Add | BinOp::Sub, a, b) => x_degree(a)?.max(x_degree(b)?),
        Expr::Bin(BinOp::Mul, a, b) => x_degree(a)? + x_degree(b)?,
        Expr::Bin(BinOp::Div, a, b) => {
            if b.mentions("x") && !matches!(**b, Expr::Bin(BinOp::Pow, _, ref ex) if ex.mentions("n")) {
                return Err(malformed("x in a denominator"));
            }
            x_degree(a)?
        }
        Expr::Bin(BinOp::Pow, a, b) => {
            if b.mentions("n") || !a.mentions("x") {
                0
            } else {
                let m = b.as_int().filter(|&m| m >= 0).ok_or_else(|| malformed("x raised to a non-integer power"))?;
                x_degree(a)? * m as u32
            }
        }
    })
}

/// PASS iff the base case holds and `R(n) - R(n-1) = t(n)` is an identity in
/// `n` (and `x`, when symbolic) after replacing `c_n/c_{n-1}` by its exact
/// ratio. Symbolic `x` is handled by checking more distinct values of `x`
/// than the degree of the polynomial identity in `x`.
pub fn check_telescoping(cert: &TelescopingCert) -> Result<CertReport, TelescopeError> {
    let samples: Vec<i64> = if cert.is_symbolic() {
        let bound = x_degree(&cert.weight)? + x_degree(&cert.closed_form)? + 4 * (x_degree(&cert.base)? + 1);
        (1..=i64::from(bound) + 2).collect()
    } else {
        vec![1]
    };
    for &x in &samples {
        let at = if cert.is_symbolic() { format!(" at x = {x}") } else { String::new() };
        let s = match cert.specialize(x) {
            Ok(s) => s,
            Err(TelescopeError::Series(e)) => {
                return Ok(CertReport::fail(&cert.id, format!("summand undefined{at}: {e}"), None));
            }
            Err(TelescopeError::Mismatch(m)) => return Ok(CertReport::fail(&cert.id, m, None)),
            Err(e) => return Err(e),
        };

        let k0 = cert.k_start;
        let lhs = term_exact(&s.summand, k0)?;
        let rhs = match boundary_at(&s, cert.kernel, k0).and_then(|b| Ok(s.c0.checked_add(&b)?)) {
            Ok(v) => v,
            Err(_) => return Ok(CertReport::fail(&cert.id, format!("closed form undefined at n = {k0}{at}"), None)),
        };
        if lhs != rhs {
            return Ok(CertReport::fail(&cert.id, format!("base case n = {k0} fails{at}: t = {lhs}, R = {rhs}"), None));
        }

        let sigma = match cert.position {
            KernelPosition::Numerator => 1,
            KernelPosition::Denominator => -1,
        };
        if s.kernel_exp != sigma {
            return Ok(CertReport::fail(&cert.id, "kernel exponent of R differs from the summand's", None));
        }
        let minus_one = QuadElem::from_int(-1);
        let beta = RatFun::constant('k', s.summand.base.clone());
        let (p, q) = cert.kernel.ratio_polys('k');
        // c_{n-1}/c_n raised to the kernel exponent.
        let back = match sigma {
            1 => RatFun::new(q.shift(&minus_one), p.shift(&minus_one))?,
            _ => RatFun::new(p.shift(&minus_one), q.shift(&minus_one))?,
        };
        let now = s.coeff.checked_mul(&beta.pow(s.shift as i32)?)?;
        let before = s.coeff.shift(&minus_one).checked_mul(&beta.pow(s.shift as i32 - 1)?)?.checked_mul(&back)?;
        let w = s.summand.weight.as_unit().expect("checked hypergeometric");
        let den = s.summand.den.iter().fold(Poly::one('k'), |acc, f| {
            &acc * &Poly::linear('k', f.u, f.v).pow(f.e)
        });
        let t = w.checked_div(&RatFun::from_poly(den))?;
        let diff = now.checked_add(&(-&before))?.checked_add(&(-&t))?.reduced()?;
        if !diff.is_zero() {
            return Ok(CertReport::fail(
                &cert.id,
                format!("induction step fails{at}"),
                Some(diff.num().clone()),
            ));
        }
    }
    let how = if cert.is_symbolic() {
        format!("base case and induction step hold for {} values of x", samples.len())
    } else {
        "base case and induction step hold".to_string()
    };
    Ok(CertReport::pass(&cert.id, how))
}

/// `f = f_rational + f_arctan * atan(t)` with claimed derivative `target`.
#[derive(Clone, Debug)]
pub struct DerivativeCert {
    pub id: String,
    pub f_rational: RatFun,
    pub f_arctan: Rational,
    pub target: RatFun,
}

fn ratfun_in_t(src: &str) -> Result<RatFun, TelescopeError> {
    let e = parse_expr(src).map_err(|e| malformed(e.to_string()))?;
    weight_from_expr(&e.substitute("t", &Expr::ident("k")))?
        .as_unit()
        .ok_or_else(|| malformed("expected a rational function of t"))
}

impl DerivativeCert {
    pub fn from_record(r: &IdentityRecord) -> Result<Self, TelescopeError> {
        if r.kind != RecordKind::Derivative {
            return Err(malformed(format!("record '{}' is not a derivative certificate", r.id)));
        }
        let field = |k: &str| r.field(k).ok_or_else(|| malformed(format!("missing {k}")));
        let c = match r.field("f_arctan") {
            None => Rational::zero(),
            Some(s) => {
                let e = parse_expr(s).map_err(|e| malformed(e.to_string()))?;
                let q = eval_quad(&e).map_err(malformed)?;
                q.as_rational().cloned().ok_or_else(|| malformed("f_arctan must be rational"))?
            }
        };
        Ok(DerivativeCert {
            id: r.id.clone(),
            f_rational: ratfun_in_t(field("f_rational")?)?,
            f_arctan: c,
            target: ratfun_in_t(field("target")?)?,
        })
    }

    /// `f(t)` for `t = 0`, `t = 1` or `t = 1/m`.
    pub fn value_at(&self, t: &Rational, prec: u32) -> Result<ApproxReal, TelescopeError> {
        let w = prec + 16;
        let rat = self.f_rational.eval(&QuadElem::from(t.clone()))?;
        let rat = ApproxReal::from_rational(rat.as_rational().expect("rational input"), w);
        let atan = if t.is_zero() {
            ApproxReal::zero(w)
        } else if t.is_one() {
            pi_machin(w).mul_2exp(-2)
        } else if t.numer().is_one() && t.denom() > &BigInt::one() {
            let m = u64::try_from(t.denom().clone()).map_err(|_| malformed("argument too small"))?;
            atan_inv(m, w)
        } else {
            return Err(malformed(format!("arctan at {t} is not supported")));
        };
        Ok(rat.add(&atan.mul_rational(&self.f_arctan)).with_prec(prec))
    }
}

/// PASS iff `f_rational' + f_arctan/(1+t^2)` equals `target`.
pub fn check_derivative(cert: &DerivativeCert) -> Result<CertReport, TelescopeError> {
    let one_plus = RatFun::from_poly(Poly::from_ints('k', &[1, 0, 1]));
    let arctan_part = RatFun::constant('k', QuadElem::from(cert.f_arctan.clone())).checked_div(&one_plus)?;
    let lhs = poly_derivative(&cert.f_rational).checked_add(&arctan_part)?;
    if ratfun_equal(&lhs, &cert.target) {
        Ok(CertReport::pass(&cert.id, "derivative matches the target"))
    } else {
        let diff = lhs.checked_add(&(-&cert.target))?.reduced()?;
        Ok(CertReport::fail(&cert.id, "derivative differs from the target", Some(diff.num().clone())))
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Checks `(3k)!^2/(6k+1)! = 1/((6k+1) C(6k,3k))` exactly for `k <= k_max`.
pub fn check_beta_binomial(k_max: u64) -> CertReport {
    let id = "beta-binomial";
    for k in 0..=k_max {
        let f = factorial(3 * k);
        let lhs = Rational::new(&f * &f, factorial(6 * k + 1));
        let rhs = Rational::new(BigInt::one(), BigInt::from(6 * k + 1) * binomial(6 * k, 3 * k));
        if lhs != rhs {
            return CertReport::fail(id, format!("mismatch at k = {k}"), None);
        }
    }
    CertReport::pass(id, format!("exact for 0 <= k <= {k_max}"))
}
