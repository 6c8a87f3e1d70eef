//! Structured summands `W(k) * base^k * c_k^(+-1) / prod (u*k+v)^e`, where the
//! weight `W` is a combination of rational functions in `k` and harmonic
//! numbers `H_{s*k+o}^(m)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::{ExactError, Poly, QuadElem, RatFun, Rational};
use crate::kernels::KernelFamily;
use crate::syntax::{eval_quad, parse_expr, BinOp, Expr, SyntaxError};

/// `H_{stride*k + offset}^{(order)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicAtom {
    pub stride: u32,
    pub offset: i32,
    pub order: u32,
}

impl HarmonicAtom {
    pub fn index(self, k: u64) -> i64 {
        i64::from(self.stride) * k as i64 + i64::from(self.offset)
    }

    /// Exact `H_n^(m)`.
    pub fn value(self, k: u64) -> Rational {
        harmonic(self.index(k).max(0) as u64, self.order)
    }
}

impl fmt::Display for HarmonicAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx = match (self.stride, self.offset) {
            (1, 0) => "k".to_string(),
            (s, 0) => format!("{s}*k"),
            (1, o) => format!("k - {}", -o),
            (s, o) => format!("{s}*k - {}", -o),
        };
        write!(f, "H({idx},{})", self.order)
    }
}

/// `H_n^(m) = sum_{0<j<=n} j^-m`.
pub fn harmonic(n: u64, order: u32) -> Rational {
    let mut acc = Rational::zero();
    for j in 1..=n {
        acc += Rational::new(BigInt::one(), BigInt::from(j).pow(order));
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelPosition {
    Numerator,
    Denominator,
}

impl KernelPosition {
    pub fn tag(self) -> &'static str {
        match self {
            KernelPosition::Numerator => "numerator",
            KernelPosition::Denominator => "denominator",
        }
    }
}

/// Linear combination `sum coeff_i(k) * atom_i(k)`; `None` is the unit atom.
#[derive(Clone, Debug)]
pub struct WeightExpr {
    terms: BTreeMap<Option<HarmonicAtom>, RatFun>,
}

impl WeightExpr {
    pub fn unit(f: RatFun) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(None, f);
        }
        WeightExpr { terms }
    }

    pub fn constant(c: QuadElem) -> Self {
        Self::unit(RatFun::constant('k', c))
    }

    pub fn terms(&self) -> impl Iterator<Item = (Option<HarmonicAtom>, &RatFun)> {
        self.terms.iter().map(|(a, f)| (*a, f))
    }

    pub fn atoms(&self) -> Vec<HarmonicAtom> {
        self.terms.keys().flatten().copied().collect()
    }

    /// The coefficient when the weight has no harmonic part.
    pub fn as_unit(&self) -> Option<RatFun> {
        match self.terms.len() {
            0 => Some(RatFun::zero('k')),
            1 => self.terms.get(&None).cloned(),
            _ => None,
        }
    }

    pub fn is_hypergeometric(&self) -> bool {
        self.as_unit().is_some()
    }

    fn add(mut self, other: Self, sign: i64) -> Result<Self, ExactError> {
        for (atom, f) in other.terms {
            let f = if sign < 0 { -&f } else { f };
            let sum = match self.terms.remove(&atom) {
                Some(g) => g.checked_add(&f)?,
                None => f,
            };
            if !sum.is_zero() {
                self.terms.insert(atom, sum);
            }
        }
        Ok(self)
    }

    fn scale_by(self, f: &RatFun) -> Result<Self, ExactError> {
        let mut terms = BTreeMap::new();
        for (atom, g) in self.terms {
            let p = g.checked_mul(f)?;
            if !p.is_zero() {
                terms.insert(atom, p);
            }
        }
        Ok(WeightExpr { terms })
    }

    pub fn map_coeffs(&self, f: impl Fn(&RatFun) -> RatFun) -> Self {
        WeightExpr {
            terms: self.terms.iter().map(|(a, g)| (*a, f(g))).collect(),
        }
    }

    /// Exact value at `k`.
    pub fn eval(&self, k: u64) -> Result<QuadElem, ExactError> {
        let kq = QuadElem::from(k as i64);
        let mut acc = QuadElem::zero();
        for (atom, f) in &self.terms {
            let c = f.eval(&kq)?;
            let v = match atom {
                None => c,
                Some(h) => c.checked_mul(&QuadElem::from(h.value(k)))?,
            };
            acc = acc.checked_add(&v)?;
        }
        Ok(acc)
    }

    /// Radicand shared by all coefficients (1 when rational).
    pub fn radicand(&self) -> u64 {
        self.terms
            .values()
            .flat_map(|f| f.num().coeffs().iter().chain(f.den().coeffs()))
            .map(QuadElem::d)
            .find(|&d| d != 1)
            .unwrap_or(1)
    }
}

impl PartialEq for WeightExpr {
    fn eq(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .all(|(a, f)| other.terms.get(a).is_some_and(|g| f.equals(g)))
    }
}

/// One denominator factor `(u*k + v)^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DenFactor {
    pub u: i64,
    pub v: i64,
    pub e: u32,
}

impl DenFactor {
    pub fn eval(self, k: i64) -> BigInt {
        BigInt::from(self.u * k + self.v).pow(self.e)
    }

    /// The nonnegative integer root of `u*k + v`, if any.
    pub fn integer_root(self) -> Option<i64> {
        if self.u == 0 {
            return None;
        }
        let (q, r) = (-self.v).div_rem(&self.u);
        (r == 0 && q >= 0).then_some(q)
    }

    fn poly(self, var: char) -> Poly {
        Poly::linear(var, self.u, self.v).pow(self.e)
    }
}

#[derive(Clone, Debug)]
pub struct SeriesDef {
    pub kernel: Option<KernelFamily>,
    pub position: KernelPosition,
    pub base: QuadElem,
    pub weight: WeightExpr,
    pub den: Vec<DenFactor>,
    pub k_start: u64,
}

impl PartialEq for SeriesDef {
    fn eq(&self, other: &Self) -> bool {
        let mut a = self.den.clone();
        let mut b = other.den.clone();
        a.sort();
        b.sort();
        self.kernel == other.kernel
            && (self.kernel.is_none() || self.position == other.position)
            && self.base == other.base
            && self.weight == other.weight
            && a == b
            && self.k_start == other.k_start
    }
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("{field}: {source}")]
    Syntax {
        field: &'static str,
        #[source]
        source: SyntaxError,
    },
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("denominator factor ({u}*k + {v}) vanishes at k = {k}")]
    ZeroDenominator { u: i64, v: i64, k: i64 },
    #[error("harmonic index {atom} is negative at k = {k}")]
    NegativeIndex { atom: HarmonicAtom, k: u64 },
    #[error("weight has harmonic atoms; term ratio is not a rational function")]
    NotHypergeometric,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> SeriesError {
    SeriesError::Invalid {
        field,
        message: message.into(),
    }
}

/// Textual fields of a series record, exactly as written in the catalog.
#[derive(Clone, Debug, Default)]
pub struct SeriesText<'a> {
    pub kernel: Option<&'a str>,
    pub position: Option<&'a str>,
    pub base: &'a str,
    pub weight: &'a str,
    pub den: Option<&'a str>,
    pub kstart: Option<&'a str>,
}

/// Builds a [`SeriesDef`] from catalog fields.
pub fn parse_series(t: &SeriesText<'_>) -> Result<SeriesDef, SeriesError> {
    let kernel = match t.kernel {
        None | Some("none") => None,
        Some(s) => Some(s.parse::<KernelFamily>().map_err(|e| invalid("kernel", e.to_string()))?),
    };
    let position = match t.position.unwrap_or("numerator") {
        "numerator" => KernelPosition::Numerator,
        "denominator" => KernelPosition::Denominator,
        other => return Err(invalid("position", format!("expected numerator or denominator, got '{other}'"))),
    };
    let syn = |field, src: &str| parse_expr(src).map_err(|source| SeriesError::Syntax { field, source });
    let base = eval_quad(&syn("base", t.base)?).map_err(|m| invalid("base", m))?;
    let weight = weight_from_expr(&syn("weight", t.weight)?)?;
    let den = match t.den {
        None => Vec::new(),
        Some(s) => den_from_expr(&syn("den", s)?)?,
    };
    let k_start = match t.kstart.unwrap_or("0") {
        "0" => 0,
        "1" => 1,
        other => return Err(invalid("kstart", format!("expected 0 or 1, got '{other}'"))),
    };
    let def = SeriesDef {
        kernel,
        position,
        base,
        weight,
        den,
        k_start,
    };
    def.validate()?;
    Ok(def)
}

/// Interprets a weight expression in `k` with `H(s*k+o,m)` atoms.
pub fn weight_from_expr(e: &Expr) -> Result<WeightExpr, SeriesError> {
    const F: &str = "weight";
    let w = |x: &Expr| weight_from_expr(x);
    Ok(match e {
        Expr::Int(n) => WeightExpr::constant(QuadElem::from(n.clone())),
        Expr::Ident(s) if s == "k" => WeightExpr::unit(RatFun::var('k')),
        Expr::Ident(s) => return Err(invalid(F, format!("unexpected name '{s}'"))),
        Expr::Call(name, args) if name == "sqrt" => {
            let c = eval_quad(&Expr::Call(name.clone(), args.clone())).map_err(|m| invalid(F, m))?;
            WeightExpr::constant(c)
        }
        Expr::Call(name, args) if name == "H" => {
            let order = match args.len() {
                1 => 1,
                2 => args[1].as_int().filter(|m| (1..=3).contains(m)).ok_or_else(|| invalid(F, "harmonic order must be 1, 2 or 3"))?,
                _ => return Err(invalid(F, "H takes an index and an order")),
            };
            let (stride, offset) = linear_index(&args[0])?;
            let atom = HarmonicAtom {
                stride,
                offset,
                order: order as u32,
            };
            let mut terms = BTreeMap::new();
            terms.insert(Some(atom), RatFun::one('k'));
            WeightExpr { terms }
        }
        Expr::Call(name, _) => return Err(invalid(F, format!("'{name}' is not allowed in a weight"))),
        Expr::Neg(x) => w(x)?.scale_by(&RatFun::constant('k', QuadElem::from_int(-1)))?,
        Expr::Bin(BinOp::Add, a, b) => w(a)?.add(w(b)?, 1)?,
        Expr::Bin(BinOp::Sub, a, b) => w(a)?.add(w(b)?, -1)?,
        Expr::Bin(BinOp::Mul, a, b) => {
            let (x, y) = (w(a)?, w(b)?);
            match (x.as_unit(), y.as_unit()) {
                (Some(f), _) => y.scale_by(&f)?,
                (_, Some(g)) => x.scale_by(&g)?,
                _ => return Err(invalid(F, "products of harmonic numbers are not supported")),
            }
        }
        Expr::Bin(BinOp::Div, a, b) => {
            let g = w(b)?.as_unit().ok_or_else(|| invalid(F, "cannot divide by a harmonic number"))?;
            if g.is_zero() {
                return Err(ExactError::DivisionByZero.into());
            }
            w(a)?.scale_by(&RatFun::one('k').checked_div(&g)?)?
        }
        Expr::Bin(BinOp::Pow, a, b) => {
            let f = w(a)?.as_unit().ok_or_else(|| invalid(F, "cannot raise a harmonic number to a power"))?;
            let n = b.as_int().ok_or_else(|| invalid(F, "exponent must be an integer"))?;
            WeightExpr::unit(f.pow(n as i32)?)
        }
    })
}

/// Integer polynomial of degree at most one, as `(u, v)` with value `u*k + v`.
fn linear_int(e: &Expr, field: &'static str) -> Result<(i64, i64), SeriesError> {
    let f = weight_from_expr(e)
        .ok()
        .and_then(|w| w.as_unit())
        .ok_or_else(|| invalid(field, format!("'{e}' is not linear in k")))?;
    let f = f.reduced()?;
    let d = f.den().as_constant().ok_or_else(|| invalid(field, format!("'{e}' is not linear in k")))?;
    let p = f.num().scale(&d.checked_inv()?);
    if p.degree().unwrap_or(0) > 1 {
        return Err(invalid(field, format!("'{e}' is not linear in k")));
    }
    let int = |q: QuadElem| -> Option<i64> {
        let r = q.as_rational()?.clone();
        r.is_integer().then(|| r.to_integer().to_i64()).flatten()
    };
    let u = int(p.coeff(1)).ok_or_else(|| invalid(field, "coefficients must be integers"))?;
    let v = int(p.coeff(0)).ok_or_else(|| invalid(field, "coefficients must be integers"))?;
    Ok((u, v))
}

fn linear_index(e: &Expr) -> Result<(u32, i32), SeriesError> {
    let (u, v) = linear_int(e, "weight")?;
    if !(1..=6).contains(&u) || !(-1..=0).contains(&v) {
        return Err(invalid("weight", format!("harmonic index '{e}' must be s*k or s*k-1 with 1 <= s <= 6")));
    }
    Ok((u as u32, v as i32))
}

/// Interprets a product of integer linear factors, e.g. `k^3` or `(2k+1)(6k+5)`.
pub fn den_from_expr(e: &Expr) -> Result<Vec<DenFactor>, SeriesError> {
    let mut out = Vec::new();
    collect_den(e, &mut out)?;
    Ok(out)
}

fn collect_den(e: &Expr, out: &mut Vec<DenFactor>) -> Result<(), SeriesError> {
    match e {
        Expr::Bin(BinOp::Mul, a, b) => {
            collect_den(a, out)?;
            collect_den(b, out)
        }
        Expr::Bin(BinOp::Pow, a, b) => {
            let n = b
                .as_int()
                .filter(|&n| n >= 1)
                .ok_or_else(|| invalid("den", "exponent must be a positive integer"))?;
            let (u, v) = linear_int(a, "den")?;
            out.push(DenFactor { u, v, e: n as u32 });
            Ok(())
        }
        _ => {
            let (u, v) = linear_int(e, "den")?;
            if u == 0 && v == 1 {
                return Ok(());
            }
            out.push(DenFactor { u, v, e: 1 });
            Ok(())
        }
    }
}

impl SeriesDef {
    pub fn validate(&self) -> Result<(), SeriesError> {
        for f in &self.den {
            if f.u == 0 && f.v == 0 {
                return Err(SeriesError::ZeroDenominator { u: 0, v: 0, k: self.k_start as i64 });
            }
            if let Some(k) = f.integer_root() {
                if k >= self.k_start as i64 {
                    return Err(SeriesError::ZeroDenominator { u: f.u, v: f.v, k });
                }
            }
        }
        for a in self.weight.atoms() {
            if a.index(self.k_start) < 0 {
                return Err(SeriesError::NegativeIndex { atom: a, k: self.k_start });
            }
        }
        for (_, f) in self.weight.terms() {
            for k in self.k_start..self.k_start + 64 {
                if f.den().eval_int(k as i64).is_zero() {
                    let r = f.reduced()?;
                    if r.den().eval_int(k as i64).is_zero() {
                        return Err(invalid("weight", format!("weight has a pole at k = {k}")));
                    }
                }
            }
        }
        let mut d = self.base.d();
        for (_, f) in self.weight.terms() {
            for c in f.num().coeffs().iter().chain(f.den().coeffs()) {
                if c.d() != 1 {
                    if d != 1 && d != c.d() {
                        return Err(ExactError::MixedRadicands(d, c.d()).into());
                    }
                    d = c.d();
                }
            }
        }
        Ok(())
    }

    /// Radicand of the field the series lives in.
    pub fn radicand(&self) -> u64 {
        if self.base.d() != 1 {
            self.base.d()
        } else {
            self.weight.radicand()
        }
    }

    /// `c_k^(+-1)` as an exact rational (1 without a kernel).
    pub fn kernel_factor(&self, k: u64) -> Rational {
        match self.kernel {
            None => Rational::one(),
            Some(f) => {
                let c = Rational::from_integer(f.value(k));
                match self.position {
                    KernelPosition::Numerator => c,
                    KernelPosition::Denominator => c.recip(),
                }
            }
        }
    }

    /// Exact `c_{k+1}/c_k` raised to the kernel position's sign.
    pub fn kernel_step(&self, k: u64) -> Rational {
        match self.kernel {
            None => Rational::one(),
            Some(f) => {
                let r = f.ratio(k);
                match self.position {
                    KernelPosition::Numerator => r,
                    KernelPosition::Denominator => r.recip(),
                }
            }
        }
    }

    /// `prod (u*k + v)^e` at `k`.
    pub fn den_value(&self, k: u64) -> BigInt {
        self.den.iter().map(|f| f.eval(k as i64)).product()
    }

    /// The growth constant of the kernel raised to the position's sign.
    pub fn kernel_growth(&self) -> Rational {
        match (self.kernel, self.position) {
            (None, _) => Rational::one(),
            (Some(f), KernelPosition::Numerator) => f.growth_rate(),
            (Some(f), KernelPosition::Denominator) => f.growth_rate().recip(),
        }
    }

    /// `lim |t_{k+1}/t_k| = |base| * growth^(+-1)`, exactly.
    pub fn limit_ratio(&self) -> QuadElem {
        self.base.abs().checked_mul(&QuadElem::from(self.kernel_growth())).expect("rational scale")
    }
}

/// Exact `k`-th summand, computed from scratch.
pub fn term_exact(def: &SeriesDef, k: u64) -> Result<QuadElem, SeriesError> {
    assert!(k >= def.k_start, "term index below k_start");
    let w = def.weight.eval(k)?;
    let scale = def.kernel_factor(k) / Rational::from_integer(def.den_value(k));
    Ok(w.checked_mul(&def.base.pow(k as i64)?)?.checked_mul(&QuadElem::from(scale))?)
}

/// Exact `rho(k) = t_{k+1}/t_k` as a rational function in `k`.
pub fn term_ratio_ratfun(def: &SeriesDef) -> Result<RatFun, SeriesError> {
    let w = def.weight.as_unit().ok_or(SeriesError::NotHypergeometric)?;
    if w.is_zero() {
        return Err(invalid("weight", "zero weight"));
    }
    let one = QuadElem::one();
    let w_next = w.shift(&one);
    let (mut num, mut den) = match (def.kernel, def.position) {
        (None, _) => (Poly::one('k'), Poly::one('k')),
        (Some(f), KernelPosition::Numerator) => f.ratio_polys('k'),
        (Some(f), KernelPosition::Denominator) => {
            let (p, q) = f.ratio_polys('k');
            (q, p)
        }
    };
    for f in &def.den {
        num = &num * &f.poly('k');
        den = &den * &f.poly('k').shift(&one);
    }
    let kernel_part = RatFun::new(num.scale(&def.base), den)?;
    Ok(w_next.checked_mul(&kernel_part)?.checked_div(&w)?)
}

/// Incremental exact partial sums `S_n = sum_{k_start<=k<=n} t_k`, updating the
/// kernel by its exact ratio and harmonic numbers by their increments.
pub fn partial_sums_exact(def: &SeriesDef, n: u64) -> Result<Vec<QuadElem>, SeriesError> {
    let mut factor = def
        .base
        .pow(def.k_start as i64)?
        .checked_mul(&QuadElem::from(def.kernel_factor(def.k_start)))?;
    let mut harm = HarmonicState::new(&def.weight.atoms(), def.k_start);
    let mut sum = QuadElem::zero();
    let mut out = Vec::new();
    for k in def.k_start..=n {
        let w = weight_with(&def.weight, k, &harm)?;
        let d = QuadElem::from(Rational::from_integer(def.den_value(k)));
        sum = sum.checked_add(&w.checked_mul(&factor)?.checked_div(&d)?)?;
        out.push(sum.clone());
        factor = factor
            .checked_mul(&def.base)?
            .checked_mul(&QuadElem::from(def.kernel_step(k)))?;
        harm.advance(k);
    }
    Ok(out)
}

fn weight_with(w: &WeightExpr, k: u64, h: &HarmonicState) -> Result<QuadElem, ExactError> {
    let kq = QuadElem::from(k as i64);
    let mut acc = QuadElem::zero();
    for (atom, f) in w.terms() {
        let c = f.eval(&kq)?;
        let v = match atom {
            None => c,
            Some(a) => c.checked_mul(&QuadElem::from(h.get(a).clone()))?,
        };
        acc = acc.checked_add(&v)?;
    }
    Ok(acc)
}

/// Running exact harmonic numbers for a set of atoms.
#[derive(Clone, Debug)]
pub struct HarmonicState {
    values: BTreeMap<HarmonicAtom, (i64, Rational)>,
}

impl HarmonicState {
    pub fn new(atoms: &[HarmonicAtom], k: u64) -> Self {
        let values = atoms
            .iter()
            .map(|&a| {
                let n = a.index(k).max(0);
                (a, (n, harmonic(n as u64, a.order)))
            })
            .collect();
        HarmonicState { values }
    }

    pub fn get(&self, a: HarmonicAtom) -> &Rational {
        &self.values[&a].1
    }

    /// Moves every atom from index at `k` to index at `k+1`.
    pub fn advance(&mut self, k: u64) {
        for (a, (n, v)) in self.values.iter_mut() {
            let target = a.index(k + 1);
            while *n < target {
                *n += 1;
                *v += Rational::new(BigInt::one(), BigInt::from(*n).pow(a.order));
            }
        }
    }
}

/// Renders a polynomial in `k` over a quadratic field as an expression.
pub fn poly_expr(p: &Poly) -> Expr {
    let var = p.variable().to_string();
    let mut acc: Option<Expr> = None;
    for (i, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match i {
            0 => None,
            1 => Some(Expr::ident(&var)),
            _ => Some(Expr::bin(BinOp::Pow, Expr::ident(&var), Expr::int(i as i64))),
        };
        let (neg, mag) = if c.is_rational() && c.signum() < 0 {
            (true, -c.clone())
        } else {
            (false, c.clone())
        };
        let coeff = crate::syntax::quad_expr(&mag);
        let term = match mono {
            None => coeff,
            Some(m) if mag == QuadElem::one() => m,
            Some(m) if mag.is_rational() => Expr::bin(BinOp::Mul, coeff, m),
            Some(m) => Expr::bin(BinOp::Mul, coeff, m),
        };
        acc = Some(match acc {
            None if neg => Expr::Neg(Box::new(term)),
            None => term,
            Some(a) => Expr::bin(if neg { BinOp::Sub } else { BinOp::Add }, a, term),
        });
    }
    acc.unwrap_or_else(|| Expr::int(0))
}

/// Renders a weight as an expression in the catalog grammar.
pub fn weight_expr(w: &WeightExpr) -> Expr {
    let mut acc: Option<Expr> = None;
    for (atom, f) in w.terms() {
        let coeff = ratfun_expr(f);
        let term = match atom {
            None => coeff,
            Some(a) => {
                let h = parse_expr(&a.to_string()).expect("atom renders in the grammar");
                if f.equals(&RatFun::one('k')) {
                    h
                } else {
                    Expr::bin(BinOp::Mul, coeff, h)
                }
            }
        };
        acc = Some(match acc {
            None => term,
            Some(a) => Expr::bin(BinOp::Add, a, term),
        });
    }
    acc.unwrap_or_else(|| Expr::int(0))
}

fn ratfun_expr(f: &RatFun) -> Expr {
    let r = f.reduced().unwrap_or_else(|_| f.clone());
    if r.is_polynomial() {
        let d = r.den().as_constant().expect("constant denominator");
        return poly_expr(&r.num().scale(&d.checked_inv().expect("nonzero")));
    }
    Expr::bin(BinOp::Div, poly_expr(r.num()), poly_expr(r.den()))
}

/// Renders denominator factors as an expression.
pub fn den_expr(den: &[DenFactor]) -> Expr {
    let mut acc: Option<Expr> = None;
    for f in den {
        let lin = poly_expr(&Poly::linear('k', f.u, f.v));
        let factor = if f.e == 1 {
            lin
        } else {
            Expr::bin(BinOp::Pow, lin, Expr::int(i64::from(f.e)))
        };
        acc = Some(match acc {
            None => factor,
            Some(a) => Expr::bin(BinOp::Mul, a, factor),
        });
    }
    acc.unwrap_or_else(|| Expr::int(1))
}

/// Sign of `(-1)^k` folded into the base: whether successive terms alternate.
pub fn is_alternating(def: &SeriesDef) -> bool {
    def.base.signum() < 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn series(kernel: &str, pos: &str, base: &str, weight: &str, den: &str, kstart: &str) -> SeriesDef {
        parse_series(&SeriesText {
            kernel: Some(kernel),
            position: Some(pos),
            base,
            weight,
            den: Some(den),
            kstart: Some(kstart),
        })
        .unwrap()
    }

    fn pi_series() -> SeriesDef {
        series("binom(6k,3k)", "denominator", "8", "63k^2+78k+22", "(2k+1)(6k+1)(6k+5)", "0")
    }

    #[test]
    fn parses_pi_series() {
        let s = pi_series();
        assert_eq!(s.kernel, Some(KernelFamily::Bin6k3k));
        assert_eq!(s.position, KernelPosition::Denominator);
        assert_eq!(s.base, QuadElem::from_int(8));
        assert_eq!(s.den.len(), 3);
        let expect = RatFun::from_poly(Poly::from_ints('k', &[22, 78, 63]));
        assert!(s.weight.as_unit().unwrap().equals(&expect));
    }

    #[test]
    fn denominator_roots() {
        let ok = SeriesText {
            kernel: Some("binom(6k,3k)"),
            base: "1/4096",
            weight: "42k+5",
            den: Some("6k-5"),
            ..Default::default()
        };
        assert!(parse_series(&ok).is_ok());
        let bad = SeriesText { den: Some("3k-3"), ..ok.clone() };
        assert!(matches!(parse_series(&bad), Err(SeriesError::ZeroDenominator { k: 1, .. })));
        let bad = SeriesText { weight: "H(2k-1,2)", ..ok.clone() };
        assert!(matches!(parse_series(&bad), Err(SeriesError::NegativeIndex { .. })));
        let bad = SeriesText { base: "sqrt(2)", weight: "sqrt(3)", ..ok };
        assert!(parse_series(&bad).is_err());
    }

    #[test]
    fn hand_computed_terms() {
        let s = pi_series();
        assert_eq!(term_exact(&s, 0).unwrap(), QuadElem::from(rat(22, 5)));
        assert_eq!(term_exact(&s, 1).unwrap(), QuadElem::from(rat(326, 1155)));
        let c31 = series(
            "binom(6k,3k)",
            "denominator",
            "8",
            "(63k^2+78k+22)*H(3k,1) + 12k + 8",
            "(2k+1)(6k+1)(6k+5)",
            "0",
        );
        assert_eq!(term_exact(&c31, 0).unwrap(), QuadElem::from(rat(8, 5)));
        assert!(matches!(term_ratio_ratfun(&c31), Err(SeriesError::NotHypergeometric)));
    }

    #[test]
    fn geometric_toy_ratio() {
        let s = parse_series(&SeriesText {
            base: "3/7",
            weight: "1",
            ..Default::default()
        })
        .unwrap();
        let r = term_ratio_ratfun(&s).unwrap();
        assert_eq!(r.as_constant(), Some(QuadElem::from(rat(3, 7))));
    }

    #[test]
    fn zeilberger_ratio_spot_value() {
        let g2 = series("central^3", "denominator", "16", "3k-1", "k^3", "1");
        let t1 = term_exact(&g2, 1).unwrap();
        let t2 = term_exact(&g2, 2).unwrap();
        assert_eq!(t1, QuadElem::from_int(4));
        assert_eq!(t2, QuadElem::from(rat(20, 27)));
        let rho = term_ratio_ratfun(&g2).unwrap();
        assert_eq!(rho.eval(&QuadElem::from_int(1)).unwrap(), QuadElem::from(rat(5, 27)));
    }

    #[test]
    fn ratio_recurrence_on_unit_weights() {
        let cases = [
            pi_series(),
            series("central^3", "numerator", "1/(12+4sqrt(5))^4", "6k(7sqrt(5)+5)+5sqrt(5)-1", "1", "0"),
            series("central^2*binom(3k,k)", "denominator", "32(91sqrt(33)-523)", "(91sqrt(33)+891)k-33sqrt(33)-225", "k^3", "1"),
            series("binom(6k,3k)", "numerator", "1/4096", "k(252k^2-264k+61)", "(2k-1)(6k-1)(6k-5)", "0"),
        ];
        for s in &cases {
            let rho = term_ratio_ratfun(s).unwrap();
            let mut t = term_exact(s, s.k_start).unwrap();
            for k in s.k_start..s.k_start + 100 {
                let next = term_exact(s, k + 1).unwrap();
                if !t.is_zero() {
                    let r = rho.eval(&QuadElem::from(k as i64)).unwrap();
                    assert_eq!(t.checked_mul(&r).unwrap(), next, "k = {k}");
                }
                t = next;
            }
        }
    }

    #[test]
    fn harmonic_increments() {
        let a = HarmonicAtom { stride: 3, offset: 0, order: 1 };
        for k in 0..=100u64 {
            let diff = a.value(k + 1) - a.value(k);
            let m = 3 * k as i64;
            let expect = rat(1, m + 1) + rat(1, m + 2) + rat(1, m + 3);
            assert_eq!(diff, expect);
        }
    }

    #[test]
    fn incremental_partial_sums_match_direct_terms() {
        let s = series(
            "binom(6k,3k)",
            "denominator",
            "16",
            "(3k+2)^2*(3H(3k,1)-2H(2k,1)) + 2k(3k+2)/(2k+1)",
            "(2k+1)(6k+1)(6k+5)",
            "0",
        );
        let sums = partial_sums_exact(&s, 50).unwrap();
        let mut acc = QuadElem::zero();
        for k in 0..=50u64 {
            acc = &acc + &term_exact(&s, k).unwrap();
            assert_eq!(sums[k as usize], acc);
        }
    }

    #[test]
    fn rendering_reparses() {
        let s = series(
            "central^3",
            "numerator",
            "1",
            "(6k(5+7sqrt(5))+5sqrt(5)-1)*(35H(k,2)-136H(2k,2)) + 60(7-3sqrt(5))/(2k+1)",
            "(2k+1)^2*k",
            "1",
        );
        let w = weight_from_expr(&parse_expr(&weight_expr(&s.weight).to_string()).unwrap()).unwrap();
        assert_eq!(w, s.weight);
        let d = den_from_expr(&parse_expr(&den_expr(&s.den).to_string()).unwrap()).unwrap();
        assert_eq!(d, s.den);
    }
}
