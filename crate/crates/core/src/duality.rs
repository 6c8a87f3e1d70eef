//! Galois conjugation of series over `Q(sqrt d)` and the construction of
//! Zeilberger-type duals from Ramanujan-type series.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::catalog::IdentityRecord;
use crate::constants::{normalize_discriminant, ClosedForm, ConstAtom, Monomial};
use crate::exactnum::{ExactError, Poly, QuadElem, RatFun, Rational};
use crate::seriesmodel::{den_expr, weight_expr, DenFactor, KernelPosition, SeriesDef, WeightExpr};
use crate::syntax::quad_expr;

#[derive(Debug, Error)]
pub enum DualError {
    #[error("not a Ramanujan-type datum: {0}")]
    NotRamanujan(String),
    #[error("dualize needs a ZEILBERGER_DUAL datum, got {0}")]
    WrongBranch(Branch),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn not_ramanujan(m: impl Into<String>) -> DualError {
    DualError::NotRamanujan(m.into())
}

/// Applies `sqrt d -> -sqrt d` to every coefficient of the weight and base.
pub fn conjugate_series(def: &SeriesDef) -> SeriesDef {
    SeriesDef {
        base: def.base.conj(),
        weight: def.weight.map_coeffs(RatFun::conj),
        ..def.clone()
    }
}

/// `sum (a k + b) c_k / m^k = r sqrt(n) / pi`.
#[derive(Clone, Debug)]
pub struct RamanujanDatum {
    pub series: SeriesDef,
    pub a: QuadElem,
    pub b: QuadElem,
    pub m: QuadElem,
    pub rhs_r: Rational,
    pub rhs_n: QuadElem,
}

impl RamanujanDatum {
    pub fn from_series(series: SeriesDef, rhs: &ClosedForm) -> Result<Self, DualError> {
        if series.kernel.is_none() || series.position != KernelPosition::Numerator {
            return Err(not_ramanujan("kernel must sit in the numerator"));
        }
        if !series.den.is_empty() || series.k_start != 0 {
            return Err(not_ramanujan("expected no denominator factors and k_start = 0"));
        }
        let w = series.weight.as_unit().ok_or_else(|| not_ramanujan("harmonic weight"))?.reduced()?;
        let lead = w.den().as_constant().ok_or_else(|| not_ramanujan("weight must be linear in k"))?;
        let p = w.num().scale(&lead.checked_inv()?);
        if p.degree().unwrap_or(0) > 1 {
            return Err(not_ramanujan("weight must be linear in k"));
        }
        let (a, b) = (p.coeff(1), p.coeff(0));
        if a.is_zero() {
            return Err(not_ramanujan("a = 0"));
        }
        let m = series.base.checked_inv()?;
        let (r, n) = split_rhs(rhs)?;
        Ok(RamanujanDatum { series, a, b, m, rhs_r: r, rhs_n: n })
    }

    pub fn from_record(rec: &IdentityRecord) -> Result<Self, DualError> {
        let def = rec.series.clone().ok_or_else(|| not_ramanujan(format!("'{}' is not a series", rec.id)))?;
        let rhs = rec.rhs.as_ref().ok_or_else(|| not_ramanujan(format!("'{}' has no rhs", rec.id)))?;
        Self::from_series(def, rhs)
    }

    /// Growth constant `c = lim c_k^(1/k)` of the kernel.
    pub fn growth(&self) -> Rational {
        self.series.kernel.expect("checked in from_series").growth_rate()
    }

    /// The radicand `d` of the coefficient field, 1 when all data are rational.
    pub fn radicand(&self) -> u64 {
        [&self.a, &self.b, &self.m].iter().map(|q| q.d()).find(|&d| d != 1).unwrap_or(1)
    }
}

/// Reads `r * sqrt(n) / pi` (or `r / pi`) off a closed form.
fn split_rhs(rhs: &ClosedForm) -> Result<(Rational, QuadElem), DualError> {
    let (mono, r) = rhs.single().ok_or_else(|| not_ramanujan("rhs must be a single term r*sqrt(n)/pi"))?;
    let mut n = QuadElem::one();
    let mut saw_pi = false;
    for (atom, &e) in mono {
        match (atom, e) {
            (ConstAtom::Pi, -1) => saw_pi = true,
            (ConstAtom::Sqrt(q), 1) => n = q.clone(),
            _ => return Err(not_ramanujan("rhs must be a single term r*sqrt(n)/pi")),
        }
    }
    if !saw_pi {
        return Err(not_ramanujan("rhs must be a single term r*sqrt(n)/pi"));
    }
    Ok((r.clone(), n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    ConjugateRamanujan,
    ZeilbergerDual,
    Undefined,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::ConjugateRamanujan => "CONJUGATE_RAMANUJAN",
            Branch::ZeilbergerDual => "ZEILBERGER_DUAL",
            Branch::Undefined => "UNDEFINED",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug)]
pub struct DualClassification {
    pub branch: Branch,
    pub reason: String,
}

/// Compares `|sigma(m)|` with the growth constant exactly. The divergent
/// branch requires `sigma(m) < 0` and `n` a positive integer.
pub fn classify_dual(r: &RamanujanDatum) -> DualClassification {
    let sm = r.m.conj();
    let c = QuadElem::from(r.growth());
    let ord = sm.abs().try_cmp(&c).expect("rational comparison is always defined");
    let shown = format!("|sigma(m)| = |{sm}| vs c = {c}");
    let n_positive_int = r.rhs_n.as_rational().is_some_and(|q| q.is_integer() && q.is_positive());
    let (branch, why) = match ord {
        Ordering::Greater => (Branch::ConjugateRamanujan, "conjugate series converges"),
        Ordering::Equal => (Branch::Undefined, "boundary case"),
        Ordering::Less if sm.signum() < 0 && n_positive_int => (Branch::ZeilbergerDual, "conjugate series diverges"),
        Ordering::Less if sm.signum() >= 0 => (Branch::Undefined, "diverges with sigma(m) > 0"),
        Ordering::Less => (Branch::Undefined, "diverges but n is not a positive integer"),
    };
    DualClassification { branch, reason: format!("{shown}: {why}") }
}

/// `sum_{k>=1} sigma((a k - b) m^k / (k^3 c_k))` as a series definition.
pub fn dualize(r: &RamanujanDatum) -> Result<SeriesDef, DualError> {
    let class = classify_dual(r);
    if class.branch != Branch::ZeilbergerDual {
        return Err(DualError::WrongBranch(class.branch));
    }
    let weight = Poly::new('k', vec![-r.b.conj(), r.a.conj()]);
    Ok(SeriesDef {
        kernel: r.series.kernel,
        position: KernelPosition::Denominator,
        base: r.m.conj(),
        weight: WeightExpr::unit(RatFun::from_poly(weight)),
        den: vec![DenFactor { u: 1, v: 0, e: 3 }],
        k_start: 1,
    })
}

/// The constants expected on the right of a Zeilberger dual:
/// `L_{(-n)'}(2)` and `sqrt(d) L_{(-dn)'}(2)`.
pub fn dual_basis(r: &RamanujanDatum) -> Vec<Monomial> {
    let n = r.rhs_n.as_rational().map(|q| q.to_integer()).and_then(|n| i64::try_from(n).ok()).unwrap_or(1);
    let d = r.radicand() as i64;
    let mut out = Vec::new();
    if let Ok(disc) = normalize_discriminant(-n) {
        out.push(Monomial::from([(ConstAtom::LValue(disc), 1)]));
    }
    if let Ok(disc) = normalize_discriminant(-d * n) {
        let mut mono = Monomial::from([(ConstAtom::LValue(disc), 1)]);
        if let Some((root, _)) = ClosedForm::sqrt(&QuadElem::from_int(d)).ok().as_ref().and_then(|s| s.single()) {
            for (a, e) in root {
                mono.insert(a.clone(), *e);
            }
        }
        out.push(mono);
    }
    out
}

/// Catalog text for a series record; `rhs` may be absent for a candidate.
pub fn render_series_record(id: &str, def: &SeriesDef, rhs: Option<&ClosedForm>, status: &str, source: &str) -> String {
    let mut out = format!("id: {id}\nkind: series_identity\n");
    if let Some(k) = def.kernel {
        out += &format!("kernel: {}\nposition: {}\n", k.tag(), def.position.tag());
    }
    out += &format!("base: {}\nweight: {}\n", quad_expr(&def.base), weight_expr(&def.weight));
    if !def.den.is_empty() {
        out += &format!("den: {}\n", den_expr(&def.den));
    }
    out += &format!("kstart: {}\n", def.k_start);
    if let Some(rhs) = rhs {
        out += &format!("rhs: {rhs}\n");
    }
    out += &format!("status: {status}\nsource: {source}\n");
    out
}

impl fmt::Display for DualClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.branch, self.reason)
    }
}

/// True when every coefficient of the series lies in `Q`.
pub fn is_rational_series(def: &SeriesDef) -> bool {
    def.base.is_rational() && def.weight.radicand() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_catalog;
    use crate::seriesmodel::{parse_series, term_exact, SeriesText};

    const RECORDS: &str = "\
id: r1
kind: series_identity
kernel: central^3
position: numerator
base: (12 + 4*sqrt(5))^-4
weight: 6*k*(7*sqrt(5) + 5) + 5*sqrt(5) - 1
kstart: 0
rhs: 32/pi
status: CITED
source: test

id: c375
kind: series_identity
kernel: central^2*binom(3k,k)
position: numerator
base: (27*(37102 + 15147*sqrt(6)))^-1
weight: 9*k*(51 - 11*sqrt(6)) + 2*(54 - 19*sqrt(6))
kstart: 0
rhs: 375/8/pi
status: CONJECTURAL
source: test
";

    fn datum(id: &str) -> RamanujanDatum {
        let cat = parse_catalog(RECORDS).unwrap();
        RamanujanDatum::from_record(cat.lookup(id).unwrap()).unwrap()
    }

    #[test]
    fn conjugate_of_rational_ramanujan_series_shape() {
        let r1 = datum("r1").series;
        let dual = conjugate_series(&r1);
        let expect = parse_series(&SeriesText {
            kernel: Some("central^3"),
            position: Some("numerator"),
            base: "(12 - 4*sqrt(5))^-4",
            weight: "6*k*(5 - 7*sqrt(5)) - 5*sqrt(5) - 1",
            den: None,
            kstart: Some("0"),
        })
        .unwrap();
        assert_eq!(dual, expect);
        assert_eq!(conjugate_series(&dual), r1);
        for k in 0..12 {
            assert_eq!(term_exact(&dual, k).unwrap(), term_exact(&r1, k).unwrap().conj());
        }
    }

    #[test]
    fn classification_branches() {
        assert_eq!(classify_dual(&datum("r1")).branch, Branch::ConjugateRamanujan);
        assert_eq!(classify_dual(&datum("c375")).branch, Branch::ZeilbergerDual);

        // Only a rational m can meet the growth constant exactly.
        let mut edge = datum("r1");
        edge.m = QuadElem::from_int(-64);
        assert_eq!(classify_dual(&edge).branch, Branch::Undefined);
    }

    #[test]
    fn dual_of_sqrt6_datum_and_zero_b() {
        let d = dualize(&datum("c375")).unwrap();
        let expect = parse_series(&SeriesText {
            kernel: Some("central^2*binom(3k,k)"),
            position: Some("denominator"),
            base: "27*(37102 - 15147*sqrt(6))",
            weight: "9*k*(11*sqrt(6) + 51) - 2*(19*sqrt(6) + 54)",
            den: Some("k^3"),
            kstart: Some("1"),
        })
        .unwrap();
        assert_eq!(d, expect);

        let mut zero_b = datum("c375");
        zero_b.b = QuadElem::zero();
        let w = dualize(&zero_b).unwrap().weight.as_unit().unwrap();
        assert!(w.equals(&RatFun::from_poly(Poly::new('k', vec![QuadElem::zero(), zero_b.a.conj()]))));
        assert_eq!(dual_basis(&datum("c375")).len(), 2);
    }
}
