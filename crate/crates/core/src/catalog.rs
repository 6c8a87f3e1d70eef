//! The identity database: a line-oriented `key: value` record format, its
//! canonical serialization, and lookup.
//!
//! Records are separated by blank lines. Lines starting with `#` are ignored.
//! Every value is stored in canonical text so that serializing a loaded file
//! reproduces it byte for byte.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::constants::ClosedForm;
use crate::evaluator::{verify_series, EvalError, TailMode, VerificationReport};
use crate::kernels::KernelFamily;
use crate::seriesmodel::{parse_series, SeriesDef, SeriesText};
use crate::syntax::canonical;

/// Field order of the canonical form. Unknown keys are rejected.
pub const KEYS: &[&str] = &[
    "id",
    "kind",
    "kernel",
    "position",
    "base",
    "weight",
    "den",
    "kstart",
    "scale",
    "closed_form",
    "f_rational",
    "f_arctan",
    "target",
    "rhs",
    "status",
    "source",
    "source_note",
    "min_digits",
    "budget_terms",
];

const EXPR_KEYS: &[&str] = &["base", "weight", "den", "closed_form", "f_rational", "f_arctan", "target"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecordKind {
    SeriesIdentity,
    Telescoping,
    Derivative,
}

impl RecordKind {
    pub fn tag(self) -> &'static str {
        match self {
            RecordKind::SeriesIdentity => "series_identity",
            RecordKind::Telescoping => "telescoping",
            RecordKind::Derivative => "derivative",
        }
    }
}

impl FromStr for RecordKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "series_identity" => Ok(RecordKind::SeriesIdentity),
            "telescoping" => Ok(RecordKind::Telescoping),
            "derivative" => Ok(RecordKind::Derivative),
            _ => Err(format!("unknown kind '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Proved,
    Conjectural,
    Cited,
    KnownFalse,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Status::Proved => "PROVED",
            Status::Conjectural => "CONJECTURAL",
            Status::Cited => "CITED",
            Status::KnownFalse => "KNOWN_FALSE",
        }
    }

    /// Digits used by batch verification when a record sets no `min_digits`.
    pub fn default_digits(self) -> u32 {
        match self {
            Status::Proved | Status::Cited => 50,
            Status::Conjectural | Status::KnownFalse => 30,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PROVED" => Ok(Status::Proved),
            "CONJECTURAL" => Ok(Status::Conjectural),
            "CITED" => Ok(Status::Cited),
            "KNOWN_FALSE" => Ok(Status::KnownFalse),
            _ => Err(format!("unknown status '{s}'")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line} (record '{id}'): {message}")]
    Parse { line: usize, id: String, message: String },
    #[error("duplicate id '{0}'")]
    Duplicate(String),
    #[error("unknown id '{0}'")]
    NotFound(String),
    #[error("record '{0}' is not a series identity")]
    NotSeries(String),
    #[error("record '{0}' has no rhs")]
    NoRhs(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug)]
pub struct IdentityRecord {
    pub id: String,
    pub kind: RecordKind,
    pub status: Status,
    /// Canonical field text in [`KEYS`] order, `id` included.
    pub fields: Vec<(&'static str, String)>,
    /// Parsed series for `series_identity` records.
    pub series: Option<SeriesDef>,
    pub scale: Option<ClosedForm>,
    pub rhs: Option<ClosedForm>,
    pub source: String,
    pub source_note: Option<String>,
    pub min_digits: Option<u32>,
    pub budget_terms: Option<u64>,
    /// 1-based line of the `id` field.
    pub line: usize,
}

impl IdentityRecord {
    pub fn field(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
    }

    /// Parsed series, or an error for certificate records.
    pub fn series_def(&self) -> Result<&SeriesDef, CatalogError> {
        self.series.as_ref().ok_or_else(|| CatalogError::NotSeries(self.id.clone()))
    }

    pub fn digits_for_batch(&self) -> u32 {
        self.min_digits.unwrap_or_else(|| self.status.default_digits())
    }

    /// Verifies `scale * sum = rhs` to `digits` digits.
    pub fn verify(&self, digits: u32, mode: Option<TailMode>) -> Result<VerificationReport, EvalError> {
        let def = self.series.as_ref().ok_or_else(|| EvalError::NoRhs(self.id.clone()))?;
        let rhs = self.rhs.as_ref().ok_or_else(|| EvalError::NoRhs(self.id.clone()))?;
        verify_series(&self.id, def, self.scale.as_ref(), rhs, digits, mode)
    }

    /// Canonical text of this record, without a trailing blank line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// A loaded, immutable catalog.
#[derive(Clone, Debug, Default)]
pub struct Catalog {
    records: Vec<IdentityRecord>,
    index: HashMap<String, usize>,
}

impl Catalog {
    pub fn records(&self) -> &[IdentityRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn lookup(&self, id: &str) -> Result<&IdentityRecord, CatalogError> {
        self.index
            .get(id)
            .map(|&i| &self.records[i])
            .ok_or_else(|| CatalogError::NotFound(id.to_string()))
    }

    pub fn tally(&self) -> BTreeMap<Status, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry(r.status).or_insert(0) += 1;
        }
        out
    }

    /// Canonical text of the whole catalog.
    pub fn serialize(&self) -> String {
        self.records.iter().map(IdentityRecord::render).collect::<Vec<_>>().join("\n")
    }
}

/// Path used when none is given: `BSERIES_CATALOG`, then `data/catalog.txt`
/// below the working directory, then the copy shipped with the sources.
pub fn default_catalog_path() -> PathBuf {
    if let Some(p) = std::env::var_os("BSERIES_CATALOG") {
        return PathBuf::from(p);
    }
    let local = PathBuf::from("data/catalog.txt");
    if local.exists() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/catalog.txt")
}

pub fn load_catalog(path: &Path) -> Result<Catalog, CatalogError> {
    let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_catalog(&text)
}

/// Parses catalog text.
pub fn parse_catalog(text: &str) -> Result<Catalog, CatalogError> {
    let mut cat = Catalog::default();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).chain(std::iter::once((0, "")));
    for (no, line) in lines {
        if line.trim_start().starts_with('#') {
            continue;
        }
        if !line.trim().is_empty() {
            block.push((no, line));
            continue;
        }
        if block.is_empty() {
            continue;
        }
        let rec = parse_record(&block)?;
        if cat.index.contains_key(&rec.id) {
            return Err(CatalogError::Duplicate(rec.id));
        }
        cat.index.insert(rec.id.clone(), cat.records.len());
        cat.records.push(rec);
        block.clear();
    }
    Ok(cat)
}

fn parse_record(block: &[(usize, &str)]) -> Result<IdentityRecord, CatalogError> {
    let first_line = block[0].0;
    let mut raw: HashMap<&'static str, (usize, String)> = HashMap::new();
    let mut id = String::from("?");
    for &(no, line) in block {
        let err = |id: &str, m: String| CatalogError::Parse { line: no, id: id.to_string(), message: m };
        let (k, v) = line.split_once(':').ok_or_else(|| err(&id, format!("expected 'key: value', got '{line}'")))?;
        let k = k.trim();
        let key = KEYS
            .iter()
            .copied()
            .find(|&x| x == k)
            .ok_or_else(|| err(&id, format!("unknown key '{k}'")))?;
        let v = v.trim().to_string();
        if key == "id" {
            id = v.clone();
        }
        if raw.insert(key, (no, v)).is_some() {
            return Err(err(&id, format!("key '{key}' repeated")));
        }
    }
    let fail = |key: &str, m: String| CatalogError::Parse {
        line: raw.get(key).map_or(first_line, |x| x.0),
        id: id.clone(),
        message: format!("{key}: {m}"),
    };
    let get = |key: &str| raw.get(key).map(|(_, v)| v.as_str());
    let need = |key: &str| get(key).ok_or_else(|| fail(key, "missing".into()));
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(fail("id", "must be a non-empty token".into()));
    }
    let kind: RecordKind = need("kind")?.parse().map_err(|m| fail("kind", m))?;
    let status: Status = need("status")?.parse().map_err(|m| fail("status", m))?;
    let source = need("source")?.to_string();

    let mut fields = Vec::new();
    for &key in KEYS {
        let Some(v) = get(key) else { continue };
        let canon = match key {
            k if EXPR_KEYS.contains(&k) => canonical(v).map_err(|e| fail(key, e.to_string()))?,
            "kernel" if v != "none" => v.parse::<KernelFamily>().map_err(|e| fail(key, e.to_string()))?.tag().to_string(),
            "scale" | "rhs" => v.parse::<ClosedForm>().map_err(|e| fail(key, e.to_string()))?.to_string(),
            _ => v.to_string(),
        };
        fields.push((key, canon));
    }
    let canon = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| v.clone());

    let closed = |key: &str| -> Result<Option<ClosedForm>, CatalogError> {
        canon(key).map(|v| v.parse::<ClosedForm>().map_err(|e| fail(key, e.to_string()))).transpose()
    };
    let scale = closed("scale")?;
    let rhs = closed("rhs")?;
    let series = match kind {
        RecordKind::SeriesIdentity => {
            let (base, weight) = (canon("base"), canon("weight"));
            let (kernel, den) = (canon("kernel"), canon("den"));
            let text = SeriesText {
                kernel: kernel.as_deref(),
                position: get("position"),
                base: base.as_deref().ok_or_else(|| fail("base", "missing".into()))?,
                weight: weight.as_deref().ok_or_else(|| fail("weight", "missing".into()))?,
                den: den.as_deref(),
                kstart: get("kstart"),
            };
            if rhs.is_none() {
                return Err(fail("rhs", "missing".into()));
            }
            Some(parse_series(&text).map_err(|e| fail("series", e.to_string()))?)
        }
        RecordKind::Telescoping => {
            need("closed_form")?;
            None
        }
        RecordKind::Derivative => {
            need("f_rational")?;
            need("target")?;
            None
        }
    };
    let min_digits = get("min_digits")
        .map(|v| v.parse::<u32>().map_err(|e| fail("min_digits", e.to_string())))
        .transpose()?;
    let budget_terms = get("budget_terms")
        .map(|v| v.parse::<u64>().map_err(|e| fail("budget_terms", e.to_string())))
        .transpose()?;
    Ok(IdentityRecord {
        id,
        kind,
        status,
        series,
        scale,
        rhs,
        source,
        source_note: get("source_note").map(str::to_string),
        min_digits,
        budget_terms,
        fields,
        line: first_line,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "\
id: a
kind: series_identity
kernel: binom(6k,3k)
position: denominator
base: 8
weight: 63k^2+78k+22
den: (2k+1)(6k+1)(6k+5)
kstart: 0
rhs: 3/2*pi
status: PROVED
source: here

id: b
kind: series_identity
kernel: central^3
position: numerator
base: 1/4096
weight: 42k+5
rhs: 16/pi
status: CITED
source: there
";

    #[test]
    fn parses_and_canonicalizes() {
        let cat = parse_catalog(TWO).unwrap();
        assert_eq!(cat.len(), 2);
        let a = cat.lookup("a").unwrap();
        assert_eq!(a.field("weight"), Some("63*k^2 + 78*k + 22"));
        assert_eq!(a.status, Status::Proved);
        assert_eq!(a.line, 1);
        assert_eq!(cat.lookup("b").unwrap().line, 13);
        let again = parse_catalog(&cat.serialize()).unwrap();
        assert_eq!(again.serialize(), cat.serialize());
        assert!(matches!(cat.lookup("zz"), Err(CatalogError::NotFound(_))));
    }

    #[test]
    fn empty_and_duplicate() {
        assert!(parse_catalog("").unwrap().is_empty());
        assert!(parse_catalog("\n# only a comment\n\n").unwrap().is_empty());
        let dup = format!("{TWO}\n{}", TWO.split("\n\n").next().unwrap());
        match parse_catalog(&dup) {
            Err(CatalogError::Duplicate(id)) => assert_eq!(id, "a"),
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_record_and_line() {
        let bad = TWO.replace("den: (2k+1)", "den: (2k+1)(3k-3)");
        match parse_catalog(&bad) {
            Err(CatalogError::Parse { id, .. }) => assert_eq!(id, "a"),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad = TWO.replace("status: CITED", "status: MAYBE");
        match parse_catalog(&bad) {
            Err(CatalogError::Parse { id, line, .. }) => assert_eq!((id.as_str(), line), ("b", 20)),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_catalog("id: x\nflavor: y\n").is_err());
    }
}
