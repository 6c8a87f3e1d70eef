use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use bseries::catalog::{default_catalog_path, load_catalog, Catalog, IdentityRecord, RecordKind};
use bseries::constants::{closedform_eval, kronecker, ClosedForm, ConstAtom, Monomial};
use bseries::duality::{classify_dual, conjugate_series, dual_basis, dualize, render_series_record, Branch, RamanujanDatum};
use bseries::evaluator::{sum_series, sum_series_bits, Status, TailMode, VerificationReport};
use bseries::precision::bits_for_digits;
use bseries::relation::{discover_rhs, parse_basis, precision_hint, RelationError};
use bseries::seriesmodel::SeriesDef;
use bseries::telescope::{check_derivative, check_telescoping, CertReport, DerivativeCert, TelescopingCert, Verdict};

#[derive(Parser)]
#[command(name = "bseries", version, about = "Verify and discover binomial-coefficient series identities")]
struct Cli {
    /// Decimal digits to verify or print.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    digits: Option<u32>,
    /// Tail bound: certified or heuristic (default: certified when possible).
    #[arg(long, global = true)]
    mode: Option<ModeArg>,
    /// Worker threads for batch commands.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Catalog file (default: $BSERIES_CATALOG or data/catalog.txt).
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Certified,
    Heuristic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the value of a catalog series.
    Eval { id: String },
    /// Verify one identity against its right-hand side.
    Verify { id: String },
    /// Verify every series identity in the catalog.
    VerifyAll,
    /// Classify a Ramanujan-type record and print its dual.
    Dual { id: String },
    /// Print the termwise Galois conjugate of a series.
    Conjugate { id: String },
    /// Search for a right-hand side over a basis of constants.
    Discover {
        id: String,
        #[arg(long)]
        basis: String,
        #[arg(long, default_value_t = 32)]
        max_coeff_bits: u32,
    },
    /// Check telescoping and derivative certificates (all when no id given).
    Telescope { id: Option<String> },
    /// Evaluate a constant expression such as `pi`, `L(-3)` or `sqrt(5)*G`.
    Const { expr: String },
    /// Kronecker symbol (d/k).
    Kronecker {
        #[arg(allow_hyphen_values = true)]
        d: i64,
        k: u64,
    },
    /// List catalog records.
    List,
}

/// Usage or input errors map to exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn mode(cli: &Cli) -> Option<TailMode> {
    cli.mode.map(|m| match m {
        ModeArg::Certified => TailMode::Certified,
        ModeArg::Heuristic => TailMode::Heuristic,
    })
}

fn catalog(cli: &Cli) -> Result<Catalog, Failure> {
    let path = cli.catalog.clone().unwrap_or_else(default_catalog_path);
    Ok(load_catalog(&path)?)
}

fn series(rec: &IdentityRecord) -> Result<&SeriesDef, Failure> {
    Ok(rec.series_def()?)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let digits = cli.digits.unwrap_or(30);
    match &cli.command {
        Command::Eval { id } => {
            let cat = catalog(cli)?;
            let v = sum_series(series(cat.lookup(id)?)?, digits, mode(cli))?;
            println!("{}", v.mid_decimal(digits));
            Ok(0)
        }
        Command::Verify { id } => {
            let cat = catalog(cli)?;
            let report = cat.lookup(id)?.verify(digits, mode(cli))?;
            print_report(cli, &report);
            Ok(exit_for(std::iter::once(report.status)))
        }
        Command::VerifyAll => verify_all(cli),
        Command::Dual { id } => dual(cli, id, digits),
        Command::Conjugate { id } => {
            let cat = catalog(cli)?;
            let rec = cat.lookup(id)?;
            let conj = conjugate_series(series(rec)?);
            let text = render_series_record(&format!("{id}-conjugate"), &conj, None, "CONJECTURAL", &format!("conjugate of {id}"));
            print!("{text}");
            match sum_series(&conj, digits, mode(cli)) {
                Ok(v) => eprintln!("value: {}", v.mid_decimal(digits)),
                Err(e) => eprintln!("value: {e}"),
            }
            Ok(0)
        }
        Command::Discover { id, basis, max_coeff_bits } => {
            let cat = catalog(cli)?;
            let def = series(cat.lookup(id)?)?;
            let basis = parse_basis(basis)?;
            let hint = precision_hint(basis.len() + 1, *max_coeff_bits);
            let bits = bits_for_digits(digits);
            if bits < hint {
                eprintln!("warning: {digits} digits is below the suggested {} for this basis", hint * 30 / 100 + 1);
            }
            match discover(def, &basis, *max_coeff_bits, bits)? {
                Some(cf) => {
                    println!("{cf}");
                    Ok(0)
                }
                None => {
                    println!("no relation found");
                    Ok(EXIT_FAIL)
                }
            }
        }
        Command::Telescope { id } => telescope(cli, id.as_deref()),
        Command::Const { expr } => {
            let cf = ClosedForm::from_str(expr)?;
            println!("{}", closedform_eval(&cf, digits)?.mid_decimal(digits));
            Ok(0)
        }
        Command::Kronecker { d, k } => {
            println!("{}", kronecker(*d, *k));
            Ok(0)
        }
        Command::List => {
            let cat = catalog(cli)?;
            for r in cat.records() {
                println!("{}\t{}\t{}\t{}", r.id, r.kind.tag(), r.status, r.source);
            }
            let tally: Vec<String> = cat.tally().iter().map(|(s, n)| format!("{s} {n}")).collect();
            eprintln!("{} records: {}", cat.len(), tally.join(", "));
            Ok(0)
        }
    }
}

fn print_report(cli: &Cli, r: &VerificationReport) {
    match cli.format {
        Format::Text => println!("{r}"),
        Format::Tsv => println!("{}", r.tsv_line()),
    }
}

fn exit_for(statuses: impl IntoIterator<Item = Status>) -> u8 {
    let mut code = 0;
    for s in statuses {
        match s {
            Status::Fail => return EXIT_FAIL,
            Status::Inconclusive => code = EXIT_INCONCLUSIVE,
            Status::Pass => {}
        }
    }
    code
}

fn verify_all(cli: &Cli) -> Result<u8, Failure> {
    let cat = catalog(cli)?;
    let mut recs: Vec<&IdentityRecord> = cat.records().iter().filter(|r| r.kind == RecordKind::SeriesIdentity).collect();
    recs.sort_by(|a, b| a.id.cmp(&b.id));
    let results: Vec<_> = recs
        .par_iter()
        .map(|r| {
            let digits = cli.digits.unwrap_or_else(|| r.digits_for_batch());
            (r, r.verify(digits, mode(cli)))
        })
        .collect();
    let mut statuses = Vec::new();
    for (rec, res) in results {
        match res {
            Ok(report) => {
                print_report(cli, &report);
                if let Some(budget) = rec.budget_terms.filter(|&b| report.terms_used > b) {
                    eprintln!("warning: {} used {} terms, budget {budget}", rec.id, report.terms_used);
                }
                statuses.push(report.status);
            }
            Err(e) => {
                eprintln!("{}: {e}", rec.id);
                statuses.push(Status::Inconclusive);
            }
        }
    }
    let count = |s| statuses.iter().filter(|&&x| x == s).count();
    eprintln!(
        "{} verified: {} PASS, {} FAIL, {} INCONCLUSIVE",
        statuses.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Inconclusive)
    );
    Ok(exit_for(statuses))
}

fn discover(def: &SeriesDef, basis: &[Monomial], max_coeff_bits: u32, bits: u32) -> Result<Option<ClosedForm>, RelationError> {
    let value = |b: u32| {
        sum_series_bits(def, b, None, None)
            .map(|s| s.value)
            .map_err(|e| RelationError::Series(e.to_string()))
    };
    discover_rhs(value, basis, max_coeff_bits, bits)
}

fn dual(cli: &Cli, id: &str, digits: u32) -> Result<u8, Failure> {
    let cat = catalog(cli)?;
    let datum = RamanujanDatum::from_record(cat.lookup(id)?)?;
    let class = classify_dual(&datum);
    eprintln!("{id}: {class}");
    let (def, basis, name) = match class.branch {
        Branch::ZeilbergerDual => (dualize(&datum)?, dual_basis(&datum), format!("{id}-dual")),
        Branch::ConjugateRamanujan => {
            let sn = datum.rhs_n.conj();
            let mut mono = Monomial::from([(ConstAtom::Pi, -1)]);
            if let Some((root, _)) = ClosedForm::sqrt(&sn).ok().as_ref().and_then(ClosedForm::single) {
                mono.extend(root.iter().map(|(a, e)| (a.clone(), *e)));
            }
            (conjugate_series(&datum.series), vec![mono], format!("{id}-conjugate"))
        }
        Branch::Undefined => return Ok(EXIT_FAIL),
    };
    let bits = bits_for_digits(digits).max(precision_hint(basis.len() + 1, 32) + 32);
    let rhs = discover(&def, &basis, 32, bits).unwrap_or_else(|e| {
        eprintln!("discovery: {e}");
        None
    });
    if rhs.is_none() {
        eprintln!("no right-hand side found over the expected basis");
    }
    print!("{}", render_series_record(&name, &def, rhs.as_ref(), "CONJECTURAL", &format!("dual of {id}")));
    Ok(0)
}

fn telescope(cli: &Cli, id: Option<&str>) -> Result<u8, Failure> {
    let cat = catalog(cli)?;
    let recs: Vec<&IdentityRecord> = match id {
        Some(id) => vec![cat.lookup(id)?],
        None => cat.records().iter().filter(|r| r.kind != RecordKind::SeriesIdentity).collect(),
    };
    let mut failed = false;
    for rec in recs {
        let report: CertReport = match rec.kind {
            RecordKind::Telescoping => check_telescoping(&TelescopingCert::from_record(rec)?)?,
            RecordKind::Derivative => check_derivative(&DerivativeCert::from_record(rec)?)?,
            RecordKind::SeriesIdentity => return Err(Failure(format!("'{}' is not a certificate", rec.id))),
        };
        failed |= report.verdict == Verdict::Fail;
        println!("{report}");
    }
    Ok(if failed { EXIT_FAIL } else { 0 })
}
