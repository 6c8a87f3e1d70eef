use std::path::PathBuf;

use bseries::catalog::parse_catalog;
use bseries::exactnum::{qf_arith, FieldOp, QuadElem};
use bseries::seriesmodel::{den_expr, den_from_expr};
use bseries::syntax::{eval_quad, parse_expr};
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn check_catalog(text: &str) -> bool {
    let Ok(cat) = parse_catalog(text) else { return false };
    let once = cat.serialize();
    assert_eq!(parse_catalog(&once).unwrap().serialize(), once);
    true
}

fn check_expr(src: &str) -> bool {
    let Ok(e) = parse_expr(src) else { return false };
    let printed = e.to_string();
    assert_eq!(parse_expr(&printed).unwrap().to_string(), printed, "{src}");
    let _ = eval_quad(&e);
    true
}

fn check_quad(src: &str) -> bool {
    let (a, b) = src.split_once('\n').unwrap_or((src, "1"));
    let (Ok(x), Ok(y)) = (a.parse::<QuadElem>(), b.parse::<QuadElem>()) else { return false };
    assert_eq!(x.to_string().parse::<QuadElem>().unwrap(), x);
    assert_eq!(x.conj().conj(), x);
    for op in [FieldOp::Add, FieldOp::Sub, FieldOp::Mul, FieldOp::Div] {
        if let Ok(z) = qf_arith(op, &x, &y) {
            assert_eq!(z.conj(), qf_arith(op, &x.conj(), &y.conj()).unwrap());
        }
    }
    true
}

fn check_den(src: &str) -> bool {
    let Ok(e) = parse_expr(src) else { return false };
    let Ok(den) = den_from_expr(&e) else { return false };
    assert_eq!(den_from_expr(&den_expr(&den)).unwrap(), den, "{src}");
    true
}

#[test]
fn corpus_seeds_are_valid_inputs() {
    for (target, check) in [
        ("catalog", check_catalog as fn(&str) -> bool),
        ("expr", check_expr),
        ("quadelem", check_quad),
        ("den", check_den),
    ] {
        for s in seeds(target) {
            assert!(check(&s), "{target} seed rejected: {s}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parsers_never_panic(src in "[-+*/^()0-9knxsqrtHLGKpilogbm,. ]{0,40}") {
        check_expr(&src);
        check_den(&src);
        check_quad(&src);
    }

    #[test]
    fn catalog_parser_never_panics(lines in prop::collection::vec("(id|kind|base|weight|den|kstart|rhs|status|source|kernel|position): [-+*/^()0-9ksqrt a-z]{0,20}", 0..12)) {
        check_catalog(&lines.join("\n"));
    }
}
