use std::collections::HashSet;
use std::path::Path;

use bseries::catalog::{default_catalog_path, load_catalog, parse_catalog, RecordKind, Status};
use bseries::seriesmodel::{den_expr, weight_expr};
use bseries::syntax::quad_expr;

const LABELS: &[&str] = &[
    "three", "Z", "G1", "G2", "S1", "S2", "CZ115", "Th-8^k", "pi", "Th1.2", "42k-1", "42k+5", "252", "CZ4096",
    "Lem2.1", "3pi/2", "6k+15", "2k+1", "-1", "1", "4096-1", "4096-2", "4500", "I(6k-5)", "16^k", "216", "256",
    "512", "-512", "R1", "19", "R2", "Conj1.1", "GR5", "GR-5", "Conj2.1", "375", "250", "162", "slow", "34", "265",
    "Conj2.2", "121", "441", "7Pi", "98", "340", "384", "57Pi", "Conj2.3", "32", "195", "135", "Conj3.1", "-24",
    "320", "111", "145", "Conj3.3", "-8", "11", "17Z",
];

#[test]
fn shipped_catalog_round_trips_byte_for_byte() {
    let path = default_catalog_path();
    let text = std::fs::read_to_string(&path).unwrap();
    let cat = load_catalog(&path).unwrap();
    assert_eq!(cat.serialize(), text);
}

#[test]
fn coverage_and_tallies() {
    let cat = load_catalog(&default_catalog_path()).unwrap();
    assert!(cat.len() >= 60);
    let tally = cat.tally();
    assert_eq!(tally[&Status::KnownFalse], 1);
    assert!(tally[&Status::Proved] + tally[&Status::Cited] >= 36);
    let kinds = |k| cat.records().iter().filter(|r| r.kind == k).count();
    assert_eq!(kinds(RecordKind::Telescoping), 4);
    assert_eq!(kinds(RecordKind::Derivative), 1);

    assert_eq!(cat.lookup("thm1.1-pi").unwrap().status, Status::Proved);
    assert_eq!(cat.lookup("conj5.1-375").unwrap().status, Status::Conjectural);
    assert_eq!(cat.lookup("aldawoud-t31-r10").unwrap().status, Status::KnownFalse);
    assert!(cat.lookup("no-such-id").is_err());
}

#[test]
fn every_displayed_label_is_mapped() {
    let cat = load_catalog(&default_catalog_path()).unwrap();
    let map_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/equation_map.txt");
    let text = std::fs::read_to_string(map_path).unwrap();
    let mut seen = HashSet::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
        let mut cols = line.split('\t');
        let label = cols.next().unwrap();
        let ids = cols.next().expect("ids column");
        assert!(seen.insert(label), "label {label} mapped twice");
        if ids == "-" {
            assert!(cols.next().is_some_and(|r| !r.is_empty()), "{label}: out-of-scope needs a reason");
            continue;
        }
        for id in ids.split(", ") {
            assert!(cat.lookup(id).is_ok(), "{label} -> unknown id {id}");
        }
    }
    let expected: HashSet<&str> = LABELS.iter().copied().collect();
    assert_eq!(seen, expected);
}

#[test]
fn series_fields_render_and_reparse_to_the_same_series() {
    let cat = load_catalog(&default_catalog_path()).unwrap();
    for r in cat.records() {
        let Some(def) = &r.series else { continue };
        let mut text = format!(
            "id: x\nkind: series_identity\nbase: {}\nweight: {}\n",
            quad_expr(&def.base),
            weight_expr(&def.weight)
        );
        if let Some(k) = def.kernel {
            text += &format!("kernel: {}\nposition: {}\n", k.tag(), def.position.tag());
        }
        if !def.den.is_empty() {
            text += &format!("den: {}\n", den_expr(&def.den));
        }
        text += &format!("kstart: {}\nrhs: 0\nstatus: CONJECTURAL\nsource: x\n", def.k_start);
        let again = parse_catalog(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", r.id));
        assert_eq!(again.lookup("x").unwrap().series.as_ref(), Some(def), "{}", r.id);
    }
}
