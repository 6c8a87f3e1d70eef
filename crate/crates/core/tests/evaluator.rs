use bseries::catalog::{default_catalog_path, load_catalog, Catalog};
use bseries::evaluator::{
    certify_envelope, embed_relative, partial_sum_ball, sum_series_bits, tail_bound, term_ratio_at, TailMode,
};
use bseries::exactnum::QuadElem;
use bseries::seriesmodel::{is_alternating, partial_sums_exact, term_exact, SeriesDef};

fn catalog() -> Catalog {
    load_catalog(&default_catalog_path()).unwrap()
}

/// Hypergeometric series with a proved envelope, paired with a 200-bit reference sum.
fn certified(cat: &Catalog) -> Vec<(String, SeriesDef, bseries::precision::ApproxReal)> {
    cat.records()
        .iter()
        .filter_map(|r| {
            let def = r.series.as_ref()?;
            let env = certify_envelope(def).ok()?;
            if env.mode != TailMode::Certified || !def.weight.is_hypergeometric() {
                return None;
            }
            let s = sum_series_bits(def, 200, Some(TailMode::Certified), None).ok()?;
            Some((r.id.clone(), def.clone(), s.value))
        })
        .collect()
}

#[test]
fn certified_tail_bounds_contain_the_true_tail() {
    let cat = catalog();
    let series = certified(&cat);
    assert!(series.len() >= 20, "{}", series.len());
    for (id, def, reference) in &series {
        let env = certify_envelope(def).unwrap();
        for n in [env.k0, env.k0 + 3, env.k0 + 10] {
            let head = partial_sum_ball(def, n, 400).unwrap();
            let tail = reference.sub(&head).abs_lower();
            let bound = tail_bound(def, &env, n).unwrap();
            assert!(tail <= bound, "{id} n = {n}: tail {} bound {}", tail.to_f64(), bound.to_f64());
        }
    }
}

#[test]
fn incremental_partial_sums_match_direct_terms() {
    let cat = catalog();
    for r in cat.records() {
        let Some(def) = &r.series else { continue };
        let sums = partial_sums_exact(def, 50).unwrap();
        let mut acc = QuadElem::zero();
        for (i, s) in sums.iter().enumerate() {
            acc = acc.checked_add(&term_exact(def, def.k_start + i as u64).unwrap()).unwrap();
            assert_eq!(&acc, s, "{} at index {i}", r.id);
        }
    }
}

#[test]
fn alternating_tails_are_bounded_by_the_next_term() {
    let cat = catalog();
    let mut seen = 0;
    for (id, def, reference) in certified(&cat) {
        if !is_alternating(&def) {
            continue;
        }
        let k0 = certify_envelope(&def).unwrap().k0;
        for n in k0..k0 + 15 {
            let head = partial_sum_ball(&def, n, 400).unwrap();
            let next = embed_relative(&term_exact(&def, n + 1).unwrap(), 64).abs_upper();
            assert!(reference.sub(&head).abs_lower() <= next, "{id} n = {n}");
        }
        seen += 1;
    }
    assert!(seen >= 5, "{seen}");
}

#[test]
fn borwein_series_term_ratio() {
    let cat = catalog();
    let def = cat.lookup("bb-19").unwrap().series.as_ref().unwrap();
    let ratio = embed_relative(&term_ratio_at(def, 2000).unwrap(), 64).to_f64().abs();
    assert!((ratio / 3.996e-17 - 1.0).abs() < 0.01, "{ratio:e}");
}
