use bseries::catalog::{load_catalog, default_catalog_path, Status};
use bseries::constants::{ClosedForm, Monomial};
use bseries::evaluator::sum_series_bits;
use bseries::relation::{discover_rhs, precision_hint, RelationError};
use bseries::seriesmodel::SeriesDef;
use std::str::FromStr;

fn rediscover(def: &SeriesDef, rhs: &ClosedForm) -> Option<ClosedForm> {
    let basis: Vec<Monomial> = rhs.terms().map(|(m, _)| m.clone()).collect();
    let bits = precision_hint(basis.len() + 1, 32) + 32;
    let value = |b: u32| {
        sum_series_bits(def, b, None, None)
            .map(|s| s.value)
            .map_err(|e| RelationError::Series(e.to_string()))
    };
    discover_rhs(value, &basis, 32, bits).ok().flatten()
}

#[test]
fn proved_and_cited_right_sides_are_rediscovered() {
    let cat = load_catalog(&default_catalog_path()).unwrap();
    let mut hits = 0;
    let mut misses = Vec::new();
    for r in cat.records() {
        if !matches!(r.status, Status::Proved | Status::Cited) || r.scale.is_some() {
            continue;
        }
        let (Some(def), Some(rhs)) = (&r.series, &r.rhs) else { continue };
        match rediscover(def, rhs) {
            Some(found) if &found == rhs => hits += 1,
            other => misses.push(format!("{}: {:?}", r.id, other.map(|c| c.to_string()))),
        }
    }
    eprintln!("rediscovered {hits}; misses {misses:?}");
    assert!(hits >= 30, "only {hits} rediscovered; misses {misses:?}");
}

#[test]
fn sqrt33_relation_coefficients() {
    let cat = load_catalog(&default_catalog_path()).unwrap();
    let r = cat.lookup("conj6.1-320").unwrap();
    let def = r.series.as_ref().unwrap();
    let basis = bseries::relation::parse_basis("sqrt(33)*L(-11),K").unwrap();
    let mut values = vec![sum_series_bits(def, 260, None, None).unwrap().value];
    for m in &basis {
        values.push(ClosedForm::monomial_value(m, 268).unwrap());
    }
    let rel = bseries::relation::pslq(&values, 32).unwrap();
    let c: Vec<i64> = rel.coefficients.unwrap().iter().map(|v| i64::try_from(v).unwrap()).collect();
    let sign = c[0].signum();
    assert_eq!(c.iter().map(|v| v * sign).collect::<Vec<_>>(), vec![3, -3520, 25920]);
}

#[test]
fn rational_series_against_pi_squared() {
    let cat = load_catalog(&default_catalog_path()).unwrap();
    let def = cat.lookup("g2").unwrap().series.clone().unwrap();
    let s = sum_series_bits(&def, 140, None, None).unwrap().value;
    let pi2 = ClosedForm::from_str("pi^2").unwrap().eval_bits(140).unwrap();
    let c = bseries::relation::pslq(&[s, pi2], 24).unwrap().coefficients.unwrap();
    let c: Vec<i64> = c.iter().map(|v| i64::try_from(v).unwrap()).collect();
    assert!(c == vec![2, -1] || c == vec![-2, 1], "{c:?}");
}

#[test]
fn random_controls_yield_no_relation() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let basis = bseries::relation::parse_basis("sqrt(33)*L(-11),K").unwrap();
    let bits = precision_hint(3, 24) + 32;
    let mut found = 0;
    for _ in 0..100 {
        let man: num_bigint::BigInt = (0..bits / 32).fold(num_bigint::BigInt::from(1), |acc, _| (acc << 32) + rng.gen::<u32>());
        let x = bseries::precision::ApproxReal::from_fixed(man, bits + 32, bits + 40);
        let value = |_b: u32| Ok(x.clone());
        if discover_rhs(value, &basis, 24, bits).unwrap().is_some() {
            found += 1;
        }
    }
    assert_eq!(found, 0);
}
