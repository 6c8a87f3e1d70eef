use bseries::catalog::{default_catalog_path, load_catalog, Catalog, RecordKind};
use bseries::constants::ClosedForm;
use bseries::evaluator::sum_series;
use bseries::exactnum::rat;
use bseries::precision::embed_quad;
use bseries::seriesmodel::partial_sums_exact;
use bseries::telescope::{check_beta_binomial, check_derivative, check_telescoping, DerivativeCert, TelescopingCert, Verdict};
use rand::{Rng, SeedableRng};
use std::str::FromStr;

fn catalog() -> Catalog {
    load_catalog(&default_catalog_path()).unwrap()
}

fn certs(cat: &Catalog) -> Vec<TelescopingCert> {
    cat.records()
        .iter()
        .filter(|r| r.kind == RecordKind::Telescoping)
        .map(|r| TelescopingCert::from_record(r).unwrap())
        .collect()
}

#[test]
fn shipped_certificates_pass() {
    let cat = catalog();
    let certs = certs(&cat);
    assert_eq!(certs.len(), 4);
    for c in &certs {
        let r = check_telescoping(c).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r}");
    }
}

#[test]
fn closed_forms_match_partial_sums_up_to_forty() {
    let cat = catalog();
    for c in certs(&cat) {
        let def = c.summand_series(8).unwrap();
        let sums = partial_sums_exact(&def, 40).unwrap();
        for (i, s) in sums.iter().enumerate() {
            let n = def.k_start + i as u64;
            assert_eq!(&c.closed_form_at(n, 8).unwrap(), s, "{} at n = {n}", c.id);
        }
    }
}

#[test]
fn boundary_terms_vanish_in_the_limit() {
    let cat = catalog();
    for c in certs(&cat) {
        let def = c.summand_series(8).unwrap();
        let boundary = c.boundary_ball(120, 8, 256).unwrap();
        assert!(boundary.abs_within_pow10(30), "{}: {}", c.id, boundary);
        let sum = sum_series(&def, 30, None).unwrap();
        let r_n = embed_quad(&c.closed_form_at(120, 8).unwrap(), 256);
        assert!(sum.sub(&r_n).abs_within_pow10(28), "{}", c.id);
    }
}

#[test]
fn single_coefficient_perturbations_fail() {
    let cat = catalog();
    let certs = certs(&cat);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut fails = 0;
    for _ in 0..100 {
        let c = &certs[rng.gen_range(0..certs.len())];
        let site = rng.gen_range(0..c.int_sites());
        let delta = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let bad = c.perturbed(site, delta);
        match check_telescoping(&bad) {
            Ok(r) if r.verdict == Verdict::Fail => fails += 1,
            other => panic!("{} site {site} delta {delta}: {other:?}", c.id),
        }
    }
    assert_eq!(fails, 100);
}

#[test]
fn derivative_certificate_and_endpoint() {
    let cat = catalog();
    let d = DerivativeCert::from_record(cat.lookup("deriv-lem2.1").unwrap()).unwrap();
    assert_eq!(check_derivative(&d).unwrap().verdict, Verdict::Pass);
    let f1 = d.value_at(&rat(1, 1), 128).unwrap();
    let target = ClosedForm::from_str("4 + 3/2*pi").unwrap().eval_bits(128).unwrap();
    assert!(f1.mul_int(&2.into()).sub(&target).abs_within_pow10(30));
}

#[test]
fn beta_binomial_identity_to_one_hundred() {
    assert_eq!(check_beta_binomial(100).verdict, Verdict::Pass);
}
