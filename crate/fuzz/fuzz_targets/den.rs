#![no_main]

use bseries::seriesmodel::{den_expr, den_from_expr};
use bseries::syntax::parse_expr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(e) = parse_expr(src) else { return };
    let Ok(den) = den_from_expr(&e) else { return };
    assert_eq!(den_from_expr(&den_expr(&den)).expect("rendered den reparses"), den);
    if den.iter().all(|f| f.e <= 16) {
        for f in &den {
            for k in 0..8 {
                f.eval(k);
            }
        }
    }
});
