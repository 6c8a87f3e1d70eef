#![no_main]

use bseries::syntax::{eval_quad, parse_expr};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(e) = parse_expr(src) else { return };
    let printed = e.to_string();
    let reparsed = parse_expr(&printed).expect("printed expression reparses");
    assert_eq!(reparsed.to_string(), printed);
    let _ = eval_quad(&e);
});
