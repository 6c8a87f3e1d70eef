#![no_main]

use bseries::catalog::parse_catalog;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cat) = parse_catalog(text) else { return };
    let once = cat.serialize();
    let again = parse_catalog(&once).expect("serialized catalog reparses");
    assert_eq!(again.serialize(), once);
});
