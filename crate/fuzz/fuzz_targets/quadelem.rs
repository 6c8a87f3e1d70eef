#![no_main]

use bseries::exactnum::{qf_arith, FieldOp, QuadElem};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let (a, b) = src.split_once('\n').unwrap_or((src, "1"));
    let (Ok(x), Ok(y)) = (a.parse::<QuadElem>(), b.parse::<QuadElem>()) else { return };
    assert_eq!(x.to_string().parse::<QuadElem>().expect("display reparses"), x);
    assert_eq!(x.conj().conj(), x);
    for op in [FieldOp::Add, FieldOp::Sub, FieldOp::Mul, FieldOp::Div] {
        if let Ok(z) = qf_arith(op, &x, &y) {
            assert_eq!(z.conj(), qf_arith(op, &x.conj(), &y.conj()).expect("conjugates combine"));
        }
    }
});
