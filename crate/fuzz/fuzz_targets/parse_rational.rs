#![no_main]

use cyclic_cntx::rational::{parse_rational, to_decimal_string, to_fraction_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(r) = parse_rational(text) {
        assert_eq!(parse_rational(&to_fraction_string(&r)).unwrap(), r);
        let _ = to_decimal_string(&r, 12);
    }
});
