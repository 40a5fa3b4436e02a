#![no_main]

use cyclic_cntx::ingest::{counts_n, counts_to_spec, parse_counts};
use cyclic_cntx::validate_system;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_counts(text) else {
        return;
    };
    let Some(n) = counts_n(&records) else { return };
    if n > 64 {
        return;
    }
    if let Ok(spec) = counts_to_spec(&records, n) {
        assert!(
            validate_system(&spec).is_empty(),
            "frequencies always satisfy the bounds"
        );
    }
});
