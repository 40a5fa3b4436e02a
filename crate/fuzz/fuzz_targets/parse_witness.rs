#![no_main]

use cyclic_cntx::ingest::{emit_witness, parse_witness};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pmf) = parse_witness(text) {
        assert_eq!(parse_witness(&emit_witness(&pmf)).unwrap(), pmf);
    }
});
