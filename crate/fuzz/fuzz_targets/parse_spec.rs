#![no_main]

use cyclic_cntx::ingest::{emit_spec, parse_spec, parse_spec_document};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_spec_document(text) {
        // canonical output must read back to the same system
        assert_eq!(parse_spec_document(&emit_spec(&spec)).unwrap(), spec);
    }
    if let Ok(spec) = parse_spec(text) {
        let _ = cyclic_cntx::cntx(&spec).expect("valid specs analyze");
    }
});
