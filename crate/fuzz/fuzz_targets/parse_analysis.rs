#![no_main]

use junction_core::controller::parse_report;
use junction_core::oracle::{emit_analysis, parse_analysis, render_report};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = parse_analysis(text) {
        assert_eq!(parse_analysis(&emit_analysis(&a)).unwrap(), a);
        let _ = parse_report(&render_report(&a));
    }
});
