#![no_main]

use junction_core::controller::parse_report;
use junction_core::eval::section_scores;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let report = parse_report(&text);
    assert_eq!(report.raw_text, text);
    let _ = section_scores(&text, &text);
});
