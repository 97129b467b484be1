#![no_main]

use junction_core::layout::{emit_layout, parse_layout};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(layout) = parse_layout(text) {
        assert_eq!(parse_layout(&emit_layout(&layout)).unwrap(), layout);
    }
});
