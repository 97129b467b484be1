#![no_main]

use junction_core::promptkit::{from_jsonl, to_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(bundles) = from_jsonl(text, "fuzz") {
        assert_eq!(from_jsonl(&to_jsonl(&bundles), "fuzz").unwrap(), bundles);
    }
});
