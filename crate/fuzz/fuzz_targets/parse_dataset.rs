#![no_main]

use junction_core::layout::default_layout;
use junction_core::scenario::{dataset_to_jsonl, parse_dataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let layout = default_layout();
    if let Ok(items) = parse_dataset(text, &layout) {
        assert_eq!(parse_dataset(&dataset_to_jsonl(&items), &layout).unwrap(), items);
    }
});
