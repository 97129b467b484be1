#![no_main]

use junction_core::controller::{parse_transcript, to_transcript, ReplayController};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_transcript(text) {
        assert_eq!(parse_transcript(&to_transcript(&records)).unwrap(), records);
        let _ = ReplayController::new(records);
    }
});
