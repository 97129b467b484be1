#![no_main]

use junction_core::layout::default_layout;
use junction_core::oracle::{analyze, check_analysis, OracleConfig};
use junction_core::scenario::{describe_scenario, emit_scenario, parse_scenario};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let layout = default_layout();
    if let Ok(s) = parse_scenario(text, &layout) {
        assert_eq!(parse_scenario(&emit_scenario(&s), &layout).unwrap(), s);
        let _ = describe_scenario(&s);
        check_analysis(&analyze(&s, &OracleConfig::default())).unwrap();
    }
});
