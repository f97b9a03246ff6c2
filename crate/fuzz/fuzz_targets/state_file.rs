#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(state) = coinwalk::LatticeState::from_json_str(text) {
            // accepted states must survive a serialization round trip
            let back = coinwalk::LatticeState::from_json_str(&state.to_json_string())
                .expect("serialized state must parse");
            assert!(back == state);
        }
    }
});
