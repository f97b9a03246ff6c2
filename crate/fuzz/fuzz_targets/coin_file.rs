#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Coin documents arrive from user files; parsing must never panic.
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = coinwalk::CoinMatrix::from_json_str(text);
    }
});
