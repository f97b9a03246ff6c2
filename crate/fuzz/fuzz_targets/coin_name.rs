#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(name) = std::str::from_utf8(data) {
        // cap the dimension so fourier:<huge> cannot allocate unboundedly
        if let Some(ds) = name.strip_prefix("fourier:") {
            if ds.parse::<usize>().map(|d| d > 64).unwrap_or(false) {
                return;
            }
        }
        let _ = coinwalk::CoinMatrix::builtin(name);
    }
});
