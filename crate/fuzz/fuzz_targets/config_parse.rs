#![no_main]

use libfuzzer_sys::fuzz_target;
use pucci_harness::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    match RunConfig::parse(src) {
        // validation may reject, but must not panic, and accepted
        // parameters must build
        Ok(cfg) => {
            if cfg.validate().is_ok() {
                cfg.problem_params().unwrap();
            }
        }
        Err(e) => {
            assert!(matches!(e, pucci_core::Error::Config { .. }), "{e:?}");
        }
    }
});
