#![no_main]

use libfuzzer_sys::fuzz_target;
use pucci_core::grid2d::Extremal;
use pucci_core::ProblemParams;
use pucci_harness::RhsCatalogEntry;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(entry) = toml::from_str::<RhsCatalogEntry>(src) else {
        return;
    };
    if entry.validate("rhs").is_err() {
        return;
    }
    let params = ProblemParams::new(1.0, 2.0, 2, 3.0).unwrap();
    let _ = entry.gates(&params);
    let _ = entry.singular_point();
    let _ = entry.is_nonnegative();
    let f = entry.planar(&params, Extremal::Plus);
    for x in [[0.0, 0.0], [0.3, -0.2], [0.9, 0.1], [-0.5, 0.5]] {
        let _ = f(x);
    }
    if let Ok(profile) = entry.radial_profile(&params) {
        for r in [1e-6, 0.1, 0.5, 1.0] {
            let _ = profile.eval(r);
        }
    }
});
