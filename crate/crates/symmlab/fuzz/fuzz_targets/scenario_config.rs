#![no_main]

use libfuzzer_sys::fuzz_target;

// Scenario configs come from user-edited files: parsing and validation must
// reject bad input with an error, never a panic. Accepted configs must also
// survive manifold and field assembly (which parses the embedded
// expressions) without panicking.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = symmlab::scenario::ScenarioConfig::from_toml_str(text) else { return };
    if let Ok(m) = symmlab::scenario::build_manifold(&cfg.manifold) {
        let _ = m.dim();
    }
    let _ = symmlab::scenario::build_field(&cfg.field, cfg.manifold.dim);
});
