#![no_main]

use libfuzzer_sys::fuzz_target;

// The expression parser must never panic on arbitrary input, and anything it
// accepts must print and reparse to the identical tree and evaluate without
// panicking.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for dim in [1usize, 2, 3] {
        if let Ok(ast) = symmlab::expr::parse(text, dim) {
            let printed = ast.to_string();
            match symmlab::expr::parse(&printed, dim) {
                Ok(reparsed) => assert_eq!(ast, reparsed, "round trip changed the tree"),
                Err(e) => panic!("printer output failed to parse: {printed:?}: {e}"),
            }
            let _ = ast.eval(1.25, &[0.5, -0.25, 0.75]);
            let _ = ast.eval(0.0, &[0.0, 0.0, 0.0]);
        }
    }
});
