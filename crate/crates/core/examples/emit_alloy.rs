//! Emits Alloy source for a bundled model (default: the counter).
//!
//! `cargo run --example emit_alloy -- fig2-cache-miss`

use maestro::alloy::{emit, DEFAULT_BITVECTOR_LIB};
use maestro::corpus::load_model;

fn main() {
    let id = std::env::args().nth(1).unwrap_or_else(|| "counter".into());
    let model = load_model(&id).unwrap_or_else(|e| panic!("{e}"));
    let out = emit(&model, DEFAULT_BITVECTOR_LIB);
    for d in &out.diagnostics {
        eprintln!("{d}");
    }
    print!("{}", out.text);
}
