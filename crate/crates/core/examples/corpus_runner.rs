//! Runs the golden corpus shipped with the crate.

use std::path::Path;

use gsp::harness::run_corpus;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let report = run_corpus(&dir).expect("corpus directory");
    print!("{report}");
}
