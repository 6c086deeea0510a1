//! Erase the ghost annotations from a program and print the result.
//!
//! ```bash
//! cargo run --example erase_ghost_code [path/to/program.cvf]
//! ```

use cvf::syntax::{command_to_string, erase, parse_program};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/corpus/faa_two_threads.cvf", env!("CARGO_MANIFEST_DIR")));
    let text = std::fs::read_to_string(&path).expect("readable input file");
    let program = parse_program(&text).expect("input parses");
    let erased = erase(&program.main);
    println!("{}", command_to_string(&erased));

    // erasure is idempotent: embedding the plain command back into the
    // annotated language and erasing again changes nothing
    let again = erase(&cvf::syntax::embed(&erased));
    assert_eq!(erased, again);
}
