//! Parse a program, walk its declarations, and show that printing and
//! reparsing is the identity.
//!
//! ```bash
//! cargo run --example parse_and_pretty [path/to/program.cvf]
//! ```

use cvf::syntax::{parse_program, program_to_string};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/corpus/faa_two_threads.cvf", env!("CARGO_MANIFEST_DIR")));
    let text = std::fs::read_to_string(&path).expect("readable input file");
    let program = match parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("parse error: {e}");
            std::process::exit(2);
        }
    };

    println!("== declarations ==");
    for d in program.decls.prelude() {
        println!("prelude: {}", d.name());
    }
    for d in program.decls.user() {
        println!("user:    {}", d.name());
    }

    let printed = program_to_string(&program);
    println!("\n== canonical form ==\n{printed}");

    let reparsed = parse_program(&printed).expect("canonical form reparses");
    assert_eq!(reparsed, program, "parse . pretty is the identity");
    println!("round trip: parse(pretty(p)) == p holds");
}
