//! Verify an annotated program and show the proof trace.
//!
//! ```bash
//! cargo run --example verify_program [path/to/program.cvf]
//! ```

use cvf::verify::verify_program;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/corpus/faa_two_threads.cvf", env!("CARGO_MANIFEST_DIR")));
    let text = std::fs::read_to_string(&path).expect("readable input file");
    let program = match cvf::syntax::parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("parse error: {e}");
            std::process::exit(2);
        }
    };
    let report = verify_program(&program);

    println!("== symbolic states at command boundaries ==");
    for snap in &report.snapshots {
        println!("[{}]", snap.label);
        if snap.chunks.is_empty() {
            println!("    emp");
        }
        for c in &snap.chunks {
            println!("    {c}");
        }
    }
    println!("== report ==");
    print!("{report}");
    std::process::exit(if report.is_verified() { 0 } else { 1 });
}
