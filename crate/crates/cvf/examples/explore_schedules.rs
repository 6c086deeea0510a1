//! Explore every interleaving of an erased program, print the verdict,
//! the terminal states, and the number of distinct complete schedules.
//!
//! ```bash
//! cargo run --example explore_schedules [path/to/program.cvf] [depth]
//! ```

use cvf::explore::{count_interleavings, explore};
use cvf::interp::Configuration;
use cvf::syntax::{erase, parse_program};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/corpus/faa_two_threads.cvf", env!("CARGO_MANIFEST_DIR")));
    let depth: usize = std::env::args()
        .nth(2)
        .map(|d| d.parse().expect("depth is a number"))
        .unwrap_or(64);
    let text = std::fs::read_to_string(&path).expect("readable input file");
    let program = parse_program(&text).expect("input parses");
    let initial = Configuration::initial(erase(&program.main));

    let report = explore(&initial, depth);
    print!("{report}");
    println!(
        "distinct complete schedules: {}",
        count_interleavings(&initial, depth)
    );
    std::process::exit(if report.is_safe() { 0 } else { 1 });
}
