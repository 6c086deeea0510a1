//! Execute one deterministic (leftmost) schedule of an erased program and
//! print the step trace.
//!
//! ```bash
//! cargo run --example run_erased [path/to/program.cvf]
//! ```

use cvf::interp::{run_leftmost, Configuration};
use cvf::syntax::{erase, parse_program};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/corpus/faa_two_threads.cvf", env!("CARGO_MANIFEST_DIR")));
    let text = std::fs::read_to_string(&path).expect("readable input file");
    let program = parse_program(&text).expect("input parses");
    let initial = Configuration::initial(erase(&program.main));

    let (final_cfg, trace) = run_leftmost(&initial, 10_000);
    for line in &trace {
        println!("{line}");
    }
    println!("final: {final_cfg}");
    if final_cfg.finished() {
        println!("finished with value {}", final_cfg.cmd.value().unwrap());
    } else {
        println!("stuck (not a value and no rule applies)");
        std::process::exit(1);
    }
}
