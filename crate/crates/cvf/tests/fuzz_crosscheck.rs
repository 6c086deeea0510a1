//! Seeded mutation fuzzing of the golden proof: random textual edits are
//! parsed and, when they still parse, crosschecked. No matter how a
//! mutation mangles the annotations, a verified program whose erasure
//! reaches a not-okay configuration must never appear.

use cvf::oracle::soundness_crosscheck;
use cvf::syntax::parse_program;
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

fn golden_text() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/faa_two_threads.cvf");
    std::fs::read_to_string(p).expect("corpus file")
}

fn mutate(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    match rng.gen_range(0..6) {
        // change an integer literal
        0 => {
            let digits = ["0", "1", "2", "3", "-1"];
            let from = digits[rng.gen_range(0..digits.len())];
            let to = digits[rng.gen_range(0..digits.len())];
            let i = rng.gen_range(0..lines.len());
            lines[i] = lines[i].replacen(from, to, 1);
        }
        // swap the ghost cells
        1 => {
            let i = rng.gen_range(0..lines.len());
            lines[i] = lines[i]
                .replace("g1", "gtmp")
                .replace("g2", "g1")
                .replace("gtmp", "g2");
        }
        // delete a line
        2 => {
            let i = rng.gen_range(0..lines.len());
            lines.remove(i);
        }
        // duplicate a line
        3 => {
            let i = rng.gen_range(0..lines.len());
            lines.insert(i, lines[i].clone());
        }
        // fraction changes
        4 => {
            let i = rng.gen_range(0..lines.len());
            lines[i] = if rng.gen_bool(0.5) {
                lines[i].replacen("[1/2]", "", 1)
            } else {
                lines[i].replacen("[1/2]", "[1/4]", 1)
            };
        }
        // swap pre/post roles
        _ => {
            let i = rng.gen_range(0..lines.len());
            lines[i] = lines[i]
                .replace("pre1", "ptmp")
                .replace("post1", "pre1")
                .replace("ptmp", "post1");
        }
    }
    lines.join("\n")
}

#[test]
fn mutated_golden_programs_never_hit_the_fatal_quadrant() {
    let golden = golden_text();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut parsed = 0usize;
    let mut verified = 0usize;
    for _ in 0..600 {
        let mut text = golden.clone();
        for _ in 0..rng.gen_range(1..=3) {
            text = mutate(&text, &mut rng);
        }
        let Ok(program) = parse_program(&text) else {
            continue;
        };
        parsed += 1;
        let report = soundness_crosscheck(&program, 48);
        assert!(
            !report.fatal,
            "UNSOUND: a mutated program was verified but its erasure is unsafe:\n{text}"
        );
        verified += report.verify.is_verified() as usize;
    }
    // the fuzz run must actually exercise both tools
    assert!(parsed >= 50, "only {parsed} mutants parsed");
    println!("fuzz: {parsed} mutants crosschecked, {verified} still verified, 0 fatal");
}
