//! Cross-validate the verifier against the interleaving explorer over the
//! whole corpus: a verified program whose erasure reaches a not-okay
//! configuration would witness unsoundness.

use cvf::oracle::soundness_crosscheck;
use cvf::syntax::parse_program;
use std::path::PathBuf;

fn main() {
    let corpus = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in std::fs::read_dir(&corpus).expect("corpus directory") {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "cvf") {
            files.push(p);
        }
    }
    for entry in std::fs::read_dir(corpus.join("mutants")).expect("mutants directory") {
        files.push(entry.unwrap().path());
    }
    files.sort();

    let mut fatal = 0;
    println!("{:<28} {:>10} {:>14}", "program", "verifier", "explorer");
    for f in &files {
        let name = f.file_name().unwrap().to_string_lossy().into_owned();
        let program = match parse_program(&std::fs::read_to_string(f).unwrap()) {
            Ok(p) => p,
            Err(e) => {
                println!("{name:<28} parse error: {e}");
                continue;
            }
        };
        let report = soundness_crosscheck(&program, 64);
        let (v, s) = report.quadrant();
        println!(
            "{name:<28} {:>10} {:>14}{}",
            if v { "Verified" } else { "Failed" },
            if s { "SafeUpToDepth" } else { "NotOkay" },
            if report.fatal { "  <-- UNSOUND" } else { "" }
        );
        fatal += report.fatal as usize;
    }
    println!(
        "\n{} programs checked, {} fatal quadrant(s)",
        files.len(),
        fatal
    );
    std::process::exit(if fatal == 0 { 0 } else { 1 });
}
