//! A verifier, interpreter and soundness-testing harness for a toy
//! concurrent language with VeriFast-style ghost annotations.
//!
//! The library is organized around the pipeline:
//!
//! 1. [`syntax`]: parse `.cvf` programs into annotated ASTs, pretty-print
//!    them, substitute, and erase ghost code.
//! 2. [`heap`]: ghost values, chunks and logical heaps with exact rational
//!    coefficients.
//! 3. [`sat`]: ground satisfaction checking of assertions by logical heaps.
//! 4. [`interp`] / [`explore`]: small-step execution of erased programs and
//!    bounded exhaustive exploration of all thread interleavings.
//! 5. [`verify`]: the symbolic-execution proof checker for annotated
//!    programs.
//! 6. [`oracle`]: brute-force semantic checkers (strong consistency, heap
//!    consistency, self-consistency) and the verifier-vs-explorer
//!    soundness crosscheck.
//!
//! See the crate examples for one runnable program per capability.

pub mod explore;
pub mod heap;
pub mod interp;
pub mod oracle;
pub mod sat;
pub mod selftest;
pub mod syntax;
pub mod verify;

pub use explore::{explore, ExploreConfig, ExploreReport, ExploreVerdict};
pub use heap::{Chunk, Fraction, GhostValue, LogicalHeap};
pub use interp::{okay, step, thrds, Configuration, PhysHeap};
pub use oracle::{consistent, ok_k, sok, soundness_crosscheck, CrosscheckReport, WitnessUniverse};
pub use sat::{satisfies, SatConfig, SatResult};
pub use syntax::{erase, parse_program, program_to_string, Program};
pub use verify::{verify_program, Verdict, VerifyConfig, VerifyReport};
