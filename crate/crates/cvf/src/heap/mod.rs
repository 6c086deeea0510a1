//! Ghost values, chunks, logical heaps and the weak-consistency check.

mod fraction;
mod logical;
mod value;

pub use fraction::Fraction;
pub use logical::{Chunk, InsufficientError, LogicalHeap};
pub use value::{eval_ghost_expr, EvalError, GhostValue, GroundEnv, LemVal};
