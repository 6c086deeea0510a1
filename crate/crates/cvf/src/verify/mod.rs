//! Symbolic-execution verifier for annotated programs.

mod exec;
mod pc;
mod state;
mod term;

pub use exec::{head_of, ConsumeOut, Engine, Failure, StateSnapshot, Stats, VerifyConfig};
pub use pc::{Entails, Fact, PathCondition};
pub use state::{SymChunk, SymEnv, SymHeap, SymbolicState};
pub use term::{SymId, SymLemVal, SymTable, SymTerm};

use crate::syntax::ast::{AnnotatedCommand, Assertion, Decls, Program};
use std::fmt;

/// Verification verdict. `Failed` always carries a source location.
#[derive(Clone, Debug)]
pub enum Verdict {
    Verified,
    Failed {
        line: u32,
        col: u32,
        diagnostic: String,
        state: Vec<String>,
    },
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub verdict: Verdict,
    /// Informational notes about chunks left over at the end.
    pub leaks: Vec<String>,
    pub snapshots: Vec<StateSnapshot>,
    pub stats: Stats,
}

impl VerifyReport {
    pub fn is_verified(&self) -> bool {
        matches!(self.verdict, Verdict::Verified)
    }

    pub fn diagnostic(&self) -> Option<&str> {
        match &self.verdict {
            Verdict::Verified => None,
            Verdict::Failed { diagnostic, .. } => Some(diagnostic),
        }
    }

    /// Snapshots with the given label, in execution order.
    pub fn snapshots_labeled(&self, label: &str) -> Vec<&StateSnapshot> {
        self.snapshots.iter().filter(|s| s.label == label).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let verdict = match &self.verdict {
            Verdict::Verified => serde_json::json!({"kind": "verified"}),
            Verdict::Failed {
                line,
                col,
                diagnostic,
                state,
            } => serde_json::json!({
                "kind": "failed",
                "line": line,
                "col": col,
                "diagnostic": diagnostic,
                "state": state,
            }),
        };
        serde_json::json!({
            "verdict": verdict,
            "leaks": self.leaks,
            "stats": {
                "branches": self.stats.branches,
                "consumed_chunks": self.stats.consumed_chunks,
                "produced_chunks": self.stats.produced_chunks,
            },
            "snapshots": self.snapshots.iter().map(|s| serde_json::json!({
                "label": s.label,
                "chunks": s.chunks,
                "lemtype_count": s.lemtype_count,
                "points_to_totals": s.points_to_totals,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Verified => writeln!(f, "Verified")?,
            Verdict::Failed {
                line,
                col,
                diagnostic,
                state,
            } => {
                writeln!(f, "Failed at {line}:{col}: {diagnostic}")?;
                if state.is_empty() {
                    writeln!(f, "  state: emp")?;
                } else {
                    writeln!(f, "  state:")?;
                    for l in state {
                        writeln!(f, "    {l}")?;
                    }
                }
            }
        }
        for leak in &self.leaks {
            writeln!(f, "note: {leak}")?;
        }
        writeln!(
            f,
            "stats: {} branch(es), {} consumed, {} produced",
            self.stats.branches, self.stats.consumed_chunks, self.stats.produced_chunks
        )
    }
}

/// Verifies a command against a postcondition from the empty state.
pub fn verify_cmd(
    decls: &Decls,
    cmd: &AnnotatedCommand,
    post: &Assertion,
    cfg: &VerifyConfig,
) -> VerifyReport {
    let mut eng = Engine::new(decls, cfg.clone());
    let st = eng.fresh_state();
    eng.snapshot("init", &st);
    let outcome = eng.exec_acmd(st, cmd, false).and_then(|(mut st, res)| {
        eng.snapshot("end", &st);
        let mut env = st.env.clone();
        if let SymTerm::Sym(id) = &res {
            eng.syms.rename(*id, "res");
        }
        env.ghost.insert("res".to_string(), res);
        let mut out = ConsumeOut::default();
        eng.consume(&mut st, &env, post, &mut out)
            .map_err(|f| Failure {
                message: format!("postcondition: {}", f.message),
                ..f
            })?;
        Ok(st)
    });
    let (verdict, mut leaks) = match outcome {
        Ok(st) => {
            let leftover = st.heap.dump(&st.pc, &eng.syms);
            if !leftover.is_empty() && cfg.strict_leaks {
                (
                    Verdict::Failed {
                        line: cmd.span.line,
                        col: cmd.span.col,
                        diagnostic: format!(
                            "leaked chunks with --strict-leaks: {}",
                            leftover.join(", ")
                        ),
                        state: leftover,
                    },
                    Vec::new(),
                )
            } else {
                let leaks = leftover
                    .into_iter()
                    .map(|l| format!("leaked at program end: {l}"))
                    .collect();
                (Verdict::Verified, leaks)
            }
        }
        Err(f) => (
            Verdict::Failed {
                line: f.span.line,
                col: f.span.col,
                diagnostic: f.message,
                state: f.state,
            },
            Vec::new(),
        ),
    };
    let mut all_leaks = std::mem::take(&mut eng.leaks);
    all_leaks.append(&mut leaks);
    VerifyReport {
        verdict,
        leaks: all_leaks,
        snapshots: std::mem::take(&mut eng.snapshots),
        stats: eng.stats.clone(),
    }
}

/// Verifies a whole program: `{emp} main {True}` with leak notes.
pub fn verify_program_with(p: &Program, cfg: &VerifyConfig) -> VerifyReport {
    verify_cmd(&p.decls, &p.main, &Assertion::emp(), cfg)
}

pub fn verify_program(p: &Program) -> VerifyReport {
    verify_program_with(p, &VerifyConfig::default())
}
