//! Bounded exhaustive exploration of all thread interleavings.

use crate::interp::{okay, step_labeled, trace_line, Configuration, StepLabel};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    /// Maximum number of steps from the initial configuration.
    pub max_steps: usize,
    /// State-count budget; exceeding it yields `ExhaustedBudget`.
    pub max_states: usize,
    /// Worker threads for frontier expansion. Output is deterministic
    /// regardless of this setting.
    pub jobs: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            max_steps: 64,
            max_states: 1_000_000,
            jobs: 1,
        }
    }
}

/// One replayable step of a witness trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub path: String,
    pub rule: String,
    pub heap_after: String,
}

impl TraceStep {
    fn new(label: &StepLabel, after: &Configuration) -> Self {
        TraceStep {
            path: label.path_string(),
            rule: label.rule.to_string(),
            heap_after: after.heap.to_string(),
        }
    }

    pub fn line(&self) -> String {
        format!("{} : {} : {}", self.path, self.rule, self.heap_after)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ExploreVerdict {
    SafeUpToDepth,
    NotOkay { trace: Vec<TraceStep> },
    ExhaustedBudget,
}

#[derive(Clone, Debug)]
pub struct ExploreReport {
    pub states_visited: usize,
    pub max_depth_reached: usize,
    pub verdict: ExploreVerdict,
    /// Configurations without successors, in first-visit order.
    pub terminals: Vec<Configuration>,
}

impl ExploreReport {
    pub fn is_safe(&self) -> bool {
        matches!(self.verdict, ExploreVerdict::SafeUpToDepth)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "states_visited": self.states_visited,
            "max_depth_reached": self.max_depth_reached,
            "verdict": self.verdict,
            "terminals": self.terminals.iter().map(|c| serde_json::json!({
                "heap": c.heap.to_string(),
                "command": crate::syntax::command_to_string(&c.cmd),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for ExploreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            ExploreVerdict::SafeUpToDepth => writeln!(f, "verdict: safe up to depth")?,
            ExploreVerdict::NotOkay { trace } => {
                writeln!(f, "verdict: NOT OKAY (witness below)")?;
                for t in trace {
                    writeln!(f, "  {}", t.line())?;
                }
            }
            ExploreVerdict::ExhaustedBudget => writeln!(f, "verdict: state budget exhausted")?,
        }
        writeln!(f, "states visited: {}", self.states_visited)?;
        writeln!(f, "max depth reached: {}", self.max_depth_reached)?;
        for t in &self.terminals {
            let value = t
                .cmd
                .value()
                .map(|v| v.to_string())
                .unwrap_or_else(|| "stuck".to_string());
            writeln!(f, "terminal heap: {} (value {})", t.heap, value)?;
        }
        Ok(())
    }
}

/// Breadth-first exploration of every interleaving up to `max_steps`.
///
/// The verdict is `SafeUpToDepth` iff every visited configuration is okay.
/// A not-okay configuration yields the shortest witness trace. The visited
/// set is updated once per state on the sequential merge path, so results
/// do not depend on the number of worker threads.
pub fn explore(cfg: &Configuration, max_steps: usize) -> ExploreReport {
    explore_with(
        cfg,
        &ExploreConfig {
            max_steps,
            ..Default::default()
        },
    )
}

pub fn explore_with(initial: &Configuration, config: &ExploreConfig) -> ExploreReport {
    let mut visited: HashSet<Configuration> = HashSet::new();
    let mut parents: HashMap<Configuration, (Configuration, TraceStep)> = HashMap::new();
    let mut terminals: Vec<Configuration> = Vec::new();
    let mut frontier = vec![initial.clone()];
    visited.insert(initial.clone());
    let mut depth = 0usize;
    let mut max_depth_reached = 0usize;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .expect("thread pool");

    loop {
        // check okayness of the whole frontier
        let not_okay: Option<&Configuration> = {
            let flags: Vec<bool> = pool.install(|| frontier.par_iter().map(okay).collect());
            frontier
                .iter()
                .zip(flags)
                .find(|(_, ok)| !ok)
                .map(|(c, _)| c)
        };
        if let Some(bad) = not_okay {
            let trace = reconstruct(bad, &parents);
            return ExploreReport {
                states_visited: visited.len(),
                max_depth_reached,
                verdict: ExploreVerdict::NotOkay { trace },
                terminals,
            };
        }
        if depth >= config.max_steps || frontier.is_empty() {
            return ExploreReport {
                states_visited: visited.len(),
                max_depth_reached,
                verdict: ExploreVerdict::SafeUpToDepth,
                terminals,
            };
        }
        // expand one layer
        let expansions: Vec<Vec<(StepLabel, Configuration)>> =
            pool.install(|| frontier.par_iter().map(step_labeled).collect());
        let mut next = Vec::new();
        for (parent, succs) in frontier.iter().zip(expansions) {
            if succs.is_empty() {
                terminals.push(parent.clone());
                continue;
            }
            for (label, succ) in succs {
                if visited.insert(succ.clone()) {
                    parents.insert(
                        succ.clone(),
                        (parent.clone(), TraceStep::new(&label, &succ)),
                    );
                    next.push(succ);
                }
            }
            if visited.len() > config.max_states {
                return ExploreReport {
                    states_visited: visited.len(),
                    max_depth_reached,
                    verdict: ExploreVerdict::ExhaustedBudget,
                    terminals,
                };
            }
        }
        depth += 1;
        if !next.is_empty() {
            max_depth_reached = depth;
        }
        frontier = next;
    }
}

fn reconstruct(
    bad: &Configuration,
    parents: &HashMap<Configuration, (Configuration, TraceStep)>,
) -> Vec<TraceStep> {
    let mut trace = Vec::new();
    let mut cur = bad;
    while let Some((parent, step)) = parents.get(cur) {
        trace.push(step.clone());
        cur = parent;
    }
    trace.reverse();
    trace
}

/// The set of configurations reachable in at most `max_steps` steps.
/// Used by audits that re-check closure of the explored state set.
pub fn reachable_states(cfg: &Configuration, max_steps: usize) -> HashSet<Configuration> {
    let mut visited: HashSet<Configuration> = HashSet::new();
    visited.insert(cfg.clone());
    let mut frontier = vec![cfg.clone()];
    for _ in 0..max_steps {
        let mut next = Vec::new();
        for c in &frontier {
            for (_, succ) in step_labeled(c) {
                if visited.insert(succ.clone()) {
                    next.push(succ);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    visited
}

/// Counts the distinct complete schedules (label sequences ending in a
/// configuration with no successors) reachable within `max_steps` steps.
pub fn count_interleavings(cfg: &Configuration, max_steps: usize) -> usize {
    let mut complete: HashSet<Vec<String>> = HashSet::new();
    let mut path: Vec<String> = Vec::new();
    fn dfs(
        cfg: &Configuration,
        budget: usize,
        path: &mut Vec<String>,
        complete: &mut HashSet<Vec<String>>,
    ) {
        let succs = step_labeled(cfg);
        if succs.is_empty() {
            complete.insert(path.clone());
            return;
        }
        if budget == 0 {
            return;
        }
        for (label, succ) in succs {
            path.push(trace_line(&label, &succ));
            dfs(&succ, budget - 1, path, complete);
            path.pop();
        }
    }
    dfs(cfg, max_steps, &mut path, &mut complete);
    complete.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::{Command, Expr, Instr};

    #[test]
    fn immediate_assert_failure_has_empty_witness() {
        let cfg = Configuration::initial(Command::Instr(Instr::AssertEq(
            Expr::IntLit(0),
            Expr::IntLit(1),
        )));
        let report = explore(&cfg, 4);
        match report.verdict {
            ExploreVerdict::NotOkay { trace } => assert!(trace.is_empty()),
            v => panic!("expected NotOkay, got {v:?}"),
        }
    }

    #[test]
    fn depth_zero_checks_only_the_initial_configuration() {
        let cfg = Configuration::initial(Command::Expr(Expr::IntLit(0)));
        let report = explore(&cfg, 0);
        assert!(report.is_safe());
        assert_eq!(report.states_visited, 1);

        let stuck = Configuration::initial(Command::Instr(Instr::Deref(Expr::IntLit(0))));
        assert!(!explore(&stuck, 0).is_safe());
    }
}
