//! Small-step operational semantics of the erased language.

use crate::syntax::ast::{Command, Expr, Instr};
use crate::syntax::subst::subst_command;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A physical heap: a finite partial map from nonnegative addresses to
/// integer values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhysHeap(BTreeMap<i64, i64>);

impl PhysHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, addr: i64) -> Option<i64> {
        self.0.get(&addr).copied()
    }

    pub fn set(&mut self, addr: i64, v: i64) {
        self.0.insert(addr, v);
    }

    pub fn contains(&self, addr: i64) -> bool {
        self.0.contains_key(&addr)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &i64)> {
        self.0.iter()
    }

    /// The least address not in the domain.
    pub fn least_free_addr(&self) -> i64 {
        let mut expected = 0i64;
        for k in self.0.keys() {
            if *k < 0 {
                continue;
            }
            if *k != expected {
                break;
            }
            expected += 1;
        }
        expected
    }
}

impl FromIterator<(i64, i64)> for PhysHeap {
    fn from_iter<T: IntoIterator<Item = (i64, i64)>>(iter: T) -> Self {
        PhysHeap(iter.into_iter().collect())
    }
}

impl fmt::Display for PhysHeap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a} -> {v}")?;
        }
        write!(f, "}}")
    }
}

/// A configuration: a heap paired with a (ghost-free) command.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub heap: PhysHeap,
    pub cmd: Command,
}

impl Configuration {
    pub fn new(heap: PhysHeap, cmd: Command) -> Self {
        Configuration { heap, cmd }
    }

    pub fn initial(cmd: Command) -> Self {
        Configuration {
            heap: PhysHeap::new(),
            cmd,
        }
    }

    pub fn finished(&self) -> bool {
        self.cmd.is_value()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            self.heap,
            crate::syntax::command_to_string(&self.cmd)
        )
    }
}

/// Where in the command tree a step happened.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathSeg {
    LetHead,
    ParL,
    ParR,
}

impl fmt::Display for PathSeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathSeg::LetHead => write!(f, "let"),
            PathSeg::ParL => write!(f, "parL"),
            PathSeg::ParR => write!(f, "parR"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepLabel {
    pub path: Vec<PathSeg>,
    pub rule: &'static str,
}

impl StepLabel {
    pub fn path_string(&self) -> String {
        let mut s = String::from("main");
        for seg in &self.path {
            s.push('.');
            s.push_str(&seg.to_string());
        }
        s
    }
}

/// One line of the trace format: `<thread-path> : <rule-name> : <heap-after>`.
pub fn trace_line(label: &StepLabel, after: &Configuration) -> String {
    format!("{} : {} : {}", label.path_string(), label.rule, after.heap)
}

/// All successors of a configuration, labeled with the position and the
/// rule that produced each one. The order is deterministic: instruction
/// rules first, then left-branch steps before right-branch steps.
pub fn step_labeled(cfg: &Configuration) -> Vec<(StepLabel, Configuration)> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    step_rec(&cfg.heap, &cfg.cmd, &mut path, &mut out);
    out
}

/// The successor set of a configuration. Stuck non-values have an empty
/// successor set; stuckness is represented, never thrown.
pub fn step(cfg: &Configuration) -> BTreeSet<Configuration> {
    step_labeled(cfg).into_iter().map(|(_, c)| c).collect()
}

fn step_rec(
    h: &PhysHeap,
    c: &Command,
    path: &mut Vec<PathSeg>,
    out: &mut Vec<(StepLabel, Configuration)>,
) {
    match c {
        Command::Expr(_) => {}
        Command::Instr(i) => {
            if let Some((rule, h2, v)) = step_instr(h, i) {
                out.push((
                    StepLabel {
                        path: path.clone(),
                        rule,
                    },
                    Configuration::new(h2, Command::Expr(Expr::IntLit(v))),
                ));
            }
        }
        Command::Let(x, rhs, body) => {
            if let Some(v) = rhs.value() {
                let next = subst_command(body, &BTreeMap::from([(x.clone(), v)]));
                out.push((
                    StepLabel {
                        path: path.clone(),
                        rule: "let",
                    },
                    Configuration::new(h.clone(), next),
                ));
            } else {
                path.push(PathSeg::LetHead);
                let mut inner = Vec::new();
                step_rec(h, rhs, path, &mut inner);
                path.pop();
                for (label, succ) in inner {
                    out.push((
                        label,
                        Configuration::new(
                            succ.heap,
                            Command::Let(x.clone(), Box::new(succ.cmd), body.clone()),
                        ),
                    ));
                }
            }
        }
        Command::Par(l, r) => {
            if l.is_value() && r.is_value() {
                out.push((
                    StepLabel {
                        path: path.clone(),
                        rule: "join",
                    },
                    Configuration::new(h.clone(), Command::Expr(Expr::IntLit(0))),
                ));
                return;
            }
            path.push(PathSeg::ParL);
            let mut left = Vec::new();
            step_rec(h, l, path, &mut left);
            path.pop();
            for (label, succ) in left {
                out.push((
                    label,
                    Configuration::new(succ.heap, Command::Par(Box::new(succ.cmd), r.clone())),
                ));
            }
            path.push(PathSeg::ParR);
            let mut right = Vec::new();
            step_rec(h, r, path, &mut right);
            path.pop();
            for (label, succ) in right {
                out.push((
                    label,
                    Configuration::new(succ.heap, Command::Par(l.clone(), Box::new(succ.cmd))),
                ));
            }
        }
    }
}

fn step_instr(h: &PhysHeap, i: &Instr) -> Option<(&'static str, PhysHeap, i64)> {
    match i {
        Instr::Cons(e) => {
            let v = e.as_int()?;
            let addr = h.least_free_addr();
            let mut h2 = h.clone();
            h2.set(addr, v);
            Some(("cons", h2, addr))
        }
        Instr::Faa(a, z) => {
            let addr = a.as_int()?;
            let z = z.as_int()?;
            let old = h.get(addr)?;
            let mut h2 = h.clone();
            h2.set(addr, old.wrapping_add(z));
            Some(("faa", h2, old))
        }
        Instr::Deref(e) => {
            let addr = e.as_int()?;
            let v = h.get(addr)?;
            Some(("deref", h.clone(), v))
        }
        Instr::AssertEq(a, b) => {
            let x = a.as_int()?;
            let y = b.as_int()?;
            if x == y {
                Some(("assert", h.clone(), 0))
            } else {
                None
            }
        }
    }
}

/// The multiset of threads of a command.
pub fn thrds(c: &Command) -> Vec<&Command> {
    match c {
        Command::Let(_, rhs, _) => thrds(rhs),
        Command::Par(l, r) => {
            let mut out = thrds(l);
            out.extend(thrds(r));
            out
        }
        _ => vec![c],
    }
}

/// A configuration is okay when every thread is finished or reducible in
/// the current heap.
pub fn okay(cfg: &Configuration) -> bool {
    thrds(&cfg.cmd).into_iter().all(|t| {
        t.is_value() || {
            let sub = Configuration::new(cfg.heap.clone(), t.clone());
            !step_labeled(&sub).is_empty()
        }
    })
}

/// Runs the deterministic leftmost schedule for at most `max_steps` steps.
/// Returns the final configuration and the trace taken.
pub fn run_leftmost(cfg: &Configuration, max_steps: usize) -> (Configuration, Vec<String>) {
    let mut cur = cfg.clone();
    let mut trace = Vec::new();
    for _ in 0..max_steps {
        let succs = step_labeled(&cur);
        match succs.into_iter().next() {
            Some((label, next)) => {
                trace.push(trace_line(&label, &next));
                cur = next;
            }
            None => break,
        }
    }
    (cur, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn faa(addr: i64, z: i64) -> Command {
        Command::Instr(Instr::Faa(Expr::IntLit(addr), Expr::IntLit(z)))
    }

    #[test]
    fn faa_returns_old_value() {
        let cfg = Configuration::new(PhysHeap::from_iter([(0, 0)]), faa(0, 1));
        let succs: Vec<_> = step(&cfg).into_iter().collect();
        assert_eq!(succs.len(), 1);
        assert_eq!(succs[0].heap.get(0), Some(1));
        assert_eq!(succs[0].cmd.value(), Some(0));
    }

    #[test]
    fn assert_steps_only_on_equal_values() {
        let h = PhysHeap::new();
        let ok = Configuration::new(
            h.clone(),
            Command::Instr(Instr::AssertEq(Expr::IntLit(2), Expr::IntLit(2))),
        );
        let succs: Vec<_> = step(&ok).into_iter().collect();
        assert_eq!(succs.len(), 1);
        assert_eq!(succs[0].cmd.value(), Some(0));

        let stuck = Configuration::new(
            h,
            Command::Instr(Instr::AssertEq(Expr::IntLit(1), Expr::IntLit(2))),
        );
        assert!(step(&stuck).is_empty());
    }

    #[test]
    fn par_of_values_joins_to_zero() {
        let cfg = Configuration::new(
            PhysHeap::new(),
            Command::Par(
                Box::new(Command::Expr(Expr::IntLit(3))),
                Box::new(Command::Expr(Expr::IntLit(5))),
            ),
        );
        let succs: Vec<_> = step(&cfg).into_iter().collect();
        assert_eq!(succs.len(), 1);
        assert_eq!(succs[0].cmd.value(), Some(0));
    }

    #[test]
    fn par_congruence_gives_two_successors() {
        let cfg = Configuration::new(
            PhysHeap::from_iter([(0, 0)]),
            Command::Let(
                "x".into(),
                Box::new(Command::Par(Box::new(faa(0, 1)), Box::new(faa(0, 1)))),
                Box::new(Command::Expr(Expr::Var("x".into()))),
            ),
        );
        assert_eq!(step(&cfg).len(), 2);
    }

    #[test]
    fn thrds_cases() {
        let c = Command::Let(
            "x".into(),
            Box::new(Command::Par(
                Box::new(Command::Expr(Expr::IntLit(1))),
                Box::new(Command::Expr(Expr::IntLit(2))),
            )),
            Box::new(Command::Expr(Expr::IntLit(9))),
        );
        // thrds(let x = (1 || 2) in 9) = thrds(1 || 2) = {|1, 2|}
        let ts = thrds(&c);
        assert_eq!(ts.len(), 2);
        let f = faa(0, 1);
        assert_eq!(thrds(&f), vec![&f]);
    }

    #[test]
    fn okay_examples() {
        // ({}, 0) is finished
        assert!(okay(&Configuration::initial(Command::Expr(Expr::IntLit(
            0
        )))));
        // ({}, *0) is stuck: address 0 unallocated
        assert!(!okay(&Configuration::initial(Command::Instr(
            Instr::Deref(Expr::IntLit(0))
        ))));
        // ({l: 2}, assert 1 == 2) is stuck
        assert!(!okay(&Configuration::new(
            PhysHeap::from_iter([(0, 2)]),
            Command::Instr(Instr::AssertEq(Expr::IntLit(1), Expr::IntLit(2)))
        )));
    }

    #[test]
    fn cons_allocates_least_free_address() {
        let h = PhysHeap::from_iter([(0, 7), (1, 8), (3, 9)]);
        assert_eq!(h.least_free_addr(), 2);
        let cfg = Configuration::new(h, Command::Instr(Instr::Cons(Expr::IntLit(5))));
        let succs: Vec<_> = step(&cfg).into_iter().collect();
        assert_eq!(succs[0].cmd.value(), Some(2));
        assert_eq!(succs[0].heap.get(2), Some(5));
    }
}
