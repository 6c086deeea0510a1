//! Symbolic heaps and symbolic states.

use super::pc::{Entails, PathCondition};
use super::term::{SymTable, SymTerm};
use crate::heap::Fraction;
use std::collections::{BTreeMap, BTreeSet};

/// Chunks over symbolic terms.
///
/// `PredApp` is the one form beyond the ground chunk grammar: an opaque
/// application of an abstract predicate value. Ground satisfaction unfolds
/// every predicate application, but a symbolic run must keep `P()` for an
/// unknown `P` as a resource of its own.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymChunk {
    PointsTo(SymTerm, SymTerm),
    GhostPointsTo(SymTerm, SymTerm),
    AtomicSpace(SymTerm, SymTerm),
    LemType(SymTerm, String, Vec<SymTerm>),
    AtomicSpaces(SymTerm),
    Heap(SymTerm),
    PredApp(SymTerm),
}

impl SymChunk {
    pub fn show(&self, syms: &SymTable) -> String {
        match self {
            SymChunk::PointsTo(a, v) => format!("{} |-> {}", syms.show(a), syms.show(v)),
            SymChunk::GhostPointsTo(a, v) => {
                format!("{} |->g {}", syms.show(a), syms.show(v))
            }
            SymChunk::AtomicSpace(n, i) => {
                format!("atomic_space({}, {})", syms.show(n), syms.show(i))
            }
            SymChunk::LemType(v, t, args) => {
                let args = args.iter().map(|a| syms.show(a)).collect::<Vec<_>>();
                format!("{} : {t}({})", syms.show(v), args.join(", "))
            }
            SymChunk::AtomicSpaces(s) => format!("atomic_spaces({})", syms.show(s)),
            SymChunk::Heap(h) => format!("heap({})", syms.show(h)),
            SymChunk::PredApp(p) => format!("{}()", syms.show(p)),
        }
    }

    fn normalize(&self, pc: &PathCondition) -> SymChunk {
        match self {
            SymChunk::PointsTo(a, v) => SymChunk::PointsTo(pc.normalize(a), pc.normalize(v)),
            SymChunk::GhostPointsTo(a, v) => {
                SymChunk::GhostPointsTo(pc.normalize(a), pc.normalize(v))
            }
            SymChunk::AtomicSpace(n, i) => SymChunk::AtomicSpace(pc.normalize(n), pc.normalize(i)),
            SymChunk::LemType(v, t, args) => SymChunk::LemType(
                pc.normalize(v),
                t.clone(),
                args.iter().map(|a| pc.normalize(a)).collect(),
            ),
            SymChunk::AtomicSpaces(s) => SymChunk::AtomicSpaces(pc.normalize(s)),
            SymChunk::Heap(h) => SymChunk::Heap(pc.normalize(h)),
            SymChunk::PredApp(p) => SymChunk::PredApp(pc.normalize(p)),
        }
    }

    /// Componentwise definite equality under the path condition.
    pub fn certainly_equal(&self, other: &SymChunk, pc: &PathCondition) -> bool {
        fn eq(pc: &PathCondition, a: &SymTerm, b: &SymTerm) -> bool {
            pc.entails_eq(a, b) == Entails::Yes
        }
        match (self, other) {
            (SymChunk::PointsTo(a, v), SymChunk::PointsTo(b, w))
            | (SymChunk::GhostPointsTo(a, v), SymChunk::GhostPointsTo(b, w))
            | (SymChunk::AtomicSpace(a, v), SymChunk::AtomicSpace(b, w)) => {
                eq(pc, a, b) && eq(pc, v, w)
            }
            (SymChunk::LemType(v, t, xs), SymChunk::LemType(w, u, ys)) => {
                t == u
                    && xs.len() == ys.len()
                    && eq(pc, v, w)
                    && xs.iter().zip(ys).all(|(x, y)| eq(pc, x, y))
            }
            (SymChunk::AtomicSpaces(a), SymChunk::AtomicSpaces(b))
            | (SymChunk::Heap(a), SymChunk::Heap(b))
            | (SymChunk::PredApp(a), SymChunk::PredApp(b)) => eq(pc, a, b),
            _ => false,
        }
    }
}

/// A multiset of symbolic chunks with positive rational coefficients.
#[derive(Clone, Debug, Default)]
pub struct SymHeap {
    entries: Vec<(SymChunk, Fraction)>,
}

impl SymHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SymChunk, Fraction)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> &(SymChunk, Fraction) {
        &self.entries[i]
    }

    /// Adds a chunk. Merges with an existing entry when the whole chunk is
    /// certainly equal under the path condition. For points-to chunks the
    /// caller performs the weak-consistency value matching first, so plain
    /// merging suffices here.
    pub fn add(&mut self, chunk: SymChunk, coeff: Fraction, pc: &PathCondition) {
        if coeff.is_zero() {
            return;
        }
        let chunk = chunk.normalize(pc);
        for (c, f) in self.entries.iter_mut() {
            if c.certainly_equal(&chunk, pc) {
                *f = f.add(coeff);
                return;
            }
        }
        self.entries.push((chunk, coeff));
    }

    pub fn remove_at(&mut self, i: usize, coeff: Fraction) -> Option<()> {
        let rest = self.entries[i].1.sub(coeff)?;
        if rest.is_zero() {
            self.entries.remove(i);
        } else {
            self.entries[i].1 = rest;
        }
        Some(())
    }

    pub fn set_chunk_at(&mut self, i: usize, chunk: SymChunk) {
        self.entries[i].0 = chunk;
    }

    pub fn indices_of<F: Fn(&SymChunk) -> bool>(&self, pred: F) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| pred(c))
            .map(|(i, _)| i)
            .collect()
    }

    /// Re-normalizes all entries and re-merges; used after new bindings
    /// appear in the path condition.
    pub fn renormalize(&mut self, pc: &PathCondition) {
        let entries = std::mem::take(&mut self.entries);
        for (c, f) in entries {
            self.add(c, f, pc);
        }
    }

    /// Canonical dump: one `coeff chunk` line per entry, sorted.
    pub fn dump(&self, pc: &PathCondition, syms: &SymTable) -> Vec<String> {
        let mut lines: Vec<String> = self
            .entries
            .iter()
            .map(|(c, f)| format!("{f} {}", c.normalize(pc).show(syms)))
            .collect();
        lines.sort();
        lines
    }

    /// Number of lemma-type chunk entries (for the linearity audit).
    pub fn lemtype_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|(c, _)| matches!(c, SymChunk::LemType(..)))
            .count()
    }

    /// Total coefficient of points-to chunks whose address is certainly
    /// equal to `addr` (for the fraction-conservation audit).
    pub fn points_to_total(&self, addr: &SymTerm, pc: &PathCondition) -> Fraction {
        let mut total = Fraction::zero();
        for (c, f) in &self.entries {
            if let SymChunk::PointsTo(a, _) = c {
                if pc.entails_eq(a, addr) == Entails::Yes {
                    total = total.add(*f);
                }
            }
        }
        total
    }
}

/// Variable environment mapping each namespace to symbolic terms.
#[derive(Clone, Debug, Default)]
pub struct SymEnv {
    pub prog: BTreeMap<String, SymTerm>,
    pub ghost: BTreeMap<String, SymTerm>,
}

impl SymEnv {
    pub fn new() -> Self {
        Self::default()
    }
}

/// A symbolic state: path condition, symbolic heap, environment, and the
/// set of atomic spaces opened in the current ghost context (a mirror of
/// the `atomic_spaces` chunk for reporting).
#[derive(Clone, Debug, Default)]
pub struct SymbolicState {
    pub pc: PathCondition,
    pub heap: SymHeap,
    pub env: SymEnv,
    pub opened: BTreeSet<SymTerm>,
}

impl SymbolicState {
    pub fn new() -> Self {
        Self::default()
    }
}
