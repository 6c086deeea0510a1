//! Chunks and logical heaps with exact rational coefficients.

use super::fraction::Fraction;
use super::value::GhostValue;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// The six chunk forms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chunk {
    PointsTo(GhostValue, GhostValue),
    GhostPointsTo(GhostValue, GhostValue),
    AtomicSpace(GhostValue, GhostValue),
    LemType(GhostValue, String, Vec<GhostValue>),
    AtomicSpaces(GhostValue),
    Heap(GhostValue),
}

impl Chunk {
    pub fn points_to(addr: i64, val: i64) -> Self {
        Chunk::PointsTo(GhostValue::Int(addr), GhostValue::Int(val))
    }

    pub fn ghost_points_to(addr: i64, val: GhostValue) -> Self {
        Chunk::GhostPointsTo(GhostValue::Int(addr), val)
    }
}

impl fmt::Display for Chunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chunk::PointsTo(a, v) => write!(f, "{a} |-> {v}"),
            Chunk::GhostPointsTo(a, v) => write!(f, "{a} |->g {v}"),
            Chunk::AtomicSpace(n, i) => write!(f, "atomic_space({n}, {i})"),
            Chunk::LemType(v, t, args) => {
                write!(f, "{v} : {t}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Chunk::AtomicSpaces(s) => write!(f, "atomic_spaces({s})"),
            Chunk::Heap(h) => write!(f, "heap({h})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("insufficient coefficient for chunk `{chunk}`: have {have}, need {need}")]
pub struct InsufficientError {
    pub chunk: Chunk,
    pub have: Fraction,
    pub need: Fraction,
}

/// A finitely supported map from chunks to nonnegative rational
/// coefficients. Zero-coefficient entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogicalHeap {
    entries: BTreeMap<Chunk, Fraction>,
}

impl LogicalHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(chunk: Chunk, coeff: Fraction) -> Self {
        let mut h = Self::new();
        h.insert(chunk, coeff);
        h
    }

    /// Adds `coeff` to the chunk's coefficient, keeping the support
    /// normalized.
    pub fn insert(&mut self, chunk: Chunk, coeff: Fraction) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.entries.entry(chunk).or_insert_with(Fraction::zero);
        *entry = entry.add(coeff);
    }

    pub fn coeff(&self, chunk: &Chunk) -> Fraction {
        self.entries
            .get(chunk)
            .copied()
            .unwrap_or_else(Fraction::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Chunk, &Fraction)> {
        self.entries.iter()
    }

    /// Pointwise sum; support is the union of supports.
    pub fn add(&self, other: &LogicalHeap) -> LogicalHeap {
        let mut out = self.clone();
        for (c, f) in other.iter() {
            out.insert(c.clone(), *f);
        }
        out
    }

    /// True iff this heap's coefficient dominates `other`'s on every chunk.
    pub fn geq(&self, other: &LogicalHeap) -> bool {
        other.iter().all(|(c, need)| self.coeff(c) >= *need)
    }

    /// Pointwise difference. Fails on the first deficient chunk.
    #[allow(clippy::result_large_err)] // the error names the chunk, by contract
    pub fn sub(&self, other: &LogicalHeap) -> Result<LogicalHeap, InsufficientError> {
        let mut out = self.clone();
        for (c, need) in other.iter() {
            let have = out.coeff(c);
            match have.sub(*need) {
                Some(rest) => {
                    if rest.is_zero() {
                        out.entries.remove(c);
                    } else {
                        out.entries.insert(c.clone(), rest);
                    }
                }
                None => {
                    return Err(InsufficientError {
                        chunk: c.clone(),
                        have,
                        need: *need,
                    })
                }
            }
        }
        Ok(out)
    }

    /// Weak consistency: no points-to or ghost points-to chunk has a
    /// coefficient above 1, and no address carries two different stored
    /// values in the same (points-to or ghost points-to) family.
    ///
    /// Atomic space coefficients are deliberately unbounded: several atomic
    /// spaces may share a name and invariant.
    pub fn wok(&self) -> bool {
        let mut pt: BTreeMap<&GhostValue, &GhostValue> = BTreeMap::new();
        let mut gpt: BTreeMap<&GhostValue, &GhostValue> = BTreeMap::new();
        for (c, f) in self.iter() {
            match c {
                Chunk::PointsTo(a, v) => {
                    if *f > Fraction::one() {
                        return false;
                    }
                    if let Some(prev) = pt.insert(a, v) {
                        if prev != v {
                            return false;
                        }
                    }
                }
                Chunk::GhostPointsTo(a, v) => {
                    if *f > Fraction::one() {
                        return false;
                    }
                    if let Some(prev) = gpt.insert(a, v) {
                        if prev != v {
                            return false;
                        }
                    }
                }
                _ => {}
            }
        }
        true
    }

    /// Canonical dump: one `coeff chunk` line per entry, sorted.
    pub fn dump_lines(&self) -> Vec<String> {
        self.iter().map(|(c, f)| format!("{f} {c}")).collect()
    }

    /// Walks the internal representation checking that no zero coefficient
    /// is stored. Used by tests.
    pub fn support_normalized(&self) -> bool {
        self.entries.values().all(|f| !f.is_zero())
    }
}

impl FromIterator<(Chunk, Fraction)> for LogicalHeap {
    fn from_iter<T: IntoIterator<Item = (Chunk, Fraction)>>(iter: T) -> Self {
        let mut h = LogicalHeap::new();
        for (c, f) in iter {
            h.insert(c, f);
        }
        h
    }
}

impl fmt::Display for LogicalHeap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "emp");
        }
        for (i, line) in self.dump_lines().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Fraction {
        Fraction::half()
    }

    #[test]
    fn add_merges_coefficients() {
        // {x |-> 0 @ 1/2} + {x |-> 0 @ 1/2} = {x |-> 0 @ 1}
        let a = LogicalHeap::singleton(Chunk::points_to(0, 0), half());
        let b = LogicalHeap::singleton(Chunk::points_to(0, 0), half());
        let sum = a.add(&b);
        assert_eq!(sum.coeff(&Chunk::points_to(0, 0)), Fraction::one());
        assert_eq!(sum.len(), 1);
    }

    #[test]
    fn add_identity() {
        let a = LogicalHeap::singleton(Chunk::points_to(1, 5), half());
        assert_eq!(a.add(&LogicalHeap::new()), a);
    }

    #[test]
    fn geq_examples() {
        let one = LogicalHeap::singleton(Chunk::points_to(0, 0), Fraction::one());
        let h = LogicalHeap::singleton(Chunk::points_to(0, 0), half());
        assert!(one.geq(&h));
        assert!(!h.geq(&one));
        assert!(h.geq(&LogicalHeap::new()));
    }

    #[test]
    fn sub_examples() {
        let one = LogicalHeap::singleton(Chunk::points_to(0, 0), Fraction::one());
        let h = LogicalHeap::singleton(Chunk::points_to(0, 0), half());
        assert_eq!(one.sub(&h).unwrap(), h);
        assert!(LogicalHeap::new().sub(&h).is_err());
        let g = LogicalHeap::singleton(
            Chunk::ghost_points_to(1, GhostValue::Int(0)),
            Fraction::one(),
        );
        assert!(g.sub(&g).unwrap().is_empty());
    }

    #[test]
    fn wok_examples() {
        let merged = LogicalHeap::singleton(Chunk::points_to(0, 0), Fraction::one());
        assert!(merged.wok());
        let over = LogicalHeap::singleton(Chunk::points_to(0, 0), Fraction::new(3, 2).unwrap());
        assert!(!over.wok());
        let mut conflict = LogicalHeap::new();
        conflict.insert(Chunk::points_to(0, 0), half());
        conflict.insert(Chunk::points_to(0, 1), half());
        assert!(!conflict.wok());
        // atomic space coefficients above 1 are fine
        let spaces = LogicalHeap::singleton(
            Chunk::AtomicSpace(GhostValue::Unit, GhostValue::Int(0)),
            Fraction::new(3, 1).unwrap(),
        );
        assert!(spaces.wok());
    }
}
