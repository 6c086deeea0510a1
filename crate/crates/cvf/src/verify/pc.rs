//! Path conditions and the entailment procedure.
//!
//! The decision procedure is sound but incomplete: `Yes` and `No` are
//! definite, `Unknown` propagates to the caller as a verification failure
//! with a "cannot decide" diagnostic. It combines a triangular substitution
//! for solved symbol equalities, normalization of integer linear sums,
//! ground evaluation of set and constructor operations, and structural
//! decomposition.

use super::term::{lin_representable, lin_to_term, linearize, SymId, SymTerm};
use crate::heap::GhostValue;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fact {
    Eq(SymTerm, SymTerm),
    Neq(SymTerm, SymTerm),
    In(SymTerm, SymTerm),
    NotIn(SymTerm, SymTerm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entails {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, Default)]
pub struct PathCondition {
    bindings: BTreeMap<SymId, SymTerm>,
    facts: Vec<Fact>,
    inconsistent: bool,
}

impl PathCondition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn set_inconsistent(&mut self) {
        self.inconsistent = true;
    }

    pub fn binding(&self, id: SymId) -> Option<&SymTerm> {
        self.bindings.get(&id)
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    /// How many symbols are solved; used to detect whether a unification
    /// attempt introduced new bindings.
    pub fn bindings_len(&self) -> usize {
        self.bindings.len()
    }

    /// Applies the solved bindings and folds ground operations.
    pub fn normalize(&self, t: &SymTerm) -> SymTerm {
        match t {
            SymTerm::Lit(_) => t.clone(),
            SymTerm::Sym(id) => match self.bindings.get(id) {
                Some(b) => self.normalize(b),
                None => t.clone(),
            },
            SymTerm::Add(_, _) => {
                let na = self.normalize_children_add(t);
                match linearize(&na) {
                    Some(l) if lin_representable(&l) => lin_to_term(&l),
                    _ => na,
                }
            }
            SymTerm::Pair(a, b) => {
                let (na, nb) = (self.normalize(a), self.normalize(b));
                match (&na, &nb) {
                    (SymTerm::Lit(x), SymTerm::Lit(y)) => {
                        SymTerm::Lit(GhostValue::pair(x.clone(), y.clone()))
                    }
                    _ => SymTerm::pair(na, nb),
                }
            }
            SymTerm::Singleton(a) => {
                let na = self.normalize(a);
                match &na {
                    SymTerm::Lit(v) => SymTerm::Lit(GhostValue::set([v.clone()])),
                    _ => SymTerm::Singleton(Box::new(na)),
                }
            }
            SymTerm::Union(a, b) => {
                let (na, nb) = (self.normalize(a), self.normalize(b));
                match (&na, &nb) {
                    (SymTerm::Lit(GhostValue::FinSet(x)), SymTerm::Lit(GhostValue::FinSet(y))) => {
                        let mut s = x.clone();
                        s.extend(y.iter().cloned());
                        SymTerm::Lit(GhostValue::FinSet(s))
                    }
                    (SymTerm::Lit(GhostValue::FinSet(x)), _) if x.is_empty() => nb,
                    (_, SymTerm::Lit(GhostValue::FinSet(y))) if y.is_empty() => na,
                    _ => SymTerm::Union(Box::new(na), Box::new(nb)),
                }
            }
            SymTerm::Diff(a, b) => {
                let (na, nb) = (self.normalize(a), self.normalize(b));
                match (&na, &nb) {
                    (SymTerm::Lit(GhostValue::FinSet(x)), SymTerm::Lit(GhostValue::FinSet(y))) => {
                        SymTerm::Lit(GhostValue::FinSet(x.difference(y).cloned().collect()))
                    }
                    (SymTerm::Lit(GhostValue::FinSet(x)), _) if x.is_empty() => {
                        SymTerm::empty_set()
                    }
                    (_, SymTerm::Lit(GhostValue::FinSet(y))) if y.is_empty() => na,
                    // set difference of syntactically equal sets is empty
                    _ if na == nb => SymTerm::empty_set(),
                    (SymTerm::Singleton(x), SymTerm::Singleton(y)) if x == y => {
                        SymTerm::empty_set()
                    }
                    _ => SymTerm::Diff(Box::new(na), Box::new(nb)),
                }
            }
            SymTerm::PredCtorApp(p, args) => {
                let nargs: Vec<SymTerm> = args.iter().map(|a| self.normalize(a)).collect();
                if nargs.iter().all(|a| a.is_ground()) {
                    let vals = nargs
                        .iter()
                        .map(|a| match a {
                            SymTerm::Lit(v) => v.clone(),
                            _ => unreachable!(),
                        })
                        .collect();
                    SymTerm::Lit(GhostValue::PredVal(p.clone(), vals))
                } else {
                    SymTerm::PredCtorApp(p.clone(), nargs)
                }
            }
            SymTerm::LemVal(l) => {
                let mut nl = (**l).clone();
                for v in nl.captured_prog.values_mut() {
                    *v = self.normalize(v);
                }
                for v in nl.captured_ghost.values_mut() {
                    *v = self.normalize(v);
                }
                match nl.to_ground() {
                    Some(ground) => SymTerm::Lit(GhostValue::LemVal(Box::new(ground))),
                    None => SymTerm::LemVal(Box::new(nl)),
                }
            }
        }
    }

    fn normalize_children_add(&self, t: &SymTerm) -> SymTerm {
        match t {
            SymTerm::Add(a, b) => {
                SymTerm::Add(Box::new(self.normalize(a)), Box::new(self.normalize(b)))
            }
            _ => self.normalize(t),
        }
    }

    /// Assumes an equality, solving for symbols where possible.
    /// Contradictory ground equalities mark the path condition
    /// inconsistent (the branch becomes vacuous).
    pub fn assume_eq(&mut self, a: &SymTerm, b: &SymTerm) {
        let (na, nb) = (self.normalize(a), self.normalize(b));
        if na == nb {
            return;
        }
        match (&na, &nb) {
            (SymTerm::Sym(id), other) | (other, SymTerm::Sym(id)) => {
                if other.contains_sym(*id) {
                    self.facts.push(Fact::Eq(na.clone(), nb.clone()));
                } else {
                    self.bindings.insert(*id, other.clone());
                }
            }
            (SymTerm::Lit(_), SymTerm::Lit(_)) => {
                self.inconsistent = true;
            }
            (SymTerm::Pair(a1, a2), SymTerm::Pair(b1, b2)) => {
                self.assume_eq(a1, b1);
                self.assume_eq(a2, b2);
            }
            (SymTerm::Pair(a1, a2), SymTerm::Lit(GhostValue::Pair(b1, b2)))
            | (SymTerm::Lit(GhostValue::Pair(b1, b2)), SymTerm::Pair(a1, a2)) => {
                self.assume_eq(a1, &SymTerm::Lit((**b1).clone()));
                self.assume_eq(a2, &SymTerm::Lit((**b2).clone()));
            }
            (SymTerm::PredCtorApp(p, xs), SymTerm::PredCtorApp(q, ys))
                if p == q && xs.len() == ys.len() =>
            {
                for (x, y) in xs.iter().zip(ys) {
                    self.assume_eq(x, y);
                }
            }
            (SymTerm::PredCtorApp(p, xs), SymTerm::Lit(GhostValue::PredVal(q, ys)))
            | (SymTerm::Lit(GhostValue::PredVal(q, ys)), SymTerm::PredCtorApp(p, xs))
                if p == q && xs.len() == ys.len() =>
            {
                for (x, y) in xs.iter().zip(ys) {
                    self.assume_eq(x, &SymTerm::Lit(y.clone()));
                }
            }
            _ => {
                // try the linear route
                if let (Some(la), Some(lb)) = (linearize(&na), linearize(&nb)) {
                    let d = la.sub(&lb);
                    if d.is_zero() {
                        return;
                    }
                    if d.atoms.is_empty() {
                        self.inconsistent = true;
                        return;
                    }
                    if d.atoms.len() == 1 {
                        let (atom, k) = d.atoms.iter().next().unwrap();
                        let solvable = (*k == 1 || *k == -1)
                            && d.constant % (*k as i128) == 0
                            && i64::try_from(-d.constant / (*k as i128)).is_ok();
                        if solvable {
                            let solved =
                                SymTerm::int(i64::try_from(-d.constant / (*k as i128)).unwrap());
                            if let SymTerm::Sym(id) = atom {
                                if !solved.contains_sym(*id) {
                                    self.bindings.insert(*id, solved);
                                    return;
                                }
                            } else {
                                let atom = atom.clone();
                                self.assume_eq(&atom, &solved);
                                return;
                            }
                        }
                    }
                }
                self.facts.push(Fact::Eq(na, nb));
            }
        }
    }

    pub fn assume_fact(&mut self, f: Fact) {
        match f {
            Fact::Eq(a, b) => self.assume_eq(&a, &b),
            other => self.facts.push(other),
        }
    }

    pub fn entails_eq(&self, a: &SymTerm, b: &SymTerm) -> Entails {
        if self.inconsistent {
            return Entails::Yes;
        }
        let (na, nb) = (self.normalize(a), self.normalize(b));
        if na == nb {
            return Entails::Yes;
        }
        if let (SymTerm::Lit(_), SymTerm::Lit(_)) = (&na, &nb) {
            return Entails::No;
        }
        if let (Some(la), Some(lb)) = (linearize(&na), linearize(&nb)) {
            let d = la.sub(&lb);
            if d.is_zero() {
                return Entails::Yes;
            }
            if d.atoms.is_empty() {
                return Entails::No;
            }
        }
        for f in &self.facts {
            if let Fact::Eq(x, y) = f {
                let (nx, ny) = (self.normalize(x), self.normalize(y));
                if (nx == na && ny == nb) || (nx == nb && ny == na) {
                    return Entails::Yes;
                }
            }
        }
        Entails::Unknown
    }

    /// Decides `(elem) ∉ set` where the set is ground or built from
    /// singletons and unions of decidable elements.
    pub fn entails_not_in(&self, elem: &SymTerm, set: &SymTerm) -> Entails {
        if self.inconsistent {
            return Entails::Yes;
        }
        let ns = self.normalize(set);
        let ne = self.normalize(elem);
        let mut elems: Vec<SymTerm> = Vec::new();
        if !collect_set_elements(&ns, &mut elems) {
            for f in &self.facts {
                if let Fact::NotIn(x, y) = f {
                    if self.normalize(x) == ne && self.normalize(y) == ns {
                        return Entails::Yes;
                    }
                }
            }
            return Entails::Unknown;
        }
        let mut all_no = true;
        for x in &elems {
            match self.entails_eq(&ne, x) {
                Entails::Yes => return Entails::No,
                Entails::No => {}
                Entails::Unknown => all_no = false,
            }
        }
        if all_no {
            Entails::Yes
        } else {
            Entails::Unknown
        }
    }
}

/// Flattens a set-shaped term into element terms. Fails on opaque set
/// terms (symbols, differences).
fn collect_set_elements(t: &SymTerm, out: &mut Vec<SymTerm>) -> bool {
    match t {
        SymTerm::Lit(GhostValue::FinSet(s)) => {
            out.extend(s.iter().cloned().map(SymTerm::Lit));
            true
        }
        SymTerm::Singleton(x) => {
            out.push((**x).clone());
            true
        }
        SymTerm::Union(a, b) => collect_set_elements(a, out) && collect_set_elements(b, out),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_entailment() {
        // pc {v1 = 0, v2 = 0} |- v1 + v2 = 0
        let mut pc = PathCondition::new();
        pc.assume_eq(&SymTerm::Sym(0), &SymTerm::int(0));
        pc.assume_eq(&SymTerm::Sym(1), &SymTerm::int(0));
        let sum = SymTerm::Add(Box::new(SymTerm::Sym(0)), Box::new(SymTerm::Sym(1)));
        assert_eq!(pc.entails_eq(&sum, &SymTerm::int(0)), Entails::Yes);
    }

    #[test]
    fn unconstrained_symbol_is_unknown() {
        let pc = PathCondition::new();
        assert_eq!(
            pc.entails_eq(&SymTerm::Sym(0), &SymTerm::int(2)),
            Entails::Unknown
        );
    }

    #[test]
    fn ground_disequality_is_definite() {
        let pc = PathCondition::new();
        assert_eq!(
            pc.entails_eq(&SymTerm::int(1), &SymTerm::int(2)),
            Entails::No
        );
        // v + 1 = v is refutable by the linear route
        let v = SymTerm::Sym(3);
        let v1 = SymTerm::Add(Box::new(v.clone()), Box::new(SymTerm::int(1)));
        assert_eq!(pc.entails_eq(&v1, &v), Entails::No);
    }

    #[test]
    fn not_in_empty_set() {
        // pc {S = {}} |- (Nx, I) ∉ S
        let mut pc = PathCondition::new();
        pc.assume_eq(&SymTerm::Sym(0), &SymTerm::empty_set());
        let pair = SymTerm::pair(SymTerm::unit(), SymTerm::Sym(1));
        assert_eq!(pc.entails_not_in(&pair, &SymTerm::Sym(0)), Entails::Yes);
    }

    #[test]
    fn membership_in_singleton_is_definite_no() {
        let pc = PathCondition::new();
        let pair = SymTerm::pair(SymTerm::unit(), SymTerm::Sym(1));
        let set = SymTerm::Singleton(Box::new(pair.clone()));
        assert_eq!(pc.entails_not_in(&pair, &set), Entails::No);
    }

    #[test]
    fn diff_of_equal_singletons_normalizes_to_empty() {
        let pc = PathCondition::new();
        let pair = SymTerm::pair(SymTerm::unit(), SymTerm::Sym(1));
        let set = SymTerm::Singleton(Box::new(pair.clone()));
        let d = SymTerm::Diff(Box::new(set.clone()), Box::new(set.clone()));
        assert_eq!(pc.normalize(&d), SymTerm::empty_set());
        // removing a symbolic element from the empty set stays empty
        let d2 = SymTerm::Diff(Box::new(SymTerm::empty_set()), Box::new(set));
        assert_eq!(pc.normalize(&d2), SymTerm::empty_set());
    }

    #[test]
    fn linear_solving_binds_symbols() {
        // assume v + 1 = 3 solves v := 2
        let mut pc = PathCondition::new();
        let v = SymTerm::Sym(0);
        let lhs = SymTerm::Add(Box::new(v.clone()), Box::new(SymTerm::int(1)));
        pc.assume_eq(&lhs, &SymTerm::int(3));
        assert_eq!(pc.normalize(&v), SymTerm::int(2));
        assert!(!pc.is_inconsistent());
        pc.assume_eq(&v, &SymTerm::int(5));
        assert!(pc.is_inconsistent());
    }
}
