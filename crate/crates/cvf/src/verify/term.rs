//! Symbolic terms over ghost values.

use crate::heap::{GhostValue, GroundEnv, LemVal};
use crate::syntax::ast::InnerGhost;
use crate::syntax::subst::free_ghost_vars_inner;
use std::collections::{BTreeMap, BTreeSet};

pub type SymId = u32;

/// Symbolic terms: ground values, fresh symbols (modelling the universally
/// fixed values of the proof rules), and the ghost expression constructors
/// lifted over terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymTerm {
    Lit(GhostValue),
    Sym(SymId),
    Add(Box<SymTerm>, Box<SymTerm>),
    Pair(Box<SymTerm>, Box<SymTerm>),
    Singleton(Box<SymTerm>),
    Union(Box<SymTerm>, Box<SymTerm>),
    Diff(Box<SymTerm>, Box<SymTerm>),
    PredCtorApp(String, Vec<SymTerm>),
    LemVal(Box<SymLemVal>),
}

impl SymTerm {
    pub fn int(z: i64) -> Self {
        SymTerm::Lit(GhostValue::Int(z))
    }

    pub fn unit() -> Self {
        SymTerm::Lit(GhostValue::Unit)
    }

    pub fn empty_set() -> Self {
        SymTerm::Lit(GhostValue::FinSet(BTreeSet::new()))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, SymTerm::Lit(_))
    }

    pub fn pair(a: SymTerm, b: SymTerm) -> Self {
        SymTerm::Pair(Box::new(a), Box::new(b))
    }

    /// Collects the symbols occurring in the term.
    pub fn syms(&self, out: &mut BTreeSet<SymId>) {
        match self {
            SymTerm::Lit(_) => {}
            SymTerm::Sym(id) => {
                out.insert(*id);
            }
            SymTerm::Add(a, b)
            | SymTerm::Pair(a, b)
            | SymTerm::Union(a, b)
            | SymTerm::Diff(a, b) => {
                a.syms(out);
                b.syms(out);
            }
            SymTerm::Singleton(a) => a.syms(out),
            SymTerm::PredCtorApp(_, args) => {
                for a in args {
                    a.syms(out);
                }
            }
            SymTerm::LemVal(l) => {
                for t in l.captured_prog.values().chain(l.captured_ghost.values()) {
                    t.syms(out);
                }
            }
        }
    }

    pub fn contains_sym(&self, id: SymId) -> bool {
        let mut s = BTreeSet::new();
        self.syms(&mut s);
        s.contains(&id)
    }
}

/// A symbolic lemma value: a parameterized ghost command body plus the
/// captured environment for its free variables.
///
/// When every captured term is ground the closure collapses to a ground
/// `GhostValue::LemVal` during normalization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymLemVal {
    pub params: Vec<String>,
    pub body: InnerGhost,
    pub captured_prog: BTreeMap<String, SymTerm>,
    pub captured_ghost: BTreeMap<String, SymTerm>,
}

impl SymLemVal {
    /// Closes `body` over the given environments, restricting the capture
    /// to the body's free variables (minus the parameters).
    pub fn close(
        params: &[String],
        body: &InnerGhost,
        prog: &BTreeMap<String, SymTerm>,
        ghost: &BTreeMap<String, SymTerm>,
    ) -> Self {
        let mut free = BTreeSet::new();
        free_ghost_vars_inner(body, &mut free);
        for p in params {
            free.remove(p);
        }
        let captured_ghost: BTreeMap<String, SymTerm> = ghost
            .iter()
            .filter(|(k, _)| free.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut prog_free = BTreeSet::new();
        collect_prog_vars_inner(body, &mut prog_free);
        let captured_prog: BTreeMap<String, SymTerm> = prog
            .iter()
            .filter(|(k, _)| prog_free.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        SymLemVal {
            params: params.to_vec(),
            body: body.clone(),
            captured_prog,
            captured_ghost,
        }
    }

    /// Collapses to a ground lemma value when every captured term is a
    /// literal (program captures must be integers).
    pub fn to_ground(&self) -> Option<LemVal> {
        let mut env = GroundEnv::new();
        for (k, t) in &self.captured_prog {
            match t {
                SymTerm::Lit(GhostValue::Int(z)) => {
                    env.prog.insert(k.clone(), *z);
                }
                _ => return None,
            }
        }
        for (k, t) in &self.captured_ghost {
            match t {
                SymTerm::Lit(v) => {
                    env.ghost.insert(k.clone(), v.clone());
                }
                _ => return None,
            }
        }
        Some(LemVal::close(&self.params, &self.body, &env))
    }
}

fn collect_prog_vars_inner(g: &InnerGhost, out: &mut BTreeSet<String>) {
    use crate::syntax::ast::{GhostExpr, GhostInstrKind};
    fn expr(e: &GhostExpr, out: &mut BTreeSet<String>) {
        match e {
            GhostExpr::ProgVar(x) => {
                out.insert(x.clone());
            }
            GhostExpr::Add(a, b)
            | GhostExpr::Pair(a, b)
            | GhostExpr::Union(a, b)
            | GhostExpr::Diff(a, b) => {
                expr(a, out);
                expr(b, out);
            }
            GhostExpr::Singleton(a) => expr(a, out),
            GhostExpr::PredCtorApp(_, args) => {
                for a in args {
                    expr(a, out);
                }
            }
            _ => {}
        }
    }
    match g {
        InnerGhost::Instr(i) => match &i.kind {
            GhostInstrKind::LemCall(f, args) => {
                expr(f, out);
                for a in args {
                    expr(a, out);
                }
            }
            GhostInstrKind::GCons(e) => expr(e, out),
            GhostInstrKind::GAssign(l, r)
            | GhostInstrKind::OpenAtomicSpace(l, r)
            | GhostInstrKind::CloseAtomicSpace(l, r)
            | GhostInstrKind::HeapUpdate(l, r) => {
                expr(l, out);
                expr(r, out);
            }
        },
        InnerGhost::GLet(_, rhs, rest) => {
            collect_prog_vars_inner(rhs, out);
            collect_prog_vars_inner(rest, out);
        }
    }
}

/// Symbol display names, assigned at creation and re-pointed when a
/// binder names the result.
#[derive(Clone, Debug, Default)]
pub struct SymTable {
    names: Vec<String>,
    taken: BTreeMap<String, u32>,
}

impl SymTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn uniquify(&mut self, base: &str) -> String {
        let n = self.taken.entry(base.to_string()).or_insert(0);
        *n += 1;
        if *n == 1 {
            base.to_string()
        } else {
            format!("{base}#{n}")
        }
    }

    pub fn fresh(&mut self, note: &str) -> SymId {
        let name = self.uniquify(note);
        self.names.push(name);
        (self.names.len() - 1) as SymId
    }

    pub fn name(&self, id: SymId) -> &str {
        &self.names[id as usize]
    }

    /// Renames a symbol after the binder that received it, keeping display
    /// names unique.
    pub fn rename(&mut self, id: SymId, note: &str) {
        if note == "_" || self.names[id as usize] == note {
            return;
        }
        let name = self.uniquify(note);
        self.names[id as usize] = name;
    }

    pub fn show(&self, t: &SymTerm) -> String {
        match t {
            SymTerm::Lit(v) => v.to_string(),
            SymTerm::Sym(id) => self.name(*id).to_string(),
            SymTerm::Add(a, b) => {
                let rhs = match **b {
                    SymTerm::Add(_, _) => format!("({})", self.show(b)),
                    _ => self.show(b),
                };
                format!("{} + {}", self.show(a), rhs)
            }
            SymTerm::Pair(a, b) => format!("({}, {})", self.show(a), self.show(b)),
            SymTerm::Singleton(a) => format!("{{{}}}", self.show(a)),
            SymTerm::Union(a, b) => format!("union({}, {})", self.show(a), self.show(b)),
            SymTerm::Diff(a, b) => format!("diff({}, {})", self.show(a), self.show(b)),
            SymTerm::PredCtorApp(p, args) => {
                let args = args.iter().map(|a| self.show(a)).collect::<Vec<_>>();
                format!("{p}({})", args.join(", "))
            }
            SymTerm::LemVal(l) => {
                format!("lem({}){{{}}}", l.params.join(", "), l.body)
            }
        }
    }
}

/// A linear view of an integer-shaped term: a constant plus a signed
/// multiset of non-additive atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinSum {
    pub constant: i128,
    pub atoms: BTreeMap<SymTerm, i64>,
}

impl LinSum {
    pub fn sub(mut self, other: &LinSum) -> LinSum {
        self.constant -= other.constant;
        for (t, k) in &other.atoms {
            let e = self.atoms.entry(t.clone()).or_insert(0);
            *e -= k;
            if *e == 0 {
                self.atoms.remove(t);
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.atoms.is_empty()
    }
}

/// Linearizes a term. Returns `None` for terms that are not ground
/// integers, symbols or sums of such.
pub fn linearize(t: &SymTerm) -> Option<LinSum> {
    match t {
        SymTerm::Lit(GhostValue::Int(z)) => Some(LinSum {
            constant: *z as i128,
            atoms: BTreeMap::new(),
        }),
        SymTerm::Add(a, b) => {
            let la = linearize(a)?;
            let lb = linearize(b)?;
            let mut out = la;
            out.constant += lb.constant;
            for (t, k) in lb.atoms {
                let e = out.atoms.entry(t.clone()).or_insert(0);
                *e += k;
                if *e == 0 {
                    out.atoms.remove(&t);
                }
            }
            Some(out)
        }
        SymTerm::Lit(_) => None,
        other => Some(LinSum {
            constant: 0,
            atoms: BTreeMap::from([(other.clone(), 1)]),
        }),
    }
}

/// Rebuilds the canonical term of a linear sum: constant first, then atoms
/// in term order, repeated by multiplicity.
pub fn lin_to_term(l: &LinSum) -> SymTerm {
    let mut parts: Vec<SymTerm> = Vec::new();
    if l.constant != 0 || l.atoms.is_empty() {
        parts.push(SymTerm::int(l.constant as i64));
    }
    for (t, k) in &l.atoms {
        for _ in 0..(*k).max(0) {
            parts.push(t.clone());
        }
        // negative multiplicities cannot be represented in the term
        // grammar; callers must check before rebuilding
    }
    let mut it = parts.into_iter();
    let first = it.next().expect("at least the constant");
    it.fold(first, |acc, t| SymTerm::Add(Box::new(acc), Box::new(t)))
}

/// True when the sum can be rebuilt as a term: no negative multiplicity
/// and the constant fits the value type.
pub fn lin_representable(l: &LinSum) -> bool {
    (l.atoms.values().all(|k| *k > 0) || l.atoms.is_empty()) && i64::try_from(l.constant).is_ok()
}
