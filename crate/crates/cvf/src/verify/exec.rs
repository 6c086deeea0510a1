//! The symbolic execution engine: produce/consume of assertions and one
//! case per proof rule for commands and ghost commands.

use super::pc::{Entails, PathCondition};
use super::state::{SymChunk, SymEnv, SymHeap, SymbolicState};
use super::term::{SymId, SymLemVal, SymTable, SymTerm};
use crate::heap::{Fraction, GhostValue};
use crate::syntax::ast::*;
use crate::syntax::span::Span;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Treat leftover chunks at the end of the program as a failure.
    pub strict_leaks: bool,
    /// Predicate unfolding budget, shared with ground satisfaction.
    pub unfold_depth: usize,
    /// Record a state snapshot at every command boundary.
    pub trace_states: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            strict_leaks: false,
            unfold_depth: 64,
            trace_states: true,
        }
    }
}

/// A verification failure: location, diagnostic, and the state dump at the
/// point of failure.
#[derive(Clone, Debug)]
pub struct Failure {
    pub span: Span,
    pub message: String,
    pub state: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub branches: usize,
    pub consumed_chunks: usize,
    pub produced_chunks: usize,
}

/// A labeled state snapshot taken at a command boundary.
#[derive(Clone, Debug)]
pub struct StateSnapshot {
    pub label: String,
    pub chunks: Vec<String>,
    pub lemtype_count: usize,
    /// Per-address total points-to coefficient, for the conservation audit.
    pub points_to_totals: Vec<(String, String)>,
}

/// Outcome of consuming an assertion: the witnesses chosen for its
/// existentials and the sub-heap that was removed.
#[derive(Clone, Debug, Default)]
pub struct ConsumeOut {
    pub witnesses: Vec<(String, SymTerm)>,
    pub taken: SymHeap,
}

pub struct Engine<'a> {
    pub decls: &'a Decls,
    pub cfg: VerifyConfig,
    pub syms: SymTable,
    pub snapshots: Vec<StateSnapshot>,
    pub stats: Stats,
    pub leaks: Vec<String>,
}

impl<'a> Engine<'a> {
    pub fn new(decls: &'a Decls, cfg: VerifyConfig) -> Self {
        Engine {
            decls,
            cfg,
            syms: SymTable::new(),
            snapshots: Vec::new(),
            stats: Stats::default(),
            leaks: Vec::new(),
        }
    }

    pub fn fresh(&mut self, note: &str) -> SymTerm {
        SymTerm::Sym(self.syms.fresh(note))
    }

    pub fn fresh_state(&self) -> SymbolicState {
        SymbolicState::new()
    }

    fn fail(&self, span: Span, msg: impl Into<String>, st: &SymbolicState) -> Failure {
        Failure {
            span,
            message: msg.into(),
            state: st.heap.dump(&st.pc, &self.syms),
        }
    }

    pub fn snapshot(&mut self, label: impl Into<String>, st: &SymbolicState) {
        if !self.cfg.trace_states {
            return;
        }
        let mut addrs: BTreeSet<SymTerm> = BTreeSet::new();
        for (c, _) in st.heap.iter() {
            if let SymChunk::PointsTo(a, _) = c {
                addrs.insert(st.pc.normalize(a));
            }
        }
        let points_to_totals = addrs
            .into_iter()
            .map(|a| {
                let total = st.heap.points_to_total(&a, &st.pc);
                (self.syms.show(&a), total.to_string())
            })
            .collect();
        self.snapshots.push(StateSnapshot {
            label: label.into(),
            chunks: st.heap.dump(&st.pc, &self.syms),
            lemtype_count: st.heap.lemtype_count(),
            points_to_totals,
        });
    }

    // ----- evaluation of ghost expressions to terms -----

    pub fn eval(
        &self,
        st: &SymbolicState,
        env: &SymEnv,
        e: &GhostExpr,
        span: Span,
    ) -> Result<SymTerm, Failure> {
        let t = self.eval_raw(st, env, e, span)?;
        Ok(st.pc.normalize(&t))
    }

    fn eval_raw(
        &self,
        st: &SymbolicState,
        env: &SymEnv,
        e: &GhostExpr,
        span: Span,
    ) -> Result<SymTerm, Failure> {
        Ok(match e {
            GhostExpr::Value(v) => SymTerm::Lit(v.clone()),
            GhostExpr::ProgVar(x) => env
                .prog
                .get(x)
                .cloned()
                .ok_or_else(|| self.fail(span, format!("unbound program variable `{x}`"), st))?,
            GhostExpr::GhostVar(g) => env
                .ghost
                .get(g)
                .cloned()
                .ok_or_else(|| self.fail(span, format!("unbound ghost variable `{g}`"), st))?,
            GhostExpr::Add(a, b) => SymTerm::Add(
                Box::new(self.eval_raw(st, env, a, span)?),
                Box::new(self.eval_raw(st, env, b, span)?),
            ),
            GhostExpr::PredCtorApp(p, args) => SymTerm::PredCtorApp(
                p.clone(),
                args.iter()
                    .map(|a| self.eval_raw(st, env, a, span))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            GhostExpr::Pair(a, b) => SymTerm::pair(
                self.eval_raw(st, env, a, span)?,
                self.eval_raw(st, env, b, span)?,
            ),
            GhostExpr::Unit => SymTerm::unit(),
            GhostExpr::EmptySet => SymTerm::empty_set(),
            GhostExpr::Singleton(a) => {
                SymTerm::Singleton(Box::new(self.eval_raw(st, env, a, span)?))
            }
            GhostExpr::Union(a, b) => SymTerm::Union(
                Box::new(self.eval_raw(st, env, a, span)?),
                Box::new(self.eval_raw(st, env, b, span)?),
            ),
            GhostExpr::Diff(a, b) => SymTerm::Diff(
                Box::new(self.eval_raw(st, env, a, span)?),
                Box::new(self.eval_raw(st, env, b, span)?),
            ),
        })
    }

    fn eval_pexpr(
        &self,
        st: &SymbolicState,
        env: &SymEnv,
        e: &Expr,
        span: Span,
    ) -> Result<SymTerm, Failure> {
        match e {
            Expr::IntLit(z) => Ok(SymTerm::int(*z)),
            Expr::Var(x) => env
                .prog
                .get(x)
                .cloned()
                .ok_or_else(|| self.fail(span, format!("unbound program variable `{x}`"), st)),
        }
    }

    // ----- unification -----

    /// Unifies a pattern with a heap term, binding pattern-side
    /// unification variables into the given path condition.
    fn unify_into(
        pc: &mut PathCondition,
        flex: &BTreeSet<SymId>,
        pat: &SymTerm,
        tgt: &SymTerm,
    ) -> bool {
        let np = pc.normalize(pat);
        let nt = pc.normalize(tgt);
        if np == nt {
            return true;
        }
        match (&np, &nt) {
            (SymTerm::Sym(id), other) if flex.contains(id) => {
                if other.contains_sym(*id) {
                    return false;
                }
                pc.assume_eq(&np, other);
                true
            }
            (SymTerm::Pair(a1, a2), SymTerm::Pair(b1, b2)) => {
                Self::unify_into(pc, flex, a1, b1) && Self::unify_into(pc, flex, a2, b2)
            }
            (SymTerm::Pair(a1, a2), SymTerm::Lit(GhostValue::Pair(b1, b2))) => {
                Self::unify_into(pc, flex, a1, &SymTerm::Lit((**b1).clone()))
                    && Self::unify_into(pc, flex, a2, &SymTerm::Lit((**b2).clone()))
            }
            (SymTerm::PredCtorApp(p, xs), SymTerm::PredCtorApp(q, ys))
                if p == q && xs.len() == ys.len() =>
            {
                xs.iter()
                    .zip(ys)
                    .all(|(x, y)| Self::unify_into(pc, flex, x, y))
            }
            (SymTerm::PredCtorApp(p, xs), SymTerm::Lit(GhostValue::PredVal(q, ys)))
                if p == q && xs.len() == ys.len() =>
            {
                xs.iter()
                    .zip(ys)
                    .all(|(x, y)| Self::unify_into(pc, flex, x, &SymTerm::Lit(y.clone())))
            }
            (SymTerm::Singleton(x), SymTerm::Singleton(y)) => Self::unify_into(pc, flex, x, y),
            (SymTerm::Add(_, _), _) | (_, SymTerm::Add(_, _)) => {
                // linear residue: solvable when a single unit-coefficient
                // flex atom remains
                if let (Some(lp), Some(lt)) =
                    (super::term::linearize(&np), super::term::linearize(&nt))
                {
                    let d = lp.sub(&lt);
                    if d.is_zero() {
                        return true;
                    }
                    let flex_atoms: Vec<_> = d
                        .atoms
                        .iter()
                        .filter(|(t, _)| matches!(t, SymTerm::Sym(id) if flex.contains(id)))
                        .collect();
                    if flex_atoms.len() == 1 && d.atoms.len() == 1 {
                        let (atom, k) = flex_atoms[0];
                        let quotient = -d.constant / (*k as i128);
                        if (*k == 1 || *k == -1)
                            && d.constant % (*k as i128) == 0
                            && i64::try_from(quotient).is_ok()
                        {
                            let solved = SymTerm::int(quotient as i64);
                            pc.assume_eq(&atom.clone(), &solved);
                            return true;
                        }
                    }
                }
                pc.entails_eq(&np, &nt) == Entails::Yes
            }
            _ => pc.entails_eq(&np, &nt) == Entails::Yes,
        }
    }

    fn unify_chunk(
        pc: &PathCondition,
        flex: &BTreeSet<SymId>,
        pat: &SymChunk,
        tgt: &SymChunk,
    ) -> Option<PathCondition> {
        let pairs: Vec<(&SymTerm, &SymTerm)> = match (pat, tgt) {
            (SymChunk::PointsTo(a, v), SymChunk::PointsTo(b, w))
            | (SymChunk::GhostPointsTo(a, v), SymChunk::GhostPointsTo(b, w))
            | (SymChunk::AtomicSpace(a, v), SymChunk::AtomicSpace(b, w)) => {
                vec![(a, b), (v, w)]
            }
            (SymChunk::LemType(v, t, xs), SymChunk::LemType(w, u, ys))
                if t == u && xs.len() == ys.len() =>
            {
                let mut ps = vec![(v, w)];
                ps.extend(xs.iter().zip(ys.iter()));
                ps
            }
            (SymChunk::AtomicSpaces(a), SymChunk::AtomicSpaces(b))
            | (SymChunk::Heap(a), SymChunk::Heap(b))
            | (SymChunk::PredApp(a), SymChunk::PredApp(b)) => vec![(a, b)],
            _ => return None,
        };
        let mut pc2 = pc.clone();
        for (p, t) in pairs {
            if !Self::unify_into(&mut pc2, flex, p, t) {
                return None;
            }
        }
        if pc2.is_inconsistent() {
            return None;
        }
        Some(pc2)
    }

    /// Finds the heap entry matching a pattern. Entries that match without
    /// introducing new bindings are preferred; beyond that, a unique
    /// binding-introducing match is required, and remaining ambiguity is an
    /// error rather than a backtracking point.
    fn find_match(
        &self,
        st: &SymbolicState,
        pattern: &SymChunk,
        flex: &BTreeSet<SymId>,
    ) -> Result<Option<(usize, PathCondition)>, String> {
        let base = st.pc.bindings_len();
        let mut rigid: Vec<(usize, PathCondition)> = Vec::new();
        let mut flexible: Vec<(usize, PathCondition)> = Vec::new();
        for (i, (c, _)) in st.heap.iter().enumerate() {
            if let Some(pc2) = Self::unify_chunk(&st.pc, flex, pattern, c) {
                if pc2.bindings_len() == base {
                    rigid.push((i, pc2));
                } else {
                    flexible.push((i, pc2));
                }
            }
        }
        if let Some(m) = rigid.into_iter().next() {
            return Ok(Some(m));
        }
        match flexible.len() {
            0 => Ok(None),
            1 => Ok(Some(flexible.into_iter().next().unwrap())),
            _ => Err(format!(
                "ambiguous match for `{}`: {} candidate chunks",
                pattern.show(&self.syms),
                flexible.len()
            )),
        }
    }

    // ----- consume -----

    pub fn consume(
        &mut self,
        st: &mut SymbolicState,
        env: &SymEnv,
        a: &Assertion,
        out: &mut ConsumeOut,
    ) -> Result<(), Failure> {
        let mut flex = BTreeSet::new();
        self.consume_rec(st, env, a, self.cfg.unfold_depth, &mut flex, out)
    }

    fn consume_rec(
        &mut self,
        st: &mut SymbolicState,
        env: &SymEnv,
        a: &Assertion,
        depth: usize,
        flex: &mut BTreeSet<SymId>,
        out: &mut ConsumeOut,
    ) -> Result<(), Failure> {
        if st.pc.is_inconsistent() {
            return Ok(());
        }
        let span = a.span;
        match &a.kind {
            AssertionKind::PointsTo(pi, l, r) => {
                let pat =
                    SymChunk::PointsTo(self.eval(st, env, l, span)?, self.eval(st, env, r, span)?);
                self.consume_leaf(st, pat, *pi, flex, out, span)
            }
            AssertionKind::GhostPointsTo(pi, l, r) => {
                let pat = SymChunk::GhostPointsTo(
                    self.eval(st, env, l, span)?,
                    self.eval(st, env, r, span)?,
                );
                self.consume_leaf(st, pat, *pi, flex, out, span)
            }
            AssertionKind::AtomicSpace(pi, n, i) => {
                let pat = SymChunk::AtomicSpace(
                    self.eval(st, env, n, span)?,
                    self.eval(st, env, i, span)?,
                );
                self.consume_leaf(st, pat, *pi, flex, out, span)
            }
            AssertionKind::LemType(e, t, args) => {
                let v = self.eval(st, env, e, span)?;
                let args = args
                    .iter()
                    .map(|x| self.eval(st, env, x, span))
                    .collect::<Result<Vec<_>, _>>()?;
                let pat = SymChunk::LemType(v, t.clone(), args);
                self.consume_leaf(st, pat, Fraction::one(), flex, out, span)
            }
            AssertionKind::AtomicSpaces(s) => {
                let pat = SymChunk::AtomicSpaces(self.eval(st, env, s, span)?);
                self.consume_leaf(st, pat, Fraction::one(), flex, out, span)
            }
            AssertionKind::HeapChunk(h) => {
                let pat = SymChunk::Heap(self.eval(st, env, h, span)?);
                self.consume_leaf(st, pat, Fraction::one(), flex, out, span)
            }
            AssertionKind::PredApp(e) => {
                let v = self.eval(st, env, e, span)?;
                self.consume_pred_term(st, &v, depth, flex, out, span)
            }
            AssertionKind::Emp => Ok(()),
            AssertionKind::PureEq(l, r) => {
                let lt = self.eval(st, env, l, span)?;
                let rt = self.eval(st, env, r, span)?;
                match st.pc.entails_eq(&lt, &rt) {
                    Entails::Yes => Ok(()),
                    Entails::No => Err(self.fail(
                        span,
                        format!(
                            "unprovable equality: {} == {} is provably false",
                            self.syms.show(&lt),
                            self.syms.show(&rt)
                        ),
                        st,
                    )),
                    Entails::Unknown => {
                        // solve for a unification variable if one side is one
                        let nl = st.pc.normalize(&lt);
                        let nr = st.pc.normalize(&rt);
                        let solvable = matches!(&nl, SymTerm::Sym(id) if flex.contains(id))
                            || matches!(&nr, SymTerm::Sym(id) if flex.contains(id));
                        if solvable {
                            st.pc.assume_eq(&nl, &nr);
                            st.heap.renormalize(&st.pc);
                            Ok(())
                        } else {
                            Err(self.fail(
                                span,
                                format!(
                                    "unprovable equality: cannot decide {} == {}",
                                    self.syms.show(&lt),
                                    self.syms.show(&rt)
                                ),
                                st,
                            ))
                        }
                    }
                }
            }
            AssertionKind::Exists(g, body) => {
                let id = self.syms.fresh(g);
                flex.insert(id);
                let mut env2 = env.clone();
                env2.ghost.insert(g.clone(), SymTerm::Sym(id));
                self.consume_rec(st, &env2, body, depth, flex, out)?;
                out.witnesses
                    .push((g.clone(), st.pc.normalize(&SymTerm::Sym(id))));
                Ok(())
            }
            AssertionKind::SepConj(l, r) => {
                self.consume_rec(st, env, l, depth, flex, out)?;
                self.consume_rec(st, env, r, depth, flex, out)
            }
        }
    }

    fn consume_leaf(
        &mut self,
        st: &mut SymbolicState,
        pattern: SymChunk,
        need: Fraction,
        flex: &BTreeSet<SymId>,
        out: &mut ConsumeOut,
        span: Span,
    ) -> Result<(), Failure> {
        match self.find_match(st, &pattern, flex) {
            Err(msg) => Err(self.fail(span, msg, st)),
            Ok(None) => Err(self.fail(
                span,
                format!("missing chunk: need {need} {}", pattern.show(&self.syms)),
                st,
            )),
            Ok(Some((i, pc2))) => {
                st.pc = pc2;
                let (chunk, have) = st.heap.entry(i).clone();
                if have < need {
                    return Err(self.fail(
                        span,
                        format!(
                            "insufficient coefficient for `{}`: have {have}, need {need}",
                            chunk.show(&self.syms)
                        ),
                        st,
                    ));
                }
                st.heap.remove_at(i, need).expect("checked above");
                out.taken.add(chunk, need, &st.pc);
                st.heap.renormalize(&st.pc);
                self.stats.consumed_chunks += 1;
                Ok(())
            }
        }
    }

    /// Consumes `V()`: unfolds a concrete predicate value, or consumes an
    /// opaque predicate-application chunk for an abstract one.
    fn consume_pred_term(
        &mut self,
        st: &mut SymbolicState,
        v: &SymTerm,
        depth: usize,
        flex: &mut BTreeSet<SymId>,
        out: &mut ConsumeOut,
        span: Span,
    ) -> Result<(), Failure> {
        let nv = st.pc.normalize(v);
        match pred_value_parts(&nv) {
            Some((p, args)) => {
                let Some((params, body)) = self.decls.pred_ctor(&p) else {
                    return Err(self.fail(
                        span,
                        format!("unknown predicate constructor `{p}`"),
                        st,
                    ));
                };
                if params.len() != args.len() {
                    return Err(self.fail(
                        span,
                        format!(
                            "`{p}` expects {} arguments, got {}",
                            params.len(),
                            args.len()
                        ),
                        st,
                    ));
                }
                if depth == 0 {
                    return Err(self.fail(span, format!("unfold depth exceeded at `{p}`"), st));
                }
                let (params, body) = (params.to_vec(), body.clone());
                let mut inner = SymEnv::new();
                for (p, a) in params.iter().zip(args) {
                    inner.ghost.insert(p.clone(), a);
                }
                self.consume_rec(st, &inner, &body, depth - 1, flex, out)
            }
            None => self.consume_leaf(st, SymChunk::PredApp(nv), Fraction::one(), flex, out, span),
        }
    }

    // ----- produce -----

    pub fn produce(
        &mut self,
        st: &mut SymbolicState,
        env: &SymEnv,
        a: &Assertion,
    ) -> Result<(), Failure> {
        self.produce_rec(st, env, a, self.cfg.unfold_depth)
    }

    fn produce_rec(
        &mut self,
        st: &mut SymbolicState,
        env: &SymEnv,
        a: &Assertion,
        depth: usize,
    ) -> Result<(), Failure> {
        if st.pc.is_inconsistent() {
            return Ok(());
        }
        let span = a.span;
        match &a.kind {
            AssertionKind::PointsTo(pi, l, r) => {
                let (addr, val) = (self.eval(st, env, l, span)?, self.eval(st, env, r, span)?);
                self.produce_cell(st, false, addr, val, *pi);
                Ok(())
            }
            AssertionKind::GhostPointsTo(pi, l, r) => {
                let (addr, val) = (self.eval(st, env, l, span)?, self.eval(st, env, r, span)?);
                self.produce_cell(st, true, addr, val, *pi);
                Ok(())
            }
            AssertionKind::AtomicSpace(pi, n, i) => {
                let c = SymChunk::AtomicSpace(
                    self.eval(st, env, n, span)?,
                    self.eval(st, env, i, span)?,
                );
                st.heap.add(c, *pi, &st.pc);
                self.stats.produced_chunks += 1;
                Ok(())
            }
            AssertionKind::LemType(e, t, args) => {
                let v = self.eval(st, env, e, span)?;
                let args = args
                    .iter()
                    .map(|x| self.eval(st, env, x, span))
                    .collect::<Result<Vec<_>, _>>()?;
                st.heap.add(
                    SymChunk::LemType(v, t.clone(), args),
                    Fraction::one(),
                    &st.pc,
                );
                self.stats.produced_chunks += 1;
                Ok(())
            }
            AssertionKind::AtomicSpaces(s) => {
                let c = SymChunk::AtomicSpaces(self.eval(st, env, s, span)?);
                st.heap.add(c, Fraction::one(), &st.pc);
                self.stats.produced_chunks += 1;
                Ok(())
            }
            AssertionKind::HeapChunk(h) => {
                let c = SymChunk::Heap(self.eval(st, env, h, span)?);
                st.heap.add(c, Fraction::one(), &st.pc);
                self.stats.produced_chunks += 1;
                Ok(())
            }
            AssertionKind::PredApp(e) => {
                let v = self.eval(st, env, e, span)?;
                self.produce_pred_term(st, &v, depth, span)
            }
            AssertionKind::Emp => Ok(()),
            AssertionKind::PureEq(l, r) => {
                let lt = self.eval(st, env, l, span)?;
                let rt = self.eval(st, env, r, span)?;
                st.pc.assume_eq(&lt, &rt);
                st.heap.renormalize(&st.pc);
                Ok(())
            }
            AssertionKind::Exists(g, body) => {
                let w = self.fresh(g);
                let mut env2 = env.clone();
                env2.ghost.insert(g.clone(), w);
                self.produce_rec(st, &env2, body, depth)
            }
            AssertionKind::SepConj(l, r) => {
                self.produce_rec(st, env, l, depth)?;
                self.produce_rec(st, env, r, depth)
            }
        }
    }

    /// Adds a (ghost) points-to chunk, applying weak-consistency value
    /// matching: a chunk at a certainly-equal address must store the same
    /// value, and a combined coefficient above 1 makes the path vacuous.
    fn produce_cell(
        &mut self,
        st: &mut SymbolicState,
        ghost: bool,
        addr: SymTerm,
        val: SymTerm,
        coeff: Fraction,
    ) {
        self.stats.produced_chunks += 1;
        let existing = st.heap.indices_of(|c| match (ghost, c) {
            (false, SymChunk::PointsTo(a, _)) => st.pc.entails_eq(a, &addr) == Entails::Yes,
            (true, SymChunk::GhostPointsTo(a, _)) => st.pc.entails_eq(a, &addr) == Entails::Yes,
            _ => false,
        });
        if let Some(&i) = existing.first() {
            let (chunk, have) = st.heap.entry(i).clone();
            let old_val = match &chunk {
                SymChunk::PointsTo(_, v) | SymChunk::GhostPointsTo(_, v) => v.clone(),
                _ => unreachable!(),
            };
            st.pc.assume_eq(&old_val, &val);
            let total = have.add(coeff);
            if total > Fraction::one() {
                st.pc.set_inconsistent();
            }
            st.heap.remove_at(i, have);
            let c = if ghost {
                SymChunk::GhostPointsTo(addr, old_val)
            } else {
                SymChunk::PointsTo(addr, old_val)
            };
            st.heap.add(c, total, &st.pc);
            st.heap.renormalize(&st.pc);
            return;
        }
        let c = if ghost {
            SymChunk::GhostPointsTo(addr, val)
        } else {
            SymChunk::PointsTo(addr, val)
        };
        st.heap.add(c, coeff, &st.pc);
    }

    fn produce_pred_term(
        &mut self,
        st: &mut SymbolicState,
        v: &SymTerm,
        depth: usize,
        span: Span,
    ) -> Result<(), Failure> {
        let nv = st.pc.normalize(v);
        match pred_value_parts(&nv) {
            Some((p, args)) => {
                let Some((params, body)) = self.decls.pred_ctor(&p) else {
                    return Err(self.fail(
                        span,
                        format!("unknown predicate constructor `{p}`"),
                        st,
                    ));
                };
                if params.len() != args.len() {
                    return Err(self.fail(
                        span,
                        format!(
                            "`{p}` expects {} arguments, got {}",
                            params.len(),
                            args.len()
                        ),
                        st,
                    ));
                }
                if depth == 0 {
                    return Err(self.fail(span, format!("unfold depth exceeded at `{p}`"), st));
                }
                let (params, body) = (params.to_vec(), body.clone());
                let mut inner = SymEnv::new();
                for (p, a) in params.iter().zip(args) {
                    inner.ghost.insert(p.clone(), a);
                }
                self.produce_rec(st, &inner, &body, depth - 1)
            }
            None => {
                st.heap.add(SymChunk::PredApp(nv), Fraction::one(), &st.pc);
                self.stats.produced_chunks += 1;
                Ok(())
            }
        }
    }
}

fn pred_value_parts(t: &SymTerm) -> Option<(String, Vec<SymTerm>)> {
    match t {
        SymTerm::PredCtorApp(p, args) => Some((p.clone(), args.clone())),
        SymTerm::Lit(GhostValue::PredVal(p, vals)) => {
            Some((p.clone(), vals.iter().cloned().map(SymTerm::Lit).collect()))
        }
        _ => None,
    }
}

// ===== command and ghost-command rules =====

impl<'a> Engine<'a> {
    /// Symbolically executes an annotated command, returning the final
    /// state and the command's result term.
    pub fn exec_acmd(
        &mut self,
        st: SymbolicState,
        c: &AnnotatedCommand,
        as_rhs: bool,
    ) -> Result<(SymbolicState, SymTerm), Failure> {
        if st.pc.is_inconsistent() {
            let res = self.fresh("unreachable");
            return Ok((st, res));
        }
        match &c.kind {
            AnnotatedCommandKind::Expr(e) => {
                if !as_rhs {
                    self.snapshot(format!("before {e}"), &st);
                }
                let res = self.eval_pexpr(&st, &st.env.clone(), e, c.span)?;
                Ok((st, res))
            }
            AnnotatedCommandKind::Instr(i) => {
                if !as_rhs {
                    self.snapshot(format!("before {i}"), &st);
                }
                self.exec_instr(st, i, c.span)
            }
            AnnotatedCommandKind::Let(x, rhs, body) => {
                self.snapshot(format!("before {}", head_of(c)), &st);
                let (mut st1, res) = self.exec_acmd(st, rhs, true)?;
                if let SymTerm::Sym(id) = &res {
                    self.syms.rename(*id, x);
                }
                st1.env.prog.insert(x.clone(), res);
                self.exec_acmd(st1, body, false)
            }
            AnnotatedCommandKind::GLet(g, rhs, body) => {
                self.snapshot(format!("before {}", head_of(c)), &st);
                let (mut st1, res) = self.exec_outer(st, rhs)?;
                if let SymTerm::Sym(id) = &res {
                    self.syms.rename(*id, g);
                }
                st1.env.ghost.insert(g.clone(), res);
                self.exec_acmd(st1, body, false)
            }
            AnnotatedCommandKind::Par {
                pre_left,
                left,
                pre_right,
                right,
            } => {
                if !as_rhs {
                    self.snapshot("before par", &st);
                }
                self.exec_par(st, pre_left, left, pre_right, right, c.span)
            }
        }
    }

    fn exec_par(
        &mut self,
        mut st: SymbolicState,
        pre_left: &Option<Assertion>,
        left: &AnnotatedCommand,
        pre_right: &Option<Assertion>,
        right: &AnnotatedCommand,
        span: Span,
    ) -> Result<(SymbolicState, SymTerm), Failure> {
        let emp = Assertion::emp();
        let a_left = pre_left.as_ref().unwrap_or(&emp);
        let a_right = pre_right.as_ref().unwrap_or(&emp);
        let env = st.env.clone();

        let mut out_l = ConsumeOut::default();
        self.consume(&mut st, &env, a_left, &mut out_l)
            .map_err(|f| Failure {
                message: format!(
                    "par: cannot consume left branch precondition: {}",
                    f.message
                ),
                ..f
            })?;
        let mut out_r = ConsumeOut::default();
        self.consume(&mut st, &env, a_right, &mut out_r)
            .map_err(|f| Failure {
                message: format!(
                    "par: cannot consume right branch precondition: {}",
                    f.message
                ),
                ..f
            })?;

        self.stats.branches += 2;
        let st_l0 = SymbolicState {
            pc: st.pc.clone(),
            heap: out_l.taken,
            env: env.clone(),
            opened: BTreeSet::new(),
        };
        self.snapshot("par branch 1 entry", &st_l0);
        let (st_l, _) = self.exec_acmd(st_l0, left, true)?;
        self.snapshot("par branch 1 end", &st_l);

        let mut heap_r = out_r.taken;
        heap_r.renormalize(&st_l.pc);
        let st_r0 = SymbolicState {
            pc: st_l.pc.clone(),
            heap: heap_r,
            env: env.clone(),
            opened: BTreeSet::new(),
        };
        self.snapshot("par branch 2 entry", &st_r0);
        let (st_r, _) = self.exec_acmd(st_r0, right, true)?;
        self.snapshot("par branch 2 end", &st_r);

        // join: frame * left post * right post
        let mut joined = SymbolicState {
            pc: st_r.pc.clone(),
            heap: st.heap,
            env,
            opened: st.opened,
        };
        joined.heap.renormalize(&joined.pc);
        for (c, f) in st_l.heap.iter() {
            joined.heap.add(c.clone(), *f, &joined.pc);
        }
        for (c, f) in st_r.heap.iter() {
            joined.heap.add(c.clone(), *f, &joined.pc);
        }
        self.snapshot("par join", &joined);
        let _ = span;
        Ok((joined, SymTerm::int(0)))
    }

    fn exec_instr(
        &mut self,
        mut st: SymbolicState,
        i: &Instr,
        span: Span,
    ) -> Result<(SymbolicState, SymTerm), Failure> {
        let env = st.env.clone();
        match i {
            Instr::Cons(e) => {
                let v = self.eval_pexpr(&st, &env, e, span)?;
                let addr = self.fresh("loc");
                self.produce_cell(&mut st, false, addr.clone(), v, Fraction::one());
                Ok((st, addr))
            }
            Instr::Deref(e) => {
                let addr = self.eval_pexpr(&st, &env, e, span)?;
                let addr = st.pc.normalize(&addr);
                let mut found: Option<SymTerm> = None;
                for (c, f) in st.heap.iter() {
                    if let SymChunk::PointsTo(a, v) = c {
                        if !f.is_zero() && st.pc.entails_eq(a, &addr) == Entails::Yes {
                            found = Some(v.clone());
                            break;
                        }
                    }
                }
                if let Some(res) = found {
                    return Ok((st, res));
                }
                Err(self.fail(
                    span,
                    format!(
                        "missing chunk: no points-to chunk for address {}",
                        self.syms.show(&addr)
                    ),
                    &st,
                ))
            }
            Instr::Faa(e1, e2) => {
                let l = self.eval_pexpr(&st, &env, e1, span)?;
                let z = self.eval_pexpr(&st, &env, e2, span)?;
                let fv = self.syms.fresh("ghop_lem");
                let fpre = self.syms.fresh("ghop_pre");
                let fpost = self.syms.fresh("ghop_post");
                let mut flex: BTreeSet<SymId> = [fv, fpre, fpost].into_iter().collect();
                let mut out = ConsumeOut::default();
                let pat = SymChunk::LemType(
                    SymTerm::Sym(fv),
                    "FAA_ghop".to_string(),
                    vec![l, z, SymTerm::Sym(fpre), SymTerm::Sym(fpost)],
                );
                self.consume_leaf(&mut st, pat, Fraction::one(), &flex, &mut out, span)
                    .map_err(|f| Failure {
                        message: format!(
                            "faa: no matching FAA_ghop lemma-type chunk ({})",
                            f.message
                        ),
                        ..f
                    })?;
                // consume the ghost operation's precondition predicate
                let pre_term = st.pc.normalize(&SymTerm::Sym(fpre));
                self.consume_pred_term(
                    &mut st,
                    &pre_term,
                    self.cfg.unfold_depth,
                    &mut flex,
                    &mut out,
                    span,
                )?;
                // the lemma-type chunk survives the operation
                let produced_back = SymChunk::LemType(
                    st.pc.normalize(&SymTerm::Sym(fv)),
                    "FAA_ghop".to_string(),
                    out.taken
                        .iter()
                        .find_map(|(c, _)| match c {
                            SymChunk::LemType(_, _, args) => Some(args.clone()),
                            _ => None,
                        })
                        .expect("lemma chunk was consumed"),
                );
                st.heap.add(produced_back, Fraction::one(), &st.pc);
                self.stats.produced_chunks += 1;
                // produce the postcondition predicate
                let post_term = st.pc.normalize(&SymTerm::Sym(fpost));
                self.produce_pred_term(&mut st, &post_term, self.cfg.unfold_depth, span)?;
                // the rule leaves the result unconstrained
                let res = self.fresh("faa_res");
                Ok((st, res))
            }
            Instr::AssertEq(e1, e2) => {
                let a = self.eval_pexpr(&st, &env, e1, span)?;
                let b = self.eval_pexpr(&st, &env, e2, span)?;
                match st.pc.entails_eq(&a, &b) {
                    Entails::Yes => Ok((st, SymTerm::int(0))),
                    Entails::No => Err(self.fail(
                        span,
                        format!(
                            "unprovable equality: assert {} == {} is provably false (the erased program can get stuck here)",
                            self.syms.show(&a),
                            self.syms.show(&b)
                        ),
                        &st,
                    )),
                    Entails::Unknown => Err(self.fail(
                        span,
                        format!(
                            "unprovable equality: cannot decide assert {} == {}",
                            self.syms.show(&a),
                            self.syms.show(&b)
                        ),
                        &st,
                    )),
                }
            }
        }
    }

    /// Executes an outer ghost command.
    pub fn exec_outer(
        &mut self,
        mut st: SymbolicState,
        c: &OuterGhost,
    ) -> Result<(SymbolicState, SymTerm), Failure> {
        let span = c.span;
        let env = st.env.clone();
        match &c.kind {
            OuterGhostKind::Inner(g) => self.exec_inner(st, g, &env),
            OuterGhostKind::CreateAtomicSpace(n, i) => {
                let nt = self.eval(&st, &env, n, span)?;
                let it = self.eval(&st, &env, i, span)?;
                let mut flex = BTreeSet::new();
                let mut out = ConsumeOut::default();
                self.consume_pred_term(
                    &mut st,
                    &it,
                    self.cfg.unfold_depth,
                    &mut flex,
                    &mut out,
                    span,
                )
                .map_err(|f| Failure {
                    message: format!(
                        "create_atomic_space: cannot consume the invariant: {}",
                        f.message
                    ),
                    ..f
                })?;
                st.heap
                    .add(SymChunk::AtomicSpace(nt, it), Fraction::one(), &st.pc);
                self.stats.produced_chunks += 1;
                Ok((st, SymTerm::unit()))
            }
            OuterGhostKind::DestroyAtomicSpace(n, i) => {
                let nt = self.eval(&st, &env, n, span)?;
                let it = self.eval(&st, &env, i, span)?;
                let mut flex = BTreeSet::new();
                let mut out = ConsumeOut::default();
                // destroying requires full ownership
                self.consume_leaf(
                    &mut st,
                    SymChunk::AtomicSpace(nt, it.clone()),
                    Fraction::one(),
                    &flex,
                    &mut out,
                    span,
                )
                .map_err(|f| Failure {
                    message: format!(
                        "destroy_atomic_space: full ownership required: {}",
                        f.message
                    ),
                    ..f
                })?;
                let _ = &mut flex;
                self.produce_pred_term(&mut st, &it, self.cfg.unfold_depth, span)?;
                Ok((st, SymTerm::unit()))
            }
            OuterGhostKind::ProduceLemPtrChunk {
                lem_type,
                type_args,
                params,
                body,
            } => {
                let targ_terms = type_args
                    .iter()
                    .map(|a| self.eval(&st, &env, a, span))
                    .collect::<Result<Vec<_>, _>>()?;
                self.check_lemma_value(&st, lem_type, &targ_terms, params, body, &env, span)?;
                let lemval = SymTerm::LemVal(Box::new(SymLemVal::close(
                    params, body, &env.prog, &env.ghost,
                )));
                let lemval = st.pc.normalize(&lemval);
                st.heap.add(
                    SymChunk::LemType(lemval.clone(), lem_type.clone(), targ_terms),
                    Fraction::one(),
                    &st.pc,
                );
                self.stats.produced_chunks += 1;
                Ok((st, lemval))
            }
        }
    }

    /// Checks that a lemma body satisfies its declared type: the `req` is
    /// produced into an otherwise-empty state under fresh symbols for the
    /// lemma parameters and the `forall` variables, the body is executed,
    /// and the `ens` is consumed. Leftovers are leaked, which is sound
    /// because satisfaction is upward closed.
    #[allow(clippy::too_many_arguments)]
    pub fn check_lemma_value(
        &mut self,
        enclosing: &SymbolicState,
        lem_type: &str,
        type_args: &[SymTerm],
        params: &[String],
        body: &InnerGhost,
        outer_env: &SymEnv,
        span: Span,
    ) -> Result<(), Failure> {
        let Some(GhostDecl::LemType {
            type_params,
            lemma_params,
            forall_params,
            req,
            ens,
            ..
        }) = self.decls.lem_type(lem_type)
        else {
            return Err(self.fail(span, format!("unknown lemma type `{lem_type}`"), enclosing));
        };
        let (type_params, lemma_params, forall_params, req, ens) = (
            type_params.clone(),
            lemma_params.clone(),
            forall_params.clone(),
            req.clone(),
            ens.clone(),
        );
        if type_args.len() != type_params.len() {
            return Err(self.fail(
                span,
                format!(
                    "`{lem_type}` expects {} type arguments, got {}",
                    type_params.len(),
                    type_args.len()
                ),
                enclosing,
            ));
        }
        if params.len() != lemma_params.len() {
            return Err(self.fail(
                span,
                format!(
                    "`{lem_type}` lemmas take {} parameter(s), got {}",
                    lemma_params.len(),
                    params.len()
                ),
                enclosing,
            ));
        }
        // fresh symbols for the lemma parameters and the forall variables
        let param_syms: Vec<SymTerm> = params.iter().map(|p| self.fresh(p)).collect();
        let mut decl_env = SymEnv::new();
        for (p, a) in type_params.iter().zip(type_args) {
            decl_env.ghost.insert(p.clone(), a.clone());
        }
        for (p, s) in lemma_params.iter().zip(&param_syms) {
            decl_env.ghost.insert(p.clone(), s.clone());
        }
        for p in &forall_params {
            let s = self.fresh(p);
            decl_env.ghost.insert(p.clone(), s);
        }
        let mut body_env = outer_env.clone();
        for (p, s) in params.iter().zip(&param_syms) {
            body_env.ghost.insert(p.clone(), s.clone());
        }
        self.stats.branches += 1;
        let mut st = SymbolicState {
            pc: enclosing.pc.clone(),
            heap: SymHeap::new(),
            env: body_env.clone(),
            opened: BTreeSet::new(),
        };
        self.produce(&mut st, &decl_env, &req)?;
        self.snapshot("lemma body entry", &st);
        let (mut st, body_res) = self.exec_inner(st, body, &body_env)?;
        let mut env_ens = decl_env;
        env_ens.ghost.insert("res".to_string(), body_res);
        let mut out = ConsumeOut::default();
        self.consume(&mut st, &env_ens, &ens, &mut out)
            .map_err(|f| Failure {
                message: format!(
                    "lemma body does not establish its postcondition: {}",
                    f.message
                ),
                ..f
            })?;
        if !st.heap.is_empty() {
            for line in st.heap.dump(&st.pc, &self.syms) {
                self.leaks.push(format!("leaked in lemma body: {line}"));
            }
        }
        self.snapshot("lemma body end", &st);
        Ok(())
    }

    /// Executes an inner ghost command under an explicit environment.
    pub fn exec_inner(
        &mut self,
        st: SymbolicState,
        g: &InnerGhost,
        env: &SymEnv,
    ) -> Result<(SymbolicState, SymTerm), Failure> {
        if st.pc.is_inconsistent() {
            let res = self.fresh("unreachable");
            return Ok((st, res));
        }
        match g {
            InnerGhost::Instr(i) => {
                self.snapshot(format!("ghost {i}"), &st);
                self.exec_ghost_instr(st, i, env)
            }
            InnerGhost::GLet(x, rhs, rest) => {
                let (st1, res) = self.exec_inner(st, rhs, env)?;
                if let SymTerm::Sym(id) = &res {
                    self.syms.rename(*id, x);
                }
                let mut env2 = env.clone();
                env2.ghost.insert(x.clone(), res);
                self.exec_inner(st1, rest, &env2)
            }
        }
    }

    fn exec_ghost_instr(
        &mut self,
        mut st: SymbolicState,
        i: &GhostInstr,
        env: &SymEnv,
    ) -> Result<(SymbolicState, SymTerm), Failure> {
        let span = i.span;
        match &i.kind {
            GhostInstrKind::GCons(e) => {
                let v = self.eval(&st, env, e, span)?;
                let cell = self.fresh("gcell");
                self.produce_cell(&mut st, true, cell.clone(), v, Fraction::one());
                Ok((st, cell))
            }
            GhostInstrKind::GAssign(l, r) => {
                let addr = self.eval(&st, env, l, span)?;
                let val = self.eval(&st, env, r, span)?;
                let old = self.syms.fresh("old");
                let flex: BTreeSet<SymId> = [old].into_iter().collect();
                let mut out = ConsumeOut::default();
                self.consume_leaf(
                    &mut st,
                    SymChunk::GhostPointsTo(addr.clone(), SymTerm::Sym(old)),
                    Fraction::one(),
                    &flex,
                    &mut out,
                    span,
                )
                .map_err(|f| Failure {
                    message: format!(
                        "ghost assignment requires full ownership of the cell: {}",
                        f.message
                    ),
                    ..f
                })?;
                self.produce_cell(&mut st, true, addr, val, Fraction::one());
                Ok((st, SymTerm::unit()))
            }
            GhostInstrKind::OpenAtomicSpace(n, iv) => {
                let nt = self.eval(&st, env, n, span)?;
                let it = self.eval(&st, env, iv, span)?;
                let pair = st.pc.normalize(&SymTerm::pair(nt.clone(), it.clone()));
                let spaces_idx = self.the_atomic_spaces_chunk(&st, span)?;
                let s = match &st.heap.entry(spaces_idx).0 {
                    SymChunk::AtomicSpaces(s) => s.clone(),
                    _ => unreachable!(),
                };
                match st.pc.entails_not_in(&pair, &s) {
                    Entails::Yes => {}
                    Entails::No => {
                        return Err(self.fail(
                            span,
                            format!(
                                "open_atomic_space: side condition (V, V') ∉ S failed: {} is already in the opened set {}",
                                self.syms.show(&pair),
                                self.syms.show(&s)
                            ),
                            &st,
                        ))
                    }
                    Entails::Unknown => {
                        return Err(self.fail(
                            span,
                            format!(
                                "open_atomic_space: cannot decide side condition (V, V') ∉ S for {} against {}",
                                self.syms.show(&pair),
                                self.syms.show(&s)
                            ),
                            &st,
                        ))
                    }
                }
                // some positive fraction of the space must be owned
                let has_space = st.heap.iter().any(|(c, f)| {
                    matches!(c, SymChunk::AtomicSpace(a, b)
                        if !f.is_zero()
                            && st.pc.entails_eq(a, &nt) == Entails::Yes
                            && st.pc.entails_eq(b, &it) == Entails::Yes)
                });
                if !has_space {
                    return Err(self.fail(
                        span,
                        format!(
                            "open_atomic_space: missing chunk: no fraction of atomic_space({}, {})",
                            self.syms.show(&nt),
                            self.syms.show(&it)
                        ),
                        &st,
                    ));
                }
                let s2 = st.pc.normalize(&SymTerm::Union(
                    Box::new(s),
                    Box::new(SymTerm::Singleton(Box::new(pair.clone()))),
                ));
                st.heap.set_chunk_at(spaces_idx, SymChunk::AtomicSpaces(s2));
                st.opened.insert(pair);
                self.produce_pred_term(&mut st, &it, self.cfg.unfold_depth, span)?;
                Ok((st, SymTerm::unit()))
            }
            GhostInstrKind::CloseAtomicSpace(n, iv) => {
                let nt = self.eval(&st, env, n, span)?;
                let it = self.eval(&st, env, iv, span)?;
                let pair = st.pc.normalize(&SymTerm::pair(nt, it.clone()));
                let spaces_idx = self.the_atomic_spaces_chunk(&st, span)?;
                let mut flex = BTreeSet::new();
                let mut out = ConsumeOut::default();
                self.consume_pred_term(
                    &mut st,
                    &it,
                    self.cfg.unfold_depth,
                    &mut flex,
                    &mut out,
                    span,
                )
                .map_err(|f| Failure {
                    message: format!(
                        "close_atomic_space: cannot re-establish the invariant: {}",
                        f.message
                    ),
                    ..f
                })?;
                let s = match &st.heap.entry(spaces_idx).0 {
                    SymChunk::AtomicSpaces(s) => s.clone(),
                    _ => unreachable!(),
                };
                let s2 = st.pc.normalize(&SymTerm::Diff(
                    Box::new(s),
                    Box::new(SymTerm::Singleton(Box::new(pair.clone()))),
                ));
                st.heap.set_chunk_at(spaces_idx, SymChunk::AtomicSpaces(s2));
                let to_remove: Vec<SymTerm> = st
                    .opened
                    .iter()
                    .filter(|p| st.pc.entails_eq(p, &pair) == Entails::Yes)
                    .cloned()
                    .collect();
                for p in to_remove {
                    st.opened.remove(&p);
                }
                Ok((st, SymTerm::unit()))
            }
            GhostInstrKind::LemCall(f, args) => {
                let callee = self.eval(&st, env, f, span)?;
                self.exec_lemma_call(st, &callee, args, env, span)
            }
            GhostInstrKind::HeapUpdate(l, r) => {
                let addr = self.eval(&st, env, l, span)?;
                let val = self.eval(&st, env, r, span)?;
                let hsym = self.syms.fresh("h");
                let old = self.syms.fresh("old");
                let flex: BTreeSet<SymId> = [hsym, old].into_iter().collect();
                let mut out = ConsumeOut::default();
                self.consume_leaf(
                    &mut st,
                    SymChunk::Heap(SymTerm::Sym(hsym)),
                    Fraction::one(),
                    &flex,
                    &mut out,
                    span,
                )?;
                self.consume_leaf(
                    &mut st,
                    SymChunk::PointsTo(addr.clone(), SymTerm::Sym(old)),
                    Fraction::one(),
                    &flex,
                    &mut out,
                    span,
                )?;
                let h_val = st.pc.normalize(&SymTerm::Sym(hsym));
                let updated =
                    heap_value_update(&h_val, &st.pc.normalize(&addr), &st.pc.normalize(&val))
                        .ok_or_else(|| {
                            self.fail(span, "heap chunk update requires a ground heap value", &st)
                        })?;
                st.heap.add(
                    SymChunk::Heap(SymTerm::Lit(updated)),
                    Fraction::one(),
                    &st.pc,
                );
                self.produce_cell(&mut st, false, addr, val, Fraction::one());
                Ok((st, SymTerm::unit()))
            }
        }
    }

    fn exec_lemma_call(
        &mut self,
        mut st: SymbolicState,
        callee: &SymTerm,
        args: &[GhostExpr],
        env: &SymEnv,
        span: Span,
    ) -> Result<(SymbolicState, SymTerm), Failure> {
        // locate the (linear) lemma-type chunk for the callee
        let mut found: Option<(usize, String, Vec<SymTerm>)> = None;
        for (i, (c, f)) in st.heap.iter().enumerate() {
            if let SymChunk::LemType(v, t, targs) = c {
                if !f.is_zero() && st.pc.entails_eq(v, callee) == Entails::Yes {
                    found = Some((i, t.clone(), targs.clone()));
                    break;
                }
            }
        }
        let Some((idx, t, targs)) = found else {
            return Err(self.fail(
                span,
                format!(
                    "lemma call: no lemma type chunk for callee {} (lemma type chunks are linear)",
                    self.syms.show(callee)
                ),
                &st,
            ));
        };
        let Some(GhostDecl::LemType {
            type_params,
            lemma_params,
            forall_params,
            req,
            ens,
            ..
        }) = self.decls.lem_type(&t)
        else {
            return Err(self.fail(span, format!("unknown lemma type `{t}`"), &st));
        };
        let (type_params, lemma_params, forall_params, req, ens) = (
            type_params.clone(),
            lemma_params.clone(),
            forall_params.clone(),
            req.clone(),
            ens.clone(),
        );
        if args.len() != lemma_params.len() {
            return Err(self.fail(
                span,
                format!(
                    "lemma call expects {} argument(s), got {}",
                    lemma_params.len(),
                    args.len()
                ),
                &st,
            ));
        }
        let have = st.heap.entry(idx).1;
        if have < Fraction::one() {
            return Err(self.fail(
                span,
                format!("lemma call requires a full lemma type chunk, have {have}"),
                &st,
            ));
        }
        let arg_terms = args
            .iter()
            .map(|a| self.eval(&st, env, a, span))
            .collect::<Result<Vec<_>, _>>()?;
        // the chunk is unavailable for the duration of the call
        let chunk = st.heap.entry(idx).0.clone();
        st.heap.remove_at(idx, Fraction::one()).expect("full chunk");
        let mut decl_env = SymEnv::new();
        for (p, a) in type_params.iter().zip(&targs) {
            decl_env.ghost.insert(p.clone(), a.clone());
        }
        for (p, a) in lemma_params.iter().zip(&arg_terms) {
            decl_env.ghost.insert(p.clone(), a.clone());
        }
        // forall variables are chosen by the caller: unification variables
        let mut flex: BTreeSet<SymId> = BTreeSet::new();
        for p in &forall_params {
            let id = self.syms.fresh(p);
            flex.insert(id);
            decl_env.ghost.insert(p.clone(), SymTerm::Sym(id));
        }
        let mut out = ConsumeOut::default();
        self.consume_rec(
            &mut st,
            &decl_env,
            &req,
            self.cfg.unfold_depth,
            &mut flex,
            &mut out,
        )
        .map_err(|f| Failure {
            message: format!("lemma call: cannot consume the precondition: {}", f.message),
            ..f
        })?;
        st.heap.add(chunk, Fraction::one(), &st.pc);
        self.stats.produced_chunks += 1;
        let res = self.fresh("res");
        let mut env_ens = decl_env;
        env_ens.ghost.insert("res".to_string(), res.clone());
        self.produce(&mut st, &env_ens, &ens)?;
        Ok((st, res))
    }

    fn the_atomic_spaces_chunk(&self, st: &SymbolicState, span: Span) -> Result<usize, Failure> {
        let idxs = st
            .heap
            .indices_of(|c| matches!(c, SymChunk::AtomicSpaces(_)));
        match idxs.len() {
            0 => Err(self.fail(
                span,
                "no atomic_spaces chunk in scope (atomic spaces can only be opened or closed inside a ghost operation)",
                st,
            )),
            1 => Ok(idxs[0]),
            _ => Err(self.fail(span, "multiple atomic_spaces chunks in scope", st)),
        }
    }
}

/// `h[l := v]` on the set-of-pairs encoding of heap values.
fn heap_value_update(h: &SymTerm, addr: &SymTerm, val: &SymTerm) -> Option<GhostValue> {
    let (SymTerm::Lit(GhostValue::FinSet(cells)), SymTerm::Lit(a), SymTerm::Lit(v)) =
        (h, addr, val)
    else {
        return None;
    };
    let mut out: BTreeSet<GhostValue> = cells
        .iter()
        .filter(|c| !matches!(c, GhostValue::Pair(x, _) if **x == *a))
        .cloned()
        .collect();
    out.insert(GhostValue::pair(a.clone(), v.clone()));
    Some(GhostValue::FinSet(out))
}

/// A short description of the head of a command, used for snapshot labels.
pub fn head_of(c: &AnnotatedCommand) -> String {
    match &c.kind {
        AnnotatedCommandKind::Expr(e) => e.to_string(),
        AnnotatedCommandKind::Instr(i) => i.to_string(),
        AnnotatedCommandKind::Let(x, rhs, _) => {
            if x == "_" {
                head_of(rhs)
            } else {
                format!("let {x} = {}", head_of(rhs))
            }
        }
        AnnotatedCommandKind::Par { .. } => "par".to_string(),
        AnnotatedCommandKind::GLet(g, rhs, _) => {
            let rhs = ghost_head(rhs);
            if g == "_" {
                rhs
            } else {
                format!("glet {g} = {rhs}")
            }
        }
    }
}

fn ghost_head(c: &OuterGhost) -> String {
    match &c.kind {
        OuterGhostKind::Inner(g) => match g {
            InnerGhost::Instr(i) => i.to_string(),
            InnerGhost::GLet(..) => "glet".to_string(),
        },
        OuterGhostKind::ProduceLemPtrChunk { lem_type, .. } => {
            format!("produce_lem_ptr_chunk {lem_type}")
        }
        OuterGhostKind::CreateAtomicSpace(n, i) => format!("create_atomic_space({n}, {i})"),
        OuterGhostKind::DestroyAtomicSpace(n, i) => format!("destroy_atomic_space({n}, {i})"),
    }
}
