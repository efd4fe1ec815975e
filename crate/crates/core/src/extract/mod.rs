//! Transition and assertion extraction from checked decision logic, and
//! three-valued evaluation of guards over boxes.

mod clip;
mod eval;
mod tribool;
mod unroll;

use std::collections::HashMap;

use crate::dsl::ast::*;
use crate::dsl::{CheckedProgram, DslError, DslErrorKind, Span, TACTICAL_FIELD};

pub use clip::clip_guard;
pub use eval::{compare_intervals, eval, eval_bool, eval_num, AgentView, EvalEnv, EvalError, TrackQuery, Value};
pub use tribool::TriBool;
pub use unroll::{is_mode_only, unroll_quantifiers, Resolver, OTHERS};

/// Upper bound on enumerated branch paths through one decision function.
const MAX_PATHS: usize = 1 << 14;

/// One discrete transition of the agent: `src → dst` when `guard` holds,
/// applying `resets` (field, value over the pre-state) in order.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSpec {
    pub src: String,
    pub dst: String,
    pub guard: Expr,
    pub resets: Vec<(String, Expr)>,
    pub span: Span,
}

/// A safety predicate; states where it fails are unsafe.
#[derive(Clone, Debug, PartialEq)]
pub struct AssertSpec {
    pub predicate: Expr,
    pub label: String,
    pub span: Span,
}

fn xerr(span: Span, msg: impl Into<String>) -> DslError {
    DslError::new(DslErrorKind::Extract, span, msg)
}

#[derive(Clone)]
struct PathState {
    conds: Vec<Expr>,
    locals: HashMap<String, Expr>,
    resets: Vec<(String, Expr)>,
    tactical: Option<(String, Span)>,
    done: bool,
}

struct Extractor<'a> {
    prog: &'a CheckedProgram,
    resolver: Resolver<'a>,
}

impl Extractor<'_> {
    fn walk(&self, stmts: &[Stmt], paths: Vec<PathState>) -> Result<Vec<PathState>, DslError> {
        let mut paths = paths;
        for s in stmts {
            let mut next = Vec::with_capacity(paths.len());
            for mut p in paths {
                if p.done {
                    next.push(p);
                    continue;
                }
                match &s.kind {
                    StmtKind::Assign(target, value) => {
                        let v = self.resolver.resolve(value, &p.locals)?;
                        match &target.kind {
                            ExprKind::Name(n) => {
                                p.locals.insert(n.clone(), v);
                            }
                            ExprKind::Attr(_, f) if f == TACTICAL_FIELD => {
                                let ExprKind::Mode(ModeKind::Tactical, m) = &v.kind else {
                                    return Err(xerr(value.span, "tactical mode must be assigned a mode constant"));
                                };
                                p.tactical = Some((m.clone(), s.span));
                            }
                            ExprKind::Attr(_, f) => {
                                p.resets.retain(|(g, _)| g != f);
                                p.resets.push((f.clone(), v));
                            }
                            _ => return Err(xerr(target.span, "invalid assignment target")),
                        }
                        next.push(p);
                    }
                    StmtKind::If(cond, body, orelse) => {
                        let c = self.resolver.resolve(cond, &p.locals)?;
                        let mut taken = p.clone();
                        taken.conds.push(c.clone());
                        next.extend(self.walk(body, vec![taken])?);
                        let mut skipped = p;
                        // Continuous negations are dropped: the branch not
                        // taken stays possible (over-approximation).
                        if is_mode_only(&c) {
                            skipped.conds.push(Expr::not(c));
                        }
                        next.extend(self.walk(orelse, vec![skipped])?);
                    }
                    StmtKind::Return(_) => {
                        p.done = true;
                        next.push(p);
                    }
                    _ => next.push(p),
                }
                if next.len() > MAX_PATHS {
                    return Err(xerr(s.span, format!("more than {MAX_PATHS} branch paths")));
                }
            }
            paths = next;
        }
        Ok(paths)
    }

    fn asserts(
        &self,
        stmts: &[Stmt],
        enclosing: &[Expr],
        locals: &mut HashMap<String, Expr>,
        out: &mut Vec<AssertSpec>,
    ) -> Result<(), DslError> {
        for s in stmts {
            match &s.kind {
                StmtKind::Assign(Expr { kind: ExprKind::Name(n), .. }, value) => {
                    let v = self.resolver.resolve(value, locals)?;
                    locals.insert(n.clone(), v);
                }
                StmtKind::If(cond, body, orelse) => {
                    let c = self.resolver.resolve(cond, locals)?;
                    let mut inner = enclosing.to_vec();
                    inner.push(c.clone());
                    self.asserts(body, &inner, &mut locals.clone(), out)?;
                    inner.pop();
                    inner.push(Expr::not(c));
                    self.asserts(orelse, &inner, &mut locals.clone(), out)?;
                }
                StmtKind::Assert(test, msg) => {
                    let mut pred = self.resolver.resolve(test, locals)?;
                    if let Some(ExprKind::Name(n)) = unresolved_local(&pred, self.prog) {
                        return Err(xerr(test.span, format!("`{n}` is only assigned conditionally before this assert")));
                    }
                    if !enclosing.is_empty() {
                        pred = Expr::or(Expr::not(Expr::all_of(enclosing.to_vec(), s.span)), pred);
                    }
                    let label = match msg.as_ref().map(|m| &m.kind) {
                        Some(ExprKind::Str(t)) => t.clone(),
                        _ => format!("assert at {}", s.span),
                    };
                    out.push(AssertSpec {
                        predicate: pred,
                        label,
                        span: s.span,
                    });
                }
                StmtKind::Return(_) => return Ok(()),
                _ => {}
            }
        }
        Ok(())
    }
}

/// A bare name left after resolution that is not a comprehension variable.
fn unresolved_local(e: &Expr, _prog: &CheckedProgram) -> Option<ExprKind> {
    let mut bound: Vec<String> = Vec::new();
    e.walk(&mut |x| {
        if let ExprKind::GenExp(_, clauses) = &x.kind {
            bound.extend(clauses.iter().map(|c| c.var.clone()));
        }
    });
    let mut found = None;
    e.walk(&mut |x| {
        if let ExprKind::Name(n) = &x.kind {
            let callee = crate::dsl::BUILTINS.contains(&n.as_str());
            if n != OTHERS && !callee && !bound.contains(n) && found.is_none() {
                found = Some(x.kind.clone());
            }
        }
    });
    found
}

fn tactical_atom(e: &Expr) -> Option<(bool, String)> {
    match &e.kind {
        ExprKind::Unary(UnOp::Not, inner) => tactical_atom(inner).map(|(eq, m)| (!eq, m)),
        ExprKind::Compare(a, rest) if rest.len() == 1 => {
            let (op, b) = &rest[0];
            let is_field = |x: &Expr| matches!(&x.kind, ExprKind::Attr(base, f) if matches!(base.kind, ExprKind::Ego) && f == TACTICAL_FIELD);
            let mode = |x: &Expr| match &x.kind {
                ExprKind::Mode(ModeKind::Tactical, m) => Some(m.clone()),
                _ => None,
            };
            let m = if is_field(a) {
                mode(b)?
            } else if is_field(b) {
                mode(a)?
            } else {
                return None;
            };
            match op {
                CmpOp::Eq => Some((true, m)),
                CmpOp::Ne => Some((false, m)),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Extract transitions and asserts for a scenario with `k` agents.
///
/// Every branch path that assigns the tactical mode yields one transition
/// per source mode admitted by the path's `ego.tactical_mode` atoms; the
/// remaining path conditions form the guard. Quantifiers are unrolled for
/// `k - 1` other agents.
pub fn extract_transitions(
    prog: &CheckedProgram,
    k: usize,
) -> Result<(Vec<TransitionSpec>, Vec<AssertSpec>), DslError> {
    if k == 0 {
        return Err(xerr(Span::default(), "a scenario needs at least one agent"));
    }
    let ex = Extractor {
        prog,
        resolver: Resolver { prog },
    };
    let func = prog.decision();
    let start = PathState {
        conds: Vec::new(),
        locals: HashMap::new(),
        resets: Vec::new(),
        tactical: None,
        done: false,
    };
    let paths = ex.walk(&func.body, vec![start])?;

    // Each transition with the text of its guard conjuncts.
    let mut transitions: Vec<(TransitionSpec, Vec<String>)> = Vec::new();
    for p in paths {
        let Some((dst, span)) = p.tactical else { continue };
        let mut src: Vec<String> = prog.tactical_modes.clone();
        let mut constrained = false;
        let mut guard_atoms = Vec::new();
        for c in &p.conds {
            for atom in c.conjuncts() {
                match tactical_atom(atom) {
                    Some((true, m)) => {
                        src.retain(|s| *s == m);
                        constrained = true;
                    }
                    Some((false, m)) => {
                        src.retain(|s| *s != m);
                        constrained = true;
                    }
                    None => guard_atoms.push(atom.clone()),
                }
            }
        }
        if !constrained {
            return Err(xerr(
                span,
                "ambiguous source mode: no condition on `ego.tactical_mode` guards this assignment",
            ));
        }
        let mut atom_text: Vec<String> = guard_atoms.iter().map(|a| a.to_string()).collect();
        atom_text.sort();
        atom_text.dedup();
        let guard = unroll_quantifiers(&Expr::all_of(guard_atoms, span), k)?;
        let resets = p
            .resets
            .iter()
            .map(|(f, e)| Ok((f.clone(), unroll_quantifiers(e, k)?)))
            .collect::<Result<Vec<_>, DslError>>()?;
        for s in src {
            if s == dst && resets.is_empty() {
                continue;
            }
            let t = TransitionSpec {
                src: s,
                dst: dst.clone(),
                guard: guard.clone(),
                resets: resets.clone(),
                span,
            };
            transitions.push((t, atom_text.clone()));
        }
    }
    // A transition whose guard conjuncts include all of another's, with the
    // same endpoints and resets, adds no behavior; keep the weaker one.
    let same_edge = |a: &TransitionSpec, b: &TransitionSpec| {
        a.src == b.src
            && a.dst == b.dst
            && a.resets.len() == b.resets.len()
            && a.resets.iter().zip(&b.resets).all(|(x, y)| x.0 == y.0 && x.1.to_string() == y.1.to_string())
    };
    let subsumed = |i: usize| {
        let (t, atoms) = &transitions[i];
        transitions.iter().enumerate().any(|(j, (u, other))| {
            j != i
                && same_edge(t, u)
                && other.iter().all(|a| atoms.contains(a))
                && (other.len() < atoms.len() || j < i)
        })
    };
    let keep: Vec<bool> = (0..transitions.len()).map(|i| !subsumed(i)).collect();
    let transitions: Vec<TransitionSpec> = transitions
        .into_iter()
        .zip(keep)
        .filter_map(|(t, k)| k.then_some(t.0))
        .collect();

    let mut asserts = Vec::new();
    ex.asserts(&func.body, &[], &mut HashMap::new(), &mut asserts)?;
    for a in &mut asserts {
        a.predicate = unroll_quantifiers(&a.predicate, k)?;
    }
    Ok((transitions, asserts))
}
