use std::collections::HashMap;

use crate::dsl::ast::*;
use crate::dsl::{CheckedProgram, DslError, DslErrorKind, TACTICAL_FIELD, TRACK_FIELD};

/// Placeholder name for the others collection after resolution.
/// Not a valid identifier, so it cannot collide with user names.
pub const OTHERS: &str = "<others>";

fn xerr(span: crate::dsl::Span, msg: impl Into<String>) -> DslError {
    DslError::new(DslErrorKind::Extract, span, msg)
}

/// Name resolution context for one decision function.
pub struct Resolver<'a> {
    pub prog: &'a CheckedProgram,
}

impl Resolver<'_> {
    /// Rewrite names to resolved forms: the ego parameter to `Ego`, enum
    /// members to `Mode`, locals to their (already resolved) definitions,
    /// and the others parameter to [`OTHERS`]. Comprehension variables stay
    /// as names for [`unroll_quantifiers`].
    pub fn resolve(&self, e: &Expr, locals: &HashMap<String, Expr>) -> Result<Expr, DslError> {
        let kind = match &e.kind {
            ExprKind::Name(n) => {
                if let Some(def) = locals.get(n) {
                    return Ok(def.clone());
                }
                if *n == self.prog.ego {
                    ExprKind::Ego
                } else if *n == self.prog.others {
                    ExprKind::Name(OTHERS.into())
                } else {
                    ExprKind::Name(n.clone())
                }
            }
            ExprKind::Attr(base, field) => {
                if let ExprKind::Name(n) = &base.kind {
                    if !locals.contains_key(n) {
                        if *n == self.prog.tactical_enum {
                            return Ok(Expr::new(ExprKind::Mode(ModeKind::Tactical, field.clone()), e.span));
                        }
                        if n == "TrackMode" {
                            return Ok(Expr::new(ExprKind::Mode(ModeKind::Track, field.clone()), e.span));
                        }
                    }
                }
                ExprKind::Attr(self.resolve(base, locals)?.boxed(), field.clone())
            }
            ExprKind::Unary(op, a) => ExprKind::Unary(*op, self.resolve(a, locals)?.boxed()),
            ExprKind::Binary(op, a, b) => {
                ExprKind::Binary(*op, self.resolve(a, locals)?.boxed(), self.resolve(b, locals)?.boxed())
            }
            ExprKind::Compare(a, rest) => ExprKind::Compare(
                self.resolve(a, locals)?.boxed(),
                rest.iter()
                    .map(|(op, x)| Ok((*op, self.resolve(x, locals)?)))
                    .collect::<Result<_, DslError>>()?,
            ),
            ExprKind::Call(c, args) => ExprKind::Call(
                c.clone(),
                args.iter().map(|a| self.resolve(a, locals)).collect::<Result<_, _>>()?,
            ),
            ExprKind::GenExp(elt, clauses) => {
                let mut inner = locals.clone();
                let mut out = Vec::new();
                for c in clauses {
                    let iter = self.resolve(&c.iter, &inner)?;
                    inner.remove(&c.var);
                    let conds = c.conds.iter().map(|x| self.resolve(x, &inner)).collect::<Result<_, _>>()?;
                    out.push(ForClause {
                        var: c.var.clone(),
                        iter,
                        conds,
                    });
                }
                ExprKind::GenExp(self.resolve(elt, &inner)?.boxed(), out)
            }
            other => other.clone(),
        };
        Ok(Expr::new(kind, e.span))
    }
}

/// Replace free occurrences of `var` with `with`.
fn subst(e: &Expr, var: &str, with: &ExprKind) -> Expr {
    let kind = match &e.kind {
        ExprKind::Name(n) if n == var => with.clone(),
        ExprKind::Attr(b, f) => ExprKind::Attr(subst(b, var, with).boxed(), f.clone()),
        ExprKind::Unary(op, a) => ExprKind::Unary(*op, subst(a, var, with).boxed()),
        ExprKind::Binary(op, a, b) => ExprKind::Binary(*op, subst(a, var, with).boxed(), subst(b, var, with).boxed()),
        ExprKind::Compare(a, rest) => ExprKind::Compare(
            subst(a, var, with).boxed(),
            rest.iter().map(|(op, x)| (*op, subst(x, var, with))).collect(),
        ),
        ExprKind::Call(c, args) => ExprKind::Call(c.clone(), args.iter().map(|a| subst(a, var, with)).collect()),
        ExprKind::GenExp(elt, clauses) => {
            let mut shadowed = false;
            let mut out = Vec::new();
            for c in clauses {
                let iter = if shadowed { c.iter.clone() } else { subst(&c.iter, var, with) };
                shadowed |= c.var == var;
                let conds = if shadowed {
                    c.conds.clone()
                } else {
                    c.conds.iter().map(|x| subst(x, var, with)).collect()
                };
                out.push(ForClause {
                    var: c.var.clone(),
                    iter,
                    conds,
                });
            }
            let elt = if shadowed { (**elt).clone() } else { subst(elt, var, with) };
            ExprKind::GenExp(elt.boxed(), out)
        }
        ExprKind::Tuple(items) => ExprKind::Tuple(items.iter().map(|a| subst(a, var, with)).collect()),
        other => other.clone(),
    };
    Expr::new(kind, e.span)
}

fn expand(any: bool, elt: &Expr, clauses: &[ForClause], k: usize, span: crate::dsl::Span) -> Result<Expr, DslError> {
    let Some((c, rest)) = clauses.split_first() else {
        return Ok(elt.clone());
    };
    if !matches!(&c.iter.kind, ExprKind::Name(n) if n == OTHERS) {
        return Err(xerr(c.iter.span, "quantifier must range over the other agents"));
    }
    let mut items = Vec::new();
    for j in 0..k.saturating_sub(1) {
        let with = ExprKind::Other(j);
        let conds: Vec<Expr> = c.conds.iter().map(|x| subst(x, &c.var, &with)).collect();
        // Substituting through a generator keeps later rebindings intact.
        let sub = subst(
            &Expr::new(ExprKind::GenExp(elt.clone().boxed(), rest.to_vec()), span),
            &c.var,
            &with,
        );
        let ExprKind::GenExp(elt_sub, rest_sub) = sub.kind else {
            unreachable!()
        };
        let body = expand(any, &elt_sub, &rest_sub, k, span)?;
        let guard = Expr::all_of(conds, span);
        let item = if any {
            match guard.kind {
                ExprKind::Bool(true) => body,
                _ => Expr::and(guard, body),
            }
        } else {
            match guard.kind {
                ExprKind::Bool(true) => body,
                _ => Expr::or(Expr::not(guard), body),
            }
        };
        items.push(item);
    }
    Ok(if any {
        Expr::any_of(items, span)
    } else {
        Expr::all_of(items, span)
    })
}

/// Expand `any`/`all` over the other agents into a `(k-1)`-way
/// disjunction/conjunction with the bound variable replaced by
/// `Other(j)`. Nested quantifiers are expanded recursively.
pub fn unroll_quantifiers(e: &Expr, k: usize) -> Result<Expr, DslError> {
    let kind = match &e.kind {
        ExprKind::Call(c, args) => {
            if let (ExprKind::Name(f), [arg]) = (&c.kind, args.as_slice()) {
                if f == "any" || f == "all" {
                    let ExprKind::GenExp(elt, clauses) = &arg.kind else {
                        return Err(xerr(arg.span, format!("`{f}` expects a generator")));
                    };
                    let expanded = expand(f == "any", elt, clauses, k, e.span)?;
                    return unroll_quantifiers(&expanded, k);
                }
            }
            ExprKind::Call(c.clone(), args.iter().map(|a| unroll_quantifiers(a, k)).collect::<Result<_, _>>()?)
        }
        ExprKind::Attr(b, f) => ExprKind::Attr(unroll_quantifiers(b, k)?.boxed(), f.clone()),
        ExprKind::Unary(op, a) => ExprKind::Unary(*op, unroll_quantifiers(a, k)?.boxed()),
        ExprKind::Binary(op, a, b) => {
            ExprKind::Binary(*op, unroll_quantifiers(a, k)?.boxed(), unroll_quantifiers(b, k)?.boxed())
        }
        ExprKind::Compare(a, rest) => ExprKind::Compare(
            unroll_quantifiers(a, k)?.boxed(),
            rest.iter()
                .map(|(op, x)| Ok((*op, unroll_quantifiers(x, k)?)))
                .collect::<Result<_, DslError>>()?,
        ),
        ExprKind::GenExp(..) => return Err(xerr(e.span, "generator outside any()/all()")),
        other => other.clone(),
    };
    Ok(Expr::new(kind, e.span))
}

/// True when the value cannot depend on continuous state: only modes,
/// constants and track geometry of modes are read.
pub fn is_mode_only(e: &Expr) -> bool {
    let mut ok = true;
    e.walk(&mut |x| match &x.kind {
        ExprKind::Attr(b, f) if matches!(b.kind, ExprKind::Ego | ExprKind::Other(_) | ExprKind::Name(_)) => {
            if f != TRACK_FIELD && f != TACTICAL_FIELD {
                ok = false;
            }
        }
        ExprKind::Call(c, _) if matches!(&c.kind, ExprKind::Name(n) if n == "dist") => ok = false,
        _ => {}
    });
    ok
}
