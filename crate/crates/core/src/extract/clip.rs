use super::eval::{eval_num, EvalEnv};
use crate::dsl::ast::*;
use crate::{HyperRect, Interval};

/// `Σ coeffs[i]·x_i + constant` over the ego's continuous fields.
struct Linear {
    coeffs: Vec<f64>,
    constant: Interval,
}

fn reads_state(e: &Expr, fields: &[String]) -> bool {
    let mut hit = false;
    e.walk(&mut |x| match &x.kind {
        ExprKind::Other(_) => hit = true,
        ExprKind::Attr(b, f) if matches!(b.kind, ExprKind::Ego) && fields.iter().any(|g| g == f) => hit = true,
        ExprKind::Call(c, _) if matches!(&c.kind, ExprKind::Name(n) if n == "dist") => hit = true,
        _ => {}
    });
    hit
}

fn linearize(e: &Expr, env: &EvalEnv) -> Option<Linear> {
    let n = env.fields.len();
    if !reads_state(e, env.fields) {
        let c = eval_num(e, env).ok()?;
        return Some(Linear {
            coeffs: vec![0.0; n],
            constant: c,
        });
    }
    match &e.kind {
        ExprKind::Attr(b, f) if matches!(b.kind, ExprKind::Ego) => {
            let i = env.fields.iter().position(|g| g == f)?;
            let mut coeffs = vec![0.0; n];
            coeffs[i] = 1.0;
            Some(Linear {
                coeffs,
                constant: Interval::point(0.0),
            })
        }
        ExprKind::Unary(UnOp::Neg, a) => Some(scale(linearize(a, env)?, -1.0)),
        ExprKind::Binary(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            let l = linearize(a, env)?;
            let mut r = linearize(b, env)?;
            if *op == BinOp::Sub {
                r = scale(r, -1.0);
            }
            Some(Linear {
                coeffs: l.coeffs.iter().zip(&r.coeffs).map(|(x, y)| x + y).collect(),
                constant: l.constant.add(&r.constant),
            })
        }
        ExprKind::Binary(BinOp::Mul, a, b) => {
            let (l, r) = (linearize(a, env)?, linearize(b, env)?);
            let is_const = |x: &Linear| x.coeffs.iter().all(|c| *c == 0.0) && x.constant.is_point();
            if is_const(&l) {
                Some(scale(r, l.constant.lo))
            } else if is_const(&r) {
                Some(scale(l, r.constant.lo))
            } else {
                None
            }
        }
        ExprKind::Binary(BinOp::Div, a, b) => {
            let r = linearize(b, env)?;
            if r.coeffs.iter().any(|c| *c != 0.0) || !r.constant.is_point() || r.constant.lo == 0.0 {
                return None;
            }
            Some(scale(linearize(a, env)?, 1.0 / r.constant.lo))
        }
        _ => None,
    }
}

fn scale(l: Linear, k: f64) -> Linear {
    Linear {
        coeffs: l.coeffs.iter().map(|c| c * k).collect(),
        constant: l.constant.mul(&Interval::point(k)),
    }
}

/// Tighten `rect` with one atom `lin op 0`. Returns false if the atom
/// cannot hold anywhere in `rect`.
fn apply(rect: &mut HyperRect, lin: &Linear, op: CmpOp) -> bool {
    if op == CmpOp::Ne {
        return true;
    }
    for i in 0..lin.coeffs.len() {
        let a = lin.coeffs[i];
        if a == 0.0 {
            continue;
        }
        // a·x_i op -(constant + Σ_{j≠i} a_j·X_j)
        let mut rest = lin.constant;
        for (j, &aj) in lin.coeffs.iter().enumerate() {
            if j != i && aj != 0.0 {
                rest = rest.add(&rect.get(j).mul(&Interval::point(aj)));
            }
        }
        let t = rest.neg();
        let cur = rect.get(i);
        let (mut lo, mut hi) = (cur.lo, cur.hi);
        let upper = matches!(op, CmpOp::Lt | CmpOp::Le | CmpOp::Eq);
        let lower = matches!(op, CmpOp::Gt | CmpOp::Ge | CmpOp::Eq);
        if upper {
            let b = t.hi / a;
            if a > 0.0 {
                hi = hi.min(b);
            } else {
                lo = lo.max(b);
            }
        }
        if lower {
            let b = t.lo / a;
            if a > 0.0 {
                lo = lo.max(b);
            } else {
                hi = hi.min(b);
            }
        }
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return false;
        }
        rect.set(i, Interval { lo, hi });
    }
    true
}

/// Shrink the ego box to the part that may satisfy `guard`.
///
/// Only top-level conjuncts that are linear in the ego's own continuous
/// fields are used; every other atom is ignored. The result contains every
/// point of the box that satisfies the guard. `None` means no point can.
pub fn clip_guard(guard: &Expr, env: &EvalEnv) -> Option<HyperRect> {
    let mut rect = env.ego.rect.clone();
    let mut atoms = Vec::new();
    for c in guard.conjuncts() {
        if let ExprKind::Compare(first, rest) = &c.kind {
            let mut left = first.as_ref();
            for (op, right) in rest {
                atoms.push((left, *op, right));
                left = right;
            }
        }
    }
    // Two sweeps let multi-field atoms use bounds tightened by later atoms.
    for _ in 0..2 {
        for (l, op, r) in &atoms {
            let clip_env = EvalEnv {
                fields: env.fields,
                pos_dims: env.pos_dims,
                ego: super::eval::AgentView {
                    rect: &rect,
                    ..env.ego
                },
                others: env.others.clone(),
                map: env.map,
            };
            let (Some(a), Some(b)) = (linearize(l, &clip_env), linearize(r, &clip_env)) else {
                continue;
            };
            if a.coeffs.iter().chain(&b.coeffs).all(|c| *c == 0.0) {
                continue;
            }
            let diff = Linear {
                coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
                constant: a.constant.sub(&b.constant),
            };
            let mut next = rect.clone();
            if !apply(&mut next, &diff, *op) {
                return None;
            }
            rect = next;
        }
    }
    Some(rect)
}
