use thiserror::Error;

use super::tribool::TriBool;
use crate::dsl::ast::*;
use crate::dsl::{Span, TACTICAL_FIELD, TRACK_FIELD};
use crate::{HyperRect, Interval};

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{span}: evaluation error: {message}")]
pub struct EvalError {
    pub span: Span,
    pub message: String,
}

fn everr(span: Span, msg: impl Into<String>) -> EvalError {
    EvalError {
        span,
        message: msg.into(),
    }
}

/// Map geometry visible to guards.
pub trait TrackQuery {
    /// Layer height (3-D) or lateral offset (2-D) of a track mode; for a
    /// transition mode, the value of its destination lane.
    fn track_height(&self, mode: &str) -> Option<f64>;
}

/// One agent as seen by the evaluator: a state box and concrete modes.
#[derive(Clone, Copy, Debug)]
pub struct AgentView<'a> {
    pub rect: &'a HyperRect,
    pub tactical: &'a str,
    pub track: &'a str,
}

pub struct EvalEnv<'a> {
    pub fields: &'a [String],
    /// Number of leading fields that are workspace position.
    pub pos_dims: usize,
    pub ego: AgentView<'a>,
    pub others: Vec<AgentView<'a>>,
    pub map: &'a dyn TrackQuery,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Bool(TriBool),
    Num(Interval),
    Mode(ModeKind, String),
    /// `None` is the ego agent, `Some(j)` the j-th other agent.
    Agent(Option<usize>),
}

impl EvalEnv<'_> {
    fn agent(&self, who: Option<usize>, span: Span) -> Result<&AgentView<'_>, EvalError> {
        match who {
            None => Ok(&self.ego),
            Some(j) => self
                .others
                .get(j)
                .ok_or_else(|| everr(span, format!("other agent {j} does not exist"))),
        }
    }

    fn field_index(&self, f: &str) -> Option<usize> {
        self.fields.iter().position(|g| g == f)
    }
}

/// Interval abstract interpretation of an expression.
///
/// Numbers evaluate to intervals, comparisons and connectives to Kleene
/// verdicts; modes are concrete. Point boxes give exact verdicts.
pub fn eval(e: &Expr, env: &EvalEnv) -> Result<Value, EvalError> {
    Ok(match &e.kind {
        ExprKind::Num(v) => Value::Num(Interval::point(*v)),
        ExprKind::Bool(b) => Value::Bool(TriBool::from_bool(*b)),
        ExprKind::Ego => Value::Agent(None),
        ExprKind::Other(j) => Value::Agent(Some(*j)),
        ExprKind::Mode(k, n) => Value::Mode(*k, n.clone()),
        ExprKind::Attr(base, f) => {
            let Value::Agent(who) = eval(base, env)? else {
                return Err(everr(e.span, format!("`.{f}` of a non-agent value")));
            };
            let a = env.agent(who, e.span)?;
            if f == TACTICAL_FIELD {
                Value::Mode(ModeKind::Tactical, a.tactical.to_string())
            } else if f == TRACK_FIELD {
                Value::Mode(ModeKind::Track, a.track.to_string())
            } else {
                let i = env
                    .field_index(f)
                    .ok_or_else(|| everr(e.span, format!("unknown field `{f}`")))?;
                Value::Num(a.rect.get(i))
            }
        }
        ExprKind::Unary(UnOp::Neg, a) => Value::Num(num(a, env)?.neg()),
        ExprKind::Unary(UnOp::Not, a) => Value::Bool(eval_bool(a, env)?.not()),
        ExprKind::Binary(op, a, b) => match op {
            BinOp::And => {
                let l = eval_bool(a, env)?;
                if l == TriBool::DefFalse {
                    return Ok(Value::Bool(l));
                }
                Value::Bool(l.and(eval_bool(b, env)?))
            }
            BinOp::Or => {
                let l = eval_bool(a, env)?;
                if l == TriBool::DefTrue {
                    return Ok(Value::Bool(l));
                }
                Value::Bool(l.or(eval_bool(b, env)?))
            }
            BinOp::Add => Value::Num(num(a, env)?.add(&num(b, env)?)),
            BinOp::Sub => Value::Num(num(a, env)?.sub(&num(b, env)?)),
            BinOp::Mul => Value::Num(num(a, env)?.mul(&num(b, env)?)),
            BinOp::Div => {
                let d = num(b, env)?;
                Value::Num(
                    num(a, env)?
                        .div(&d)
                        .map_err(|_| everr(e.span, format!("division by an interval containing zero [{}, {}]", d.lo, d.hi)))?,
                )
            }
        },
        ExprKind::Compare(first, rest) => {
            let mut left = eval(first, env)?;
            let mut acc = TriBool::DefTrue;
            for (op, r) in rest {
                let right = eval(r, env)?;
                acc = acc.and(compare(*op, &left, &right, r.span)?);
                if acc == TriBool::DefFalse {
                    break;
                }
                left = right;
            }
            Value::Bool(acc)
        }
        ExprKind::Call(c, args) => call(c, args, e.span, env)?,
        ExprKind::Name(n) => return Err(everr(e.span, format!("unresolved name `{n}`"))),
        _ => return Err(everr(e.span, "expression cannot be evaluated")),
    })
}

pub fn eval_bool(e: &Expr, env: &EvalEnv) -> Result<TriBool, EvalError> {
    match eval(e, env)? {
        Value::Bool(b) => Ok(b),
        _ => Err(everr(e.span, "expected a boolean")),
    }
}

pub fn eval_num(e: &Expr, env: &EvalEnv) -> Result<Interval, EvalError> {
    num(e, env)
}

fn num(e: &Expr, env: &EvalEnv) -> Result<Interval, EvalError> {
    match eval(e, env)? {
        Value::Num(i) => Ok(i),
        _ => Err(everr(e.span, "expected a number")),
    }
}

/// Interval comparison verdict.
pub fn compare_intervals(op: CmpOp, a: &Interval, b: &Interval) -> TriBool {
    use TriBool::*;
    match op {
        CmpOp::Lt => {
            if a.hi < b.lo {
                DefTrue
            } else if a.lo >= b.hi {
                DefFalse
            } else {
                Unknown
            }
        }
        CmpOp::Le => {
            if a.hi <= b.lo {
                DefTrue
            } else if a.lo > b.hi {
                DefFalse
            } else {
                Unknown
            }
        }
        CmpOp::Gt => compare_intervals(CmpOp::Lt, b, a),
        CmpOp::Ge => compare_intervals(CmpOp::Le, b, a),
        CmpOp::Eq => {
            if a.hi < b.lo || b.hi < a.lo {
                DefFalse
            } else if a.is_point() && b.is_point() {
                DefTrue
            } else {
                Unknown
            }
        }
        CmpOp::Ne => compare_intervals(CmpOp::Eq, a, b).not(),
    }
}

fn compare(op: CmpOp, a: &Value, b: &Value, span: Span) -> Result<TriBool, EvalError> {
    match (a, b) {
        (Value::Num(x), Value::Num(y)) => Ok(compare_intervals(op, x, y)),
        (Value::Mode(ka, x), Value::Mode(kb, y)) if ka == kb => match op {
            CmpOp::Eq => Ok(TriBool::from_bool(x == y)),
            CmpOp::Ne => Ok(TriBool::from_bool(x != y)),
            _ => Err(everr(span, "modes are only comparable with == and !=")),
        },
        _ => Err(everr(span, "incomparable values")),
    }
}

fn call(callee: &Expr, args: &[Expr], span: Span, env: &EvalEnv) -> Result<Value, EvalError> {
    let ExprKind::Name(f) = &callee.kind else {
        return Err(everr(span, "only builtins can be called"));
    };
    let agent_arg = |e: &Expr| -> Result<Option<usize>, EvalError> {
        match eval(e, env)? {
            Value::Agent(w) => Ok(w),
            _ => Err(everr(e.span, "expected an agent")),
        }
    };
    let mode_arg = |e: &Expr| -> Result<String, EvalError> {
        match eval(e, env)? {
            Value::Mode(ModeKind::Track, m) => Ok(m),
            _ => Err(everr(e.span, "expected a track mode")),
        }
    };
    Ok(match (f.as_str(), args) {
        ("trackHeight", [m]) => {
            let m = mode_arg(m)?;
            let h = env
                .map
                .track_height(&m)
                .ok_or_else(|| everr(span, format!("track mode `{m}` has no height on this map")))?;
            Value::Num(Interval::point(h))
        }
        ("sameTrack", [a, b]) => Value::Bool(TriBool::from_bool(mode_arg(a)? == mode_arg(b)?)),
        ("dist", [a, b]) => {
            let (ra, rb) = (env.agent(agent_arg(a)?, span)?.rect, env.agent(agent_arg(b)?, span)?.rect);
            let mut sum = Interval::point(0.0);
            for i in 0..env.pos_dims {
                sum = sum.add(&ra.get(i).sub(&rb.get(i)).sqr());
            }
            Value::Num(sum.sqrt())
        }
        ("abs", [a]) => Value::Num(num(a, env)?.abs()),
        ("min", [first, rest @ ..]) => {
            let mut acc = num(first, env)?;
            for r in rest {
                let v = num(r, env)?;
                acc = Interval {
                    lo: acc.lo.min(v.lo),
                    hi: acc.hi.min(v.hi),
                };
            }
            Value::Num(acc)
        }
        ("max", [first, rest @ ..]) => {
            let mut acc = num(first, env)?;
            for r in rest {
                let v = num(r, env)?;
                acc = Interval {
                    lo: acc.lo.max(v.lo),
                    hi: acc.hi.max(v.hi),
                };
            }
            Value::Num(acc)
        }
        ("any" | "all", _) => return Err(everr(span, format!("`{f}` must be unrolled before evaluation"))),
        _ => return Err(everr(span, format!("unknown builtin `{f}`"))),
    })
}
