//! Direct evaluator for resolved decision-logic expressions over concrete
//! agent states. Quantifiers iterate the other agents instead of being
//! unrolled, so it serves as an independent check of unrolling.

use std::collections::HashMap;

use versekit::dsl::ast::{BinOp, CmpOp, Expr, ExprKind, UnOp};
use versekit::dsl::{TACTICAL_FIELD, TRACK_FIELD};
use versekit::extract::OTHERS;

#[derive(Debug, Clone)]
pub struct Agent {
    pub state: Vec<f64>,
    pub tactical: String,
    pub track: String,
}

pub struct World<'a> {
    pub fields: &'a [String],
    pub pos_dims: usize,
    pub agents: &'a [Agent],
    pub ego: usize,
    pub track_height: &'a dyn Fn(&str) -> Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum V {
    B(bool),
    N(f64),
    Mode(String),
    Agent(usize),
}

impl World<'_> {
    pub fn eval_bool(&self, e: &Expr) -> bool {
        match self.eval(e, &HashMap::new()) {
            V::B(b) => b,
            v => panic!("expected a boolean, got {v:?}"),
        }
    }

    fn num(&self, e: &Expr, env: &HashMap<String, usize>) -> f64 {
        match self.eval(e, env) {
            V::N(x) => x,
            v => panic!("expected a number, got {v:?}"),
        }
    }

    fn boolean(&self, e: &Expr, env: &HashMap<String, usize>) -> bool {
        match self.eval(e, env) {
            V::B(b) => b,
            v => panic!("expected a boolean, got {v:?}"),
        }
    }

    fn agent(&self, e: &Expr, env: &HashMap<String, usize>) -> usize {
        match self.eval(e, env) {
            V::Agent(i) => i,
            v => panic!("expected an agent, got {v:?}"),
        }
    }

    fn mode(&self, e: &Expr, env: &HashMap<String, usize>) -> String {
        match self.eval(e, env) {
            V::Mode(m) => m,
            v => panic!("expected a mode, got {v:?}"),
        }
    }

    /// Python semantics for one generator: true if any (or all) bindings
    /// of the clauses make `elt` true.
    fn quantify(&self, any: bool, elt: &Expr, clauses: &[versekit::dsl::ast::ForClause], env: &HashMap<String, usize>) -> bool {
        let Some((c, rest)) = clauses.split_first() else {
            return self.boolean(elt, env);
        };
        assert!(matches!(&c.iter.kind, ExprKind::Name(n) if n == OTHERS), "generator over {:?}", c.iter);
        for j in (0..self.agents.len()).filter(|j| *j != self.ego) {
            let mut inner = env.clone();
            inner.insert(c.var.clone(), j);
            if !c.conds.iter().all(|x| self.boolean(x, &inner)) {
                continue;
            }
            let v = self.quantify(any, elt, rest, &inner);
            if v == any {
                return any;
            }
        }
        !any
    }

    fn eval(&self, e: &Expr, env: &HashMap<String, usize>) -> V {
        match &e.kind {
            ExprKind::Num(x) => V::N(*x),
            ExprKind::Bool(b) => V::B(*b),
            ExprKind::Ego => V::Agent(self.ego),
            ExprKind::Name(n) => V::Agent(*env.get(n).unwrap_or_else(|| panic!("unbound name {n}"))),
            ExprKind::Mode(_, m) => V::Mode(m.clone()),
            ExprKind::Attr(base, f) => {
                let a = &self.agents[self.agent(base, env)];
                if f == TACTICAL_FIELD {
                    V::Mode(a.tactical.clone())
                } else if f == TRACK_FIELD {
                    V::Mode(a.track.clone())
                } else {
                    let i = self.fields.iter().position(|g| g == f).expect("known field");
                    V::N(a.state[i])
                }
            }
            ExprKind::Unary(UnOp::Neg, a) => V::N(-self.num(a, env)),
            ExprKind::Unary(UnOp::Not, a) => V::B(!self.boolean(a, env)),
            ExprKind::Binary(op, a, b) => match op {
                BinOp::And => V::B(self.boolean(a, env) && self.boolean(b, env)),
                BinOp::Or => V::B(self.boolean(a, env) || self.boolean(b, env)),
                BinOp::Add => V::N(self.num(a, env) + self.num(b, env)),
                BinOp::Sub => V::N(self.num(a, env) - self.num(b, env)),
                BinOp::Mul => V::N(self.num(a, env) * self.num(b, env)),
                BinOp::Div => V::N(self.num(a, env) / self.num(b, env)),
            },
            ExprKind::Compare(first, rest) => {
                let mut left = self.eval(first, env);
                for (op, x) in rest {
                    let right = self.eval(x, env);
                    let ok = match (&left, &right) {
                        (V::N(a), V::N(b)) => op.apply(*a, *b),
                        (V::Mode(a), V::Mode(b)) => match op {
                            CmpOp::Eq => a == b,
                            CmpOp::Ne => a != b,
                            _ => panic!("ordering on modes"),
                        },
                        _ => panic!("comparison of {left:?} and {right:?}"),
                    };
                    if !ok {
                        return V::B(false);
                    }
                    left = right;
                }
                V::B(true)
            }
            ExprKind::Call(callee, args) => {
                let ExprKind::Name(f) = &callee.kind else {
                    panic!("call of {callee:?}")
                };
                match f.as_str() {
                    "any" | "all" => {
                        let ExprKind::GenExp(elt, clauses) = &args[0].kind else {
                            panic!("quantifier without generator")
                        };
                        V::B(self.quantify(f == "any", elt, clauses, env))
                    }
                    "trackHeight" => V::N((self.track_height)(&self.mode(&args[0], env)).expect("known track")),
                    "sameTrack" => V::B(self.mode(&args[0], env) == self.mode(&args[1], env)),
                    "dist" => {
                        let a = &self.agents[self.agent(&args[0], env)].state;
                        let b = &self.agents[self.agent(&args[1], env)].state;
                        V::N((0..self.pos_dims).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt())
                    }
                    "abs" => V::N(self.num(&args[0], env).abs()),
                    "min" => V::N(args.iter().map(|a| self.num(a, env)).fold(f64::INFINITY, f64::min)),
                    "max" => V::N(args.iter().map(|a| self.num(a, env)).fold(f64::NEG_INFINITY, f64::max)),
                    other => panic!("unknown builtin {other}"),
                }
            }
            other => panic!("unsupported expression {other:?}"),
        }
    }
}
