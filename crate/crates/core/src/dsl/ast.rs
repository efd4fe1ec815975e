use std::fmt;

use super::token::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            _ => return None,
        })
    }

    /// `a op b` holds iff `b op.flip() a` holds.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            c => c,
        }
    }

    pub fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Tactical,
    Track,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForClause {
    pub var: String,
    pub iter: Expr,
    pub conds: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Str(String),
    Bool(bool),
    None,
    Name(String),
    Attr(Box<Expr>, String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `first op0 e0 op1 e1 ...`, kept as a chain.
    Compare(Box<Expr>, Vec<(CmpOp, Expr)>),
    Call(Box<Expr>, Vec<Expr>),
    GenExp(Box<Expr>, Vec<ForClause>),
    Tuple(Vec<Expr>),
    Lambda(Vec<String>, Box<Expr>),
    // Resolved forms produced by extraction.
    Ego,
    /// The i-th other agent, in agent order with the ego removed.
    Other(usize),
    Mode(ModeKind, String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    pub fn boxed(self) -> Box<Expr> {
        Box::new(self)
    }

    pub fn bool(b: bool, span: Span) -> Expr {
        Expr::new(ExprKind::Bool(b), span)
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        let span = a.span.to(b.span);
        Expr::new(ExprKind::Binary(BinOp::And, a.boxed(), b.boxed()), span)
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        let span = a.span.to(b.span);
        Expr::new(ExprKind::Binary(BinOp::Or, a.boxed(), b.boxed()), span)
    }

    pub fn not(a: Expr) -> Expr {
        let span = a.span;
        Expr::new(ExprKind::Unary(UnOp::Not, a.boxed()), span)
    }

    /// Conjunction of all items; `True` when empty.
    pub fn all_of(items: Vec<Expr>, span: Span) -> Expr {
        items.into_iter().reduce(Expr::and).unwrap_or(Expr::bool(true, span))
    }

    /// Disjunction of all items; `False` when empty.
    pub fn any_of(items: Vec<Expr>, span: Span) -> Expr {
        items.into_iter().reduce(Expr::or).unwrap_or(Expr::bool(false, span))
    }

    /// Dotted name like `TacticalMode.Normal` as path segments.
    pub fn dotted(&self) -> Option<Vec<&str>> {
        match &self.kind {
            ExprKind::Name(n) => Some(vec![n.as_str()]),
            ExprKind::Attr(base, f) => {
                let mut v = base.dotted()?;
                v.push(f.as_str());
                Some(v)
            }
            _ => None,
        }
    }

    /// Top-level conjuncts, flattening nested `and`.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Binary(BinOp::And, a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            _ => vec![self],
        }
    }

    /// Pre-order visit of every sub-expression.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Attr(b, _) | ExprKind::Unary(_, b) | ExprKind::Lambda(_, b) => b.walk(f),
            ExprKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Compare(a, rest) => {
                a.walk(f);
                for (_, e) in rest {
                    e.walk(f);
                }
            }
            ExprKind::Call(c, args) => {
                c.walk(f);
                for a in args {
                    a.walk(f);
                }
            }
            ExprKind::GenExp(elt, clauses) => {
                for c in clauses {
                    c.iter.walk(f);
                    for cond in &c.conds {
                        cond.walk(f);
                    }
                }
                elt.walk(f);
            }
            ExprKind::Tuple(items) => {
                for i in items {
                    i.walk(f);
                }
            }
            _ => {}
        }
    }
}

fn binop_symbol(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::And => "and",
        BinOp::Or => "or",
    }
}

/// Fully parenthesized rendering; stable, used for fingerprints and messages.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Str(s) => write!(f, "{s:?}"),
            ExprKind::Bool(true) => write!(f, "True"),
            ExprKind::Bool(false) => write!(f, "False"),
            ExprKind::None => write!(f, "None"),
            ExprKind::Name(n) => write!(f, "{n}"),
            ExprKind::Attr(b, n) => write!(f, "{b}.{n}"),
            ExprKind::Unary(UnOp::Neg, e) => write!(f, "(-{e})"),
            ExprKind::Unary(UnOp::Not, e) => write!(f, "(not {e})"),
            ExprKind::Binary(op, a, b) => write!(f, "({a} {} {b})", binop_symbol(*op)),
            ExprKind::Compare(a, rest) => {
                write!(f, "({a}")?;
                for (op, e) in rest {
                    write!(f, " {} {e}", op.symbol())?;
                }
                write!(f, ")")
            }
            ExprKind::Call(c, args) => {
                write!(f, "{c}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            ExprKind::GenExp(elt, clauses) => {
                write!(f, "({elt}")?;
                for c in clauses {
                    write!(f, " for {} in {}", c.var, c.iter)?;
                    for cond in &c.conds {
                        write!(f, " if {cond}")?;
                    }
                }
                write!(f, ")")
            }
            ExprKind::Tuple(items) => {
                write!(f, "(")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                if items.len() == 1 {
                    write!(f, ",")?;
                }
                write!(f, ")")
            }
            ExprKind::Lambda(params, body) => write!(f, "(lambda {}: {body})", params.join(", ")),
            ExprKind::Ego => write!(f, "ego"),
            ExprKind::Other(i) => write!(f, "other[{i}]"),
            ExprKind::Mode(ModeKind::Tactical, n) => write!(f, "TacticalMode.{n}"),
            ExprKind::Mode(ModeKind::Track, n) => write!(f, "TrackMode.{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub annotation: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Option<Expr>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

/// A `class X(Enum)` block whose members are mode constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeEnum {
    pub name: String,
    pub members: Vec<(String, Span)>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    /// Target is a plain name or a dotted attribute.
    Assign(Expr, Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    Assert(Expr, Option<Expr>),
    Return(Option<Expr>),
    Pass,
    FunctionDef(FunctionDef),
    ModeEnum(ModeEnum),
    /// `from <module> import <names>`.
    Import(String, Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub enums: Vec<ModeEnum>,
    pub functions: Vec<FunctionDef>,
    pub imports: Vec<(String, Vec<String>, Span)>,
}
