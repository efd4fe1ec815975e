use std::collections::HashMap;

use super::ast::*;
use super::token::Span;
use super::{DslError, DslErrorKind};

pub const TACTICAL_FIELD: &str = "tactical_mode";
pub const TRACK_FIELD: &str = "track_mode";
pub const TRACK_ENUM: &str = "TrackMode";
pub const BUILTINS: &[&str] = &["any", "all", "trackHeight", "sameTrack", "dist", "abs", "min", "max"];
const ENUM_IMPORTS: &[&str] = &["Enum", "auto"];

/// A program that passed name resolution and typing.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckedProgram {
    pub program: Program,
    pub ego: String,
    pub others: String,
    pub tactical_enum: String,
    pub tactical_modes: Vec<String>,
    pub track_modes: Vec<String>,
    pub fields: Vec<String>,
}

impl CheckedProgram {
    pub fn decision(&self) -> &FunctionDef {
        &self.program.functions[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Num,
    Bool,
    Tactical,
    Track,
    Agent,
    Others,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Num => "number",
            Ty::Bool => "boolean",
            Ty::Tactical => "tactical mode",
            Ty::Track => "track mode",
            Ty::Agent => "agent",
            Ty::Others => "agent collection",
        }
    }
}

fn cerr(span: Span, msg: impl Into<String>) -> DslError {
    DslError::new(DslErrorKind::Check, span, msg)
}

fn nearest<'a>(name: &str, candidates: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .map(|c| (strsim::levenshtein(name, c), c))
        .filter(|(d, c)| *d <= 2.max(c.len() / 3))
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c)
}

fn suggest(name: &str, candidates: Vec<&str>) -> String {
    match nearest(name, candidates.into_iter()) {
        Some(c) => format!("; did you mean `{c}`?"),
        None => String::new(),
    }
}

struct Checker<'a> {
    ego: String,
    others: String,
    enums: HashMap<String, (ModeKindDecl, Vec<String>)>,
    map_modes: &'a [String],
    fields: &'a [String],
    extra_params: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum ModeKindDecl {
    Tactical,
    Track,
}

type Scope = HashMap<String, Ty>;

/// Resolve names and check types of a parsed program against an agent's
/// continuous field names and a map's track-mode alphabet.
///
/// An empty `map_modes` skips the track-mode membership check.
pub fn check(program: Program, map_modes: &[String], fields: &[String]) -> Result<CheckedProgram, DslError> {
    for (_, names, span) in &program.imports {
        for n in names {
            if !ENUM_IMPORTS.contains(&n.as_str()) {
                return Err(cerr(*span, format!("cannot import `{n}` from enum")));
            }
        }
    }
    let func = match program.functions.as_slice() {
        [] => return Err(cerr(Span::default(), "no decision function")),
        [f] => f,
        [_, second, ..] => {
            return Err(cerr(
                second.span,
                format!("second function `{}`; exactly one decision function is allowed", second.name),
            ))
        }
    };
    if func.params.len() < 2 {
        return Err(cerr(
            func.span,
            "the decision function takes the ego agent and the other agents as its first two parameters",
        ));
    }

    let mut enums = HashMap::new();
    let mut tactical: Option<&ModeEnum> = None;
    let mut track_modes = Vec::new();
    for e in &program.enums {
        if enums.contains_key(&e.name) {
            return Err(cerr(e.span, format!("enum `{}` declared twice", e.name)));
        }
        let mut seen = Vec::new();
        for (m, span) in &e.members {
            if seen.contains(m) {
                return Err(cerr(*span, format!("mode `{m}` declared twice in `{}`", e.name)));
            }
            seen.push(m.clone());
        }
        let kind = if e.name == TRACK_ENUM {
            track_modes = seen.clone();
            ModeKindDecl::Track
        } else {
            if let Some(t) = tactical {
                return Err(cerr(
                    e.span,
                    format!("second tactical mode enum `{}` (already declared `{}`)", e.name, t.name),
                ));
            }
            tactical = Some(e);
            ModeKindDecl::Tactical
        };
        enums.insert(e.name.clone(), (kind, seen));
    }
    let Some(tactical) = tactical else {
        return Err(cerr(func.span, "no tactical mode enum declared"));
    };
    if tactical.members.is_empty() {
        return Err(cerr(tactical.span, "tactical mode enum has no members"));
    }

    let ck = Checker {
        ego: func.params[0].name.clone(),
        others: func.params[1].name.clone(),
        enums,
        map_modes,
        fields,
        extra_params: func.params[2..].iter().map(|p| p.name.clone()).collect(),
    };
    let mut scope = Scope::new();
    ck.block(&func.body, &mut scope)?;

    Ok(CheckedProgram {
        ego: ck.ego.clone(),
        others: ck.others.clone(),
        tactical_enum: tactical.name.clone(),
        tactical_modes: tactical.members.iter().map(|m| m.0.clone()).collect(),
        track_modes,
        fields: fields.to_vec(),
        program,
    })
}

impl Checker<'_> {
    fn block(&self, body: &[Stmt], scope: &mut Scope) -> Result<(), DslError> {
        for s in body {
            self.stmt(s, scope)?;
        }
        Ok(())
    }

    fn stmt(&self, s: &Stmt, scope: &mut Scope) -> Result<(), DslError> {
        match &s.kind {
            StmtKind::Assign(target, value) => self.assign(target, value, scope),
            StmtKind::If(cond, body, orelse) => {
                self.expect(cond, Ty::Bool, scope)?;
                let mut a = scope.clone();
                self.block(body, &mut a)?;
                let mut b = scope.clone();
                self.block(orelse, &mut b)?;
                scope.extend(a);
                scope.extend(b);
                Ok(())
            }
            StmtKind::Assert(test, msg) => {
                self.expect(test, Ty::Bool, scope)?;
                match msg {
                    None => Ok(()),
                    Some(Expr {
                        kind: ExprKind::Str(_),
                        ..
                    }) => Ok(()),
                    Some(m) => Err(cerr(m.span, "assert message must be a string literal")),
                }
            }
            StmtKind::Return(v) => {
                if let Some(v) = v {
                    self.ty(v, scope)?;
                }
                Ok(())
            }
            StmtKind::Pass => Ok(()),
            StmtKind::FunctionDef(f) => Err(cerr(f.span, "nested function definition")),
            StmtKind::ModeEnum(e) => Err(cerr(e.span, "enum declaration inside a function")),
            StmtKind::Import(..) => Err(cerr(s.span, "import inside a function")),
        }
    }

    fn assign(&self, target: &Expr, value: &Expr, scope: &mut Scope) -> Result<(), DslError> {
        match &target.kind {
            ExprKind::Name(n) => {
                if *n == self.ego || *n == self.others || self.enums.contains_key(n) || BUILTINS.contains(&n.as_str()) {
                    return Err(cerr(target.span, format!("cannot rebind `{n}`")));
                }
                let ty = self.ty(value, scope)?;
                if matches!(ty, Ty::Agent | Ty::Others) {
                    return Err(cerr(value.span, "agents cannot be stored in local variables"));
                }
                scope.insert(n.clone(), ty);
                Ok(())
            }
            ExprKind::Attr(base, field) => {
                let is_ego = matches!(&base.kind, ExprKind::Name(b) if *b == self.ego);
                if !is_ego {
                    return Err(cerr(target.span, format!("only fields of `{}` can be assigned", self.ego)));
                }
                if field == TRACK_FIELD {
                    return Err(cerr(
                        target.span,
                        "the track mode is chosen by the map; assign the tactical mode instead",
                    ));
                }
                let want = self.field_ty(field, target.span)?;
                self.expect(value, want, scope)
            }
            _ => Err(cerr(target.span, "invalid assignment target")),
        }
    }

    fn field_ty(&self, field: &str, span: Span) -> Result<Ty, DslError> {
        if field == TACTICAL_FIELD {
            return Ok(Ty::Tactical);
        }
        if field == TRACK_FIELD {
            return Ok(Ty::Track);
        }
        if self.fields.iter().any(|f| f == field) {
            return Ok(Ty::Num);
        }
        let mut cands: Vec<&str> = self.fields.iter().map(String::as_str).collect();
        cands.push(TACTICAL_FIELD);
        cands.push(TRACK_FIELD);
        let hint = suggest(field, cands);
        Err(cerr(span, format!("unknown agent field `{field}`{hint}")))
    }

    fn expect(&self, e: &Expr, want: Ty, scope: &Scope) -> Result<(), DslError> {
        let got = self.ty(e, scope)?;
        if got != want {
            return Err(cerr(e.span, format!("expected {}, found {}", want.name(), got.name())));
        }
        Ok(())
    }

    fn ty(&self, e: &Expr, scope: &Scope) -> Result<Ty, DslError> {
        match &e.kind {
            ExprKind::Num(_) => Ok(Ty::Num),
            ExprKind::Bool(_) => Ok(Ty::Bool),
            ExprKind::Str(_) => Err(cerr(e.span, "string literals are only allowed as assert messages")),
            ExprKind::None => Err(cerr(e.span, "`None` is not supported in expressions")),
            ExprKind::Name(n) => self.name_ty(n, e.span, scope),
            ExprKind::Attr(base, field) => {
                if let ExprKind::Name(n) = &base.kind {
                    if let Some((kind, members)) = self.enums.get(n) {
                        if !scope.contains_key(n) {
                            return self.mode_constant(n, *kind, members, field, e.span);
                        }
                    }
                }
                match self.ty(base, scope)? {
                    Ty::Agent => self.field_ty(field, e.span),
                    t => Err(cerr(e.span, format!("cannot read `.{field}` of a {}", t.name()))),
                }
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                self.expect(a, Ty::Num, scope)?;
                Ok(Ty::Num)
            }
            ExprKind::Unary(UnOp::Not, a) => {
                self.expect(a, Ty::Bool, scope)?;
                Ok(Ty::Bool)
            }
            ExprKind::Binary(op, a, b) => {
                let t = match op {
                    BinOp::And | BinOp::Or => Ty::Bool,
                    _ => Ty::Num,
                };
                self.expect(a, t, scope)?;
                self.expect(b, t, scope)?;
                Ok(t)
            }
            ExprKind::Compare(first, rest) => {
                let mut left = self.ty(first, scope)?;
                let mut left_span = first.span;
                for (op, r) in rest {
                    let right = self.ty(r, scope)?;
                    let ok = match (left, right) {
                        (Ty::Num, Ty::Num) => true,
                        (Ty::Tactical, Ty::Tactical) | (Ty::Track, Ty::Track) => {
                            if !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                                return Err(cerr(r.span, "modes can only be compared with == or !="));
                            }
                            true
                        }
                        _ => false,
                    };
                    if !ok {
                        return Err(cerr(
                            left_span.to(r.span),
                            format!("cannot compare {} with {}", left.name(), right.name()),
                        ));
                    }
                    left = right;
                    left_span = r.span;
                }
                Ok(Ty::Bool)
            }
            ExprKind::Call(callee, args) => self.call(callee, args, e.span, scope),
            ExprKind::GenExp(..) => Err(cerr(
                e.span,
                "generator expressions are only allowed as the argument of any() or all()",
            )),
            ExprKind::Tuple(_) => Err(cerr(e.span, "tuples are not supported in expressions")),
            ExprKind::Lambda(..) => Err(cerr(e.span, "lambda is not supported in decision logic")),
            ExprKind::Ego | ExprKind::Other(_) => Ok(Ty::Agent),
            ExprKind::Mode(ModeKind::Tactical, _) => Ok(Ty::Tactical),
            ExprKind::Mode(ModeKind::Track, _) => Ok(Ty::Track),
        }
    }

    fn mode_constant(
        &self,
        enum_name: &str,
        kind: ModeKindDecl,
        members: &[String],
        member: &str,
        span: Span,
    ) -> Result<Ty, DslError> {
        if !members.iter().any(|m| m == member) {
            let hint = suggest(member, members.iter().map(String::as_str).collect());
            return Err(cerr(span, format!("`{member}` is not a member of `{enum_name}`{hint}")));
        }
        match kind {
            ModeKindDecl::Tactical => Ok(Ty::Tactical),
            ModeKindDecl::Track => {
                if !self.map_modes.is_empty() && !self.map_modes.iter().any(|m| m == member) {
                    return Err(cerr(span, format!("track mode `{member}` does not exist on this map")));
                }
                Ok(Ty::Track)
            }
        }
    }

    fn name_ty(&self, n: &str, span: Span, scope: &Scope) -> Result<Ty, DslError> {
        if let Some(t) = scope.get(n) {
            return Ok(*t);
        }
        if n == self.ego {
            return Ok(Ty::Agent);
        }
        if n == self.others {
            return Ok(Ty::Others);
        }
        if self.enums.contains_key(n) {
            return Err(cerr(span, format!("enum `{n}` used without a member")));
        }
        if BUILTINS.contains(&n) {
            return Err(cerr(span, format!("builtin `{n}` must be called")));
        }
        if self.extra_params.iter().any(|p| p == n) {
            return Err(cerr(span, format!("parameter `{n}` cannot be used; map queries go through builtins")));
        }
        let mut cands: Vec<&str> = scope.keys().map(String::as_str).collect();
        cands.push(&self.ego);
        cands.push(&self.others);
        cands.extend(self.enums.keys().map(String::as_str));
        cands.extend(BUILTINS.iter().copied());
        let hint = suggest(n, cands);
        Err(cerr(span, format!("unknown name `{n}`{hint}")))
    }

    fn call(&self, callee: &Expr, args: &[Expr], span: Span, scope: &Scope) -> Result<Ty, DslError> {
        let ExprKind::Name(name) = &callee.kind else {
            return Err(cerr(callee.span, "only builtin functions can be called"));
        };
        let arity = |n: usize| -> Result<(), DslError> {
            if args.len() != n {
                return Err(cerr(span, format!("`{name}` takes {n} argument(s), got {}", args.len())));
            }
            Ok(())
        };
        match name.as_str() {
            "any" | "all" => {
                arity(1)?;
                let ExprKind::GenExp(elt, clauses) = &args[0].kind else {
                    return Err(cerr(args[0].span, format!("`{name}` expects a generator over the other agents")));
                };
                let mut inner = scope.clone();
                for c in clauses {
                    if self.ty(&c.iter, &inner)? != Ty::Others {
                        return Err(cerr(c.iter.span, format!("quantifier must range over `{}`", self.others)));
                    }
                    if c.var == self.ego || c.var == self.others || self.enums.contains_key(&c.var) {
                        return Err(cerr(c.iter.span, format!("cannot rebind `{}`", c.var)));
                    }
                    inner.insert(c.var.clone(), Ty::Agent);
                    for cond in &c.conds {
                        self.expect(cond, Ty::Bool, &inner)?;
                    }
                }
                self.expect(elt, Ty::Bool, &inner)?;
                Ok(Ty::Bool)
            }
            "trackHeight" => {
                arity(1)?;
                self.expect(&args[0], Ty::Track, scope)?;
                Ok(Ty::Num)
            }
            "sameTrack" => {
                arity(2)?;
                self.expect(&args[0], Ty::Track, scope)?;
                self.expect(&args[1], Ty::Track, scope)?;
                Ok(Ty::Bool)
            }
            "dist" => {
                arity(2)?;
                self.expect(&args[0], Ty::Agent, scope)?;
                self.expect(&args[1], Ty::Agent, scope)?;
                Ok(Ty::Num)
            }
            "abs" => {
                arity(1)?;
                self.expect(&args[0], Ty::Num, scope)?;
                Ok(Ty::Num)
            }
            "min" | "max" => {
                if args.len() < 2 {
                    return Err(cerr(span, format!("`{name}` takes at least 2 arguments")));
                }
                for a in args {
                    self.expect(a, Ty::Num, scope)?;
                }
                Ok(Ty::Num)
            }
            _ => {
                let hint = suggest(name, BUILTINS.to_vec());
                Err(cerr(callee.span, format!("unknown function `{name}`{hint}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_source;
    use super::*;

    const HEADER: &str = "from enum import Enum, auto\n\
        class TacticalMode(Enum):\n    Normal = auto()\n    MoveUp = auto()\n\
        class TrackMode(Enum):\n    T0 = auto()\n    T1 = auto()\n    M10 = auto()\n";

    fn drone_fields() -> Vec<String> {
        ["px", "py", "pz", "vx", "vy", "vz"].iter().map(|s| s.to_string()).collect()
    }

    fn map_modes() -> Vec<String> {
        ["T0", "T1", "T2", "M10", "M01", "M21", "M12"].iter().map(|s| s.to_string()).collect()
    }

    fn run(body: &str) -> Result<CheckedProgram, DslError> {
        let src = format!("{HEADER}def decision(ego, others):\n{body}");
        check(parse_source(&src).unwrap(), &map_modes(), &drone_fields())
    }

    #[test]
    fn accepts_quantified_guard() {
        run("    if ego.tactical_mode == TacticalMode.Normal and any(dist(ego, o) < 5 for o in others):\n        ego.tactical_mode = TacticalMode.MoveUp\n").unwrap();
    }

    #[test]
    fn undeclared_mode_is_rejected() {
        let e = run("    if ego.tactical_mode == TacticalMode.Hover:\n        pass\n").unwrap_err();
        assert!(e.message.contains("`Hover` is not a member"), "{e}");
    }

    #[test]
    fn field_typo_names_nearest_field() {
        let e = run("    if ego.pzz > 1:\n        pass\n").unwrap_err();
        assert!(e.message.contains("did you mean `pz`"), "{e}");
        assert_eq!(e.span.start.line, 10);
    }

    #[test]
    fn empty_program_has_no_decision_function() {
        let e = check(Program::default(), &[], &[]).unwrap_err();
        assert_eq!(e.message, "no decision function");
    }

    #[test]
    fn lambda_is_rejected() {
        let e = run("    f = lambda x: x\n").unwrap_err();
        assert!(e.message.contains("lambda"));
    }

    #[test]
    fn track_mode_assignment_is_rejected() {
        assert!(run("    ego.track_mode = TrackMode.T0\n").is_err());
    }

    #[test]
    fn mode_number_comparison_is_rejected() {
        assert!(run("    if ego.tactical_mode == 1:\n        pass\n").is_err());
    }

    #[test]
    fn track_constant_must_exist_on_map() {
        let src = format!("{HEADER}def decision(ego, others):\n    if ego.track_mode == TrackMode.M10:\n        pass\n");
        let only_lanes: Vec<String> = vec!["T0".into(), "T1".into()];
        assert!(check(parse_source(&src).unwrap(), &only_lanes, &drone_fields()).is_err());
    }

    #[test]
    fn quantifier_over_non_others() {
        let e = run("    if any(o.px > 1 for o in ego):\n        pass\n").unwrap_err();
        assert!(e.message.contains("must range over"));
    }

    #[test]
    fn locals_resolve() {
        run("    gap = 5\n    if any(o.px - ego.px < gap for o in others):\n        pass\n").unwrap();
        assert!(run("    if any(o.px - ego.px < gapp for o in others):\n        pass\n").is_err());
    }
}
