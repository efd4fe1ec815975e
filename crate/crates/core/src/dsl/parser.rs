use super::ast::*;
use super::lexer::unquote;
use super::token::{Span, Token, TokenKind};
use super::{DslError, DslErrorKind};

type PResult<T> = Result<T, DslError>;

const UNSUPPORTED_KEYWORDS: &[(&str, &str)] = &[
    ("while", "while loop"),
    ("for", "for loop statement"),
    ("try", "try statement"),
    ("with", "with statement"),
    ("import", "import statement"),
    ("global", "global declaration"),
    ("nonlocal", "nonlocal declaration"),
    ("del", "del statement"),
    ("raise", "raise statement"),
    ("break", "break statement"),
    ("continue", "continue statement"),
    ("yield", "yield expression"),
    ("async", "async construct"),
    ("await", "await expression"),
    ("except", "except clause"),
    ("finally", "finally clause"),
];

pub struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
}

/// Parse a token stream into a [`Program`].
pub fn parse(tokens: &[Token]) -> PResult<Program> {
    Parser { toks: tokens, i: 0 }.program()
}

fn unsupported(span: Span, what: &str) -> DslError {
    DslError::new(DslErrorKind::Unsupported, span, format!("unsupported construct: {what}"))
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.i)
    }

    fn peek_at(&self, off: usize) -> Option<&'a Token> {
        self.toks.get(self.i + off)
    }

    fn end_span(&self) -> Span {
        self.toks
            .last()
            .map(|t| Span::new(t.span.end, t.span.end))
            .unwrap_or_default()
    }

    fn here(&self) -> Span {
        self.peek().map(|t| t.span).unwrap_or_else(|| self.end_span())
    }

    fn advance(&mut self) -> &'a Token {
        let t = &self.toks[self.i];
        self.i += 1;
        t
    }

    fn syntax(&self, expected: &[&str]) -> DslError {
        let found = self
            .peek()
            .map(Token::describe)
            .unwrap_or_else(|| "end of input".into());
        let mut e = DslError::new(
            DslErrorKind::Syntax,
            self.here(),
            format!("expected {}, found {found}", expected.join(" or ")),
        );
        e.expected = expected.iter().map(|s| s.to_string()).collect();
        e
    }

    fn check(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.peek().is_some_and(|t| t.is(kind, lexeme))
    }

    fn check_kind(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn eat(&mut self, kind: TokenKind, lexeme: &str) -> bool {
        if self.check(kind, lexeme) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, lexeme: &str, shown: &str) -> PResult<&'a Token> {
        if self.check(kind, lexeme) {
            Ok(self.advance())
        } else {
            Err(self.syntax(&[shown]))
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<&'a Token> {
        self.expect(TokenKind::Punct, p, &format!("`{p}`"))
    }

    fn expect_ident(&mut self) -> PResult<&'a Token> {
        if self.check_kind(TokenKind::Ident) {
            Ok(self.advance())
        } else {
            Err(self.syntax(&["identifier"]))
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        if self.check_kind(TokenKind::Newline) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.syntax(&["newline"]))
        }
    }

    fn reject_unsupported_keyword(&self) -> PResult<()> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword {
                if let Some((_, what)) = UNSUPPORTED_KEYWORDS.iter().find(|(k, _)| *k == t.lexeme) {
                    return Err(unsupported(t.span, what));
                }
            }
            if t.is_op("@") {
                return Err(unsupported(t.span, "decorator"));
            }
        }
        Ok(())
    }

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        while let Some(t) = self.peek() {
            match t.kind {
                TokenKind::Newline => {
                    self.i += 1;
                }
                TokenKind::Indent => return Err(DslError::new(DslErrorKind::Syntax, t.span, "unexpected indent")),
                TokenKind::Keyword if t.lexeme == "def" => prog.functions.push(self.function_def()?),
                TokenKind::Keyword if t.lexeme == "class" => prog.enums.push(self.class_def()?),
                TokenKind::Keyword if t.lexeme == "from" => {
                    let start = self.advance().span;
                    let module = self.dotted_name()?;
                    self.expect(TokenKind::Keyword, "import", "`import`")?;
                    let paren = self.eat(TokenKind::Punct, "(");
                    let mut names = Vec::new();
                    loop {
                        names.push(self.expect_ident()?.lexeme.clone());
                        if self.eat(TokenKind::Keyword, "as") {
                            self.expect_ident()?;
                        }
                        if !self.eat(TokenKind::Punct, ",") {
                            break;
                        }
                        if paren && self.check(TokenKind::Punct, ")") {
                            break;
                        }
                    }
                    if paren {
                        self.expect_punct(")")?;
                    }
                    let span = start.to(self.toks[self.i - 1].span);
                    if module != "enum" {
                        return Err(unsupported(span, &format!("import from `{module}` (only `from enum import ...` is allowed)")));
                    }
                    self.expect_newline()?;
                    prog.imports.push((module, names, span));
                }
                _ => {
                    self.reject_unsupported_keyword()?;
                    return Err(unsupported(
                        t.span,
                        "top-level statement (only imports, mode enums and the decision function are allowed)",
                    ));
                }
            }
        }
        Ok(prog)
    }

    fn dotted_name(&mut self) -> PResult<String> {
        let mut s = self.expect_ident()?.lexeme.clone();
        while self.eat(TokenKind::Punct, ".") {
            s.push('.');
            s.push_str(&self.expect_ident()?.lexeme);
        }
        Ok(s)
    }

    fn function_def(&mut self) -> PResult<FunctionDef> {
        let start = self.advance().span;
        let name = self.expect_ident()?.lexeme.clone();
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.check(TokenKind::Punct, ")") {
            let t = self.expect_ident()?;
            let annotation = if self.eat(TokenKind::Punct, ":") {
                Some(self.expression()?)
            } else {
                None
            };
            if self.check(TokenKind::Op, "=") {
                return Err(unsupported(self.here(), "default parameter value"));
            }
            params.push(Param {
                name: t.lexeme.clone(),
                annotation,
                span: t.span,
            });
            if !self.eat(TokenKind::Punct, ",") {
                break;
            }
        }
        self.expect_punct(")")?;
        let returns = if self.eat(TokenKind::Op, "->") {
            Some(self.expression()?)
        } else {
            None
        };
        self.expect_punct(":")?;
        let body = self.block()?;
        let span = start.to(self.toks[self.i - 1].span);
        Ok(FunctionDef {
            name,
            params,
            returns,
            body,
            span,
        })
    }

    fn class_def(&mut self) -> PResult<ModeEnum> {
        let start = self.advance().span;
        let name = self.expect_ident()?.lexeme.clone();
        if self.eat(TokenKind::Punct, "(") {
            while !self.check(TokenKind::Punct, ")") {
                self.expression()?;
                if !self.eat(TokenKind::Punct, ",") {
                    break;
                }
            }
            self.expect_punct(")")?;
        }
        self.expect_punct(":")?;
        let body = self.block()?;
        let mut members = Vec::new();
        for s in &body {
            match &s.kind {
                StmtKind::Assign(target, _) => match &target.kind {
                    ExprKind::Name(n) => members.push((n.clone(), target.span)),
                    _ => return Err(unsupported(s.span, "class member that is not a mode constant")),
                },
                StmtKind::Pass => {}
                _ => {
                    return Err(unsupported(
                        s.span,
                        "class body other than mode constant declarations",
                    ))
                }
            }
        }
        Ok(ModeEnum {
            name,
            members,
            span: start.to(self.toks[self.i - 1].span),
        })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        if !self.check_kind(TokenKind::Newline) {
            return self.simple_stmts();
        }
        self.i += 1;
        if !self.check_kind(TokenKind::Indent) {
            return Err(self.syntax(&["indented block"]));
        }
        self.i += 1;
        let mut body = Vec::new();
        while !self.check_kind(TokenKind::Dedent) {
            if self.peek().is_none() {
                return Err(self.syntax(&["dedent"]));
            }
            body.extend(self.statement()?);
        }
        self.i += 1;
        Ok(body)
    }

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let t = self.peek().ok_or_else(|| self.syntax(&["statement"]))?;
        if t.kind == TokenKind::Indent {
            return Err(DslError::new(DslErrorKind::Syntax, t.span, "unexpected indent"));
        }
        if t.is_kw("if") {
            return Ok(vec![self.if_stmt()?]);
        }
        if t.is_kw("def") {
            return Err(unsupported(t.span, "nested function definition"));
        }
        if t.is_kw("class") {
            return Err(unsupported(t.span, "class definition inside a function"));
        }
        if t.is_kw("elif") || t.is_kw("else") {
            return Err(DslError::new(
                DslErrorKind::Syntax,
                t.span,
                format!("`{}` without a matching `if`", t.lexeme),
            ));
        }
        self.simple_stmts()
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let start = self.advance().span;
        let cond = self.expression()?;
        self.expect_punct(":")?;
        let body = self.block()?;
        let orelse = if self.check(TokenKind::Keyword, "elif") {
            vec![self.if_stmt()?]
        } else if self.eat(TokenKind::Keyword, "else") {
            self.expect_punct(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            kind: StmtKind::If(cond, body, orelse),
            span: start.to(self.toks[self.i - 1].span),
        })
    }

    fn simple_stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = vec![self.simple_stmt()?];
        while self.eat(TokenKind::Punct, ";") {
            if self.check_kind(TokenKind::Newline) {
                break;
            }
            out.push(self.simple_stmt()?);
        }
        self.expect_newline()?;
        Ok(out)
    }

    fn simple_stmt(&mut self) -> PResult<Stmt> {
        self.reject_unsupported_keyword()?;
        let t = self.peek().ok_or_else(|| self.syntax(&["statement"]))?;
        let start = t.span;
        if t.is_kw("pass") {
            self.i += 1;
            return Ok(Stmt {
                kind: StmtKind::Pass,
                span: start,
            });
        }
        if t.is_kw("return") {
            self.i += 1;
            let value = if self.check_kind(TokenKind::Newline) || self.check(TokenKind::Punct, ";") {
                None
            } else {
                Some(self.expression()?)
            };
            let span = value.as_ref().map_or(start, |v| start.to(v.span));
            return Ok(Stmt {
                kind: StmtKind::Return(value),
                span,
            });
        }
        if t.is_kw("assert") {
            self.i += 1;
            let test = self.expression()?;
            let msg = if self.eat(TokenKind::Punct, ",") {
                Some(self.expression()?)
            } else {
                None
            };
            let span = start.to(msg.as_ref().unwrap_or(&test).span);
            return Ok(Stmt {
                kind: StmtKind::Assert(test, msg),
                span,
            });
        }
        if t.is_kw("if") {
            return Err(unsupported(t.span, "`if` after `;`"));
        }
        let target = self.expression()?;
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Op && matches!(t.lexeme.as_str(), "+=" | "-=" | "*=" | "/=") {
                return Err(unsupported(t.span, "augmented assignment"));
            }
            if t.is_punct(":") {
                return Err(unsupported(t.span, "annotated assignment"));
            }
        }
        if !self.eat(TokenKind::Op, "=") {
            if self.check_kind(TokenKind::Newline) || self.check(TokenKind::Punct, ";") {
                return Err(unsupported(target.span, "expression statement"));
            }
            return Err(self.syntax(&["`=`", "newline"]));
        }
        match &target.kind {
            ExprKind::Name(_) => {}
            ExprKind::Attr(..) if target.dotted().is_some() => {}
            _ => {
                return Err(DslError::new(
                    DslErrorKind::Syntax,
                    target.span,
                    "cannot assign to this expression",
                ))
            }
        }
        let value = self.expression()?;
        if self.check(TokenKind::Op, "=") {
            return Err(unsupported(self.here(), "chained assignment"));
        }
        let span = start.to(value.span);
        Ok(Stmt {
            kind: StmtKind::Assign(target, value),
            span,
        })
    }

    pub fn expression(&mut self) -> PResult<Expr> {
        if self.check(TokenKind::Keyword, "lambda") {
            let start = self.advance().span;
            let mut params = Vec::new();
            while !self.check(TokenKind::Punct, ":") {
                params.push(self.expect_ident()?.lexeme.clone());
                if !self.eat(TokenKind::Punct, ",") {
                    break;
                }
            }
            self.expect_punct(":")?;
            let body = self.expression()?;
            let span = start.to(body.span);
            return Ok(Expr::new(ExprKind::Lambda(params, body.boxed()), span));
        }
        let e = self.or_expr()?;
        if self.check(TokenKind::Keyword, "if") && self.peek_at(1).is_some() {
            // `a if c else b` outside a generator clause.
            if self.toks[self.i..]
                .iter()
                .take_while(|t| t.kind != TokenKind::Newline)
                .any(|t| t.is_kw("else"))
            {
                return Err(unsupported(self.here(), "conditional expression"));
            }
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut e = self.and_expr()?;
        while self.eat(TokenKind::Keyword, "or") {
            let r = self.and_expr()?;
            e = Expr::or(e, r);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut e = self.not_expr()?;
        while self.eat(TokenKind::Keyword, "and") {
            let r = self.not_expr()?;
            e = Expr::and(e, r);
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.check(TokenKind::Keyword, "not") {
            let start = self.advance().span;
            let inner = self.not_expr()?;
            let span = start.to(inner.span);
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, inner.boxed()), span));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let first = self.sum()?;
        let mut rest = Vec::new();
        loop {
            let Some(t) = self.peek() else { break };
            if t.kind == TokenKind::Op {
                if let Some(op) = CmpOp::from_symbol(&t.lexeme) {
                    self.i += 1;
                    rest.push((op, self.sum()?));
                    continue;
                }
            }
            if t.is_kw("is") {
                return Err(unsupported(t.span, "`is` comparison"));
            }
            if t.is_kw("in") || (t.is_kw("not") && self.peek_at(1).is_some_and(|n| n.is_kw("in"))) {
                return Err(unsupported(t.span, "membership test"));
            }
            break;
        }
        if rest.is_empty() {
            return Ok(first);
        }
        let span = first.span.to(rest.last().unwrap().1.span);
        Ok(Expr::new(ExprKind::Compare(first.boxed(), rest), span))
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut e = self.term()?;
        loop {
            let op = if self.eat(TokenKind::Op, "+") {
                BinOp::Add
            } else if self.eat(TokenKind::Op, "-") {
                BinOp::Sub
            } else {
                break;
            };
            let r = self.term()?;
            let span = e.span.to(r.span);
            e = Expr::new(ExprKind::Binary(op, e.boxed(), r.boxed()), span);
        }
        Ok(e)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut e = self.factor()?;
        loop {
            let op = if self.eat(TokenKind::Op, "*") {
                BinOp::Mul
            } else if self.eat(TokenKind::Op, "/") {
                BinOp::Div
            } else {
                if let Some(t) = self.peek() {
                    if t.kind == TokenKind::Op && matches!(t.lexeme.as_str(), "%" | "//" | "@") {
                        return Err(unsupported(t.span, &format!("operator `{}`", t.lexeme)));
                    }
                }
                break;
            };
            let r = self.factor()?;
            let span = e.span.to(r.span);
            e = Expr::new(ExprKind::Binary(op, e.boxed(), r.boxed()), span);
        }
        Ok(e)
    }

    fn factor(&mut self) -> PResult<Expr> {
        if self.check(TokenKind::Op, "-") {
            let start = self.advance().span;
            let inner = self.factor()?;
            let span = start.to(inner.span);
            if let ExprKind::Num(v) = inner.kind {
                return Ok(Expr::new(ExprKind::Num(-v), span));
            }
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, inner.boxed()), span));
        }
        if self.eat(TokenKind::Op, "+") {
            return self.factor();
        }
        let e = self.postfix()?;
        if self.check(TokenKind::Op, "**") {
            return Err(unsupported(self.here(), "operator `**`"));
        }
        Ok(e)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat(TokenKind::Punct, ".") {
                let t = self.expect_ident()?;
                let span = e.span.to(t.span);
                e = Expr::new(ExprKind::Attr(e.boxed(), t.lexeme.clone()), span);
            } else if self.check(TokenKind::Punct, "(") {
                self.i += 1;
                let args = self.call_args()?;
                let close = self.expect_punct(")")?;
                let span = e.span.to(close.span);
                e = Expr::new(ExprKind::Call(e.boxed(), args), span);
            } else if self.check(TokenKind::Punct, "[") {
                return Err(unsupported(self.here(), "subscript"));
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.check(TokenKind::Punct, ")") {
            return Ok(args);
        }
        let first = self.expression()?;
        if self.check(TokenKind::Keyword, "for") {
            let clauses = self.for_clauses()?;
            let span = first.span.to(self.toks[self.i - 1].span);
            args.push(Expr::new(ExprKind::GenExp(first.boxed(), clauses), span));
            return Ok(args);
        }
        self.reject_keyword_argument()?;
        args.push(first);
        while self.eat(TokenKind::Punct, ",") {
            if self.check(TokenKind::Punct, ")") {
                break;
            }
            args.push(self.expression()?);
            self.reject_keyword_argument()?;
        }
        Ok(args)
    }

    fn reject_keyword_argument(&self) -> PResult<()> {
        if self.check(TokenKind::Op, "=") {
            return Err(unsupported(self.here(), "keyword argument"));
        }
        Ok(())
    }

    fn for_clauses(&mut self) -> PResult<Vec<ForClause>> {
        let mut clauses = Vec::new();
        while self.eat(TokenKind::Keyword, "for") {
            let var = self.expect_ident()?.lexeme.clone();
            self.expect(TokenKind::Keyword, "in", "`in`")?;
            let iter = self.or_expr()?;
            let mut conds = Vec::new();
            while self.eat(TokenKind::Keyword, "if") {
                conds.push(self.or_expr()?);
            }
            clauses.push(ForClause { var, iter, conds });
        }
        Ok(clauses)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek() else {
            return Err(self.syntax(&["expression"]));
        };
        match t.kind {
            TokenKind::Number => {
                self.i += 1;
                let v: f64 = t.lexeme.parse().map_err(|_| {
                    DslError::new(DslErrorKind::Syntax, t.span, format!("invalid number `{}`", t.lexeme))
                })?;
                Ok(Expr::new(ExprKind::Num(v), t.span))
            }
            TokenKind::Str => {
                let mut s = String::new();
                let mut span = t.span;
                while let Some(t) = self.peek().filter(|t| t.kind == TokenKind::Str) {
                    s.push_str(&unquote(&t.lexeme));
                    span = span.to(t.span);
                    self.i += 1;
                }
                Ok(Expr::new(ExprKind::Str(s), span))
            }
            TokenKind::Ident => {
                self.i += 1;
                Ok(Expr::new(ExprKind::Name(t.lexeme.clone()), t.span))
            }
            TokenKind::Keyword => {
                let kind = match t.lexeme.as_str() {
                    "True" => ExprKind::Bool(true),
                    "False" => ExprKind::Bool(false),
                    "None" => ExprKind::None,
                    _ => {
                        self.reject_unsupported_keyword()?;
                        return Err(self.syntax(&["expression"]));
                    }
                };
                self.i += 1;
                Ok(Expr::new(kind, t.span))
            }
            TokenKind::Punct if t.lexeme == "(" => {
                let start = self.advance().span;
                if self.check(TokenKind::Punct, ")") {
                    let end = self.advance().span;
                    return Ok(Expr::new(ExprKind::Tuple(Vec::new()), start.to(end)));
                }
                let first = self.expression()?;
                if self.check(TokenKind::Keyword, "for") {
                    let clauses = self.for_clauses()?;
                    let end = self.expect_punct(")")?.span;
                    return Ok(Expr::new(ExprKind::GenExp(first.boxed(), clauses), start.to(end)));
                }
                if self.check(TokenKind::Punct, ",") {
                    let mut items = vec![first];
                    while self.eat(TokenKind::Punct, ",") {
                        if self.check(TokenKind::Punct, ")") {
                            break;
                        }
                        items.push(self.expression()?);
                    }
                    let end = self.expect_punct(")")?.span;
                    return Ok(Expr::new(ExprKind::Tuple(items), start.to(end)));
                }
                let end = self.expect_punct(")")?.span;
                let mut g = first;
                g.span = start.to(end);
                Ok(g)
            }
            TokenKind::Punct if t.lexeme == "[" => Err(unsupported(t.span, "list literal")),
            TokenKind::Punct if t.lexeme == "{" => Err(unsupported(t.span, "dict or set literal")),
            _ => Err(self.syntax(&["expression"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::lexer::tokenize;
    use super::*;

    fn expr(src: &str) -> Expr {
        let toks = tokenize(src).unwrap();
        let mut p = Parser { toks: &toks, i: 0 };
        p.expression().unwrap()
    }

    fn parse_src(src: &str) -> PResult<Program> {
        parse(&tokenize(src)?)
    }

    #[test]
    fn arithmetic_precedence() {
        assert_eq!(expr("a + b * c").to_string(), "(a + (b * c))");
        assert_eq!(expr("a - b - c").to_string(), "((a - b) - c)");
        assert_eq!(expr("-a * b").to_string(), "((-a) * b)");
        assert_eq!(expr("-1").kind, ExprKind::Num(-1.0));
    }

    #[test]
    fn boolean_precedence() {
        assert_eq!(expr("not a or b and c").to_string(), "((not a) or (b and c))");
        assert_eq!(expr("a < b and c").to_string(), "((a < b) and c)");
    }

    #[test]
    fn comparison_chain_kept() {
        let e = expr("-1 < T0 - ego.pz < 1");
        match e.kind {
            ExprKind::Compare(_, rest) => assert_eq!(rest.len(), 2),
            _ => panic!("not a chain"),
        }
    }

    #[test]
    fn generator_argument() {
        let e = expr("any(o.x > 1 for o in others if o.y < 2)");
        assert_eq!(e.to_string(), "any(((o.x > 1.0) for o in others if (o.y < 2.0)))");
    }

    #[test]
    fn tuples_and_groups() {
        assert!(matches!(expr("(1, 2)").kind, ExprKind::Tuple(ref v) if v.len() == 2));
        assert!(matches!(expr("(1)").kind, ExprKind::Num(_)));
    }

    #[test]
    fn elif_nests_in_else() {
        let p = parse_src("def f(ego, others):\n    if a:\n        x = 1\n    elif b:\n        x = 2\n    else:\n        x = 3\n").unwrap();
        let body = &p.functions[0].body;
        let StmtKind::If(_, _, orelse) = &body[0].kind else { panic!() };
        assert!(matches!(orelse[0].kind, StmtKind::If(..)));
    }

    #[test]
    fn unsupported_constructs() {
        for (src, line, col) in [
            ("def f(ego, others):\n    while x:\n        pass\n", 2, 5),
            ("import copy\n", 1, 1),
            ("def f(ego, others):\n    x = [1]\n", 2, 9),
            ("def f(ego, others):\n    x += 1\n", 2, 7),
        ] {
            let e = parse_src(src).unwrap_err();
            assert_eq!(e.kind, DslErrorKind::Unsupported, "{src}");
            assert_eq!((e.span.start.line, e.span.start.col), (line, col), "{src}");
        }
    }

    #[test]
    fn syntax_error_reports_expected() {
        let e = parse_src("def f(ego, others)\n    pass\n").unwrap_err();
        assert_eq!(e.kind, DslErrorKind::Syntax);
        assert_eq!(e.expected, vec!["`:`".to_string()]);
        assert_eq!((e.span.start.line, e.span.start.col), (1, 19));
    }

    #[test]
    fn enum_members() {
        let p = parse_src("from enum import Enum, auto\nclass TacticalMode(Enum):\n    Normal = auto()\n    MoveUp = auto()\n").unwrap();
        let names: Vec<_> = p.enums[0].members.iter().map(|m| m.0.as_str()).collect();
        assert_eq!(names, ["Normal", "MoveUp"]);
    }

    #[test]
    fn one_line_blocks() {
        let p = parse_src("def f(ego, others):\n    if a: x = 1; y = 2\n").unwrap();
        let StmtKind::If(_, body, _) = &p.functions[0].body[0].kind else { panic!() };
        assert_eq!(body.len(), 2);
    }
}
