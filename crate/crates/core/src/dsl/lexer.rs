use super::token::{Pos, Span, Token, TokenKind, KEYWORDS, OPERATORS, PUNCTUATION};
use super::{DslError, DslErrorKind};

/// Spaces of indentation written per level by [`detokenize`].
const DETOKENIZE_INDENT: usize = 4;

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    indents: Vec<usize>,
    brackets: Vec<(char, Pos)>,
    line_has_tokens: bool,
}

/// Split source text into tokens with synthesized INDENT/DEDENT.
///
/// Comments are dropped, newlines inside brackets and after a trailing
/// backslash are joined, and a NEWLINE is appended to a non-empty final
/// line. An empty (or comment-only) source yields no tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, DslError> {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        indents: vec![0],
        brackets: Vec::new(),
        line_has_tokens: false,
    };
    lx.run()?;
    Ok(lx.tokens)
}

/// Render tokens back to source text that tokenizes to the same stream.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::new();
    let mut level = 0usize;
    let mut at_start = true;
    for t in tokens {
        match t.kind {
            TokenKind::Newline => {
                out.push('\n');
                at_start = true;
            }
            TokenKind::Indent => level += 1,
            TokenKind::Dedent => level = level.saturating_sub(1),
            _ => {
                if at_start {
                    out.push_str(&" ".repeat(level * DETOKENIZE_INDENT));
                    at_start = false;
                } else {
                    out.push(' ');
                }
                out.push_str(&t.lexeme);
            }
        }
    }
    out
}

fn err(pos: Pos, msg: impl Into<String>) -> DslError {
    DslError::new(DslErrorKind::Lex, Span::new(pos, pos), msg)
}

impl Lexer {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.i + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, lexeme: String, start: Pos) {
        let end = self.pos();
        self.tokens.push(Token {
            kind,
            lexeme,
            span: Span::new(start, end),
        });
        if !matches!(kind, TokenKind::Indent | TokenKind::Dedent | TokenKind::Newline) {
            self.line_has_tokens = true;
        }
    }

    fn run(&mut self) -> Result<(), DslError> {
        let mut at_line_start = true;
        while self.i < self.chars.len() {
            if at_line_start {
                at_line_start = false;
                if self.indentation()? {
                    continue;
                }
            }
            let c = self.peek(0).unwrap();
            let start = self.pos();
            match c {
                ' ' | '\t' | '\r' | '\x0c' => {
                    self.bump();
                }
                '#' => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '\\' if self.peek(1) == Some('\n') => {
                    self.bump();
                    self.bump();
                }
                '\\' if self.peek(1) == Some('\r') && self.peek(2) == Some('\n') => {
                    self.bump();
                    self.bump();
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    if self.brackets.is_empty() {
                        if self.line_has_tokens {
                            self.push(TokenKind::Newline, "\n".into(), start);
                        }
                        self.line_has_tokens = false;
                        at_line_start = true;
                    }
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                    self.number(start)?;
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut s = String::new();
                    while let Some(c) = self.peek(0) {
                        if c.is_alphanumeric() || c == '_' {
                            s.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let kind = if KEYWORDS.contains(&s.as_str()) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Ident
                    };
                    self.push(kind, s, start);
                }
                '"' | '\'' => self.string(start)?,
                c if PUNCTUATION.contains(&c) => {
                    self.bump();
                    match c {
                        '(' | '[' | '{' => self.brackets.push((c, start)),
                        ')' | ']' | '}' => {
                            let open = match c {
                                ')' => '(',
                                ']' => '[',
                                _ => '{',
                            };
                            match self.brackets.pop() {
                                Some((o, _)) if o == open => {}
                                Some((o, p)) => {
                                    return Err(err(
                                        start,
                                        format!("`{c}` does not match `{o}` opened at {}:{}", p.line, p.col),
                                    ))
                                }
                                None => return Err(err(start, format!("unmatched `{c}`"))),
                            }
                        }
                        _ => {}
                    }
                    self.push(TokenKind::Punct, c.to_string(), start);
                }
                _ => {
                    let op = OPERATORS.iter().find(|op| {
                        op.chars().enumerate().all(|(k, oc)| self.peek(k) == Some(oc))
                    });
                    match op {
                        Some(op) => {
                            for _ in 0..op.len() {
                                self.bump();
                            }
                            self.push(TokenKind::Op, op.to_string(), start);
                        }
                        None => return Err(err(start, format!("illegal character {c:?}"))),
                    }
                }
            }
        }
        if let Some((c, p)) = self.brackets.last() {
            return Err(err(*p, format!("`{c}` is never closed")));
        }
        let end = self.pos();
        if self.line_has_tokens {
            self.push(TokenKind::Newline, "\n".into(), end);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokenKind::Dedent, String::new(), end);
        }
        Ok(())
    }

    /// Measure leading whitespace and emit INDENT/DEDENT.
    /// Returns true when the line is blank or comment-only.
    fn indentation(&mut self) -> Result<bool, DslError> {
        let mut width = 0usize;
        loop {
            match self.peek(0) {
                Some(' ') => {
                    width += 1;
                    self.bump();
                }
                Some('\t') => return Err(err(self.pos(), "tab in indentation; indent with spaces")),
                Some('\x0c') | Some('\r') => {
                    self.bump();
                }
                _ => break,
            }
        }
        match self.peek(0) {
            None | Some('\n') | Some('#') => return Ok(true),
            _ => {}
        }
        let here = self.pos();
        let top = *self.indents.last().unwrap();
        if width > top {
            self.indents.push(width);
            self.push(TokenKind::Indent, String::new(), here);
        } else if width < top {
            while width < *self.indents.last().unwrap() {
                self.indents.pop();
                self.push(TokenKind::Dedent, String::new(), here);
            }
            if width != *self.indents.last().unwrap() {
                return Err(err(here, "unindent does not match any outer indentation level"));
            }
        }
        Ok(false)
    }

    fn number(&mut self, start: Pos) -> Result<(), DslError> {
        let mut s = String::new();
        let digits = |lx: &mut Lexer, s: &mut String| {
            while let Some(c) = lx.peek(0) {
                if c.is_ascii_digit() {
                    s.push(c);
                    lx.bump();
                } else {
                    break;
                }
            }
        };
        digits(self, &mut s);
        if self.peek(0) == Some('.') {
            s.push('.');
            self.bump();
            digits(self, &mut s);
        }
        if matches!(self.peek(0), Some('e') | Some('E')) {
            let sign = matches!(self.peek(1), Some('+') | Some('-'));
            let d = self.peek(if sign { 2 } else { 1 });
            if d.is_some_and(|d| d.is_ascii_digit()) {
                s.push(self.bump().unwrap());
                if sign {
                    s.push(self.bump().unwrap());
                }
                digits(self, &mut s);
            }
        }
        if let Some(c) = self.peek(0) {
            if c.is_alphanumeric() || c == '_' {
                return Err(err(self.pos(), format!("invalid character {c:?} in number literal")));
            }
        }
        self.push(TokenKind::Number, s, start);
        Ok(())
    }

    fn string(&mut self, start: Pos) -> Result<(), DslError> {
        let quote = self.bump().unwrap();
        let mut s = String::from(quote);
        loop {
            match self.peek(0) {
                None | Some('\n') => return Err(err(start, "unterminated string literal")),
                Some('\\') => {
                    s.push(self.bump().unwrap());
                    match self.peek(0) {
                        None | Some('\n') => return Err(err(start, "unterminated string literal")),
                        Some(_) => s.push(self.bump().unwrap()),
                    }
                }
                Some(c) if c == quote => {
                    s.push(self.bump().unwrap());
                    break;
                }
                Some(_) => s.push(self.bump().unwrap()),
            }
        }
        self.push(TokenKind::Str, s, start);
        Ok(())
    }
}

/// Decode the escapes of a string token's lexeme (quotes included).
pub fn unquote(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::new();
    let mut it = inner.chars();
    while let Some(c) = it.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match it.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('0') => out.push('\0'),
            Some(c @ ('\\' | '\'' | '"')) => out.push(c),
            Some(c) => {
                out.push('\\');
                out.push(c);
            }
            None => out.push('\\'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn empty_source_has_no_tokens() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn if_block_tokens() {
        use TokenKind::*;
        let k = kinds("if x > 1:\n    y = 2\n");
        let expect: Vec<(TokenKind, &str)> = vec![
            (Keyword, "if"),
            (Ident, "x"),
            (Op, ">"),
            (Number, "1"),
            (Punct, ":"),
            (Newline, "\n"),
            (Indent, ""),
            (Ident, "y"),
            (Op, "="),
            (Number, "2"),
            (Newline, "\n"),
            (Dedent, ""),
        ];
        let expect: Vec<(TokenKind, String)> =
            expect.into_iter().map(|(k, s)| (k, s.to_string())).collect();
        assert_eq!(k, expect);
    }

    #[test]
    fn missing_final_newline_is_synthesized() {
        let k = kinds("x = 1");
        assert_eq!(k.last().unwrap().0, TokenKind::Newline);
    }

    #[test]
    fn brackets_join_lines() {
        let k = kinds("x = (1 +\n     2)\n");
        assert_eq!(k.iter().filter(|t| t.0 == TokenKind::Newline).count(), 1);
    }

    #[test]
    fn tabs_are_rejected() {
        let e = tokenize("if x:\n\ty = 1\n").unwrap_err();
        assert_eq!((e.span.start.line, e.span.start.col), (2, 1));
    }

    #[test]
    fn inconsistent_dedent() {
        let e = tokenize("if x:\n    if y:\n        z = 1\n  w = 2\n").unwrap_err();
        assert_eq!(e.span.start.line, 4);
        assert!(e.message.contains("unindent"));
    }

    #[test]
    fn illegal_character() {
        let e = tokenize("x = 1 $ 2\n").unwrap_err();
        assert_eq!((e.span.start.line, e.span.start.col), (1, 7));
    }

    #[test]
    fn numbers_and_strings() {
        let k = kinds("a = 1.5e-3 + .5\nassert a, 'it\\'s'\n");
        assert!(k.contains(&(TokenKind::Number, "1.5e-3".into())));
        assert!(k.contains(&(TokenKind::Number, ".5".into())));
        assert!(k.contains(&(TokenKind::Str, "'it\\'s'".into())));
        assert_eq!(unquote("'it\\'s'"), "it's");
    }

    #[test]
    fn indents_balance() {
        let toks = tokenize("def f(a):\n    if a:\n        if a:\n            b = 1\n").unwrap();
        let ind = toks.iter().filter(|t| t.kind == TokenKind::Indent).count();
        let ded = toks.iter().filter(|t| t.kind == TokenKind::Dedent).count();
        assert_eq!(ind, 3);
        assert_eq!(ind, ded);
    }
}
