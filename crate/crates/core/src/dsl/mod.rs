//! Decision-logic language: a small indentation-sensitive Python subset.
//!
//! A program declares mode enums and one decision function taking the ego
//! agent and the collection of other agents:
//!
//! ```text
//! from enum import Enum, auto
//!
//! class TacticalMode(Enum):
//!     Normal = auto()
//!     MoveUp = auto()
//!
//! def decision(ego, others):
//!     if ego.tactical_mode == TacticalMode.Normal:
//!         if any(dist(ego, o) < 5 for o in others):
//!             ego.tactical_mode = TacticalMode.MoveUp
//!     assert all(dist(ego, o) >= 1 for o in others), "separation"
//! ```
//!
//! Reads of `ego.*` always see the state at the decision instant;
//! assignments describe the successor.

pub mod ast;
mod check;
mod lexer;
mod parser;
pub mod token;

use std::fmt;

use thiserror::Error;

pub use check::{check, CheckedProgram, BUILTINS, TACTICAL_FIELD, TRACK_FIELD};
pub use lexer::{detokenize, tokenize, unquote};
pub use parser::parse;
pub use token::{Pos, Span, Token, TokenKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DslErrorKind {
    Lex,
    Syntax,
    Unsupported,
    Check,
    Extract,
}

impl fmt::Display for DslErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DslErrorKind::Lex => "lex error",
            DslErrorKind::Syntax => "syntax error",
            DslErrorKind::Unsupported => "unsupported",
            DslErrorKind::Check => "check error",
            DslErrorKind::Extract => "extraction error",
        })
    }
}

/// Diagnostic with a source position; displays as `line:col: kind: message`.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{span}: {kind}: {message}")]
pub struct DslError {
    pub kind: DslErrorKind,
    pub span: Span,
    pub message: String,
    /// Token descriptions the parser would have accepted.
    pub expected: Vec<String>,
}

impl DslError {
    pub fn new(kind: DslErrorKind, span: Span, message: impl Into<String>) -> DslError {
        DslError {
            kind,
            span,
            message: message.into(),
            expected: Vec::new(),
        }
    }
}

/// Tokenize and parse in one step.
pub fn parse_source(source: &str) -> Result<ast::Program, DslError> {
    parse(&tokenize(source)?)
}

/// Tokenize, parse and check in one step.
pub fn load(source: &str, map_modes: &[String], fields: &[String]) -> Result<CheckedProgram, DslError> {
    check(parse_source(source)?, map_modes, fields)
}
