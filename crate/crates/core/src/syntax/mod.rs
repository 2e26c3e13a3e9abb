//! Source syntax of the PROMELA fragment: AST, parser and normalization.

pub mod ast;
mod lexer;
mod normalize;
mod parser;

use thiserror::Error;

pub use ast::*;
pub use normalize::normalize;
pub use parser::parse;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Unexpected { line: u32, col: u32, found: String, expected: String },
    #[error("{line}:{col}: unsupported construct: {construct}")]
    Unsupported { line: u32, col: u32, construct: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("line {line}: break outside a loop")]
    BreakOutsideLoop { line: u32 },
    #[error("label `{label}` defined twice in {owner}")]
    DuplicateLabel { label: String, owner: String },
    #[error("line {line}: goto to undefined label `{label}` in {owner}")]
    UndefinedLabel { label: String, owner: String, line: u32 },
    #[error("active proctype `{0}` declares parameters")]
    ActiveWithParams(String),
    #[error("program has neither init nor an active proctype")]
    NoInit,
}

/// Parse then normalize.
pub fn load(src: &str) -> Result<Program, crate::Error> {
    Ok(normalize(parse(src)?)?)
}
