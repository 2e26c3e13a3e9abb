//! Denotational semantics for a PROMELA fragment, checked against an
//! operational reference interpreter.

pub mod cfg;
pub mod compare;
pub mod denote;
pub mod domain;
pub mod dump;
pub mod model;
pub mod oracle;
pub mod state;
pub mod syntax;
pub mod system;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] syntax::ParseError),
    #[error("normalize error: {0}")]
    Normalize(#[from] syntax::NormalizeError),
    #[error("static error: {0}")]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Domain(#[from] domain::DomainError),
    #[error("denotation error: {0}")]
    Denote(#[from] denote::DenoteError),
    #[error("contract violation: {0}")]
    System(#[from] system::SystemError),
}
