//! Error types for the DSL front end.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: u32,
        col: u32,
        message: String,
    },
    #[error("type error at {line}:{col}: {message}")]
    Type {
        line: u32,
        col: u32,
        message: String,
    },
    #[error("unbound name `{name}` at {line}:{col}")]
    Unbound {
        line: u32,
        col: u32,
        name: String,
    },
    #[error("evaluation error at {line}:{col}: {message}")]
    Eval {
        line: u32,
        col: u32,
        message: String,
    },
}
