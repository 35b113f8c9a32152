//! Front-end for `.cqp` process programs.
//!
//! ```text
//! Alice(c:^[Qdit], e:^[Val,Val]) = c?[x:Qdit].{x,z *= Lc}.{x *= H}.e![measure z, measure x].0
//! main = Alice(c, e)
//! ```

mod ast;
mod lexer;
mod parser;
mod pretty;
mod typecheck;

use thiserror::Error;

pub use ast::*;
pub use parser::parse;
pub use pretty::{pretty, pretty_expr, pretty_gate, pretty_term};
pub use typecheck::{implicit_qudits, typecheck, Diagnostic, DiagnosticKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}
