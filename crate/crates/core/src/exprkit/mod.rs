//! Coordinate expressions: parsing, printing and jet evaluation.

mod chart;
mod eval;
mod expr;
pub mod jet;
pub mod jetmat;

pub use chart::Chart;
pub use expr::{parse_expr, BinaryOp, Expr, UnaryOp};
pub use jet::{Jet, JetSpace};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared variable `{0}`")]
    Undeclared(String),
    #[error("no value bound for `{0}`")]
    Unbound(String),
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: String },
    #[error("jet order {0} is not supported")]
    Order(usize),
    #[error("invalid chart: {0}")]
    Chart(String),
}
