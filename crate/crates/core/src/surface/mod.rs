//! Concrete syntax: lexing, parsing, printing and elaboration.

pub mod ast;
pub mod elab;
pub mod lexer;
pub mod parser;
pub mod print;

pub use ast::{CstrOp, Decl, Expr, ExprKind, Param, SurfaceConstraint};
pub use elab::{Elaborated, Elaborator};
pub use parser::{parse_constraints, parse_expr, parse_file, parse_level, parse_level_vars, ParseError};
