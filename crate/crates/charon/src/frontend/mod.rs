//! CharonLang frontend: lexer, parser, pretty-printer, and name binding.

pub mod ast;
pub mod bound;
pub mod parser;
pub mod printer;
pub mod token;

use thiserror::Error;

pub use ast::{ast_node_count, BinOp, Expr, FuncDef, Program, Stmt, Type, UnOp};
pub use bound::{bind, BoundProgram, UsageInfo};
pub use printer::print_program;
pub use token::tokenize;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("lexical error at {line}:{col}: {message}")]
    Lex {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("semantic error: {message}")]
    Semantic { message: String },
}

/// Lex, parse, and validate a source file.
pub fn parse(source: &str) -> Result<Program, FrontendError> {
    parser::parse_tokens(tokenize(source)?)
}
