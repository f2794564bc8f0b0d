//! Surface syntax: tokens, abstract syntax, parser and unparser.

mod ast;
mod lexer;
mod parser;
mod unparse;

pub use ast::*;
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse, parse_type};
pub(crate) use unparse::write_str_lit;
