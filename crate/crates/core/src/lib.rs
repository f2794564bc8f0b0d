pub mod diag;
pub mod syntax;
pub mod types;
pub mod checker;
pub mod runtime;
pub mod vm;
pub mod harness;
