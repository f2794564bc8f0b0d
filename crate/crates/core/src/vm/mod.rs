//! Bytecode compiler, optimizer and interpreter.

mod bytecode;
mod compile;
mod interp;
mod optimize;

pub use bytecode::{BytecodeModule, EntryPoint, Function, Instr, TypeIdx, MODULE_NAME};
pub use compile::compile;
pub use interp::execute;
pub use optimize::optimize;

use serde::{Deserialize, Serialize};

use crate::checker::ElabProgram;
use crate::runtime::RuntimeError;
use crate::types::EvalType;

/// Dynamic instruction counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    /// `CAST` instructions plus field checks on dynamic attribute writes.
    pub casts_executed: u64,
    pub check_args_executed: u64,
    /// Individual parameter checks performed by `CHECK_ARGS`.
    pub arg_casts_executed: u64,
    /// Key and value casts performed on checked-dict elements.
    pub element_casts: u64,
    pub direct_calls: u64,
    pub vtable_calls: u64,
    pub dynamic_calls: u64,
    pub wrapper_result_checks: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Instruction budget; exceeding it ends the run with [`Failure::Timeout`].
    pub budget: Option<u64>,
    /// Verifies the static types of locals, fields, arguments, results and
    /// printed values, failing with [`Failure::Internal`] on a mismatch.
    pub debug_checks: bool,
    pub optimize: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            budget: None,
            debug_checks: false,
            optimize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Runtime(RuntimeError),
    /// Out of budget, or nesting too deep.
    Timeout,
    /// A static guarantee did not hold at run time.
    Internal(String),
}

/// The last value printed by the module body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Printed {
    pub text: String,
    pub ty: EvalType,
    /// The value is accepted by its static type.
    pub conforms: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// One rendered line per printed top-level value, including those printed
    /// before a failure.
    pub output: Vec<String>,
    pub metrics: Metrics,
    pub result: Result<(), Failure>,
    pub last: Option<Printed>,
    pub steps: u64,
}

/// Compiles a checked program, optimizing unless told otherwise.
pub fn build(p: &ElabProgram, optimize_calls: bool) -> BytecodeModule {
    let mut m = compile(p);
    if optimize_calls {
        optimize(&mut m);
    }
    m
}

/// Compiles and runs a checked program.
pub fn run(p: &ElabProgram, opts: &Options) -> Outcome {
    execute(&build(p, opts.optimize), opts)
}

#[cfg(test)]
mod tests;
