//! Prints the bytecode of a small program before and after optimization.

use gsp::checker::check_program;
use gsp::syntax::parse;
use gsp::vm;

const SRC: &str = "def f(x: CheckedDict[str, int]) -> int:\n    return x[\"A\"]\n\nf(CheckedDict[str, int]({\"A\": 1}))\n";

fn main() {
    let p = check_program(&parse(SRC).unwrap()).unwrap();
    println!("-- checked entry everywhere");
    print!("{}", vm::build(&p, false));
    println!("-- strict calls use the fast entry");
    print!("{}", vm::build(&p, true));
}
