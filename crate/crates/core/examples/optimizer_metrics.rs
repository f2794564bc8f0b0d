//! Compares call counters with and without the argument-check skipping pass.

use gsp::checker::check_program;
use gsp::syntax::parse;
use gsp::vm::{self, Options};

const SRC: &str = "\
def inc(x: int) -> int:
    return x

def loose(y):
    return inc(y)

class C:
    def get(self, k: str) -> str:
        return k

c: C = C()
inc(1)
inc(2)
c.get(\"a\")
loose(3)
";

fn main() {
    let p = check_program(&parse(SRC).unwrap()).unwrap();
    for optimize in [false, true] {
        let out = vm::run(&p, &Options { optimize, ..Options::default() });
        let m = &out.metrics;
        println!(
            "optimize={optimize:<5} output={:?} check_args={} arg_casts={} direct={} vtable={} dynamic={}",
            out.output, m.check_args_executed, m.arg_casts_executed, m.direct_calls, m.vtable_calls, m.dynamic_calls
        );
    }
}
