//! Type-checks a few programs and prints their diagnostics or elaboration
//! summary.

use gsp::checker::check_program;
use gsp::syntax::parse;

const PROGRAMS: [(&str, &str); 3] = [
    (
        "typed read",
        "def f(x: CheckedDict[str, int]) -> int:\n    return x[\"A\"]\n\nf(CheckedDict[str, int]({\"A\": 1}))\n",
    ),
    (
        "untyped override",
        "class A:\n    def m(self) -> int:\n        return 0\n\nclass B(A):\n    def m(self):\n        return 0\n",
    ),
    (
        "break then fall off",
        "def f(x: Optional[str]) -> str:\n    while True:\n        if x is None:\n            break\n        return x\n",
    ),
];

fn main() {
    for (name, src) in PROGRAMS {
        print!("{name}: ");
        match parse(src).and_then(|p| check_program(&p)) {
            Ok(p) => println!(
                "ok, {} function(s), {} cast(s) inserted",
                p.funcs.len(),
                p.count_casts()
            ),
            Err(diags) => {
                println!("rejected");
                for d in diags {
                    println!("  {d}");
                }
            }
        }
    }
}
