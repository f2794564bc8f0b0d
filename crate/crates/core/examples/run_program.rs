//! Runs a program on the VM and prints its output, result and counters.

use gsp::checker::check_program;
use gsp::syntax::parse;
use gsp::vm::{self, Options};

const SRC: &str = "\
class Point:
    x: int = 0
    def shift(self, d: int) -> int:
        return self.x

def total(d: CheckedDict[str, int]) -> int:
    return d[\"a\"]

p: Point = Point(3)
p.shift(1)
total(CheckedDict[str, int]({\"a\": 40}))
raw = {\"k\": \"v\"}
raw[\"k\"]
";

fn main() {
    let program = check_program(&parse(SRC).unwrap()).unwrap();
    let out = vm::run(&program, &Options::default());
    for line in &out.output {
        println!("{line}");
    }
    println!("result: {:?}", out.result);
    println!("{}", serde_json::to_string_pretty(&out.metrics).unwrap());
}
