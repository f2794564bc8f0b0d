//! An untyped subclass overrides a typed method; its results are checked on
//! the way back into typed code.

use gsp::checker::check_program;
use gsp::syntax::parse;
use gsp::vm::{self, Options};

const SRC: &str = "\
class Shape:
    def sides(self) -> int:
        return 0

dyn class Blob(Shape):
    guess: dyn = \"many\"
    def sides(self):
        return self.guess

class Square(Shape):
    def sides(self) -> int:
        return 4

def count(s: Shape) -> int:
    return s.sides()

count(Square())
count(Blob())
";

fn main() {
    let p = check_program(&parse(SRC).unwrap()).unwrap();
    for c in &p.classes {
        for slot in &c.vtable {
            if let Some(t) = &slot.wrapper {
                println!("{}.{} is wrapped, results cast to {t}", c.name, slot.name);
            }
        }
    }
    let out = vm::run(&p, &Options::default());
    println!("output: {:?}", out.output);
    println!("result: {:?}", out.result);
}
