//! Counts casts for typed reads and untyped writes on shallow and checked
//! dictionaries as the number of operations grows.

use gsp::checker::check_program;
use gsp::syntax::parse;
use gsp::vm::{self, Metrics, Options};

fn metrics(src: &str) -> Metrics {
    let p = check_program(&parse(src).unwrap()).unwrap();
    let out = vm::run(&p, &Options::default());
    out.result.unwrap();
    out.metrics
}

fn main() {
    println!("{:>6} {:>12} {:>15} {:>15} {:>12}", "N", "Dict read", "CheckedDict read", "guarded write", "Dict write");
    for n in [1, 10, 100, 1000] {
        let reads = "r(d)\n".repeat(n);
        let writes = "w(d)\n".repeat(n);
        let dr = metrics(&format!(
            "def r(x: Dict[str, int]) -> int:\n    return x[\"A\"]\n\nd: Dict[str, int] = {{\"A\": 1}}\n{reads}"
        ));
        let cr = metrics(&format!(
            "def r(x: CheckedDict[str, int]) -> int:\n    return x[\"A\"]\n\nd: CheckedDict[str, int] = CheckedDict[str, int]({{\"A\": 1}})\n{reads}"
        ));
        let gw = metrics(&format!(
            "def w(x):\n    x[\"A\"] = 2\n\nd: CheckedDict[str, int] = CheckedDict[str, int]({{}})\n{writes}"
        ));
        let dw = metrics(&format!("def w(x):\n    x[\"A\"] = 2\n\nd: Dict[str, int] = {{}}\n{writes}"));
        println!(
            "{n:>6} {:>12} {:>15} {:>15} {:>12}",
            dr.casts_executed, cr.casts_executed, gw.element_casts, dw.element_casts
        );
    }
}
