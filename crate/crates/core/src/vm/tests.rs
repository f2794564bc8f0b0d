use super::*;
use crate::checker::check_program;
use crate::runtime::{element_visits, ErrorKind};
use crate::syntax::parse;

fn checked(src: &str) -> ElabProgram {
    let p = parse(src).unwrap_or_else(|d| panic!("parse failed: {d:?}"));
    check_program(&p).unwrap_or_else(|d| panic!("unexpected diagnostics: {d:#?}"))
}

fn debug(optimize: bool) -> Options {
    Options {
        budget: Some(10_000_000),
        debug_checks: true,
        optimize,
    }
}

fn run_src(src: &str, optimize: bool) -> Outcome {
    run(&checked(src), &debug(optimize))
}

fn ok(src: &str) -> Outcome {
    let out = run_src(src, true);
    assert_eq!(out.result, Ok(()), "{src}");
    out
}

fn error(src: &str) -> RuntimeError {
    match run_src(src, true).result {
        Err(Failure::Runtime(e)) => e,
        other => panic!("expected a runtime error, got {other:?}"),
    }
}

const FIRST_UNTYPED: &str = "def f(x):\n    return x[\"A\"]\n\nf({\"A\": 1})\n";
const FIRST_DICT: &str =
    "from typing import Dict\ndef f(x: Dict[str, int]):\n    return x[\"A\"]\n\nf({\"A\": 1})\n";
const FIRST_CHECKED: &str = "from __static__ import CheckedDict\ndef f(x: CheckedDict[str, int]):\n    return x[\"A\"]\n\nf(CheckedDict[str, int]({\"A\": 1}))\n";
const DICT_MISMATCH: &str = "from __static__ import CheckedDict\n\ndef f(x: CheckedDict[str, dynamic]):\n    return x[\"A\"]\n\nd = CheckedDict[str, int]({\"A\": 1})\nf(d)\n";

#[test]
fn first_program_prints_one_in_every_variant() {
    for src in [FIRST_UNTYPED, FIRST_DICT, FIRST_CHECKED] {
        for optimize in [true, false] {
            let out = run_src(src, optimize);
            assert_eq!(out.result, Ok(()));
            assert_eq!(out.output, vec!["1"], "{src}");
        }
    }
}

#[test]
fn dyn_intermediary_cast_names_the_target() {
    let e = error(DICT_MISMATCH);
    assert_eq!(e.kind, ErrorKind::CastError);
    assert_eq!(
        e.to_string(),
        "CastError: CheckedDict[str, dyn] expected, got CheckedDict[str, int]"
    );
}

#[test]
fn prologue_and_fast_entry() {
    let m = build(&checked(FIRST_CHECKED), false);
    let f = &m.funcs[m.func_id("f").unwrap()];
    assert!(matches!(f.code[0], Instr::CheckArgs(ref a) if a.len() == 1));
    assert_eq!(f.fast, 1);
    let m = build(&checked(FIRST_UNTYPED), false);
    let f = &m.funcs[m.func_id("f").unwrap()];
    assert!(!f.code.iter().any(|i| matches!(i, Instr::CheckArgs(_))));
    assert_eq!(f.fast, 0);
}

#[test]
fn dump_listing() {
    let m = build(&checked(FIRST_CHECKED), true);
    let expected = "\
def f nlocals=1 fast=1
0: CHECK_ARGS 0:CheckedDict[str, int]
1: LOAD_LOCAL 0
2: LOAD_CONST \"A\"
3: DICT_GET
4: RETURN_VALUE
5: LOAD_CONST None
6: RETURN_VALUE

def <module> nlocals=0 fast=0
0: LOAD_CONST \"A\"
1: LOAD_CONST 1
2: BUILD_CHECKED_MAP CheckedDict[str, int] 1
3: INVOKE_FUNCTION f fast 1
4: PRINT_EXPR dyn
5: LOAD_CONST None
6: RETURN_VALUE
";
    assert_eq!(m.to_string(), expected);
    let unopt = build(&checked(FIRST_CHECKED), false).to_string();
    assert_eq!(unopt, expected.replace("f fast 1", "f checked 1"));
}

#[test]
fn dyn_argument_and_result_emit_two_casts() {
    let src = "def f(x: int):\n    return x\n\ndef g(x: dyn) -> str:\n    return f(x)\n";
    let m = build(&checked(src), true);
    let g = &m.funcs[m.func_id("g").unwrap()];
    let casts = g.code.iter().filter(|i| matches!(i, Instr::Cast(_))).count();
    assert_eq!(casts, 2);
    let e = error(&format!("{src}g(3)\n"));
    assert_eq!(e.to_string(), "CastError: str expected, got int");
}

#[test]
fn wrapper_checks_untyped_override_results() {
    let src = "class A:\n    def m(self) -> int:\n        return 0\n\
               dyn class B(A):\n    def m(self):\n        return \"no\"\n\
               def call(a: A) -> int:\n    return a.m()\n";
    let out = ok(&format!("{src}call(A())\n"));
    assert_eq!(out.output, vec!["0"]);
    assert_eq!(out.metrics.wrapper_result_checks, 0);
    let out = run_src(&format!("{src}call(B())\n"), true);
    let Err(Failure::Runtime(e)) = out.result else { panic!("{:?}", out.result) };
    assert_eq!(e.to_string(), "CastError: int expected, got str");
    assert_eq!(out.metrics.wrapper_result_checks, 1);
    assert_eq!(out.metrics.vtable_calls, 1);
}

fn repeat(line: &str, n: usize) -> String {
    line.repeat(n)
}

fn dict_cost_metrics(n: usize) -> [Metrics; 4] {
    let dict_read = format!(
        "def r(x: Dict[str, int]) -> int:\n    return x[\"A\"]\n\nd: Dict[str, int] = {{\"A\": 1}}\n{}",
        repeat("r(d)\n", n)
    );
    let checked_read = format!(
        "def r(x: CheckedDict[str, int]) -> int:\n    return x[\"A\"]\n\nd: CheckedDict[str, int] = CheckedDict[str, int]({{\"A\": 1}})\n{}",
        repeat("r(d)\n", n)
    );
    let guarded_write = format!(
        "def w(x):\n    x[\"A\"] = 2\n\nd: CheckedDict[str, int] = CheckedDict[str, int]({{}})\n{}",
        repeat("w(d)\n", n)
    );
    let dict_write = format!(
        "def w(x):\n    x[\"A\"] = 2\n\nd: Dict[str, int] = {{}}\n{}",
        repeat("w(d)\n", n)
    );
    [dict_read, checked_read, guarded_write, dict_write].map(|src| ok(&src).metrics)
}

#[test]
fn per_operation_costs() {
    for n in [10u64, 1000] {
        let [dr, cr, gw, dw] = dict_cost_metrics(n as usize);
        assert_eq!(dr.casts_executed, n);
        assert_eq!(cr.casts_executed, 0);
        assert_eq!(gw.element_casts, 2 * n);
        assert_eq!(dw.element_casts, 0);
        assert_eq!(dw.casts_executed + gw.casts_executed, 0);
    }
}

#[test]
fn casts_of_large_checked_dicts_visit_no_elements() {
    for n in [10usize, 1000] {
        let entries: Vec<String> = (0..n).map(|i| format!("\"k{i}\": {i}")).collect();
        let src = format!(
            "def r(x: CheckedDict[str, int]) -> int:\n    return x[\"k0\"]\n\nd = CheckedDict[str, int]({{{}}})\n{}",
            entries.join(", "),
            repeat("r(d)\n", 50)
        );
        let before = element_visits();
        let out = ok(&src);
        let visits = element_visits() - before;
        assert_eq!(out.metrics.casts_executed, 50);
        assert_eq!(out.metrics.element_casts, 2 * n as u64);
        assert_eq!(visits, out.metrics.element_casts);
    }
}

#[test]
fn optimizer_skips_argument_checks_on_strict_calls() {
    let src = format!("def f(x: int) -> int:\n    return x\n\n{}", repeat("f(1)\n", 25));
    let opt = run_src(&src, true);
    let plain = run_src(&src, false);
    assert_eq!(opt.result, Ok(()));
    assert_eq!(opt.output, plain.output);
    assert_eq!(opt.metrics.arg_casts_executed, 0);
    assert_eq!(opt.metrics.direct_calls, 25);
    assert_eq!(plain.metrics.arg_casts_executed, 25);
    assert_eq!(plain.metrics.check_args_executed, 25);

    let methods = format!(
        "class C:\n    def m(self, x: str) -> str:\n        return x\n\nc: C = C()\n{}",
        repeat("c.m(\"s\")\n", 7)
    );
    let opt = run_src(&methods, true);
    let plain = run_src(&methods, false);
    assert_eq!(opt.output, plain.output);
    assert_eq!((opt.metrics.arg_casts_executed, opt.metrics.vtable_calls), (0, 7));
    assert_eq!(plain.metrics.arg_casts_executed, 7);
}

#[test]
fn lenient_calls_keep_argument_checks() {
    let src = "def f(x: int) -> int:\n    return x\n\ndef g(y):\n    return f(y)\n\ng(\"s\")\n";
    let out = run_src(src, true);
    let Err(Failure::Runtime(e)) = out.result else { panic!() };
    assert_eq!(e.to_string(), "CastError: int expected, got str");
    assert_eq!(out.metrics.check_args_executed, 1);
    assert_eq!(out.metrics.dynamic_calls, 2);
}

#[test]
fn objects_fields_and_defaults() {
    let src = "class P:\n    x: int = 1\nclass Q(P):\n    y: Optional[str] = None\n\
               q: Q = Q(\"s\")\nq.x\nq.y\nq.x = 5\nq.x\n";
    assert_eq!(ok(src).output, vec!["1", "\"s\"", "5"]);
}

#[test]
fn dynamic_attribute_errors() {
    let base = "class P:\n    x: int = 1\n    def m(self) -> int:\n        return 2\n\
                def get(o):\n    return o.x\n\
                def put(o):\n    o.x = 3\n    return o.x\n\
                def spoil(o):\n    o.x = \"s\"\n\
                def call(o):\n    return o.m()\n";
    let out = ok(&format!("{base}get(P())\nput(P())\ncall(P())\n"));
    assert_eq!(out.output, vec!["1", "3", "2"]);
    assert_eq!(out.metrics.casts_executed, 1);
    assert_eq!(error(&format!("{base}get(1)\n")).kind, ErrorKind::AttributeError);
    assert_eq!(error(&format!("{base}spoil(P())\n")).kind, ErrorKind::CastError);
    assert_eq!(error(&format!("{base}call(None)\n")).kind, ErrorKind::AttributeError);
}

#[test]
fn dictionary_errors() {
    assert_eq!(error("def f(d):\n    return d[\"B\"]\nf({\"A\": 1})\n").kind, ErrorKind::KeyError);
    assert_eq!(error("def f(d):\n    return d[1]\nf(3)\n").kind, ErrorKind::AttributeError);
    let w = "def w(d):\n    d[1] = 2\n    return d\nw(CheckedDict[str, int]({}))\n";
    assert_eq!(error(w).kind, ErrorKind::CastError);
}

#[test]
fn loops_and_budget() {
    let src = "def f(x: Optional[str]) -> str:\n    while True:\n        if x is None:\n            break\n        return x\n    return \"none\"\n\
               f(None)\nf(\"s\")\n";
    assert_eq!(ok(src).output, vec!["\"none\"", "\"s\""]);
    let spin = "def f() -> int:\n    while True:\n        pass\n\nf()\n";
    let out = run(&checked(spin), &Options { budget: Some(1000), ..debug(true) });
    assert_eq!(out.result, Err(Failure::Timeout));
    let rec = "def f(x):\n    return f(x)\n\nf(1)\n";
    assert_eq!(run_src(rec, true).result, Err(Failure::Timeout));
}

#[test]
fn equality_and_truthiness() {
    let src = "1 == True\n{\"a\": 1} == {\"a\": 1}\nnot \"\"\nnot {}\nNone is None\n";
    assert_eq!(ok(src).output, vec!["True", "True", "True", "True", "True"]);
}

#[test]
fn printed_value_conforms_to_static_type() {
    let out = ok("def f(x: int) -> int:\n    return x\nf(4)\n");
    let last = out.last.unwrap();
    assert_eq!((last.text.as_str(), last.ty.clone(), last.conforms), ("4", crate::types::EvalType::Int, true));
}

#[test]
fn errors_after_output_keep_earlier_lines() {
    let out = run_src("def f(x: int) -> int:\n    return x\ns = \"s\"\nf(1)\nf(s)\nf(2)\n", true);
    assert_eq!(out.output, vec!["1"]);
    assert!(matches!(out.result, Err(Failure::Runtime(_))));
}
