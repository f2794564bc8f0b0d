use std::collections::BTreeSet;

use super::*;

const FIRST_CHECKED: &str = "from __static__ import CheckedDict\ndef f(x: CheckedDict[str, int]):\n    return x[\"A\"]\n\nf(CheckedDict[str, int]({\"A\": 1}))\n";
const DYN_OVERRIDE: &str = "class A:\n    def m(self) -> int:\n        return 0\n\nclass B(A):\n    def m(self):\n        # Error: dynamic cannot override int\n        return 0\n";

#[test]
fn verdicts_for_listings() {
    assert_eq!(
        source_verdict(FIRST_CHECKED, 1_000_000),
        Verdict::WellTypedValue("1".into(), EvalType::Dyn)
    );
    assert_eq!(
        source_verdict(DYN_OVERRIDE, 1_000_000),
        Verdict::StaticReject(vec![Code::ImpreciseOverride])
    );
    let spin = "def f() -> int:\n    while True:\n        pass\n\nf()\n";
    assert_eq!(source_verdict(spin, 1000), Verdict::Timeout);
    assert_eq!(
        source_verdict("def f(x: int) -> int:\n    return x\ns = \"s\"\nf(s)\n", 1000),
        Verdict::AllowedError(ErrorKind::CastError)
    );
    assert_eq!(source_verdict("", 10), Verdict::WellTypedValue("None".into(), EvalType::None));
}

#[test]
fn erasure_removes_every_annotation() {
    let p = parse(
        "class A:\n    x: int = 1\n    def m(self, y: str) -> str:\n        z: int = 2\n        return y\n\
         def f(a: A) -> int:\n    return a.x\nv: A = A()\nf(v)\n",
    )
    .unwrap();
    let e = erase(&p);
    let text = e.to_string();
    for t in ["int", "str", ": A"] {
        assert!(!text.contains(t), "{t} in {text}");
    }
    assert!(text.contains("dyn class A"));
    assert_eq!(soundness_verdict(&p, 10_000), Verdict::WellTypedValue("1".into(), EvalType::Int));
}

#[test]
fn checked_dict_programs_are_exempt_from_erasure() {
    let p = parse(FIRST_CHECKED).unwrap();
    assert!(has_checked_dict_literal(&p));
    assert!(!has_checked_dict_literal(&parse("def f(x):\n    return x\nf(1)\n").unwrap()));
}

#[test]
fn generation_is_deterministic() {
    for seed in 0..50 {
        let cfg = GenConfig::new(seed, 0.5);
        assert_eq!(generate_program(&cfg), generate_program(&cfg));
    }
}

fn annotations(p: &SurfaceProgram) -> Vec<SurfaceType> {
    fn block(b: &Block, out: &mut Vec<SurfaceType>) {
        for s in b {
            match &s.kind {
                StmtKind::LocalDef { ann: Some(t), .. } => out.push(t.clone()),
                StmtKind::If { then, els, .. } => {
                    block(then, out);
                    block(els, out);
                }
                StmtKind::While { body, .. } => block(body, out),
                _ => {}
            }
        }
    }
    fn func(f: &FuncDef, out: &mut Vec<SurfaceType>) {
        out.extend(f.param.iter().map(|p| p.ann.clone()));
        out.push(f.ret.clone());
        block(&f.body, out);
    }
    let mut out = Vec::new();
    for s in &p.stmts {
        match s {
            TopStmt::Var(v) => out.push(v.ann.clone()),
            TopStmt::Func(f) => func(f, &mut out),
            TopStmt::Class(c) => {
                out.extend(c.field.iter().map(|f| f.ann.clone()));
                c.methods.iter().for_each(|m| func(m, &mut out));
            }
            _ => {}
        }
    }
    out
}

#[test]
fn full_bias_writes_only_dyn() {
    for seed in 0..100 {
        let p = generate_program(&GenConfig::new(seed, 1.0));
        assert!(annotations(&p).iter().all(|t| *t == SurfaceType::Dyn));
    }
}

#[test]
fn generated_programs_round_trip() {
    for seed in 0..500 {
        let p = generate_program(&GenConfig::new(seed, [0.2, 0.5, 0.8][seed as usize % 3]));
        let text = p.to_string();
        let mut back = parse(&text).unwrap_or_else(|d| panic!("seed {seed}: {d:?}\n{text}"));
        back.clear_spans();
        assert_eq!(back, p, "seed {seed}\n{text}");
    }
}

fn constructors(p: &SurfaceProgram) -> BTreeSet<&'static str> {
    let mut out = BTreeSet::new();
    let mut visit = |e: &Expr| {
        e.walk(&mut |x| {
            out.insert(match &x.kind {
                ExprKind::Var(_) => "Var",
                ExprKind::NoneLit => "None",
                ExprKind::IntLit(_) => "Int",
                ExprKind::BoolLit(_) => "Bool",
                ExprKind::StrLit(_) => "Str",
                ExprKind::Call(..) => "Call",
                ExprKind::DictLit(_) => "DictLit",
                ExprKind::ChkDictLit(..) => "ChkDictLit",
                ExprKind::Subscript(..) => "Subscript",
                ExprKind::SubscriptSet(..) => "SubscriptSet",
                ExprKind::New(..) => "New",
                ExprKind::FieldGet(..) => "FieldGet",
                ExprKind::FieldSet(..) => "FieldSet",
                ExprKind::MethodCall(..) => "MethodCall",
                ExprKind::IsNone(_) => "IsNone",
                ExprKind::Eq(..) => "Eq",
                ExprKind::Not(_) => "Not",
            });
        })
    };
    fn block(b: &Block, visit: &mut impl FnMut(&Expr)) {
        for s in b {
            match &s.kind {
                StmtKind::LocalDef { init: e, .. }
                | StmtKind::Assign { value: e, .. }
                | StmtKind::Return(Some(e))
                | StmtKind::Expr(e) => visit(e),
                StmtKind::If { cond, then, els } => {
                    visit(cond);
                    block(then, visit);
                    block(els, visit);
                }
                StmtKind::While { cond, body } => {
                    visit(cond);
                    block(body, visit);
                }
                _ => {}
            }
        }
    }
    for s in &p.stmts {
        match s {
            TopStmt::Var(VarDef { init: e, .. }) | TopStmt::Assign { value: e, .. } | TopStmt::Expr(e) => {
                visit(e)
            }
            TopStmt::Func(f) => block(&f.body, &mut visit),
            TopStmt::Class(c) => {
                c.field.iter().for_each(|f| visit(&f.default));
                c.methods.iter().for_each(|m| block(&m.body, &mut visit));
            }
        }
    }
    out
}

/// A `dyn class` redeclaring a method that a static ancestor declares with
/// annotations.
fn has_dyn_override_of_typed_method(p: &SurfaceProgram) -> bool {
    let classes: Vec<&ClassDef> = p
        .stmts
        .iter()
        .filter_map(|s| match s {
            TopStmt::Class(c) => Some(c),
            _ => None,
        })
        .collect();
    let find = |n: &str| classes.iter().find(|c| c.name == n);
    classes.iter().filter(|c| c.dynamic).any(|c| {
        c.methods.iter().any(|m| {
            let mut cur = find(&c.parent);
            while let Some(a) = cur {
                if !a.dynamic && a.methods.iter().any(|am| am.name == m.name && am.ret != SurfaceType::Dyn) {
                    return true;
                }
                cur = find(&a.parent);
            }
            false
        })
    })
}

#[test]
fn generator_covers_every_constructor_and_both_class_flavors() {
    let mut seen = BTreeSet::new();
    let (mut dyn_classes, mut static_classes, mut overrides) = (0, 0, 0);
    for seed in 0..1000 {
        let p = generate_program(&GenConfig::new(seed, 0.5));
        seen.extend(constructors(&p));
        for s in &p.stmts {
            if let TopStmt::Class(c) = s {
                if c.dynamic {
                    dyn_classes += 1;
                } else {
                    static_classes += 1;
                }
            }
        }
        overrides += usize::from(has_dyn_override_of_typed_method(&p));
    }
    assert_eq!(seen.len(), 17, "{seen:?}");
    assert!(dyn_classes > 0 && static_classes > 0);
    assert!(overrides > 0);
}

#[test]
fn small_campaign_has_no_violations() {
    for (seed, bias) in [(1, 0.2), (2, 0.5), (3, 0.8)] {
        let r = fuzz(300, seed, bias, DEFAULT_BUDGET);
        assert_eq!(r.total(), 300);
        assert!(r.violations.is_empty(), "{r}");
        assert!(r.count(VerdictKind::WellTypedValue) > 0, "{r}");
        assert!(r.count(VerdictKind::AllowedError) > 0, "{r}");
    }
}

#[test]
fn verdicts_are_deterministic() {
    for seed in 0..100 {
        let p = generate_program(&GenConfig::new(seed, 0.5));
        assert_eq!(soundness_verdict(&p, 5000), soundness_verdict(&p, 5000));
    }
}

#[test]
fn corpus_headers() {
    assert_eq!(
        Expectation::from_source("# expect: static E-IMPLICIT-NONE-RETURN\n"),
        Ok(Expectation::Static(Code::ImplicitNoneReturn))
    );
    assert_eq!(
        Expectation::from_source("x = 1\n# expect: runtime KeyError\n"),
        Ok(Expectation::Runtime(ErrorKind::KeyError))
    );
    assert_eq!(
        Expectation::from_source("# expect: value \"a b\"\n"),
        Ok(Expectation::Value("\"a b\"".into()))
    );
    assert!(Expectation::from_source("# expect: static E-NOPE\n").is_err());
    assert!(Expectation::from_source("f()\n").is_err());
}

#[test]
fn empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_corpus(dir.path()).unwrap();
    assert_eq!((r.cases.len(), r.ok()), (0, true));
    assert_eq!(r.to_string(), "0 passed, 0 failed, 0 total\n");
}
