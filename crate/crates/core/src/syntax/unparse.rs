//! Printing of surface syntax back to parseable source text.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

impl Display for SurfaceType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceType::None => f.write_str("None"),
            SurfaceType::Dyn => f.write_str("dyn"),
            SurfaceType::Int => f.write_str("int"),
            SurfaceType::Bool => f.write_str("bool"),
            SurfaceType::Str => f.write_str("str"),
            SurfaceType::Class(c) => f.write_str(c),
            SurfaceType::Dict(k, v) => write!(f, "Dict[{k}, {v}]"),
            SurfaceType::CheckedDict(k, v) => write!(f, "CheckedDict[{k}, {v}]"),
            SurfaceType::Union(items) if items.len() == 2 && items[0] == SurfaceType::None => {
                write!(f, "Optional[{}]", items[1])
            }
            SurfaceType::Union(items) => {
                f.write_str("Union[")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
            SurfaceType::Optional(t) => write!(f, "Optional[{t}]"),
        }
    }
}

pub(crate) fn write_str_lit(out: &mut impl Write, s: &str) -> fmt::Result {
    out.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            c => out.write_char(c)?,
        }
    }
    out.write_char('"')
}

/// Expressions that must be parenthesized when used as a comparison operand
/// or as the receiver of a postfix operation.
fn needs_parens(e: &Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::Not(_) | ExprKind::Eq(..) | ExprKind::IsNone(_)
    )
}

struct Operand<'a>(&'a Expr);

impl Display for Operand<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if needs_parens(self.0) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn write_args(f: &mut Formatter<'_>, args: &[Expr]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

fn write_entries(f: &mut Formatter<'_>, entries: &[(Expr, Expr)]) -> fmt::Result {
    f.write_str("{")?;
    for (i, (k, v)) in entries.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{k}: {v}")?;
    }
    f.write_str("}")
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Var(x) => f.write_str(x),
            ExprKind::NoneLit => f.write_str("None"),
            ExprKind::IntLit(i) => write!(f, "{i}"),
            ExprKind::BoolLit(true) => f.write_str("True"),
            ExprKind::BoolLit(false) => f.write_str("False"),
            ExprKind::StrLit(s) => write_str_lit(f, s),
            ExprKind::Call(name, args) | ExprKind::New(name, args) => {
                f.write_str(name)?;
                write_args(f, args)
            }
            ExprKind::DictLit(entries) => write_entries(f, entries),
            ExprKind::ChkDictLit(k, v, entries) => {
                write!(f, "CheckedDict[{k}, {v}](")?;
                write_entries(f, entries)?;
                f.write_str(")")
            }
            ExprKind::Subscript(d, k) => write!(f, "{}[{k}]", Operand(d)),
            ExprKind::SubscriptSet(d, k, v) => write!(f, "{}[{k}] = {v}", Operand(d)),
            ExprKind::FieldGet(o, x) => write!(f, "{}.{x}", Operand(o)),
            ExprKind::FieldSet(o, x, v) => write!(f, "{}.{x} = {v}", Operand(o)),
            ExprKind::MethodCall(o, m, args) => {
                write!(f, "{}.{m}", Operand(o))?;
                write_args(f, args)
            }
            ExprKind::IsNone(e) => write!(f, "{} is None", Operand(e)),
            ExprKind::Eq(a, b) => write!(f, "{} == {}", Operand(a), Operand(b)),
            ExprKind::Not(e) => write!(f, "not {e}"),
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn write_block(out: &mut String, block: &Block, depth: usize) {
    if block.is_empty() {
        indent(out, depth);
        out.push_str("pass\n");
        return;
    }
    for s in block {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::LocalDef {
            name,
            ann: Some(t),
            init,
        } => {
            let _ = writeln!(out, "{name}: {t} = {init}");
        }
        StmtKind::LocalDef {
            name,
            ann: None,
            init,
        } => {
            let _ = writeln!(out, "{name} = {init}");
        }
        StmtKind::Assign { name, value } => {
            let _ = writeln!(out, "{name} = {value}");
        }
        StmtKind::If { cond, then, els } => {
            let _ = writeln!(out, "if {cond}:");
            write_block(out, then, depth + 1);
            let mut els = els;
            loop {
                match els.as_slice() {
                    [] => break,
                    [Stmt {
                        kind: StmtKind::If { cond, then, els: rest },
                        ..
                    }] => {
                        indent(out, depth);
                        let _ = writeln!(out, "elif {cond}:");
                        write_block(out, then, depth + 1);
                        els = rest;
                    }
                    _ => {
                        indent(out, depth);
                        out.push_str("else:\n");
                        write_block(out, els, depth + 1);
                        break;
                    }
                }
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while {cond}:");
            write_block(out, body, depth + 1);
        }
        StmtKind::Break => out.push_str("break\n"),
        StmtKind::Pass => out.push_str("pass\n"),
        StmtKind::Return(None) => out.push_str("return\n"),
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "return {e}");
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{e}");
        }
    }
}

fn write_func(out: &mut String, fd: &FuncDef, depth: usize, method: bool) {
    indent(out, depth);
    let _ = write!(out, "def {}(", fd.name);
    if method {
        out.push_str("self");
        if fd.param.is_some() {
            out.push_str(", ");
        }
    }
    if let Some(p) = &fd.param {
        let _ = write!(out, "{}: {}", p.name, p.ann);
    }
    let _ = writeln!(out, ") -> {}:", fd.ret);
    write_block(out, &fd.body, depth + 1);
}

impl Display for SurfaceProgram {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for s in &self.stmts {
            match s {
                TopStmt::Var(v) => {
                    let _ = writeln!(out, "{}: {} = {}", v.name, v.ann, v.init);
                }
                TopStmt::Assign { name, value, .. } => {
                    let _ = writeln!(out, "{name} = {value}");
                }
                TopStmt::Func(fd) => write_func(&mut out, fd, 0, false),
                TopStmt::Class(c) => {
                    if c.dynamic {
                        out.push_str("dyn ");
                    }
                    let _ = write!(out, "class {}", c.name);
                    if c.parent != "object" {
                        let _ = write!(out, "({})", c.parent);
                    }
                    out.push_str(":\n");
                    if let Some(fd) = &c.field {
                        let _ = writeln!(out, "    {}: {} = {}", fd.name, fd.ann, fd.default);
                    }
                    for m in &c.methods {
                        write_func(&mut out, m, 1, true);
                    }
                    if c.field.is_none() && c.methods.is_empty() {
                        out.push_str("    pass\n");
                    }
                }
                TopStmt::Expr(e) => {
                    let _ = writeln!(out, "{e}");
                }
            }
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn round_trip(src: &str) {
        let mut a = parse(src).unwrap();
        let printed = a.to_string();
        let mut b = parse(&printed).unwrap_or_else(|d| panic!("{printed}\n{d:?}"));
        a.clear_spans();
        b.clear_spans();
        assert_eq!(a, b, "{printed}");
    }

    #[test]
    fn types_render_canonically() {
        let t = SurfaceType::checked_dict(SurfaceType::Str, SurfaceType::Dyn);
        assert_eq!(t.to_string(), "CheckedDict[str, dyn]");
        assert_eq!(
            SurfaceType::optional(SurfaceType::class("C")).to_string(),
            "Optional[C]"
        );
        assert_eq!(
            SurfaceType::Union(vec![SurfaceType::Int, SurfaceType::Str]).to_string(),
            "Union[int, str]"
        );
    }

    #[test]
    fn programs_round_trip() {
        round_trip("def f(x):\n    return x[\"A\"]\n\nf({\"A\": 1})\n");
        round_trip(
            "class A:\n    x: Optional[int] = None\n    def m(self, y: str) -> int:\n        return 0\n\
             dyn class B(A):\n    def m(self, y):\n        return \"q\\n\\\"\"\n\
             a: A = B(3)\na.x = 4\nnot (a.x is None) == True\n(not a.m(\"s\")).x\n",
        );
        round_trip(
            "def g(x: Optional[str]) -> Optional[str]:\n    while True:\n        if x is None:\n            break\n        elif x == \"a\":\n            y = 1\n            y = 2\n        else:\n            pass\n        return x\n",
        );
        round_trip("d = CheckedDict[str, Dict[int, bool]]({})\nd[\"a\"] = {1: True}\n");
    }
}
