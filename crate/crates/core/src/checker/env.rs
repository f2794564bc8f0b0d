//! Building the type environment and validating class hierarchies.

use std::collections::HashSet;

use indexmap::IndexMap;

use crate::diag::{Code, Diagnostic};
use crate::syntax::{Block, ClassDef, FuncDef, Span, StmtKind, SurfaceProgram, SurfaceType, TopStmt};
use crate::types::{
    retract, subtype, ClassSig, EvalType, FieldSig, FuncSig, MethodSig, TypeEnv, VarSig, OBJECT,
};

use super::elab::VSlot;

/// Names that can never be declared by a program.
const RESERVED: &[&str] = &[
    OBJECT,
    "int",
    "bool",
    "str",
    "dynamic",
    "Dict",
    "CheckedDict",
    "Optional",
    "Union",
];

/// Retracts an annotation, reporting classes missing from `env`. Unknown
/// classes are replaced by `dyn` so checking can continue.
pub(crate) fn resolve_ann(
    env: &TypeEnv,
    ann: &SurfaceType,
    span: Span,
    diags: &mut Vec<Diagnostic>,
) -> EvalType {
    let mut ok = true;
    ann.for_each_class(&mut |c| {
        if !env.classes.contains_key(c) {
            ok = false;
            diags.push(Diagnostic::new(
                Code::UnknownClass,
                span,
                format!("unknown class `{c}`"),
            ));
        }
    });
    if ok {
        retract(ann)
    } else {
        EvalType::Dyn
    }
}

fn func_sig_parts(
    env: &TypeEnv,
    f: &FuncDef,
    diags: &mut Vec<Diagnostic>,
) -> (Option<EvalType>, EvalType) {
    let param = f
        .param
        .as_ref()
        .map(|p| resolve_ann(env, &p.ann, f.span, diags));
    let ret = resolve_ann(env, &f.ret, f.span, diags);
    (param, ret)
}

fn local_annotations<'a>(b: &'a Block, out: &mut Vec<(&'a SurfaceType, Span)>) {
    for s in b {
        match &s.kind {
            StmtKind::LocalDef { ann: Some(t), .. } => out.push((t, s.span)),
            StmtKind::If { then, els, .. } => {
                local_annotations(then, out);
                local_annotations(els, out);
            }
            StmtKind::While { body, .. } => local_annotations(body, out),
            _ => {}
        }
    }
}

fn check_dyn_class_annotations(c: &ClassDef, diags: &mut Vec<Diagnostic>) {
    let mut anns: Vec<(&SurfaceType, Span)> = Vec::new();
    if let Some(f) = &c.field {
        anns.push((&f.ann, f.span));
    }
    for m in &c.methods {
        if let Some(p) = &m.param {
            anns.push((&p.ann, m.span));
        }
        anns.push((&m.ret, m.span));
        local_annotations(&m.body, &mut anns);
    }
    for (ann, span) in anns {
        if !retract(ann).is_dyn() {
            diags.push(Diagnostic::new(
                Code::DynClassPreciseAnn,
                span,
                format!("`dyn class {}` may only use `dyn` annotations, found `{ann}`", c.name),
            ));
        }
    }
}

/// Enters every top-level declaration into a fresh environment.
pub fn build_env(p: &SurfaceProgram) -> (TypeEnv, Vec<Diagnostic>) {
    let mut env = TypeEnv::new();
    let mut diags = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    // Declarations that made it into the environment, in source order.
    let mut classes: Vec<&ClassDef> = Vec::new();
    let mut funcs: Vec<&FuncDef> = Vec::new();
    let mut vars = Vec::new();

    for s in &p.stmts {
        let (name, span) = match s {
            TopStmt::Var(v) => (v.name.as_str(), v.span),
            TopStmt::Func(f) => (f.name.as_str(), f.span),
            TopStmt::Class(c) => (c.name.as_str(), c.span),
            TopStmt::Assign { .. } | TopStmt::Expr(_) => continue,
        };
        if RESERVED.contains(&name) {
            diags.push(Diagnostic::new(
                Code::DupName,
                span,
                format!("`{name}` is a builtin name"),
            ));
            continue;
        }
        if !seen.insert(name) {
            diags.push(Diagnostic::new(
                Code::DupName,
                span,
                format!("`{name}` is already defined"),
            ));
            continue;
        }
        match s {
            TopStmt::Var(v) => vars.push(v),
            TopStmt::Func(f) => funcs.push(f),
            TopStmt::Class(c) => {
                let parent = if env.classes.contains_key(&c.parent) {
                    c.parent.clone()
                } else {
                    diags.push(Diagnostic::new(
                        Code::UnknownClass,
                        c.span,
                        format!("unknown parent class `{}`", c.parent),
                    ));
                    OBJECT.to_string()
                };
                env.classes.insert(
                    c.name.clone(),
                    ClassSig {
                        parent: Some(parent),
                        dynamic: c.dynamic,
                        field: None,
                        methods: IndexMap::new(),
                    },
                );
                classes.push(c);
            }
            _ => unreachable!(),
        }
    }

    // Members are filled in once every class name is known, so annotations
    // may mention classes declared later in the file.
    for c in classes {
        if c.dynamic {
            check_dyn_class_annotations(c, &mut diags);
        }
        if let Some(f) = &c.field {
            let ty = resolve_ann(&env, &f.ann, f.span, &mut diags);
            let parent = env.classes[c.name.as_str()].parent.clone().unwrap();
            let clash = env.lookup_field(&parent, &f.name).is_some()
                || env.lookup_method(&parent, &f.name).is_some();
            if clash {
                diags.push(Diagnostic::new(
                    Code::DupName,
                    f.span,
                    format!("`{}` is already a member of an ancestor of `{}`", f.name, c.name),
                ));
            } else {
                env.classes[c.name.as_str()].field = Some(FieldSig {
                    name: f.name.clone(),
                    ty,
                    declaring: c.name.clone(),
                });
            }
        }
        for m in &c.methods {
            let (param, ret) = func_sig_parts(&env, m, &mut diags);
            let sig = &env.classes[c.name.as_str()];
            if sig.methods.contains_key(&m.name) {
                diags.push(Diagnostic::new(
                    Code::DupName,
                    m.span,
                    format!("method `{}` is defined twice in `{}`", m.name, c.name),
                ));
                continue;
            }
            if env.lookup_field(&c.name, &m.name).is_some() {
                diags.push(Diagnostic::new(
                    Code::DupName,
                    m.span,
                    format!("method `{}` clashes with a field of `{}`", m.name, c.name),
                ));
                continue;
            }
            env.classes[c.name.as_str()].methods.insert(
                m.name.clone(),
                MethodSig {
                    param,
                    ret,
                    declaring: c.name.clone(),
                },
            );
        }
    }

    for f in funcs {
        let (param, ret) = func_sig_parts(&env, f, &mut diags);
        let typed = !ret.is_dyn() || param.as_ref().is_some_and(|p| !p.is_dyn());
        env.funcs
            .insert(f.name.clone(), FuncSig { param, ret, typed });
    }
    for v in vars {
        let ty = resolve_ann(&env, &v.ann, v.span, &mut diags);
        env.vars.insert(
            v.name.clone(),
            VarSig {
                ann: v.ann.clone(),
                ty,
            },
        );
    }
    (env, diags)
}

/// The nearest declaration of `method` strictly above `class` in a class
/// that is not dynamic. Declarations in dynamic classes are untyped and
/// impose nothing.
pub(crate) fn typed_ancestor_decl<'e>(
    env: &'e TypeEnv,
    class: &str,
    method: &str,
) -> Option<&'e MethodSig> {
    env.ancestors(class)
        .skip(1)
        .filter(|a| !env.classes[*a].dynamic)
        .find_map(|a| env.classes[a].methods.get(method))
}

/// Validates the overrides of `class` and computes its vtable from the
/// parent's. Each method name keeps the slot it was given where it was
/// first introduced. `span_of` locates a method's definition.
pub fn check_override(
    env: &TypeEnv,
    class: &str,
    parent_vtable: &[VSlot],
    span_of: impl Fn(&str) -> Span,
    diags: &mut Vec<Diagnostic>,
) -> Vec<VSlot> {
    let sig = &env.classes[class];
    let mut vtable = parent_vtable.to_vec();
    for (name, own) in &sig.methods {
        let decl = typed_ancestor_decl(env, class, name);
        if let (false, Some(p)) = (sig.dynamic, decl) {
            check_signature(env, class, name, own, p, span_of(name), diags);
        }
        let wrapper = decl
            .filter(|p| !p.ret.is_dyn() && !subtype(env, &own.ret, &p.ret))
            .map(|p| p.ret.clone());
        let entry = VSlot {
            name: name.clone(),
            func: format!("{class}.{name}"),
            wrapper,
        };
        match vtable.iter().position(|s| &s.name == name) {
            Some(i) => vtable[i] = entry,
            None => vtable.push(entry),
        }
    }
    vtable
}

fn check_signature(
    env: &TypeEnv,
    class: &str,
    name: &str,
    own: &MethodSig,
    parent: &MethodSig,
    span: Span,
    diags: &mut Vec<Diagnostic>,
) {
    let here = format!("`{class}.{name}` overrides `{}.{name}`", parent.declaring);
    let mut report = |code, msg: String| diags.push(Diagnostic::new(code, span, format!("{here}: {msg}")));
    if own.arity() != parent.arity() {
        report(
            Code::IncompatOverride,
            format!("takes {} argument(s), expected {}", own.arity(), parent.arity()),
        );
        return;
    }
    if !parent.ret.is_dyn() && own.ret.is_dyn() {
        report(
            Code::ImpreciseOverride,
            format!("dyn cannot override return type {}", parent.ret),
        );
    } else if !subtype(env, &own.ret, &parent.ret) {
        report(
            Code::IncompatOverride,
            format!("return type {} is not a subtype of {}", own.ret, parent.ret),
        );
    }
    if let (Some(pp), Some(op)) = (&parent.param, &own.param) {
        if !pp.is_dyn() && op.is_dyn() {
            report(
                Code::ImpreciseOverride,
                format!("dyn cannot override parameter type {pp}"),
            );
        } else if !subtype(env, pp, op) {
            report(
                Code::IncompatOverride,
                format!("parameter type {op} does not accept {pp}"),
            );
        }
    }
}
