//! Static checking and cast insertion.
//!
//! [`check_program`] builds the environment, validates overrides, checks
//! every body and produces an [`ElabProgram`] in which each materialization
//! of `Dyn` is an explicit [`ElabKind::Cast`] and each call edge carries a
//! [`CallKind`].

mod body;
mod elab;
mod env;

use std::collections::HashSet;

use indexmap::IndexMap;

use crate::diag::{Code, Diagnostic};
use crate::syntax::{ClassDef, ExprKind, FuncDef, Span, SurfaceProgram, TopStmt};
use crate::types::{EvalType, TypeEnv};

use body::BodyChecker;
pub use elab::*;
pub use env::{build_env, check_override};
pub use crate::types::{coerce, Coercion};

/// Checks a parsed program. All diagnostics are collected, ordered by source
/// position.
pub fn check_program(p: &SurfaceProgram) -> Result<ElabProgram, Vec<Diagnostic>> {
    let (env, mut diags) = build_env(p);

    // The first definition of each class name is the one in `env`.
    let mut class_defs: IndexMap<&str, &ClassDef> = IndexMap::new();
    for s in &p.stmts {
        if let TopStmt::Class(c) = s {
            class_defs.entry(c.name.as_str()).or_insert(c);
        }
    }

    let mut vtables: IndexMap<String, Vec<VSlot>> = IndexMap::new();
    for (name, sig) in &env.classes {
        let vtable = match &sig.parent {
            None => Vec::new(),
            Some(parent) => {
                let def = class_defs.get(name.as_str());
                let span_of = |m: &str| {
                    def.map_or_else(Span::default, |c| {
                        c.methods.iter().find(|f| f.name == m).map_or(c.span, |f| f.span)
                    })
                };
                check_override(&env, name, &vtables[parent.as_str()], span_of, &mut diags)
            }
        };
        vtables.insert(name.clone(), vtable);
    }

    let mut funcs = Vec::new();
    let mut seen_funcs = HashSet::new();
    for s in &p.stmts {
        if let TopStmt::Func(f) = s {
            let Some(sig) = env.funcs.get(&f.name) else { continue };
            if !seen_funcs.insert(f.name.as_str()) {
                continue;
            }
            let params: Vec<EvalType> = sig.param.iter().cloned().collect();
            funcs.push(check_func(
                &env,
                &vtables,
                &mut diags,
                f,
                FuncSpec {
                    name: f.name.clone(),
                    role: FuncRole::Function,
                    typed: sig.typed,
                    params,
                    ret: sig.ret.clone(),
                },
            ));
        }
    }

    for (cname, c) in &class_defs {
        let Some(sig) = env.classes.get(*cname) else { continue };
        if sig.methods.is_empty() && sig.field.is_none() {
            continue;
        }
        let self_ty = if sig.dynamic {
            EvalType::Dyn
        } else {
            EvalType::class(*cname)
        };
        let mut done = HashSet::new();
        for m in &c.methods {
            let Some(msig) = sig.methods.get(&m.name) else { continue };
            if !done.insert(m.name.as_str()) {
                continue;
            }
            let mut params = vec![self_ty.clone()];
            params.extend(msig.param.iter().cloned());
            funcs.push(check_func(
                &env,
                &vtables,
                &mut diags,
                m,
                FuncSpec {
                    name: format!("{cname}.{}", m.name),
                    role: FuncRole::Method,
                    typed: !sig.dynamic,
                    params,
                    ret: msig.ret.clone(),
                },
            ));
        }
        if let (Some(fsig), Some(fdef)) = (&sig.field, &c.field) {
            let mut bc = BodyChecker::new(&env, &vtables, &mut diags, !sig.dynamic, fsig.ty.clone());
            let init = bc.expr(&fdef.default);
            let value = bc.return_value(init, "field default");
            funcs.push(ElabFunc {
                name: default_func_name(cname, &fsig.name),
                role: FuncRole::FieldDefault,
                params: Vec::new(),
                ret: fsig.ty.clone(),
                check_args: Vec::new(),
                nlocals: 0,
                local_types: Vec::new(),
                body: vec![ElabStmt::Return(value)],
            });
        }
    }

    let module = check_module(&env, &vtables, &mut diags, p);

    let classes = env
        .classes
        .iter()
        .map(|(name, sig)| ElabClass {
            name: name.clone(),
            parent: sig.parent.clone(),
            dynamic: sig.dynamic,
            fields: env
                .fields(name)
                .into_iter()
                .map(|f| FieldSlot {
                    name: f.name.clone(),
                    ty: f.ty.clone(),
                    default: default_func_name(&f.declaring, &f.name),
                })
                .collect(),
            vtable: vtables[name.as_str()].clone(),
        })
        .collect();

    if diags.is_empty() {
        Ok(ElabProgram {
            env,
            funcs,
            classes,
            module,
        })
    } else {
        diags.sort_by_key(|d| d.span);
        Err(diags)
    }
}

struct FuncSpec {
    name: String,
    role: FuncRole,
    typed: bool,
    params: Vec<EvalType>,
    ret: EvalType,
}

fn check_func(
    env: &TypeEnv,
    vtables: &IndexMap<String, Vec<VSlot>>,
    diags: &mut Vec<Diagnostic>,
    f: &FuncDef,
    spec: FuncSpec,
) -> ElabFunc {
    let mut bc = BodyChecker::new(env, vtables, diags, spec.typed, spec.ret.clone());
    let mut names: Vec<&str> = Vec::new();
    if spec.role == FuncRole::Method {
        names.push("self");
    }
    names.extend(f.param.iter().map(|p| p.name.as_str()));
    for (name, ty) in names.iter().zip(&spec.params) {
        bc.declare(name, ty.clone());
    }
    let (body, falls) = bc.block(&f.body);
    if falls {
        bc.check_fall_off(&spec.name, f.span);
    }
    // The receiver is never checked: dispatch already established its class.
    let first = usize::from(spec.role == FuncRole::Method);
    let check_args = spec
        .params
        .iter()
        .enumerate()
        .skip(first)
        .filter(|(_, t)| !t.is_dyn())
        .map(|(i, t)| (i, t.clone()))
        .collect();
    let local_types = bc.slot_types.clone();
    ElabFunc {
        name: spec.name,
        role: spec.role,
        params: spec.params,
        ret: spec.ret,
        check_args,
        nlocals: local_types.len(),
        local_types,
        body,
    }
}

fn check_module(
    env: &TypeEnv,
    vtables: &IndexMap<String, Vec<VSlot>>,
    diags: &mut Vec<Diagnostic>,
    p: &SurfaceProgram,
) -> Vec<ElabTop> {
    let mut out = Vec::new();
    let mut defined = HashSet::new();
    for s in &p.stmts {
        match s {
            TopStmt::Var(v) => {
                let mut bc = BodyChecker::new(env, vtables, diags, true, EvalType::Dyn);
                let init = bc.expr(&v.init);
                let Some(sig) = env.vars.get(&v.name) else { continue };
                if !defined.insert(v.name.as_str()) {
                    continue;
                }
                let init = bc.fit_value(init, &sig.ty, &format!("definition of `{}`", v.name));
                out.push(ElabTop::Def {
                    name: v.name.clone(),
                    ty: sig.ty.clone(),
                    init,
                });
            }
            TopStmt::Assign { name, value, span } => {
                let mut bc = BodyChecker::new(env, vtables, diags, true, EvalType::Dyn);
                bc.expr(value);
                diags.push(Diagnostic::new(
                    Code::ImmutableModuleVar,
                    *span,
                    format!("module variable `{name}` cannot be reassigned"),
                ));
            }
            TopStmt::Expr(e) => {
                let mut bc = BodyChecker::new(env, vtables, diags, true, EvalType::Dyn);
                let expr = bc.expr(e);
                let print = !matches!(e.kind, ExprKind::FieldSet(..) | ExprKind::SubscriptSet(..));
                out.push(ElabTop::Expr { expr, print });
            }
            TopStmt::Func(_) | TopStmt::Class(_) => {}
        }
    }
    out
}
