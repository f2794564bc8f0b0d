//! Typing and elaboration of expressions and statement bodies.

use indexmap::IndexMap;

use crate::diag::{Code, Diagnostic};
use crate::syntax::{Block, Expr, ExprKind, Span, Stmt, StmtKind};
use crate::types::{coerce, subtype, Coercion, EvalType, TypeEnv};

use super::elab::*;
use super::env::resolve_ann;

struct Local {
    name: String,
    slot: usize,
    decl: EvalType,
    /// Flow-sensitive type after narrowing.
    cur: EvalType,
}

/// How an argument or operand fit its expected type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fit {
    /// Related by `≤:`.
    Strict,
    /// Accepted through `Dyn`, possibly with a cast.
    Lenient,
    Bad,
}

pub(crate) struct BodyChecker<'a> {
    env: &'a TypeEnv,
    vtables: &'a IndexMap<String, Vec<VSlot>>,
    diags: &'a mut Vec<Diagnostic>,
    /// False inside untyped functions and methods of dynamic classes, where
    /// every call is dynamic.
    typed: bool,
    ret: EvalType,
    vars: Vec<Local>,
    scopes: Vec<usize>,
    pub(crate) slot_types: Vec<EvalType>,
}

type Flow = Vec<EvalType>;

impl<'a> BodyChecker<'a> {
    pub(crate) fn new(
        env: &'a TypeEnv,
        vtables: &'a IndexMap<String, Vec<VSlot>>,
        diags: &'a mut Vec<Diagnostic>,
        typed: bool,
        ret: EvalType,
    ) -> Self {
        BodyChecker {
            env,
            vtables,
            diags,
            typed,
            ret,
            vars: Vec::new(),
            scopes: Vec::new(),
            slot_types: Vec::new(),
        }
    }

    fn error(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    pub(crate) fn declare(&mut self, name: &str, ty: EvalType) -> usize {
        let slot = self.slot_types.len();
        self.slot_types.push(ty.clone());
        self.vars.push(Local {
            name: name.to_string(),
            slot,
            decl: ty.clone(),
            cur: ty,
        });
        slot
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.vars.iter().rposition(|l| l.name == name)
    }

    fn flow(&self) -> Flow {
        self.vars.iter().map(|l| l.cur.clone()).collect()
    }

    fn set_flow(&mut self, flow: &Flow) {
        for (l, t) in self.vars.iter_mut().zip(flow) {
            l.cur = t.clone();
        }
    }

    fn push_scope(&mut self) {
        self.scopes.push(self.vars.len());
    }

    fn pop_scope(&mut self) {
        let n = self.scopes.pop().expect("scope underflow");
        self.vars.truncate(n);
    }

    fn fit(&mut self, e: ElabExpr, expected: &EvalType, what: &str) -> (ElabExpr, Fit) {
        match coerce(self.env, &e.ty, expected) {
            Coercion::Accept => {
                let fit = if subtype(self.env, &e.ty, expected) {
                    Fit::Strict
                } else {
                    Fit::Lenient
                };
                (e, fit)
            }
            Coercion::InsertCast => {
                let span = e.span;
                let cast = ElabExpr {
                    kind: ElabKind::Cast(expected.clone(), Box::new(e)),
                    ty: expected.clone(),
                    span,
                };
                (cast, Fit::Lenient)
            }
            Coercion::Reject => {
                self.error(
                    Code::TypeMismatch,
                    e.span,
                    format!("{what}: expected {expected}, found {}", e.ty),
                );
                (e, Fit::Bad)
            }
        }
    }

    fn fit_only(&mut self, e: ElabExpr, expected: &EvalType, what: &str) -> ElabExpr {
        self.fit(e, expected, what).0
    }

    pub(crate) fn fit_value(&mut self, e: ElabExpr, expected: &EvalType, what: &str) -> ElabExpr {
        self.fit_only(e, expected, what)
    }

    pub(crate) fn return_value(&mut self, e: ElabExpr, what: &str) -> ElabExpr {
        let ret = self.ret.clone();
        self.fit_only(e, &ret, what)
    }

    fn args(&mut self, args: &[Expr]) -> Vec<ElabExpr> {
        args.iter().map(|a| self.expr(a)).collect()
    }

    /// Elaborates arguments against an optional single parameter, reporting
    /// arity errors. Returns the call kind for a typed callee.
    fn typed_args(
        &mut self,
        args: &[Expr],
        param: Option<&EvalType>,
        callee: &str,
        span: Span,
    ) -> (Vec<ElabExpr>, CallKind) {
        let expected = usize::from(param.is_some());
        let elab = self.args(args);
        if elab.len() != expected {
            self.error(
                Code::Arity,
                span,
                format!("`{callee}` takes {expected} argument(s), got {}", elab.len()),
            );
            return (elab, CallKind::StaticLenient);
        }
        let mut kind = CallKind::StaticStrict;
        let mut out = Vec::new();
        for (a, p) in elab.into_iter().zip(param) {
            let (a, fit) = self.fit(a, p, &format!("argument of `{callee}`"));
            if fit != Fit::Strict {
                kind = CallKind::StaticLenient;
            }
            out.push(a);
        }
        (out, kind)
    }

    fn mk(kind: ElabKind, ty: EvalType, span: Span) -> ElabExpr {
        ElabExpr { kind, ty, span }
    }

    fn placeholder(span: Span) -> ElabExpr {
        Self::mk(ElabKind::Const(Lit::None), EvalType::Dyn, span)
    }

    pub(crate) fn expr(&mut self, e: &Expr) -> ElabExpr {
        let span = e.span;
        let mk = |kind, ty| Self::mk(kind, ty, span);
        match &e.kind {
            ExprKind::NoneLit => mk(ElabKind::Const(Lit::None), EvalType::None),
            ExprKind::IntLit(i) => mk(ElabKind::Const(Lit::Int(*i)), EvalType::Int),
            ExprKind::BoolLit(b) => mk(ElabKind::Const(Lit::Bool(*b)), EvalType::Bool),
            ExprKind::StrLit(s) => mk(ElabKind::Const(Lit::Str(s.clone())), EvalType::Str),
            ExprKind::Var(x) => self.var(x, span),
            ExprKind::Call(name, args) => self.call(name, args, span),
            ExprKind::DictLit(entries) => {
                let entries = entries
                    .iter()
                    .map(|(k, v)| (self.expr(k), self.expr(v)))
                    .collect();
                mk(ElabKind::DictLit(entries), EvalType::Dict)
            }
            ExprKind::ChkDictLit(k, v, entries) => {
                let kt = resolve_ann(self.env, k, span, self.diags);
                let vt = resolve_ann(self.env, v, span, self.diags);
                let mut out = Vec::new();
                for (ke, ve) in entries {
                    let ke = self.expr(ke);
                    let ke = self.fit_only(ke, &kt, "checked dict key");
                    let ve = self.expr(ve);
                    let ve = self.fit_only(ve, &vt, "checked dict value");
                    out.push((ke, ve));
                }
                let ty = EvalType::checked_dict(kt.clone(), vt.clone());
                mk(
                    ElabKind::ChkDictLit {
                        key: kt,
                        val: vt,
                        entries: out,
                    },
                    ty,
                )
            }
            ExprKind::Subscript(d, k) => {
                let d = self.expr(d);
                let k = self.expr(k);
                let (k, ty) = match &d.ty {
                    EvalType::Dict | EvalType::Dyn => (k, EvalType::Dyn),
                    EvalType::CheckedDict(kt, vt) => {
                        let vt = (**vt).clone();
                        (self.fit_only(k, kt, "checked dict key"), vt)
                    }
                    other => {
                        let msg = format!("values of type {other} are not subscriptable");
                        self.error(Code::TypeMismatch, span, msg);
                        (k, EvalType::Dyn)
                    }
                };
                mk(
                    ElabKind::Subscript {
                        recv: Box::new(d),
                        key: Box::new(k),
                    },
                    ty,
                )
            }
            ExprKind::SubscriptSet(d, k, v) => {
                let d = self.expr(d);
                let k = self.expr(k);
                let v = self.expr(v);
                let (k, v, guarded) = match &d.ty {
                    EvalType::Dict => (k, v, false),
                    EvalType::Dyn => (k, v, true),
                    EvalType::CheckedDict(kt, vt) => {
                        let (kt, vt) = ((**kt).clone(), (**vt).clone());
                        let k = self.fit_only(k, &kt, "checked dict key");
                        let v = self.fit_only(v, &vt, "checked dict value");
                        (k, v, false)
                    }
                    other => {
                        let msg = format!("values of type {other} are not subscriptable");
                        self.error(Code::TypeMismatch, span, msg);
                        (k, v, true)
                    }
                };
                mk(
                    ElabKind::SubscriptSet {
                        recv: Box::new(d),
                        key: Box::new(k),
                        val: Box::new(v),
                        guarded,
                    },
                    EvalType::None,
                )
            }
            ExprKind::New(class, args) => self.new_object(class, args, span),
            ExprKind::FieldGet(o, x) => {
                let o = self.expr(o);
                match o.ty.clone() {
                    EvalType::Dyn => mk(
                        ElabKind::AttrGet {
                            recv: Box::new(o),
                            name: x.clone(),
                        },
                        EvalType::Dyn,
                    ),
                    EvalType::Class(c) => match self.field_slot(&c, x) {
                        Some((slot, ty)) => mk(
                            ElabKind::FieldGet {
                                recv: Box::new(o),
                                class: c,
                                slot,
                            },
                            ty,
                        ),
                        None => {
                            self.error(Code::UnknownMember, span, format!("`{c}` has no field `{x}`"));
                            Self::placeholder(span)
                        }
                    },
                    other => {
                        let msg = format!("values of type {other} have no field `{x}`");
                        self.error(Code::UnknownMember, span, msg);
                        Self::placeholder(span)
                    }
                }
            }
            ExprKind::FieldSet(o, x, v) => {
                let o = self.expr(o);
                let v = self.expr(v);
                match o.ty.clone() {
                    EvalType::Dyn => mk(
                        ElabKind::AttrSet {
                            recv: Box::new(o),
                            name: x.clone(),
                            val: Box::new(v),
                        },
                        EvalType::None,
                    ),
                    EvalType::Class(c) => match self.field_slot(&c, x) {
                        Some((slot, ty)) => {
                            let v = self.fit_only(v, &ty, &format!("field `{c}.{x}`"));
                            mk(
                                ElabKind::FieldSet {
                                    recv: Box::new(o),
                                    class: c,
                                    slot,
                                    val: Box::new(v),
                                },
                                EvalType::None,
                            )
                        }
                        None => {
                            self.error(Code::UnknownMember, span, format!("`{c}` has no field `{x}`"));
                            Self::placeholder(span)
                        }
                    },
                    other => {
                        let msg = format!("values of type {other} have no field `{x}`");
                        self.error(Code::UnknownMember, span, msg);
                        Self::placeholder(span)
                    }
                }
            }
            ExprKind::MethodCall(o, m, args) => self.method_call(o, m, args, span),
            ExprKind::IsNone(x) => {
                let x = self.expr(x);
                mk(ElabKind::IsNone(Box::new(x)), EvalType::Bool)
            }
            ExprKind::Eq(a, b) => {
                let a = self.expr(a);
                let b = self.expr(b);
                mk(ElabKind::Eq(Box::new(a), Box::new(b)), EvalType::Bool)
            }
            ExprKind::Not(x) => {
                let x = self.expr(x);
                mk(ElabKind::Not(Box::new(x)), EvalType::Bool)
            }
        }
    }

    fn var(&mut self, x: &str, span: Span) -> ElabExpr {
        if let Some(i) = self.lookup(x) {
            let l = &self.vars[i];
            return Self::mk(ElabKind::Local(l.slot), l.cur.clone(), span);
        }
        if let Some(v) = self.env.vars.get(x) {
            return Self::mk(ElabKind::Global(x.to_string()), v.ty.clone(), span);
        }
        let what = if self.env.funcs.contains_key(x) {
            "function"
        } else {
            "class"
        };
        self.error(
            Code::UnknownMember,
            span,
            format!("`{x}` is a {what}, not a value"),
        );
        Self::placeholder(span)
    }

    fn call(&mut self, name: &str, args: &[Expr], span: Span) -> ElabExpr {
        let binding = self
            .lookup(name)
            .map(|i| self.vars[i].cur.clone())
            .or_else(|| self.env.vars.get(name).map(|v| v.ty.clone()));
        if let Some(ty) = binding {
            if !ty.is_dyn() {
                self.error(
                    Code::TypeMismatch,
                    span,
                    format!("`{name}` has type {ty} and is not callable"),
                );
            }
            let callee = self.var(name, span);
            let args = self.args(args);
            return Self::mk(
                ElabKind::CallValue {
                    callee: Box::new(callee),
                    args,
                },
                EvalType::Dyn,
                span,
            );
        }
        let Some(sig) = self.env.funcs.get(name).cloned() else {
            self.error(Code::UnknownMember, span, format!("unknown function `{name}`"));
            self.args(args);
            return Self::placeholder(span);
        };
        if !self.typed || !sig.typed {
            if self.typed && args.len() != sig.arity() {
                self.error(
                    Code::Arity,
                    span,
                    format!("`{name}` takes {} argument(s), got {}", sig.arity(), args.len()),
                );
            }
            let args = self.args(args);
            return Self::mk(
                ElabKind::CallByName {
                    func: name.to_string(),
                    args,
                },
                EvalType::Dyn,
                span,
            );
        }
        let (args, kind) = self.typed_args(args, sig.param.as_ref(), name, span);
        Self::mk(
            ElabKind::CallFunc {
                func: name.to_string(),
                kind,
                args,
            },
            sig.ret,
            span,
        )
    }

    fn field_slot(&self, class: &str, field: &str) -> Option<(usize, EvalType)> {
        self.env
            .fields(class)
            .iter()
            .position(|f| f.name == field)
            .map(|i| (i, self.env.fields(class)[i].ty.clone()))
    }

    fn new_object(&mut self, class: &str, args: &[Expr], span: Span) -> ElabExpr {
        if !self.env.classes.contains_key(class) {
            self.error(Code::UnknownClass, span, format!("unknown class `{class}`"));
            self.args(args);
            return Self::placeholder(span);
        }
        let last_field = self.env.fields(class).last().map(|f| f.ty.clone());
        let mut elab = self.args(args);
        let arg = match (elab.len(), last_field) {
            (0, _) => None,
            (1, Some(ty)) => {
                let a = elab.pop().unwrap();
                Some(Box::new(self.fit_only(a, &ty, &format!("initial value of `{class}`"))))
            }
            (1, None) => {
                self.error(Code::Arity, span, format!("`{class}` has no field to initialize"));
                None
            }
            (n, _) => {
                self.error(
                    Code::Arity,
                    span,
                    format!("`{class}` takes at most 1 argument, got {n}"),
                );
                None
            }
        };
        Self::mk(
            ElabKind::New {
                class: class.to_string(),
                arg,
            },
            EvalType::class(class),
            span,
        )
    }

    fn method_call(&mut self, o: &Expr, m: &str, args: &[Expr], span: Span) -> ElabExpr {
        let o = self.expr(o);
        let dynamic = |this: &mut Self, o: ElabExpr| {
            let args = this.args(args);
            Self::mk(
                ElabKind::MethodCallDyn {
                    recv: Box::new(o),
                    name: m.to_string(),
                    args,
                },
                EvalType::Dyn,
                span,
            )
        };
        match o.ty.clone() {
            EvalType::Dyn => dynamic(self, o),
            _ if !self.typed => dynamic(self, o),
            EvalType::Class(c) => {
                let Some(sig) = self.env.lookup_method(&c, m).cloned() else {
                    self.error(Code::UnknownMember, span, format!("`{c}` has no method `{m}`"));
                    self.args(args);
                    return Self::placeholder(span);
                };
                let slot = self.vtables[c.as_str()]
                    .iter()
                    .position(|s| s.name == m)
                    .expect("visible method has a slot");
                let (args, mut kind) =
                    self.typed_args(args, sig.param.as_ref(), &format!("{c}.{m}"), span);
                if self.env.classes[sig.declaring.as_str()].dynamic {
                    kind = CallKind::StaticLenient;
                }
                Self::mk(
                    ElabKind::MethodCall {
                        recv: Box::new(o),
                        class: c,
                        slot,
                        kind,
                        args,
                    },
                    sig.ret,
                    span,
                )
            }
            other => {
                self.error(
                    Code::UnknownMember,
                    span,
                    format!("values of type {other} have no method `{m}`"),
                );
                self.args(args);
                Self::placeholder(span)
            }
        }
    }

    /// Refines the flow for the two branches of `cond`.
    fn narrow(&self, cond: &Expr) -> (Flow, Flow) {
        let base = self.flow();
        match &cond.kind {
            ExprKind::IsNone(inner) => {
                if let ExprKind::Var(x) = &inner.kind {
                    if let Some(i) = self.lookup(x) {
                        if let EvalType::Optional(t) = &self.vars[i].cur {
                            let mut then = base.clone();
                            let mut els = base;
                            then[i] = EvalType::None;
                            els[i] = (**t).clone();
                            return (then, els);
                        }
                    }
                }
                (base.clone(), base)
            }
            ExprKind::Not(inner) => {
                let (t, e) = self.narrow(inner);
                (e, t)
            }
            _ => (base.clone(), base),
        }
    }

    /// Checks a block in a fresh scope. Returns the elaborated statements and
    /// whether control can reach the end of the block.
    pub(crate) fn block(&mut self, b: &Block) -> (Vec<ElabStmt>, bool) {
        self.push_scope();
        let mut out = Vec::new();
        let mut falls = true;
        for s in b {
            let (elab, f) = self.stmt(s);
            out.extend(elab);
            falls &= f;
        }
        self.pop_scope();
        (out, falls)
    }

    fn stmt(&mut self, s: &Stmt) -> (Option<ElabStmt>, bool) {
        let span = s.span;
        match &s.kind {
            StmtKind::LocalDef { name, ann, init } => {
                if self.lookup(name).is_some() {
                    self.error(
                        Code::DupName,
                        span,
                        format!("local `{name}` is already defined"),
                    );
                }
                let decl = match ann {
                    Some(a) => resolve_ann(self.env, a, span, self.diags),
                    None => EvalType::Dyn,
                };
                let init = self.expr(init);
                let value = self.fit_only(init, &decl, &format!("definition of `{name}`"));
                let slot = self.declare(name, decl);
                (Some(ElabStmt::Store { slot, value }), true)
            }
            StmtKind::Assign { name, value } => {
                let value = self.expr(value);
                match self.lookup(name) {
                    Some(i) => {
                        let decl = self.vars[i].decl.clone();
                        let value = self.fit_only(value, &decl, &format!("assignment to `{name}`"));
                        self.vars[i].cur = decl;
                        let slot = self.vars[i].slot;
                        (Some(ElabStmt::Store { slot, value }), true)
                    }
                    None => {
                        self.error(
                            Code::ImmutableModuleVar,
                            span,
                            format!("module variable `{name}` cannot be reassigned"),
                        );
                        (None, true)
                    }
                }
            }
            StmtKind::If { cond, then, els } => {
                let c = self.expr(cond);
                let (then_flow, else_flow) = self.narrow(cond);
                self.set_flow(&then_flow);
                let (t, t_falls) = self.block(then);
                let t_flow = self.flow();
                self.set_flow(&else_flow);
                let (e, e_falls) = self.block(els);
                let e_flow = self.flow();
                let joined = match (t_falls, e_falls) {
                    (true, false) => t_flow,
                    (false, true) => e_flow,
                    _ => t_flow
                        .into_iter()
                        .zip(e_flow)
                        .zip(&self.vars)
                        .map(|((a, b), l)| if a == b { a } else { l.decl.clone() })
                        .collect(),
                };
                self.set_flow(&joined);
                (
                    Some(ElabStmt::If {
                        cond: c,
                        then: t,
                        els: e,
                    }),
                    t_falls || e_falls,
                )
            }
            StmtKind::While { cond, body } => {
                // Anything the body assigns may change between iterations.
                let mut assigned = Vec::new();
                assigned_names(body, &mut assigned);
                for name in &assigned {
                    if let Some(i) = self.lookup(name) {
                        self.vars[i].cur = self.vars[i].decl.clone();
                    }
                }
                let head = self.flow();
                let c = self.expr(cond);
                let (body_flow, exit_flow) = self.narrow(cond);
                self.set_flow(&body_flow);
                let (b, _) = self.block(body);
                let breaks = has_break(body);
                self.set_flow(if breaks { &head } else { &exit_flow });
                let infinite = matches!(cond.kind, ExprKind::BoolLit(true));
                (Some(ElabStmt::While { cond: c, body: b }), breaks || !infinite)
            }
            StmtKind::Break => (Some(ElabStmt::Break), false),
            StmtKind::Pass => (None, true),
            StmtKind::Return(value) => {
                let e = match value {
                    Some(v) => self.expr(v),
                    None => Self::mk(ElabKind::Const(Lit::None), EvalType::None, span),
                };
                let ret = self.ret.clone();
                let e = self.fit_only(e, &ret, "return value");
                (Some(ElabStmt::Return(e)), false)
            }
            StmtKind::Expr(e) => (Some(ElabStmt::Expr(self.expr(e))), true),
        }
    }

    /// Reports a body whose end is reachable when the return type rejects
    /// `None`.
    pub(crate) fn check_fall_off(&mut self, name: &str, span: Span) {
        if coerce(self.env, &EvalType::None, &self.ret) == Coercion::Reject {
            let ret = self.ret.clone();
            self.error(
                Code::ImplicitNoneReturn,
                span,
                format!("`{name}` may reach the end of its body and return None, but its return type is {ret}"),
            );
        }
    }
}

fn assigned_names(b: &Block, out: &mut Vec<String>) {
    for s in b {
        match &s.kind {
            StmtKind::Assign { name, .. } => out.push(name.clone()),
            StmtKind::If { then, els, .. } => {
                assigned_names(then, out);
                assigned_names(els, out);
            }
            StmtKind::While { body, .. } => assigned_names(body, out),
            _ => {}
        }
    }
}

/// True when a `break` in `b` targets the loop whose body is `b`.
fn has_break(b: &Block) -> bool {
    b.iter().any(|s| match &s.kind {
        StmtKind::Break => true,
        StmtKind::If { then, els, .. } => has_break(then) || has_break(els),
        _ => false,
    })
}
